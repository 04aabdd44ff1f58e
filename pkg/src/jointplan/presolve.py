"""Node presolve: substitute fixed columns, propagate bounds, check the linear part.

Given node bounds, the presolve

1. substitutes columns with ``lo == hi`` into every term,
2. drops rows that became constant (or reports the node infeasible),
3. turns singleton linear rows into bound changes (rounded for binaries),
4. strengthens coefficients of pure-binary knapsack rows and drops
   rows that are redundant over the bounds,
5. repeats until nothing changes, and finally
6. solves the LP made of the remaining linear rows. Its infeasibility
   proves the node infeasible; its optimum is a valid upper bound.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .kernels import _reference
from .nlp import ConstraintSystem
from .system import EQ, LE, Tape

PRESOLVE_TOL = 1e-9
MAX_PASSES = 50


@dataclass
class ReducedProblem:
    """A node problem over its free columns only.

    ``cols`` maps reduced columns to system columns and ``rows`` reduced rows
    to system rows. ``x_fixed`` holds the values of all fixed columns (and
    zeros elsewhere); ``obj_const`` is their objective contribution.
    """

    system: ConstraintSystem
    cols: np.ndarray
    rows: np.ndarray
    tape: Tape
    kind: np.ndarray
    relaxed: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    grad: np.ndarray
    obj_const: float
    x_fixed: np.ndarray
    lp_bound: float = np.inf
    lp_point: Optional[np.ndarray] = None
    key: str = ""

    @property
    def n(self) -> int:
        return len(self.cols)

    @property
    def m(self) -> int:
        return self.tape.m

    def expand(self, z: np.ndarray) -> np.ndarray:
        """Full-length point from a reduced one."""
        x = self.x_fixed.copy()
        x[self.cols] = z
        return x

    def restrict(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=float)[self.cols]

    def smooth_part(self) -> tuple[Tape, np.ndarray]:
        """Tape and row kinds without the relaxed rows, for the continuous solver."""
        keep = ~self.relaxed
        return self.tape.select(keep), self.kind[keep]


@dataclass
class PresolveResult:
    feasible: bool
    problem: Optional[ReducedProblem] = None
    reason: str = ""
    lo: Optional[np.ndarray] = None
    hi: Optional[np.ndarray] = None
    stats: dict = field(default_factory=dict)


def _collapsed(lo, hi):
    return hi - lo <= PRESOLVE_TOL * np.maximum(1.0, np.abs(lo))


class _Rows:
    """Mutable per-row term lists used during presolve."""

    def __init__(self, system: ConstraintSystem, use_relaxed: bool):
        t = system.tape
        m = t.m
        self.const = t.const.astype(float).copy()
        self.lin = [dict() for _ in range(m)]
        self.bil = [dict() for _ in range(m)]
        self.hw = [dict() for _ in range(m)]
        for r, c, v in zip(t.lin_row, t.lin_col, t.lin_coef):
            self.lin[r][int(c)] = self.lin[r].get(int(c), 0.0) + v
        for r, i, j, v in zip(t.bil_row, t.bil_i, t.bil_j, t.bil_coef):
            key = (int(i), int(j))
            self.bil[r][key] = self.bil[r].get(key, 0.0) + v
        for r, c, v in zip(t.hw_row, t.hw_col, t.hw_coef):
            self.hw[r][int(c)] = self.hw[r].get(int(c), 0.0) + v
        self.kind = system.kind.copy()
        self.relaxed = system.relaxed.copy()
        self.alive = np.ones(m, dtype=bool)
        self.use_relaxed = use_relaxed

    def substitute(self, r: int, col: int, val: float) -> None:
        lin, bil, hw = self.lin[r], self.bil[r], self.hw[r]
        if col in lin:
            self.const[r] += lin.pop(col) * val
        if col in hw:
            self.const[r] += hw.pop(col) * float(_reference.hw_value(np.array(val), 0.0))
        for (i, j) in [k for k in bil if col in k]:
            coef = bil.pop((i, j))
            if i == j:
                self.const[r] += coef * val * val
            else:
                other = j if i == col else i
                lin[other] = lin.get(other, 0.0) + coef * val
        for c in [c for c, v in lin.items() if v == 0.0]:
            del lin[c]

    def empty(self, r: int) -> bool:
        return not (self.lin[r] or self.bil[r] or self.hw[r])

    def linear(self, r: int) -> bool:
        return not (self.bil[r] or self.hw[r])


def _activity(lin: dict, lo, hi) -> tuple[float, float]:
    amin = amax = 0.0
    for c, a in lin.items():
        if a > 0:
            amin += a * lo[c]
            amax += a * hi[c]
        else:
            amin += a * hi[c]
            amax += a * lo[c]
    return amin, amax


def presolve(system: ConstraintSystem, lo=None, hi=None, *, lp: bool = True,
             tol: float = 1e-7) -> PresolveResult:
    """Reduce the node given by ``lo``/``hi`` (defaults: system bounds)."""
    lo = np.array(system.lo if lo is None else lo, dtype=float)
    hi = np.array(system.hi if hi is None else hi, dtype=float)
    binary = system.binary
    rows = _Rows(system, use_relaxed=True)
    col_rows: list[set] = [set() for _ in range(system.n)]
    for r in range(system.m):
        for c in rows.lin[r]:
            col_rows[c].add(r)
        for (i, j) in rows.bil[r]:
            col_rows[i].add(r)
            col_rows[j].add(r)
        for c in rows.hw[r]:
            col_rows[c].add(r)
    substituted = np.zeros(system.n, dtype=bool)
    dirty = set(range(system.m))

    def fail(reason):
        return PresolveResult(False, reason=reason, lo=lo, hi=hi)

    for _ in range(MAX_PASSES):
        # snap binaries and fix collapsed columns
        lo[binary] = np.ceil(lo[binary] - 1e-6)
        hi[binary] = np.floor(hi[binary] + 1e-6)
        cross = lo > hi + tol
        if cross.any():
            j = int(np.flatnonzero(cross)[0])
            return fail(f"bounds cross on {system.space.bound_tag[j]}")
        hi = np.maximum(hi, lo)
        newly = np.flatnonzero(_collapsed(lo, hi) & ~substituted)
        for c in newly:
            val = lo[c] if binary[c] else 0.5 * (lo[c] + hi[c])
            lo[c] = hi[c] = val
            substituted[c] = True
            for r in col_rows[c]:
                if rows.alive[r]:
                    rows.substitute(r, int(c), val)
                    dirty.add(r)
        if not dirty:
            break
        touched: set = set()
        for r in sorted(dirty):
            if not rows.alive[r]:
                continue
            if rows.empty(r):
                v = rows.const[r]
                bad = abs(v) > tol if rows.kind[r] == EQ else v > tol
                if bad:
                    return fail(f"{system.rows[r].tag} violated by fixings")
                rows.alive[r] = False
                continue
            if rows.relaxed[r] or not rows.linear(r):
                continue
            lin = rows.lin[r]
            amin, amax = _activity(lin, lo, hi)
            c0 = rows.const[r]
            if amin + c0 > tol * max(1.0, abs(c0)):
                return fail(f"{system.rows[r].tag} infeasible over bounds")
            if rows.kind[r] == EQ and amax + c0 < -tol * max(1.0, abs(c0)):
                return fail(f"{system.rows[r].tag} infeasible over bounds")
            if rows.kind[r] == LE and amax + c0 <= 0.0:
                rows.alive[r] = False  # redundant
                continue
            if len(lin) == 1:
                (c, a), = lin.items()
                v = -c0 / a
                if rows.kind[r] == EQ:
                    nlo, nhi = v, v
                elif a > 0:
                    nlo, nhi = lo[c], v
                else:
                    nlo, nhi = v, hi[c]
                if binary[c]:
                    nlo, nhi = np.ceil(nlo - 1e-6), np.floor(nhi + 1e-6)
                if nlo > hi[c] + tol or nhi < lo[c] - tol:
                    return fail(f"{system.rows[r].tag} infeasible over bounds")
                if nlo > lo[c]:
                    lo[c] = min(nlo, hi[c])
                    touched.add(c)
                if nhi < hi[c]:
                    hi[c] = max(nhi, lo[c])
                    touched.add(c)
                rows.alive[r] = False
                continue
            # bound propagation on every column of a linear row, both senses for equalities
            for sign in ((1.0, -1.0) if rows.kind[r] == EQ else (1.0,)):
                touched.update(_propagate(lin, sign * c0, sign, lo, hi, binary))
            if rows.kind[r] == LE and all(binary[c] for c in lin):
                _tighten_knapsack(rows, r, lo, hi)
        dirty = {r for c in touched for r in col_rows[c] if rows.alive[r]}
        if not dirty and not np.any(_collapsed(lo, hi) & ~substituted):
            break
    return _finish(system, rows, lo, hi, substituted, lp, tol)


def _propagate(lin: dict, c0: float, sign: float, lo, hi, binary) -> list:
    """Tighten bounds from ``sign * (lin . x) + c0 <= 0``; returns the changed columns.

    Continuous bounds move only by a meaningful margin so that the fixpoint
    iteration cannot creep.
    """
    amin = 0.0
    for c, a in lin.items():
        a = sign * a
        amin += a * lo[c] if a > 0 else a * hi[c]
    if not np.isfinite(amin):
        return []
    changed = []
    for c, a in lin.items():
        a = sign * a
        rest = amin - (a * lo[c] if a > 0 else a * hi[c])
        v = (-c0 - rest) / a
        if binary[c]:
            margin = 0.5
        else:
            margin = max(1e-3 * (hi[c] - lo[c]), 1e-9 * max(1.0, abs(v)))
        if a > 0:
            if binary[c]:
                v = np.floor(v + 1e-6)
            if v < hi[c] - margin or (v < hi[c] and v <= lo[c] + 1e-9 * max(1.0, abs(lo[c]))):
                hi[c] = max(v, lo[c])
                changed.append(c)
        else:
            if binary[c]:
                v = np.ceil(v - 1e-6)
            if v > lo[c] + margin or (v > lo[c] and v >= hi[c] - 1e-9 * max(1.0, abs(hi[c]))):
                lo[c] = min(v, hi[c])
                changed.append(c)
    return changed


def _tighten_knapsack(rows: _Rows, r: int, lo, hi) -> None:
    """Coefficient strengthening for ``sum a_j x_j <= b`` over binaries, then scale to max 1."""
    lin = rows.lin[r]
    if any(lo[c] == hi[c] for c in lin):
        return  # wait until fixed columns have been substituted
    b = -rows.const[r]
    for c in sorted(lin):
        a = lin[c]
        _, amax = _activity(lin, lo, hi)
        if a > 0:
            d = b - (amax - a)
            if d > 1e-12:
                lin[c] = a - d
                b -= d
    scale = max(abs(v) for v in lin.values()) if lin else 1.0
    if scale > 0:
        for c in list(lin):
            lin[c] = round(lin[c] / scale, 12)
            if lin[c] == 0.0:
                del lin[c]
        b = round(b / scale, 12)
    rows.const[r] = -b


def _finish(system, rows: _Rows, lo, hi, substituted, lp, tol) -> PresolveResult:
    free = np.flatnonzero(~substituted)
    alive = np.flatnonzero(rows.alive)
    remap = -np.ones(system.n, dtype=np.intp)
    remap[free] = np.arange(len(free))
    lr, lc, lv, br, bi, bj, bv, hr, hc, hv = ([] for _ in range(10))
    for new, r in enumerate(alive):
        for c, v in sorted(rows.lin[r].items()):
            lr.append(new); lc.append(remap[c]); lv.append(v)
        for (i, j), v in sorted(rows.bil[r].items()):
            br.append(new); bi.append(remap[i]); bj.append(remap[j]); bv.append(v)
        for c, v in sorted(rows.hw[r].items()):
            hr.append(new); hc.append(remap[c]); hv.append(v)
    ia = lambda v: np.asarray(v, dtype=np.intp)  # noqa: E731
    fa = lambda v: np.asarray(v, dtype=float)  # noqa: E731
    tape = Tape(len(alive), fa(rows.const[alive]), ia(lr), ia(lc), fa(lv), ia(br), ia(bi), ia(bj), fa(bv),
                ia(hr), ia(hc), fa(hv))
    x_fixed = np.where(substituted, lo, 0.0)
    prob = ReducedProblem(
        system=system, cols=free, rows=alive, tape=tape, kind=rows.kind[alive].copy(),
        relaxed=rows.relaxed[alive].copy(), lo=lo[free].copy(), hi=hi[free].copy(),
        grad=system.grad[free].copy(), obj_const=float(system.grad @ x_fixed), x_fixed=x_fixed,
    )
    prob.key = _key(prob)
    res = PresolveResult(True, prob, lo=lo, hi=hi,
                         stats={"fixed": int(substituted.sum()), "rows": len(alive), "cols": len(free)})
    if lp:
        ok, reason = _lp_check(prob, tol)
        if not ok:
            return PresolveResult(False, reason=reason, lo=lo, hi=hi)
    return res


def _key(prob: ReducedProblem) -> str:
    h = hashlib.sha1()
    h.update(prob.tape.fingerprint().encode())
    for arr in (prob.cols, prob.rows, prob.kind, prob.relaxed, np.round(prob.tape.const, 12),
                np.round(prob.lo, 12), np.round(prob.hi, 12), prob.grad):
        h.update(np.ascontiguousarray(arr).tobytes())
    return h.hexdigest()


def _lp_check(prob: ReducedProblem, tol: float) -> tuple[bool, str]:
    """LP over the linear rows: infeasibility proof and a valid upper bound."""
    t = prob.tape
    nonlin = np.zeros(t.m, dtype=bool)
    nonlin[t.bil_row] = True
    nonlin[t.hw_row] = True
    use = ~nonlin & ~prob.relaxed
    if prob.n == 0:
        prob.lp_bound = prob.obj_const
        prob.lp_point = np.zeros(0)
        return True, ""
    sel = use[t.lin_row]
    idx = np.flatnonzero(use)
    pos = -np.ones(t.m, dtype=np.intp)
    pos[idx] = np.arange(len(idx))
    import scipy.sparse as sp

    a = sp.coo_matrix((t.lin_coef[sel], (pos[t.lin_row[sel]], t.lin_col[sel])), shape=(len(idx), prob.n)).tocsr()
    b = -t.const[idx]
    eq = prob.kind[idx] == EQ
    res = linprog(
        -prob.grad,
        A_ub=a[~eq] if (~eq).any() else None, b_ub=b[~eq] if (~eq).any() else None,
        A_eq=a[eq] if eq.any() else None, b_eq=b[eq] if eq.any() else None,
        bounds=np.column_stack([prob.lo, prob.hi]), method="highs",
    )
    if res.status == 2:
        return False, "linear relaxation infeasible"
    if res.status == 0:
        prob.lp_bound = float(-res.fun) + prob.obj_const
        prob.lp_point = np.clip(res.x, prob.lo, prob.hi)
    return True, ""
