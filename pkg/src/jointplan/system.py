"""Variable indexing and the term-tape representation of constraint rows.

Every residual in the model is a sum of

* a constant,
* linear terms ``coef * x[i]``,
* bilinear terms ``coef * x[i] * x[j]`` (``i == j`` gives squares),
* Hazen-Williams terms ``coef * x[i] * |x[i]|**0.852``.

Rows are either equalities (``r(x) == 0``) or inequalities (``r(x) <= 0``).
The flat arrays in :class:`Tape` are what the evaluation kernels consume.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

EQ, LE = 0, 1

# variable roles; the order is also the branching priority
EXPANSION = "expansion"
STATUS_STORAGE = "status-storage"
STATUS_PUMP = "status-pump"
STATUS_GENERATOR = "status-generator"
CONTINUOUS = "continuous"
BRANCH_PRIORITY = {EXPANSION: 0, STATUS_STORAGE: 1, STATUS_PUMP: 2, STATUS_GENERATOR: 3}


def var_label(name: tuple) -> str:
    return ":".join("" if p is None else str(p) for p in name)


class VariableSpace:
    """Bijective map between variable names and columns, with bounds."""

    def __init__(self) -> None:
        self.names: list[tuple] = []
        self._index: dict[tuple, int] = {}
        self.lo: list[float] = []
        self.hi: list[float] = []
        self.binary: list[bool] = []
        self.role: list[str] = []
        self.bound_tag: list[str] = []
        # dominance metadata: a status binary that only relaxes constraints
        # when raised can be set equal to its gate (expansion column or 1)
        self.dominant: list[bool] = []
        self.gate: list[int] = []

    def __len__(self) -> int:
        return len(self.names)

    def __contains__(self, name: tuple) -> bool:
        return name in self._index

    def __getitem__(self, name: tuple) -> int:
        return self._index[name]

    def get(self, name: tuple) -> Optional[int]:
        return self._index.get(name)

    def add(self, name: tuple, lo: float, hi: float, *, binary: bool = False,
            role: str = CONTINUOUS, tag: str = "variable domain") -> int:
        if name in self._index:
            raise ValueError(f"duplicate variable {name}")
        if binary:
            lo, hi = max(lo, 0.0), min(hi, 1.0)
        col = len(self.names)
        self.names.append(name)
        self._index[name] = col
        self.lo.append(float(lo))
        self.hi.append(float(hi))
        self.binary.append(binary)
        self.role.append(role if binary else CONTINUOUS)
        self.bound_tag.append(tag)
        self.dominant.append(False)
        self.gate.append(-1)
        return col

    def tighten(self, col: int, lo: float, hi: float, tag: str) -> None:
        changed = False
        if lo > self.lo[col]:
            self.lo[col] = float(lo)
            changed = True
        if hi < self.hi[col]:
            self.hi[col] = float(hi)
            changed = True
        if changed:
            self.bound_tag[col] = tag

    def labels(self) -> list[str]:
        return [var_label(n) for n in self.names]


@dataclass
class Row:
    kind: int
    tag: str
    const: float = 0.0
    lin: list[tuple[int, float]] = field(default_factory=list)
    bil: list[tuple[int, int, float]] = field(default_factory=list)
    hw: list[tuple[int, float]] = field(default_factory=list)
    # rows the continuous subsolver skips; still enforced by the checker
    relaxed: bool = False

    def add_lin(self, col: int, coef: float) -> "Row":
        if coef != 0.0:
            self.lin.append((col, float(coef)))
        return self

    def add_bil(self, i: int, j: int, coef: float) -> "Row":
        if coef != 0.0:
            self.bil.append((min(i, j), max(i, j), float(coef)))
        return self

    def add_hw(self, col: int, coef: float) -> "Row":
        if coef != 0.0:
            self.hw.append((col, float(coef)))
        return self


@dataclass(frozen=True)
class Bound:
    col: int
    lo: float
    hi: float
    tag: str


@dataclass
class ConstraintSet:
    rows: list[Row] = field(default_factory=list)
    bounds: list[Bound] = field(default_factory=list)

    def __iadd__(self, other: "ConstraintSet") -> "ConstraintSet":
        self.rows.extend(other.rows)
        self.bounds.extend(other.bounds)
        return self

    def __len__(self) -> int:
        return len(self.rows) + len(self.bounds)

    def tags(self) -> list[str]:
        return [r.tag for r in self.rows] + [b.tag for b in self.bounds]


@dataclass(frozen=True)
class Tape:
    """Flat term arrays for ``m`` rows."""

    m: int
    const: np.ndarray
    lin_row: np.ndarray
    lin_col: np.ndarray
    lin_coef: np.ndarray
    bil_row: np.ndarray
    bil_i: np.ndarray
    bil_j: np.ndarray
    bil_coef: np.ndarray
    hw_row: np.ndarray
    hw_col: np.ndarray
    hw_coef: np.ndarray

    @classmethod
    def from_rows(cls, rows: Iterable[Row]) -> "Tape":
        rows = list(rows)
        lr, lc, lv, br, bi, bj, bv, hr, hc, hv = ([] for _ in range(10))
        for r, row in enumerate(rows):
            for col, coef in row.lin:
                lr.append(r); lc.append(col); lv.append(coef)
            for i, j, coef in row.bil:
                br.append(r); bi.append(i); bj.append(j); bv.append(coef)
            for col, coef in row.hw:
                hr.append(r); hc.append(col); hv.append(coef)
        ia = lambda v: np.asarray(v, dtype=np.intp)  # noqa: E731
        fa = lambda v: np.asarray(v, dtype=float)  # noqa: E731
        return cls(
            len(rows), fa([row.const for row in rows]), ia(lr), ia(lc), fa(lv),
            ia(br), ia(bi), ia(bj), fa(bv), ia(hr), ia(hc), fa(hv),
        )

    @property
    def n_jac(self) -> int:
        """Number of Jacobian contributions (before duplicate summation)."""
        return len(self.lin_row) + 2 * len(self.bil_row) + len(self.hw_row)

    def jac_rows(self) -> np.ndarray:
        return np.concatenate([self.lin_row, self.bil_row, self.bil_row, self.hw_row])

    def jac_cols(self) -> np.ndarray:
        return np.concatenate([self.lin_col, self.bil_i, self.bil_j, self.hw_col])

    def select(self, keep: np.ndarray) -> "Tape":
        """Tape over the rows where ``keep`` is true, renumbered in order."""
        keep = np.asarray(keep, dtype=bool)
        new = np.cumsum(keep) - 1

        def part(rows, *arrs):
            mask = keep[rows]
            return (new[rows[mask]].astype(np.intp),) + tuple(a[mask] for a in arrs)

        lin = part(self.lin_row, self.lin_col, self.lin_coef)
        bil = part(self.bil_row, self.bil_i, self.bil_j, self.bil_coef)
        hw = part(self.hw_row, self.hw_col, self.hw_coef)
        return Tape(int(keep.sum()), self.const[keep], *lin, *bil, *hw)

    def fingerprint(self) -> str:
        h = hashlib.sha1()
        for arr in (self.lin_row, self.lin_col, self.lin_coef, self.bil_row, self.bil_i,
                    self.bil_j, self.bil_coef, self.hw_row, self.hw_col, self.hw_coef):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()
