"""Primal-dual interior-point method for the smooth node problems.

Solves ``max g.x`` subject to ``r_E(x) = 0``, ``r_I(x) <= 0`` and bounds
``lo <= x <= hi`` where every residual comes from a term tape. Inequalities
get slacks ``r_I + s = 0, s >= 0``. Each iteration factors the sparse KKT
matrix::

    [ W + Sigma_x + dw I        J^T                  ]
    [ J                 -diag(0 | 1/Sigma_s) - dc I  ]

with the exact Lagrangian Hessian ``W`` from the tape. Without inertia
information the step is kept only if it has positive curvature on the
primal part; otherwise ``dw`` grows. Steps are globalised by a filter line
search with one second-order correction. When the line search stalls, an
elastic feasibility problem (minimise the l1 constraint violation near the
current point) is solved with the same machinery to restore progress.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import math

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from . import kernels
from .system import EQ, Tape

OPTIMAL, INFEASIBLE, ITERATION_LIMIT, FAILED = "optimal", "infeasible", "iteration-limit", "numerical-failure"
RESTORED = "restored"


@dataclass
class IPMOptions:
    tol: float = 1e-8
    constr_tol: float = 1e-9
    max_iter: int = 500
    mu_init: float = 1e-1
    delta: float = 1e-4  # Hazen-Williams smoothing
    bound_push: float = 1e-2
    kappa_sigma: float = 1e10
    acceptable_tol: float = 1e-6
    acceptable_iter: int = 10
    verbose: bool = False


@dataclass
class IPMResult:
    status: str
    x: np.ndarray
    objective: float
    iterations: int
    constr_violation: float
    dual_infeasibility: float
    multipliers: Optional[np.ndarray] = None

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


# --------------------------------------------------------------------------
# problem cores: residuals, derivatives and objective in the scaled space


class _TapeCore:
    """Row- and column-scaled view of a tape problem (minimisation form)."""

    def __init__(self, tape: Tape, kind, grad, lo, hi, x0, delta):
        self.tape = tape
        self.delta = delta
        self.dcol = np.maximum(1.0, np.maximum(np.abs(lo), np.abs(hi)))
        self.lo, self.hi = lo / self.dcol, hi / self.dcol
        self.n, self.m = len(lo), tape.m
        self.kind = kind
        jr, jc = tape.jac_rows(), tape.jac_cols()
        jv = np.abs(kernels.jac_contrib(tape, x0, delta)) * self.dcol[jc]
        rmax = np.zeros(self.m)
        np.maximum.at(rmax, jr, jv)
        self.rscale = np.minimum(1.0, 100.0 / np.maximum(rmax, 1e-12))
        gmax = np.abs(grad * self.dcol).max(initial=0.0)
        self.oscale = min(1.0, 100.0 / gmax) if gmax > 0 else 1.0
        self.c = -grad * self.dcol * self.oscale
        self.jr, self.jc = jr, jc
        self.jscale = self.rscale[jr] * self.dcol[jc]
        self.hr = np.concatenate([tape.bil_i, tape.bil_j, tape.hw_col])
        self.hc = np.concatenate([tape.bil_j, tape.bil_i, tape.hw_col])
        self.hscale = self.dcol[self.hr] * self.dcol[self.hc]
        self.hrow = np.concatenate([tape.bil_row, tape.bil_row, tape.hw_row])

    def resid(self, u):
        return kernels.residuals(self.tape, u * self.dcol, self.delta) * self.rscale

    def jac(self, u):
        return kernels.jac_contrib(self.tape, u * self.dcol, self.delta) * self.jscale

    def hess(self, u, w):
        return kernels.hess_contrib(self.tape, u * self.dcol, w * self.rscale, self.delta) * self.hscale

    def obj(self, u):
        return float(self.c @ u)

    def objgrad(self, u):
        return self.c

    def hdiag(self):
        return None


class _ElasticCore:
    """Minimise ``rho * sum(p + n) + zeta/2 |D (u - u_ref)|^2`` s.t. ``r(u) - p + n (=,<=) 0``."""

    def __init__(self, base: _TapeCore, u_ref, zeta, rho=1000.0):
        self.base = base
        nb, m = base.n, base.m
        self.nb = nb
        self.n, self.m = nb + 2 * m, m
        self.kind = base.kind
        big = np.full(2 * m, np.inf)
        self.lo = np.concatenate([base.lo, np.zeros(2 * m)])
        self.hi = np.concatenate([base.hi, big])
        self.u_ref = u_ref
        self.dr = np.minimum(1.0, 1.0 / np.maximum(np.abs(u_ref), 1e-12))
        self.zeta = zeta
        self.rho = rho
        rows = np.arange(m)
        self.jr = np.concatenate([base.jr, rows, rows])
        self.jc = np.concatenate([base.jc, nb + rows, nb + m + rows])
        self.jextra = np.concatenate([-np.ones(m), np.ones(m)])
        self.hr, self.hc, self.hrow = base.hr, base.hc, base.hrow
        self.c = np.concatenate([np.zeros(nb), np.full(2 * m, rho)])

    def split(self, v):
        nb, m = self.nb, self.m
        return v[:nb], v[nb:nb + m], v[nb + m:]

    def resid(self, v):
        u, p, n = self.split(v)
        return self.base.resid(u) - p + n

    def jac(self, v):
        return np.concatenate([self.base.jac(v[:self.nb]), self.jextra])

    def hess(self, v, w):
        return self.base.hess(v[:self.nb], w)

    def obj(self, v):
        u = v[:self.nb]
        d = self.dr * (u - self.u_ref)
        return float(self.c @ v + 0.5 * self.zeta * d @ d)

    def objgrad(self, v):
        g = self.c.copy()
        u = v[:self.nb]
        g[:self.nb] += self.zeta * self.dr ** 2 * (u - self.u_ref)
        return g

    def hdiag(self):
        d = np.zeros(self.n)
        d[:self.nb] = self.zeta * self.dr ** 2
        return d


class _KKT:
    """Fixed-sparsity KKT assembly with precomputed data positions."""

    def __init__(self, core):
        n, m = core.n, core.m
        diag_n = np.arange(n)
        diag_m = np.arange(m) + n
        rows = np.concatenate([core.hr, diag_n, n + core.jr, core.jc, diag_m])
        cols = np.concatenate([core.hc, diag_n, core.jc, n + core.jr, diag_m])
        size = n + m
        keys = cols.astype(np.int64) * size + rows
        uniq, pos = np.unique(keys, return_inverse=True)
        self.pos = pos.astype(np.intp)
        self.nnz = len(uniq)
        self.indices = (uniq % size).astype(np.int32)
        ucols = (uniq // size).astype(np.intp)
        counts = np.bincount(ucols, minlength=size)
        self.indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int32)
        self.size = size

    def matrix(self, hess_vals, diag_x, jac_vals, diag_c) -> sp.csc_matrix:
        vals = np.concatenate([hess_vals, diag_x, jac_vals, jac_vals, diag_c])
        data = np.bincount(self.pos, weights=vals, minlength=self.nnz)
        return sp.csc_matrix((data, self.indices, self.indptr), shape=(self.size, self.size))


def _hess_vec(core, hvals, v):
    out = np.zeros(core.n)
    np.add.at(out, core.hr, hvals * v[core.hc])
    return out


def _max_step(v, dv, tau):
    neg = dv < 0
    if not neg.any():
        return 1.0
    return float(min(1.0, np.min(-tau * v[neg] / dv[neg])))


# --------------------------------------------------------------------------
# the primal-dual loop


class _State:
    pass


def _run(core, u0, opt: IPMOptions, mu0: float, max_iter: int,
         stop: Optional[Callable] = None, depth: int = 0, log_prefix: str = "",
         bound_push: Optional[float] = None):
    """Core loop; returns (status, u, s, y, iterations)."""
    n, m = core.n, core.m
    eq = core.kind == EQ
    iidx = np.flatnonzero(~eq)
    ni = len(iidx)
    lo, hi = core.lo, core.hi
    fl, fu = np.isfinite(lo), np.isfinite(hi)
    lo_f = np.where(fl, lo, 0.0)
    hi_f = np.where(fu, hi, 0.0)

    width = np.where(fl & fu, hi - lo, np.inf)
    mag = np.maximum(1.0, np.abs(np.where(fl, lo, np.where(fu, hi, 0.0))))
    bp = opt.bound_push if bound_push is None else bound_push
    push = np.minimum(bp * mag, 0.49 * width)
    u = np.asarray(u0, dtype=float).copy()
    u = np.where(fl, np.maximum(u, lo_f + push), u)
    u = np.where(fu, np.minimum(u, hi_f - push), u)

    def dl(v):
        return np.where(fl, v - lo_f, 1.0)

    def du(v):
        return np.where(fu, hi_f - v, 1.0)

    r = core.resid(u)
    s = np.maximum(-r[iidx], opt.bound_push)
    mu = mu0
    y = np.zeros(m)
    zl = np.where(fl, mu / dl(u), 0.0)
    zu = np.where(fu, mu / du(u), 0.0)
    zs = mu / s
    hd = core.hdiag()
    kkt = _KKT(core)

    def cons(rv, sv):
        c = rv.copy()
        c[iidx] += sv
        return c

    def barrier(v, sv, mu_):
        a, b = dl(v)[fl], du(v)[fu]
        if (a <= 0).any() or (b <= 0).any() or (sv <= 0).any():
            return math.inf  # roundoff pushed a trial point onto a bound
        lb = np.log(a).sum() + np.log(b).sum() + np.log(sv).sum()
        return core.obj(v) - mu_ * lb

    def opt_error(v, sv, jv, mu_):
        gl = core.objgrad(v) + np.bincount(core.jc, weights=jv * y[core.jr], minlength=n) - zl + zu
        dual = max(np.abs(gl).max(initial=0.0), np.abs(y[iidx] - zs).max(initial=0.0))
        c = cons(core.resid(v), sv)
        primal = np.abs(c).max(initial=0.0)
        comp = max(np.abs(dl(v) * zl - mu_)[fl].max(initial=0.0), np.abs(du(v) * zu - mu_)[fu].max(initial=0.0),
                   np.abs(sv * zs - mu_).max(initial=0.0))
        sd = max(100.0, (np.abs(y).sum() + zl.sum() + zu.sum() + zs.sum()) / max(1, m + n + ni)) / 100.0
        return dual / sd, primal, comp / sd

    y = _ls_multipliers(core, kkt, u, zl, zu, iidx, zs)
    theta0 = np.abs(cons(r, s)).sum()
    theta_max = 1e4 * max(1.0, theta0)
    theta_min = 1e-4 * max(1.0, theta0)
    filt: list[tuple[float, float]] = []
    dw_last = 0.0
    it = 0
    n_acceptable = 0
    status = ITERATION_LIMIT
    while it < max_iter:
        r = core.resid(u)
        jv = core.jac(u)
        dual, primal, comp = opt_error(u, s, jv, 0.0)
        if max(dual, comp) <= opt.tol and primal <= opt.constr_tol:
            status = OPTIMAL
            break
        if max(dual, comp) <= opt.acceptable_tol and primal <= opt.constr_tol:
            n_acceptable += 1
            if n_acceptable >= opt.acceptable_iter:
                status = OPTIMAL
                break
        else:
            n_acceptable = 0
        if stop is not None and stop(u, s):
            status = RESTORED
            break
        while mu > opt.tol / 10.0:
            dmu, pmu, cmu = opt_error(u, s, jv, mu)
            if max(dmu, pmu, cmu) > 10.0 * mu:
                break
            mu = max(opt.tol / 10.0, min(0.2 * mu, mu ** 1.5))
            filt = []
        c = cons(r, s)
        theta = np.abs(c).sum()
        phi = barrier(u, s, mu)
        hv = core.hess(u, y)
        dlu, duu = dl(u), du(u)
        sig_x = np.where(fl, zl / dlu, 0.0) + np.where(fu, zu / duu, 0.0)
        if hd is not None:
            sig_x = sig_x + hd
        sig_s = zs / s
        gphi = core.objgrad(u) - np.where(fl, mu / dlu, 0.0) + np.where(fu, mu / duu, 0.0)
        r_x = gphi + np.bincount(core.jc, weights=jv * y[core.jr], minlength=n)
        r_s = y[iidx] - mu / s
        dw = 0.0
        dc = 1e-9
        lu = None
        for _ in range(60):
            diag_c = np.zeros(m)
            diag_c[iidx] = -1.0 / sig_s
            diag_c -= dc
            try:
                lu = splu(kkt.matrix(hv, sig_x + dw, jv, diag_c), permc_spec="COLAMD", diag_pivot_thresh=0.1)
                sol = _solve(lu, n, iidx, r_x, c, r_s, sig_s)
            except (RuntimeError, ValueError):
                lu = None
                dc = max(dc, 1e-8 * mu ** 0.25)
                dw = max(1e-4, dw_last / 3.0) if dw == 0.0 else dw * 8.0
                continue
            dx, dy, ds = sol
            curv = dx @ (_hess_vec(core, hv, dx) + (sig_x + dw) * dx) + ds @ (sig_s * ds)
            if curv >= 1e-12 * (dx @ dx + ds @ ds):
                break
            dw = max(1e-4, dw_last / 3.0) if dw == 0.0 else dw * 8.0
            lu = None
            if dw > 1e40:
                break
        if lu is None:
            status = FAILED
            break
        dw_last = dw
        tau = max(0.99, 1.0 - mu)
        amax = min(_max_step(dlu[fl], dx[fl], tau), _max_step(duu[fu], -dx[fu], tau), _max_step(s, ds, tau))
        dzl = np.where(fl, mu / dlu - zl - zl / dlu * dx, 0.0)
        dzu = np.where(fu, mu / duu - zu + zu / duu * dx, 0.0)
        dzs = mu / s - zs - zs / s * ds
        ad = min(_max_step(zl[fl], dzl[fl], tau), _max_step(zu[fu], dzu[fu], tau), _max_step(zs, dzs, tau))
        gd = gphi @ dx - mu * (ds / s).sum()

        roundoff = 1e-14 * max(1.0, abs(phi))

        def acceptable(th, ph, alpha):
            if not np.isfinite(ph) or th > theta_max:
                return False, False
            for (tf, pf) in filt:
                if th >= tf and ph >= pf + roundoff:
                    return False, False
            if theta <= theta_min and gd < 0 and alpha * (-gd) ** 2.3 > theta ** 1.1:
                return ph <= phi + 1e-8 * alpha * gd + roundoff, True
            return th <= (1 - 1e-5) * theta or ph <= phi - 1e-8 * theta + roundoff, False

        tiny = np.abs(dx).max(initial=0.0) < 1e-14 * max(1.0, np.abs(u).max(initial=0.0))
        if gd < 0:
            amin = 0.05 * min(1e-5, 1e-8 * theta / -gd, theta ** 1.1 / (-gd) ** 2.3)
        else:
            amin = 0.05 * 1e-5
        amin = max(amin, 1e-16)
        alpha = amax
        accepted = False
        ftype = False
        soc_done = False
        while alpha >= amin:
            ut, st = u + alpha * dx, s + alpha * ds
            ct = cons(core.resid(ut), st)
            tht = np.abs(ct).sum()
            pht = barrier(ut, st, mu) if np.all(st > 0) else np.inf
            ok, ftype = acceptable(tht, pht, alpha)
            if ok or tiny:
                accepted = True
                break
            if not soc_done and alpha == amax and tht >= theta:
                soc_done = True
                c_soc = alpha * c + ct
                dxs, dys, dss = _solve(lu, n, iidx, r_x, c_soc, r_s, sig_s)
                a2 = min(_max_step(dlu[fl], dxs[fl], tau), _max_step(duu[fu], -dxs[fu], tau),
                         _max_step(s, dss, tau))
                ut2, st2 = u + a2 * dxs, s + a2 * dss
                ct2 = cons(core.resid(ut2), st2)
                th2 = np.abs(ct2).sum()
                ph2 = barrier(ut2, st2, mu) if np.all(st2 > 0) else np.inf
                ok2, ft2 = acceptable(th2, ph2, alpha)
                if ok2:
                    ut, st, ftype, accepted = ut2, st2, ft2, True
                    dx, ds, dy = dxs, dss, dys
                    alpha = a2
                    break
            alpha *= 0.5
        if not accepted:
            if depth > 0:
                status = FAILED
                break
            rest = _restore(core, u, s, mu, filt, theta, phi, opt, barrier, cons, it, log_prefix)
            if rest is None:
                status = INFEASIBLE
                break
            u = rest
            r = core.resid(u)
            s = np.maximum(-r[iidx], mu)
            zl = np.where(fl, mu / dl(u), 0.0)
            zu = np.where(fu, mu / du(u), 0.0)
            zs = mu / s
            y = _ls_multipliers(core, kkt, u, zl, zu, iidx, zs)
            it += 1
            continue
        if not ftype:
            filt.append(((1 - 1e-5) * theta, phi - 1e-8 * theta))
        u, s = ut, st
        y = y + alpha * dy
        zl = zl + ad * dzl
        zu = zu + ad * dzu
        zs = zs + ad * dzs
        ks = opt.kappa_sigma
        dlu, duu = dl(u), du(u)
        zl = np.where(fl, np.clip(zl, mu / (ks * dlu), ks * mu / dlu), 0.0)
        zu = np.where(fu, np.clip(zu, mu / (ks * duu), ks * mu / duu), 0.0)
        zs = np.clip(zs, mu / (ks * s), ks * mu / s)
        it += 1
        if opt.verbose:
            print(f"{log_prefix}{it:4d} mu={mu:.1e} th={theta:.2e} du={dual:.2e} co={comp:.2e} "
                  f"a={alpha:.2e} ad={ad:.2e} dw={dw:.1e} y={np.abs(y).max(initial=0):.1e} f={core.obj(u):.6g}")
    return status, u, s, y, it


def _ls_multipliers(core, kkt, u, zl, zu, iidx, zs):
    """Least-squares equality multipliers, or zero if they come out large."""
    n, m = core.n, core.m
    jv = core.jac(u)
    diag_c = np.full(m, -1e-8)
    diag_c[iidx] = -1.0
    try:
        lu = splu(kkt.matrix(np.zeros(len(core.hr)), np.ones(n), jv, diag_c), permc_spec="COLAMD")
        rhs = np.concatenate([-(core.objgrad(u) - zl + zu), np.zeros(m)])
        rhs[n + iidx] = -zs
        y = lu.solve(rhs)[n:]
    except (RuntimeError, ValueError):
        return np.zeros(m)
    if not np.all(np.isfinite(y)) or np.abs(y).max(initial=0.0) > 1e3:
        return np.zeros(m)
    return y


def _solve(lu, n, iidx, r_x, c, r_s, sig_s):
    rhs = np.concatenate([-r_x, -c])
    rhs[n + iidx] += r_s / sig_s
    sol = lu.solve(rhs)
    if not np.all(np.isfinite(sol)):
        raise RuntimeError("nonfinite step")
    dx, dy = sol[:n], sol[n:]
    ds = (-r_s - dy[iidx]) / sig_s
    return dx, dy, ds


def _restore(core, u, s, mu, filt, theta, phi, opt, barrier, cons, it, log_prefix):
    """Minimise the l1 violation near ``u`` until the main filter accepts the point."""
    if isinstance(core, _ElasticCore):
        return None
    r = core.resid(u)
    mu_r = max(mu, np.abs(cons(r, s)).max(initial=0.0))
    rcore = _ElasticCore(core, u.copy(), zeta=np.sqrt(mu_r))
    rho = rcore.rho
    eq = core.kind == EQ
    m = core.m
    p = np.zeros(m)
    nn = np.zeros(m)
    # closed-form p, n that make the elastic rows hold at u
    a = (mu_r - rho * r) / (2.0 * rho)
    nn[eq] = a[eq] + np.sqrt(a[eq] ** 2 + mu_r * r[eq] / (2.0 * rho))
    p[eq] = r[eq] + nn[eq]
    p[~eq] = np.maximum(r[~eq], 0.0) + mu_r / rho
    nn[~eq] = mu_r / rho
    v0 = np.concatenate([u, p, nn])
    iidx = np.flatnonzero(~eq)

    def stop(v, sv):
        uu = v[:core.n]
        rr = core.resid(uu)
        ss = np.maximum(-rr[iidx], mu)
        th = np.abs(cons(rr, ss)).sum()
        if th > 0.9 * theta and th > opt.constr_tol:
            return False
        ph = barrier(uu, ss, mu)
        return all(th < tf or ph < pf for tf, pf in filt) and np.isfinite(ph)

    status, v, _, _, _ = _run(rcore, v0, opt, mu_r, opt.max_iter, stop=stop, depth=1,
                              log_prefix=log_prefix + "  R", bound_push=1e-14)
    if status == RESTORED:
        return v[:core.n]
    return None


def solve(tape: Tape, kind: np.ndarray, grad: np.ndarray, lo: np.ndarray, hi: np.ndarray,
          x0: np.ndarray, options: Optional[IPMOptions] = None) -> IPMResult:
    """Maximise ``grad . x`` over the tape's rows and the box ``lo <= x <= hi``.

    Every column needs ``lo < hi``; fixed columns belong in the presolve.
    """
    opt = options or IPMOptions()
    x0 = np.clip(np.asarray(x0, dtype=float), lo, hi)
    core = _TapeCore(tape, np.asarray(kind), np.asarray(grad, dtype=float), np.asarray(lo, dtype=float),
                     np.asarray(hi, dtype=float), x0, opt.delta)
    status, u, s, y, it = _run(core, x0 / core.dcol, opt, opt.mu_init, opt.max_iter)
    x = np.clip(u * core.dcol, lo, hi)
    r = kernels.residuals(tape, x, opt.delta)
    eq = kind == EQ
    viol = float(np.where(eq, np.abs(r), np.maximum(r, 0.0)).max(initial=0.0))
    mult = y * core.rscale / core.oscale
    return IPMResult(status, x, float(grad @ x), it, viol, 0.0, mult)
