"""Assembly of the joint MINLP into an evaluable constraint system.

The system is a list of residual rows over one flat variable vector. Rows
are ``r(x) == 0`` or ``r(x) <= 0``; the objective is linear and maximised.
Residuals and first derivatives are evaluated from the term tape; the
feasibility checker always uses the exact Hazen-Williams law while solver
evaluations use the smoothed one.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from . import kernels
from .coupling import build_coupling, objective
from .model import JointNetwork
from .power import build_power, declare_power_variables
from .system import EQ, LE, ConstraintSet, Row, Tape, VariableSpace, var_label
from .validate import require_valid
from .water import build_water, declare_water_variables

#: smoothing width of |q| near zero, L/s
HW_SMOOTHING = 1e-4
FEAS_TOL = 1e-6
INT_TOL = 1e-6


@dataclass(frozen=True)
class ConstraintSystem:
    """Residual rows, bounds and objective of one instance.

    Attributes
    ----------
    space : VariableSpace
        Names, bounds, binary mask and branching metadata of the columns.
    rows : list of Row
        Residual records, each carrying its provenance tag.
    tape : Tape
        Flat term arrays of ``rows`` for the kernels.
    kind : ndarray
        ``EQ`` or ``LE`` per row.
    relaxed : ndarray of bool
        Rows the continuous subsolver skips (enforced after the solve).
    grad : ndarray
        Objective gradient (maximisation).
    """

    instance: Optional[JointNetwork]
    space: VariableSpace
    rows: list
    tape: Tape
    kind: np.ndarray
    relaxed: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    binary: np.ndarray
    grad: np.ndarray
    delta: float = HW_SMOOTHING

    @property
    def n(self) -> int:
        return len(self.lo)

    @property
    def m(self) -> int:
        return self.tape.m

    @property
    def tags(self) -> list[str]:
        return [r.tag for r in self.rows]

    def n_binaries(self) -> int:
        return int(self.binary.sum())

    def objective_value(self, x: np.ndarray) -> float:
        return float(self.grad @ x)

    def jacobian_pattern(self) -> sp.csr_matrix:
        """Structural nonzeros (value 1) of the Jacobian."""
        rows, cols = self.tape.jac_rows(), self.tape.jac_cols()
        pat = sp.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(self.m, self.n)).tocsr()
        pat.data[:] = 1.0
        return pat


def from_constraints(space: VariableSpace, cons: ConstraintSet, grad: np.ndarray,
                     instance: Optional[JointNetwork] = None) -> ConstraintSystem:
    rows = list(cons.rows)
    return ConstraintSystem(
        instance=instance,
        space=space,
        rows=rows,
        tape=Tape.from_rows(rows),
        kind=np.array([r.kind for r in rows], dtype=np.int8),
        relaxed=np.array([r.relaxed for r in rows], dtype=bool),
        lo=np.array(space.lo, dtype=float),
        hi=np.array(space.hi, dtype=float),
        binary=np.array(space.binary, dtype=bool),
        grad=np.asarray(grad, dtype=float),
    )


def assemble(instance: JointNetwork, validate: bool = True) -> ConstraintSystem:
    """Build every constraint family of the instance plus the budget row.

    Raises
    ------
    InvalidInstance
        If the instance fails validation.
    """
    if validate:
        require_valid(instance)
    vs = VariableSpace()
    declare_power_variables(vs, instance)
    declare_water_variables(vs, instance)
    cons = ConstraintSet()
    cons += build_power(vs, instance)
    cons += build_water(vs, instance)
    cons += build_coupling(vs, instance)
    # explicit bound records only document bounds; the space already holds them
    return from_constraints(vs, cons, objective(vs, instance), instance)


def _check_dim(system: ConstraintSystem, x) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=float)
    if x.shape != (system.n,):
        raise ValueError(f"point has shape {x.shape}, expected ({system.n},)")
    return x


def eval_residuals(system: ConstraintSystem, x, delta: Optional[float] = None) -> np.ndarray:
    """Residual vector; smoothed Hazen-Williams unless ``delta=0``."""
    x = _check_dim(system, x)
    d = system.delta if delta is None else delta
    return kernels.residuals(system.tape, x, d)


def eval_jacobian(system: ConstraintSystem, x, delta: Optional[float] = None) -> sp.csr_matrix:
    """Sparse analytic Jacobian of :func:`eval_residuals`."""
    x = _check_dim(system, x)
    d = system.delta if delta is None else delta
    vals = kernels.jac_contrib(system.tape, x, d)
    t = system.tape
    return sp.coo_matrix((vals, (t.jac_rows(), t.jac_cols())), shape=(system.m, system.n)).tocsr()


@dataclass
class FeasibilityReport:
    """Worst violations of a point against the exact constraints.

    ``worst`` maps each provenance tag to ``(violation, label)`` where the
    label names the offending row or variable.
    """

    max_equality: float = 0.0
    max_inequality: float = 0.0
    max_bound: float = 0.0
    max_integrality: float = 0.0
    worst: dict = field(default_factory=dict)
    tol: float = FEAS_TOL
    int_tol: float = INT_TOL

    @property
    def accepted(self) -> bool:
        return (max(self.max_equality, self.max_inequality, self.max_bound) <= self.tol
                and self.max_integrality <= self.int_tol)

    @property
    def worst_tag(self) -> Optional[str]:
        if not self.worst:
            return None
        return max(self.worst, key=lambda t: (self.worst[t][0], t))

    def to_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "max_equality": self.max_equality,
            "max_inequality": self.max_inequality,
            "max_bound": self.max_bound,
            "max_integrality": self.max_integrality,
            "worst": {k: {"violation": v, "at": at} for k, (v, at) in sorted(self.worst.items())},
        }


def check_feasible(system: ConstraintSystem, x, tol: float = FEAS_TOL,
                   int_tol: float = INT_TOL) -> FeasibilityReport:
    """Judge ``x`` against the exact (unsmoothed) constraints, relaxed rows included."""
    x = _check_dim(system, x)
    r = kernels.residuals(system.tape, x, 0.0)
    rep = FeasibilityReport(tol=tol, int_tol=int_tol)
    eq = system.kind == EQ
    viol = np.where(eq, np.abs(r), np.maximum(r, 0.0))
    if system.m:
        rep.max_equality = float(viol[eq].max(initial=0.0))
        rep.max_inequality = float(viol[~eq].max(initial=0.0))
    for i in np.flatnonzero(viol > 0):
        tag = system.rows[i].tag
        if tag not in rep.worst or viol[i] > rep.worst[tag][0]:
            rep.worst[tag] = (float(viol[i]), f"row {i}")
    bviol = np.maximum(np.maximum(system.lo - x, x - system.hi), 0.0)
    if system.n:
        rep.max_bound = float(bviol.max())
        frac = np.abs(x - np.round(x)) * system.binary
        rep.max_integrality = float(frac.max())
    labels = None
    for j in np.flatnonzero(bviol > 0):
        labels = labels or system.space.labels()
        tag = system.space.bound_tag[j]
        if tag not in rep.worst or bviol[j] > rep.worst[tag][0]:
            rep.worst[tag] = (float(bviol[j]), labels[j])
    return rep


def debug_dump(system: ConstraintSystem) -> str:
    """Flat text listing of variables and residual rows, stable across runs."""
    lines = [f"# variables {system.n}"]
    for j, name in enumerate(system.space.names):
        b = " binary" if system.binary[j] else ""
        lines.append(f"v {j} {var_label(name)} [{system.lo[j]:.12g}, {system.hi[j]:.12g}]{b}")
    lines.append(f"# residuals {system.m}")
    for i, row in enumerate(system.rows):
        kind = "eq" if row.kind == EQ else "le"
        extra = " relaxed" if row.relaxed else ""
        lines.append(f"r {i} {kind} {row.tag}{extra}")
    return "\n".join(lines) + "\n"


__all__ = [
    "EQ", "LE", "Row", "ConstraintSystem", "FeasibilityReport", "assemble", "eval_residuals",
    "eval_jacobian", "check_feasible", "debug_dump", "from_constraints",
]
