"""Branch-and-bound over the binaries, the enumeration oracle and the
independent-planning baseline.

Every node problem is presolved (fixings, bound propagation, an LP over the
linear rows) and then solved by the interior-point method from several
starting points. The continuous relaxation is nonconvex, so the best local
value is a heuristic node bound; the search therefore reports the status
``heuristic-global``. The enumeration oracle visits every budget-feasible
plan and every status assignment that survives presolve, which is what the
branch-and-bound is checked against.
"""
from __future__ import annotations

import itertools
import json
import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Mapping, NamedTuple, Optional

import numpy as np

from . import ipm
from .model import PHASES, JointNetwork, PowerNetwork, WaterNetwork, expansion_candidates
from .nlp import FEAS_TOL, INT_TOL, ConstraintSystem, FeasibilityReport, assemble, check_feasible
from .presolve import ReducedProblem, presolve
from .system import BRANCH_PRIORITY, var_label

log = logging.getLogger("jointplan.solver")

HEURISTIC_GLOBAL = "heuristic-global"
INFEASIBLE = "infeasible"
NODE_LIMIT = "node-limit"
TIME_LIMIT = "time-limit"
ORACLE = "oracle"

RELAX_OPTIMAL = "optimal"


class OracleCapExceeded(ValueError):
    """The instance has more binaries than the oracle is allowed to enumerate."""


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances, limits and the multi-start protocol.

    Parameters
    ----------
    feas_tol, int_tol : float
        Acceptance tolerances of :func:`check_feasible`.
    gap : float
        Relative optimality gap at which the search stops.
    node_limit, time_limit : int, float
        Search limits; the best incumbent is returned when either is hit.
    branching : str
        ``"most-fractional"`` or ``"first-fractional"`` within the priority class.
    max_iter : int
        Interior-point iteration cap per start.
    seed : int
        Seed of the perturbed starting points.
    n_starts : int
        Starting points per node relaxation: flat, LP-based, then perturbed.
    oracle_cap : int
        Largest binary count the oracle accepts.
    """

    feas_tol: float = FEAS_TOL
    int_tol: float = INT_TOL
    gap: float = 1e-4
    node_limit: int = 100_000
    time_limit: float = 3600.0
    branching: str = "most-fractional"
    max_iter: int = 500
    seed: int = 0
    n_starts: int = 5
    oracle_cap: int = 24

    def __post_init__(self):
        for name in ("feas_tol", "int_tol", "gap", "time_limit"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("node_limit", "max_iter", "n_starts", "oracle_cap"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        if self.branching not in ("most-fractional", "first-fractional"):
            raise ValueError(f"unknown branching rule {self.branching!r}")


@dataclass
class Solution:
    """Outcome of a search.

    ``plan`` maps candidate ids to 0/1, ``schedule`` maps variable labels to
    values; both are empty when no feasible point was found.
    """

    status: str
    plan: dict = field(default_factory=dict)
    schedule: dict = field(default_factory=dict)
    objective: float = -math.inf
    bound: float = math.inf
    gap: float = math.inf
    nodes: int = 0
    wall_time: float = 0.0
    report: Optional[FeasibilityReport] = None
    x: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def feasible(self) -> bool:
        return self.x is not None

    @property
    def built(self) -> list[str]:
        return [cid for cid, v in self.plan.items() if v]

    def to_dict(self) -> dict:
        def num(v):
            return v if math.isfinite(v) else None

        return {
            "status": self.status,
            "plan": dict(self.plan),
            "objective": num(self.objective),
            "bound": num(self.bound),
            "gap": num(self.gap),
            "nodes": self.nodes,
            "wall_time": self.wall_time,
            "report": self.report.to_dict() if self.report is not None else None,
            "schedule": dict(self.schedule),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def relative_gap(bound: float, objective: float) -> float:
    if not math.isfinite(objective):
        return math.inf
    if not math.isfinite(bound):
        return math.inf
    return max(0.0, (bound - objective) / max(1.0, abs(bound)))


# --------------------------------------------------------------------------
# node relaxations


class Relaxation(NamedTuple):
    bound: float
    point: Optional[np.ndarray]
    status: str


def _flat_start(prob: ReducedProblem) -> np.ndarray:
    """Balanced unit voltages, mid-range heads, everything else at its lower bound."""
    names = prob.system.space.names
    z = np.clip(np.zeros(prob.n), prob.lo, prob.hi)
    for i, c in enumerate(prob.cols):
        nm = names[c]
        if nm[0] in ("e", "f"):
            ang = -2.0 * math.pi / 3.0 * PHASES.index(nm[2]) if nm[2] in PHASES else 0.0
            z[i] = math.cos(ang) if nm[0] == "e" else math.sin(ang)
        elif nm[0] == "h":
            z[i] = 0.5 * (prob.lo[i] + prob.hi[i])
    return z


def _starts(prob: ReducedProblem, config: SolverConfig, warm: Optional[np.ndarray], leaf: bool) -> list:
    """Flat start, LP start, then seeded perturbations of the LP start.

    The LP start takes the LP point of presolve (flows and storage levels
    that satisfy every linear row) with flat voltages. A warm point from the
    parent node replaces the last perturbation; leaves use only the two
    deterministic starts so that their value does not depend on the path.
    """
    flat = _flat_start(prob)
    starts = [flat]
    base = flat
    if prob.lp_point is not None:
        names = prob.system.space.names
        volt = np.array([names[c][0] in ("e", "f") for c in prob.cols], dtype=bool)
        base = np.where(volt, flat, prob.lp_point)
        starts.append(base)
    if leaf:
        return starts
    rng = np.random.default_rng(config.seed)
    width = np.minimum(prob.hi - prob.lo, 1e3)
    while len(starts) < config.n_starts:
        starts.append(np.clip(base + 0.05 * width * rng.uniform(-1.0, 1.0, prob.n), prob.lo, prob.hi))
    if warm is not None:
        warm = np.clip(warm, prob.lo, prob.hi)
        if len(starts) > 2:
            starts[-1] = warm
        else:
            starts.append(warm)
    return starts


class NodeSolver:
    """Multi-start continuous solves with a cache keyed by the reduced problem."""

    def __init__(self, system: ConstraintSystem, config: SolverConfig):
        self.system = system
        self.config = config
        self.cache: dict = {}
        self.options = ipm.IPMOptions(max_iter=config.max_iter, delta=system.delta)
        self.nlp_solves = 0

    def solve(self, prob: ReducedProblem, warm: Optional[np.ndarray] = None, leaf: bool = False) -> list:
        """Converged local solutions as ``(objective, full point)``, best first."""
        key = (prob.key, leaf, None if leaf or warm is None else np.round(warm, 9).tobytes())
        hit = self.cache.get(key)
        if hit is None:
            hit = self._solve(prob, None if leaf else warm, leaf)
            self.cache[key] = hit
        return [(v + prob.obj_const, prob.expand(z)) for v, z in hit]

    def _solve(self, prob: ReducedProblem, warm, leaf) -> list:
        if prob.n == 0:
            return [(0.0, np.zeros(0))]
        tape, kind = prob.smooth_part()
        found = []
        for z0 in _starts(prob, self.config, warm, leaf):
            self.nlp_solves += 1
            res = ipm.solve(tape, kind, prob.grad, prob.lo, prob.hi, z0, self.options)
            if res.status == ipm.OPTIMAL:
                found.append((float(prob.grad @ res.x), res.x))
        found.sort(key=lambda t: -t[0])
        return found


def _storage_columns(system: ConstraintSystem):
    inst = system.instance
    vs = system.space
    out = []
    if inst is None:
        return out
    n = inst.time_grid.n_intervals
    steps = inst.time_grid.steps
    for st in inst.power.storages:
        pc = [vs[("pc", st.id, k)] for k in range(n)]
        pd = [vs[("pd", st.id, k)] for k in range(n)]
        soc = [vs[("soc", st.id, t)] for t in range(n + 1)]
        out.append((st, pc, pd, soc, steps))
    return out


def repair_complementarity(system: ConstraintSystem, x: np.ndarray) -> np.ndarray:
    """Remove simultaneous charging and discharging while keeping net power.

    Both rates drop by their minimum; the energy trajectory is recomputed
    forward, which can only raise it because round-trip losses disappear.
    """
    x = x.copy()
    for st, pc, pd, soc, steps in _storage_columns(system):
        for k in range(len(pc)):
            m = min(x[pc[k]], x[pd[k]])
            if m > 0:
                x[pc[k]] -= m
                x[pd[k]] -= m
            x[pc[k]] = max(x[pc[k]], 0.0)
            x[pd[k]] = max(x[pd[k]], 0.0)
        for k in range(len(pc)):
            x[soc[k + 1]] = x[soc[k]] + steps[k] * (st.eta_c * x[pc[k]] - x[pd[k]] / st.eta_d)
    return x


def _accept(system: ConstraintSystem, x: np.ndarray, config: SolverConfig):
    """Round binaries, repair complementarity and judge against the exact model."""
    x = x.copy()
    x[system.binary] = np.round(x[system.binary])
    x = repair_complementarity(system, x)
    rep = check_feasible(system, x, config.feas_tol, config.int_tol)
    return rep.accepted, x, rep


def solve_relaxation(system: ConstraintSystem, fixed: Optional[Mapping[int, float]] = None,
                     config: Optional[SolverConfig] = None, *, warm: Optional[np.ndarray] = None,
                     node_solver: Optional[NodeSolver] = None) -> Relaxation:
    """Continuous relaxation with the given binaries fixed.

    Returns the best multi-start objective as the (heuristic) upper bound, its
    point in the full variable space, and ``optimal`` or ``infeasible``.
    """
    config = config or SolverConfig()
    lo, hi = system.lo.copy(), system.hi.copy()
    for c, v in (fixed or {}).items():
        if v not in (0, 1):
            raise ValueError(f"fixing of column {c} must be 0 or 1")
        if not system.binary[c]:
            raise ValueError(f"column {c} is not binary")
        lo[c] = hi[c] = v
    pre = presolve(system, lo, hi)
    if not pre.feasible:
        return Relaxation(-math.inf, None, INFEASIBLE)
    ns = node_solver or NodeSolver(system, config)
    found = ns.solve(pre.problem, None if warm is None else pre.problem.restrict(warm))
    if not found:
        return Relaxation(math.inf, None, ipm.FAILED)
    return Relaxation(found[0][0], found[0][1], RELAX_OPTIMAL)


# --------------------------------------------------------------------------
# plans and schedules


def _expansion_columns(system: ConstraintSystem) -> list:
    inst = system.instance
    vs = system.space
    return [(cand, vs[("x", cand.kind, cand.id)]) for cand in expansion_candidates(inst)]


def _solution(system: ConstraintSystem, status: str, x: Optional[np.ndarray], objective: float, bound: float,
              nodes: int, t0: float, rep: Optional[FeasibilityReport] = None) -> Solution:
    sol = Solution(status=status, objective=objective, bound=bound, nodes=nodes, wall_time=time.perf_counter() - t0)
    sol.gap = relative_gap(bound, objective)
    if x is not None:
        sol.x = x
        sol.plan = {cand.id: int(round(x[c])) for cand, c in _expansion_columns(system)}
        names = system.space.names
        sol.schedule = {var_label(nm): float(x[j]) for j, nm in enumerate(names) if nm[0] != "x"}
        sol.report = rep if rep is not None else check_feasible(system, x)
    return sol


def _dominance(system: ConstraintSystem, lo: np.ndarray, hi: np.ndarray) -> None:
    """Fix dominated status binaries to their gate once the gate is fixed."""
    dom = system.space.dominant
    gate = system.space.gate
    for c in range(system.n):
        if not dom[c] or lo[c] == hi[c]:
            continue
        g = gate[c]
        if g < 0:
            lo[c] = hi[c] = 1.0
        elif lo[g] == hi[g]:
            lo[c] = hi[c] = lo[g]


def _branch_column(system: ConstraintSystem, x: np.ndarray, lo, hi, config: SolverConfig) -> Optional[int]:
    """Highest-priority fractional binary; most fractional, then lowest index."""
    role = system.space.role
    best = None
    for c in np.flatnonzero(system.binary & (lo < hi)):
        frac = abs(x[c] - round(x[c]))
        if frac <= config.int_tol:
            continue
        prio = BRANCH_PRIORITY.get(role[c], 9)
        score = -frac if config.branching == "most-fractional" else 0.0
        key = (prio, score, c)
        if best is None or key < best:
            best = key
    return None if best is None else int(best[2])


def _first_free(system: ConstraintSystem, lo, hi) -> Optional[int]:
    role = system.space.role
    free = [c for c in np.flatnonzero(system.binary & (lo < hi))]
    if not free:
        return None
    return int(min(free, key=lambda c: (BRANCH_PRIORITY.get(role[c], 9), c)))


# --------------------------------------------------------------------------
# branch and bound


def branch_and_bound(instance: JointNetwork, config: Optional[SolverConfig] = None,
                     system: Optional[ConstraintSystem] = None,
                     node_solver: Optional[NodeSolver] = None) -> Solution:
    """Branch-and-bound; returns the incumbent and the search bound.

    Until a first incumbent exists the search dives depth first towards the
    rounded relaxation and tries rounding every node's relaxed point; after
    that it is best first. ``node_solver`` may be shared between calls on
    systems with identical structure (e.g. across a budget sweep) so that
    repeated node problems are answered from its cache.
    """
    config = config or SolverConfig()
    t0 = time.perf_counter()
    system = system or assemble(instance)
    ns = node_solver or NodeSolver(system, config)
    lo0, hi0 = system.lo.copy(), system.hi.copy()
    _dominance(system, lo0, hi0)

    inc = [None, -math.inf, None]  # point, value, report
    open_nodes: list = []
    counter = itertools.count()
    open_nodes.append(_Node(math.inf, next(counter), 0, True, lo0, hi0, None))
    nodes = 0
    status = HEURISTIC_GLOBAL

    def offer(found):
        for val, xp in found:
            if inc[0] is not None and val <= inc[1]:
                return False
            ok, xr, rep = _accept(system, xp, config)
            if ok:
                inc[:] = [xr, val, rep]
                return True
        return False

    while open_nodes:
        if nodes >= config.node_limit:
            status = NODE_LIMIT
            break
        if time.perf_counter() - t0 > config.time_limit:
            status = TIME_LIMIT
            break
        node = _pop(open_nodes, diving=inc[0] is None)
        if inc[0] is not None and relative_gap(node.bound, inc[1]) <= config.gap:
            continue
        nodes += 1
        pre = presolve(system, node.lo, node.hi)
        if not pre.feasible:
            _log_node(node.nid, node.depth, -math.inf, inc[1], "infeasible")
            continue
        prob = pre.problem
        lo_n, hi_n = pre.lo, pre.hi
        leaf = not np.any(system.binary & (lo_n < hi_n))
        found = ns.solve(prob, None if node.warm is None else prob.restrict(node.warm), leaf=leaf)
        if not found:
            if leaf:
                _log_node(node.nid, node.depth, -math.inf, inc[1], "no-local-solution")
                continue
            bound, x = node.bound, None
        else:
            bound, x = found[0]
        bound = min(bound, prob.lp_bound + 1e-9 * max(1.0, abs(prob.lp_bound)))
        _log_node(node.nid, node.depth, bound, inc[1], "leaf" if leaf else "node")
        if inc[0] is not None and relative_gap(bound, inc[1]) <= config.gap:
            continue
        if leaf or (x is not None and _branch_column(system, x, lo_n, hi_n, config) is None):
            if offer(found) or leaf:
                continue
            c = _first_free(system, lo_n, hi_n)
        else:
            if inc[0] is None and x is not None:
                _round_and_try(system, ns, x, lo_n, hi_n, offer, node)
                if inc[0] is not None and relative_gap(bound, inc[1]) <= config.gap:
                    continue
            c = _branch_column(system, x, lo_n, hi_n, config) if x is not None else _first_free(system, lo_n, hi_n)
        _push_children(open_nodes, counter, system, c, lo_n, hi_n, bound, node.depth, x)

    open_bound = max((n.bound for n in open_nodes), default=-math.inf)
    bound = max(open_bound, inc[1])
    if inc[0] is None:
        sol = _solution(system, INFEASIBLE if status == HEURISTIC_GLOBAL else status, None, -math.inf,
                        bound, nodes, t0)
    else:
        sol = _solution(system, status, inc[0], inc[1], bound, nodes, t0, inc[2])
    log.info("done status=%s nodes=%d objective=%.10g bound=%.10g gap=%.3g nlp=%d",
             sol.status, nodes, sol.objective, sol.bound, sol.gap, ns.nlp_solves)
    return sol


class _Node(NamedTuple):
    bound: float
    nid: int
    depth: int
    preferred: bool  # child on the rounding side of its parent's relaxed value
    lo: np.ndarray
    hi: np.ndarray
    warm: Optional[np.ndarray]


def _pop(open_nodes: list, diving: bool) -> _Node:
    """Deepest preferred node while diving, otherwise the largest bound (deeper, then older, on ties)."""
    if diving:
        key = lambda n: (n.depth, n.preferred, n.bound, -n.nid)
    else:
        key = lambda n: (n.bound, n.depth, -n.nid)
    i = max(range(len(open_nodes)), key=lambda j: key(open_nodes[j]))
    return open_nodes.pop(i)


def _round_and_try(system, ns, x, lo, hi, offer, node) -> None:
    """Fix every free binary to its rounded relaxed value and solve that leaf."""
    free = system.binary & (lo < hi)
    rlo, rhi = lo.copy(), hi.copy()
    rlo[free] = rhi[free] = np.round(np.clip(x[free], 0.0, 1.0))
    pre = presolve(system, rlo, rhi)
    if not pre.feasible:
        return
    found = ns.solve(pre.problem, leaf=True)
    if found and offer(found):
        _log_node(node.nid, node.depth, found[0][0], found[0][0], "rounding")


def _push_children(open_nodes, counter, system, c, lo, hi, bound, depth, x):
    up = x is None or x[c] >= 0.5
    for v in (1.0, 0.0):
        clo, chi = lo.copy(), hi.copy()
        clo[c] = chi[c] = v
        _dominance(system, clo, chi)
        warm = None
        if x is not None:
            warm = x.copy()
            warm[c] = v
        open_nodes.append(_Node(bound, next(counter), depth + 1, (v == 1.0) == up, clo, chi, warm))


def _log_node(nid, depth, bound, incumbent, kind):
    log.info("node=%d depth=%d bound=%.10g incumbent=%.10g gap=%.3g kind=%s",
             nid, depth, bound, incumbent, relative_gap(bound, incumbent), kind)


# --------------------------------------------------------------------------
# the enumeration oracle


def enumerate_oracle(instance: JointNetwork, config: Optional[SolverConfig] = None,
                     system: Optional[ConstraintSystem] = None,
                     node_solver: Optional[NodeSolver] = None) -> Solution:
    """Exhaustive search over budget-feasible plans and status assignments.

    Plans are visited in lexicographic order of the candidate list (all
    zeros first); within a plan, dominated statuses follow their gate and
    the remaining statuses are enumerated depth first, pruning a partial
    assignment only when presolve proves it infeasible. Every complete
    assignment gets the deterministic starts. Ties keep the first plan.

    Raises
    ------
    OracleCapExceeded
        If the instance has more binaries than ``config.oracle_cap``.
    """
    config = config or SolverConfig()
    t0 = time.perf_counter()
    system = system or assemble(instance)
    nb = system.n_binaries()
    if nb > config.oracle_cap:
        raise OracleCapExceeded(f"{nb} binaries exceed the oracle cap of {config.oracle_cap}")
    ns = node_solver or NodeSolver(system, config)
    expansion = _expansion_columns(system)
    best = [None, -math.inf, None]
    leaves = 0
    for bits in itertools.product((0, 1), repeat=len(expansion)):
        cost = sum(cand.cost for (cand, _), b in zip(expansion, bits) if b)
        if cost > instance.budget + 1e-9:
            continue
        lo, hi = system.lo.copy(), system.hi.copy()
        for (_, c), b in zip(expansion, bits):
            lo[c] = hi[c] = b
        _dominance(system, lo, hi)
        leaves += _enumerate_statuses(system, ns, config, lo, hi, best)
    x, val, rep = best
    status = ORACLE if x is not None else INFEASIBLE
    sol = _solution(system, status, x, val, val, leaves, t0, rep)
    log.info("oracle status=%s leaves=%d objective=%.10g", sol.status, leaves, sol.objective)
    return sol


def _enumerate_statuses(system, ns, config, lo, hi, best) -> int:
    pre = presolve(system, lo, hi)
    if not pre.feasible:
        return 0
    lo, hi = pre.lo, pre.hi
    free = [c for c in np.flatnonzero(system.binary & (lo < hi))]
    if free:
        c = min(free)
        n = 0
        for v in (0.0, 1.0):
            clo, chi = lo.copy(), hi.copy()
            clo[c] = chi[c] = v
            _dominance(system, clo, chi)
            n += _enumerate_statuses(system, ns, config, clo, chi, best)
        return n
    for val, x in ns.solve(pre.problem, leaf=True):
        if val <= best[1]:
            break
        ok, xr, rep = _accept(system, x, config)
        if ok:
            best[:] = [xr, val, rep]
            break
    return 1


# --------------------------------------------------------------------------
# independent planning


def water_only(instance: JointNetwork, pump_power_cap) -> JointNetwork:
    """The water network alone, each pump limited to its allowance in MW per interval.

    ``pump_power_cap`` is one number, one value per interval, or a mapping
    from pump id to either.
    """
    n = instance.time_grid.n_intervals
    pumps = tuple(replace(p, power_cap=_cap_for(pump_power_cap, p.id, n)) for p in instance.water.pumps)
    return replace(
        instance, power=PowerNetwork((), (), (), (), ()), water=replace(instance.water, pumps=pumps),
        links=(), name=f"{instance.name}-water-only",
    )


def power_only(instance: JointNetwork, pump_power_cap) -> JointNetwork:
    """The power network alone with every pump-interface load fixed at its pump's allowance."""
    n = instance.time_grid.n_intervals
    links = {lk.load: lk for lk in instance.links}
    loads = []
    for ld in instance.power.loads:
        if ld.pump_interface:
            lk = links.get(ld.id)
            caps = _cap_for(pump_power_cap, lk.pump if lk is not None else None, n)
            cond = lk.conductors if lk is not None else ld.phases
            pf = lk.power_factor if lk is not None else 1.0
            ratio = math.sqrt(max(0.0, 1.0 - pf * pf)) / pf
            share = [c / len(cond) / instance.base_mva for c in caps]
            p = tuple(tuple(share) if ph in cond else (0.0,) * n for ph in ld.phases)
            q = tuple(tuple(v * ratio for v in row) for row in p)
            ld = replace(ld, pmax=p, pmin=p, qmax=q)
        loads.append(ld)
    return replace(
        instance, power=replace(instance.power, loads=tuple(loads)),
        water=WaterNetwork((), (), (), (), (), ()), links=(), name=f"{instance.name}-power-only",
    )


def _cap_for(cap, pump_id, n) -> tuple:
    if isinstance(cap, Mapping):
        if pump_id not in cap:
            raise ValueError(f"no pump power allowance for pump {pump_id!r}")
        cap = cap[pump_id]
    return _per_interval(cap, n)


def _per_interval(cap, n) -> tuple:
    if np.ndim(cap) == 0:
        if cap < 0:
            raise ValueError("pump power cap must be nonnegative")
        return (float(cap),) * n
    vals = tuple(float(v) for v in cap)
    if len(vals) != n or any(v < 0 for v in vals):
        raise ValueError(f"pump power cap needs {n} nonnegative entries")
    return vals


def independent_baseline(instance: JointNetwork, pump_power_cap, config: Optional[SolverConfig] = None,
                         oracle: bool = False) -> tuple[Solution, Solution]:
    """Plan the power and water networks separately around a pumping allowance.

    Returns ``(power solution, water solution)``; each network is planned
    under the instance budget with its own candidates only.
    """
    solve = enumerate_oracle if oracle else branch_and_bound
    power = solve(power_only(instance, pump_power_cap), config)
    water = solve(water_only(instance, pump_power_cap), config)
    return power, water


__all__ = [
    "SolverConfig", "Solution", "Relaxation", "NodeSolver", "OracleCapExceeded", "solve_relaxation",
    "branch_and_bound", "enumerate_oracle", "independent_baseline", "water_only", "power_only",
    "repair_complementarity", "relative_gap", "HEURISTIC_GLOBAL", "INFEASIBLE", "NODE_LIMIT",
    "TIME_LIMIT", "ORACLE",
]
