"""Budget sweeps, the two demonstration experiments and the joint versus
independent planning comparison.

Sweeps solve one instance per budget with a shared node cache: budgets that
leave the same candidates affordable presolve to the same node problems, so
most rows after the first of each regime are cache hits.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field, replace
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Optional, Sequence

from .model import JointNetwork, WaterNetwork, expansion_candidates
from .nlp import assemble
from .solver import (
    INFEASIBLE, NodeSolver, Solution, SolverConfig, branch_and_bound, enumerate_oracle, power_only,
    water_only,
)
from .testcase import build_testcase, with_peak_targets

SWEEP_COLUMNS = ("budget", "lambda", "objective", "peak_served", "plan", "gap", "seconds")
DEFAULT_BUDGETS = "0:1:0.05"


def parse_budgets(text: str) -> list[float]:
    """``"a:b:step"`` to the inclusive grid a, a+step, ..., b (decimal arithmetic).

    Raises
    ------
    ValueError
        On a malformed range, a nonpositive step or ``b < a``.
    """
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"budget range {text!r} is not of the form a:b:step")
    try:
        a, b, step = (Decimal(p.strip()) for p in parts)
    except InvalidOperation as exc:
        raise ValueError(f"budget range {text!r} has a non-numeric entry") from exc
    if step <= 0 or b < a or not all(v.is_finite() for v in (a, b, step)):
        raise ValueError(f"budget range {text!r} needs a <= b and step > 0")
    n = int((b - a) / step)
    return [float(a + i * step) for i in range(n + 1)]


# --------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepRow:
    budget: float
    lam: float
    objective: float
    peak_served: float
    plan: tuple
    gap: float
    seconds: float
    status: str = ""


@dataclass
class SweepResult:
    """One row per budget, budgets strictly increasing."""

    rows: list = field(default_factory=list)

    def budgets(self) -> list[float]:
        return [r.budget for r in self.rows]

    def objectives(self) -> list[float]:
        return [r.objective for r in self.rows]

    def is_monotone(self, rtol: float = 1e-6) -> bool:
        """Objective nondecreasing in the budget (up to ``rtol`` relative)."""
        obj = self.objectives()
        return all(b >= a - rtol * max(1.0, abs(a)) for a, b in zip(obj, obj[1:]))

    def first_budget_with(self, component: str) -> Optional[float]:
        for r in self.rows:
            if component in r.plan:
                return r.budget
        return None

    def to_csv(self, timing: bool = False) -> str:
        """CSV text with LF line endings; ``seconds`` stays empty unless ``timing``."""
        buf = io.StringIO(newline="")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in self.rows:
            w.writerow([
                _num(r.budget), _num(r.lam), _num(r.objective), _num(r.peak_served), "+".join(r.plan),
                _num(r.gap), f"{r.seconds:.3f}" if timing else "",
            ])
        return buf.getvalue()

    def write_csv(self, path, timing: bool = False) -> None:
        Path(path).write_text(self.to_csv(timing), encoding="utf-8", newline="")


def _num(v: float) -> str:
    if v is None or not math.isfinite(v):
        return ""
    return repr(round(float(v), 10))


def peak_served(instance: JointNetwork, sol: Solution) -> float:
    """Peak-hour demand served by ``sol``: power in MW when ``lambda >= 0.5``, else water in L/s."""
    if not sol.feasible:
        return math.nan
    k = instance.resolved_peak_interval() - 1
    if instance.lam >= 0.5:
        return instance.base_mva * sum(
            sol.schedule[f"pl:{ld.id}:{ph}:{k}"]
            for ld in instance.power.loads if not ld.pump_interface for ph in ld.phases)
    return sum(sol.schedule[f"qd:{d.id}:{k}"] for d in instance.water.demands)


def budget_sweep(instance: JointNetwork, budgets: Sequence[float], lam: Optional[float] = None,
                 config: Optional[SolverConfig] = None, oracle: bool = False) -> SweepResult:
    """Solve ``instance`` at every budget; rows in increasing budget order.

    Raises
    ------
    ValueError
        If the budgets are not strictly increasing.
    """
    budgets = [float(b) for b in budgets]
    if any(b2 <= b1 for b1, b2 in zip(budgets, budgets[1:])):
        raise ValueError("budgets must be strictly increasing")
    config = config or SolverConfig()
    if lam is not None:
        instance = instance.with_lambda(float(lam))
    solve = enumerate_oracle if oracle else branch_and_bound
    cands = expansion_candidates(instance)
    ns = None
    result = SweepResult()
    for b in budgets:
        inst = instance.with_budget(b)
        system = assemble(inst)
        ns = ns or NodeSolver(system, config)
        sol = solve(inst, config, system=system, node_solver=ns)
        plan = tuple(c.id for c in cands if sol.plan.get(c.id))
        result.rows.append(SweepRow(b, inst.lam, sol.objective, peak_served(inst, sol), plan, sol.gap,
                                    sol.wall_time, sol.status))
    return result


def experiment1(budgets: Optional[Sequence[float]] = None, config: Optional[SolverConfig] = None) -> SweepResult:
    """Peak-hour power maximised (``lambda = 1``) with costs battery 0.6, tank 0.4."""
    budgets = parse_budgets(DEFAULT_BUDGETS) if budgets is None else budgets
    return budget_sweep(build_testcase(1), budgets, config=config)


def experiment2(budgets: Optional[Sequence[float]] = None, config: Optional[SolverConfig] = None) -> SweepResult:
    """Peak-hour water maximised (``lambda = 0``) at 1.05 MW peak power, costs swapped."""
    budgets = parse_budgets(DEFAULT_BUDGETS) if budgets is None else budgets
    return budget_sweep(build_testcase(2), budgets, config=config)


# --------------------------------------------------------------------------
# plot data


def demand_profiles_csv(instance: JointNetwork) -> str:
    """Hour versus the upper non-pump power demand (MW) and water demand (L/s)."""
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("hour", "power_demand", "water_demand"))
    for k in range(instance.time_grid.n_intervals):
        p = instance.base_mva * sum(row[k] for ld in instance.power.loads if not ld.pump_interface
                                    for row in ld.pmax)
        q = sum(d.qmax[k] for d in instance.water.demands)
        w.writerow((k + 1, _num(p), _num(q)))
    return buf.getvalue()


# --------------------------------------------------------------------------
# minimum-cost planning and the joint/independent comparison


def plan_cost(instance: JointNetwork, sol: Solution) -> float:
    costs = {c.id: c.cost for c in expansion_candidates(instance)}
    return sum(costs[cid] for cid in sol.built if cid in costs)


def costly_components(instance: JointNetwork, sol: Solution) -> list[str]:
    """Built candidates with a positive cost, in candidate order."""
    return [c.id for c in expansion_candidates(instance) if c.cost > 0 and sol.plan.get(c.id)]


def _cost_levels(instance: JointNetwork) -> list[float]:
    costs = [c.cost for c in expansion_candidates(instance) if c.cost > 0]
    levels = {0.0}
    for r in range(1, len(costs) + 1):
        for combo in itertools.combinations(costs, r):
            levels.add(round(sum(combo), 12))
    return sorted(levels)


def minimum_cost_plan(instance: JointNetwork, config: Optional[SolverConfig] = None,
                      oracle: bool = False) -> Solution:
    """Cheapest plan with a feasible schedule, ignoring the instance budget.

    Budgets are tried at every distinct total of candidate costs in
    increasing order; the first feasible solve is returned (status
    ``infeasible`` when even building everything does not help).
    """
    config = config or SolverConfig()
    solve = enumerate_oracle if oracle else branch_and_bound
    ns = None
    sol = Solution(status=INFEASIBLE)
    for level in _cost_levels(instance):
        inst = instance.with_budget(level)
        system = assemble(inst)
        ns = ns or NodeSolver(system, config)
        sol = solve(inst, config, system=system, node_solver=ns)
        if sol.feasible:
            return sol
    return sol


def _pump_rating(pump) -> float:
    return pump.alpha * pump.qmax + pump.mu


def pump_power_allowance(instance: JointNetwork, config: Optional[SolverConfig] = None) -> dict:
    """Per-interval power (MW) the power utility grants each linked pump.

    The utility first computes its headroom ``H`` on the pump's conductors:
    the largest pump load it can serve without building anything while every
    other load gets its nominal demand. With the pump's need ``P`` (its
    affine power at the whole water demand), its rating ``R`` and the other
    loads ``Po`` on the same bus and conductors, the allowance is ``R`` when
    ``H >= R``, ``H`` when ``P <= H < R`` and otherwise the pump's share
    ``(Po + H) P / (Po + P)`` of a proportional cut of that conductor group.
    """
    config = config or SolverConfig()
    n = instance.time_grid.n_intervals
    base = instance.base_mva
    headroom = _headroom(instance, config)
    demand = [sum(d.qmax[k] for d in instance.water.demands) for k in range(n)]
    n_pumps = max(len(instance.water.pumps), 1)
    out = {}
    for pump in instance.water.pumps:
        link = instance.link_for_pump(pump.id)
        rating = _pump_rating(pump)
        if link is None:
            out[pump.id] = (rating,) * n
            continue
        lk_load = instance.load(link.load)
        others = [
            (ld, i) for ld in instance.power.loads
            if not ld.pump_interface and ld.bus == lk_load.bus
            for i, ph in enumerate(ld.phases) if ph in link.conductors
        ]
        caps = []
        for k in range(n):
            need = pump.alpha * demand[k] / n_pumps + pump.mu
            other = base * sum(ld.pmax[i][k] for ld, i in others)
            h = headroom[pump.id][k]
            if h >= rating * (1.0 - 1e-6):  # solver tolerance
                cap = rating
            elif h >= need:
                cap = h
            else:
                cap = (other + h) * need / (other + need) if other + need > 0 else 0.0
            caps.append(round(max(cap, 0.0), 12))
        out[pump.id] = tuple(caps)
    return out


def _headroom(instance: JointNetwork, config: SolverConfig) -> dict:
    """Largest servable pump load per interval with nothing built and other loads at nominal."""
    n = instance.time_grid.n_intervals
    links = {lk.load: lk for lk in instance.links}
    loads = []
    for ld in instance.power.loads:
        if ld.pump_interface and ld.id in links:
            lk = links[ld.id]
            rating = _pump_rating(instance.pump(lk.pump)) / instance.base_mva / len(lk.conductors)
            ratio = math.sqrt(max(0.0, 1.0 - lk.power_factor ** 2)) / lk.power_factor
            p = tuple((rating,) * n if ph in lk.conductors else (0.0,) * n for ph in ld.phases)
            q = tuple(tuple(v * ratio for v in row) for row in p)
            ld = replace(ld, pmax=p, qmax=q, pmin=tuple((0.0,) * n for _ in ld.phases), pump_interface=False)
        else:
            ld = replace(ld, pmin=ld.pmax)
        loads.append(ld)
    probe = replace(
        instance, power=replace(instance.power, loads=tuple(loads)), water=WaterNetwork(), links=(),
        budget=0.0, lam=1.0, normalize_objective=False, name=f"{instance.name}-headroom",
    )
    sol = branch_and_bound(probe, config)
    out = {}
    for ld_id, lk in links.items():
        if sol.feasible:
            out[lk.pump] = tuple(
                instance.base_mva * sum(sol.schedule[f"pl:{ld_id}:{ph}:{k}"] for ph in lk.conductors)
                for k in range(n))
        else:
            out[lk.pump] = (0.0,) * n
    return out


@dataclass
class ComparisonReport:
    """Minimum-cost plans under joint and independent planning at fixed peak targets."""

    joint: Solution
    power: Solution
    water: Solution
    allowance: dict
    joint_plan: list
    independent_plan: list
    joint_cost: float
    independent_cost: float

    @property
    def status(self) -> str:
        if not (self.joint.feasible and self.power.feasible and self.water.feasible):
            return "infeasible-target"
        return "ok"

    def to_dict(self) -> dict:
        def num(v):
            return v if math.isfinite(v) else None

        return {
            "status": self.status,
            "joint": {"plan": self.joint_plan, "cost": num(self.joint_cost), "solver_status": self.joint.status},
            "independent": {
                "plan": self.independent_plan,
                "cost": num(self.independent_cost),
                "power_status": self.power.status,
                "water_status": self.water.status,
            },
            "pump_power_allowance": {k: list(v) for k, v in sorted(self.allowance.items())},
        }


def compare_joint_vs_independent(instance: JointNetwork, power_target: Optional[float] = None,
                                 water_target: Optional[float] = None,
                                 config: Optional[SolverConfig] = None, oracle: bool = False) -> ComparisonReport:
    """Cheapest plan when the utilities plan together versus separately.

    Both targets fix the served peak-hour demand (MW, L/s). Independently,
    the power utility grants the pump the allowance of
    :func:`pump_power_allowance`; the water network is planned under that
    allowance and the power network with the pump load fixed at it.
    """
    config = config or SolverConfig()
    target = with_peak_targets(instance, power_target, water_target)
    joint = minimum_cost_plan(target, config, oracle)
    allowance = pump_power_allowance(target, config)
    power = minimum_cost_plan(power_only(target, allowance), config, oracle)
    water = minimum_cost_plan(water_only(target, allowance), config, oracle)

    def cost(inst, sol):
        return plan_cost(inst, sol) if sol.feasible else math.inf

    independent = costly_components(target, power) + costly_components(target, water)
    order = [c.id for c in expansion_candidates(target)]
    return ComparisonReport(
        joint=joint, power=power, water=water, allowance=allowance,
        joint_plan=costly_components(target, joint) if joint.feasible else [],
        independent_plan=sorted(independent, key=order.index),
        joint_cost=cost(target, joint),
        independent_cost=cost(power_only(target, allowance), power) + cost(water_only(target, allowance), water),
    )


__all__ = [
    "SweepRow", "SweepResult", "SWEEP_COLUMNS", "DEFAULT_BUDGETS", "parse_budgets", "budget_sweep",
    "experiment1", "experiment2", "peak_served", "demand_profiles_csv", "minimum_cost_plan", "plan_cost",
    "costly_components", "pump_power_allowance", "ComparisonReport", "compare_joint_vs_independent",
]
