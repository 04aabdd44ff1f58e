"""Pump electrical demand, the weighted-demand objective and the budget row."""
from __future__ import annotations

import numpy as np

from .model import JointNetwork, Link, expansion_candidates
from .system import EQ, LE, ConstraintSet, Row, VariableSpace


def pump_power(q: float, z: float, alpha: float, mu: float) -> float:
    """Active power ``alpha q + mu z`` drawn by a fixed-speed pump."""
    return alpha * q + mu * z


def pump_as_load(vs: VariableSpace, inst: JointNetwork, link: Link) -> ConstraintSet:
    """Pump power equals the active power summed over the linked conductors."""
    pump = inst.pump(link.pump)
    out = ConstraintSet()
    scale = 1.0 / inst.base_mva
    for k in range(inst.time_grid.n_intervals):
        row = Row(EQ, "pump as load")
        row.add_lin(vs[("w", pump.id, k)], pump.alpha * scale).add_lin(vs[("zp", pump.id, k)], pump.mu * scale)
        for ph in link.conductors:
            row.add_lin(vs[("pl", link.load, ph, k)], -1.0)
        out.rows.append(row)
    return out


def pump_power_cap(vs: VariableSpace, inst: JointNetwork, pump_id: str) -> ConstraintSet:
    """Fixed power allowance replacing the coupling in a water-only instance."""
    pump = inst.pump(pump_id)
    out = ConstraintSet()
    if pump.power_cap is None:
        return out
    scale = 1.0 / inst.base_mva
    for k in range(inst.time_grid.n_intervals):
        out.rows.append(
            Row(LE, "pump power cap", -pump.power_cap[k]).add_lin(vs[("w", pump.id, k)], pump.alpha * scale)
            .add_lin(vs[("zp", pump.id, k)], pump.mu * scale)
        )
    return out


def objective_weights(inst: JointNetwork) -> tuple[float, float]:
    """Per-unit weights on served power and served water.

    Raw ``(lambda, 1 - lambda)`` by default; with ``normalize_objective`` each
    term is divided by its largest per-interval nominal total.
    """
    lam = inst.lam
    wp, ww = lam, 1.0 - lam
    if inst.normalize_objective:
        n = inst.time_grid.n_intervals
        pmax = max((sum(row[k] for ld in inst.power.loads if not ld.pump_interface for row in ld.pmax)
                    for k in range(n)), default=0.0)
        qmax = max((sum(d.qmax[k] for d in inst.water.demands) for k in range(n)), default=0.0)
        wp = wp / pmax if pmax > 0 else wp
        ww = ww / qmax if qmax > 0 else ww
    return wp, ww


def objective(vs: VariableSpace, inst: JointNetwork) -> np.ndarray:
    """Gradient of the (maximised, linear) objective."""
    grad = np.zeros(len(vs))
    wp, ww = objective_weights(inst)
    for k in range(inst.time_grid.n_intervals):
        for ld in inst.power.loads:
            if ld.pump_interface:
                continue
            for ph in ld.phases:
                grad[vs[("pl", ld.id, ph, k)]] += wp
        for d in inst.water.demands:
            grad[vs[("qd", d.id, k)]] += ww
    return grad


def expansion_column(vs: VariableSpace, kind: str, cid: str) -> int:
    return vs[("x", kind, cid)]


def budget_constraint(vs: VariableSpace, inst: JointNetwork) -> ConstraintSet:
    """Total cost of built candidates at most the budget."""
    row = Row(LE, "budget", -inst.budget)
    for cand in expansion_candidates(inst):
        row.add_lin(expansion_column(vs, cand.kind, cand.id), cand.cost)
    return ConstraintSet(rows=[row])


def build_coupling(vs: VariableSpace, inst: JointNetwork) -> ConstraintSet:
    out = ConstraintSet()
    for link in inst.links:
        out += pump_as_load(vs, inst, link)
    for pump in inst.water.pumps:
        if inst.link_for_pump(pump.id) is None:
            out += pump_power_cap(vs, inst, pump.id)
    if expansion_candidates(inst):
        out += budget_constraint(vs, inst)
    return out
