"""Constraint builders for the unbalanced power distribution network.

Voltages are rectangular, ``V = e + j f`` per phase, so every law here is a
polynomial of degree at most two. Power quantities live on intervals: index
``k`` is the interval ending at time point ``k + 1``. Storage energy lives on
time points.

Variable names (tuples, see :mod:`jointplan.system`)::

    ("e"|"f", bus, phase, k)           voltage parts
    ("p"|"q", branch, end, phase, k)    flow leaving the ``end`` bus
    ("pg"|"qg", gen, phase, k), ("zg", gen, k), ("x", "generator", gen)
    ("pc"|"pd"|"qb", st, k), ("zb", st, k), ("soc", st, t), ("x", "storage", st)
    ("pl", load, phase, k)             served active power
"""
from __future__ import annotations

import math
from collections import defaultdict

import numpy as np

from .model import Branch, Bus, Generator, JointNetwork, Load, Storage
from .system import (
    EQ, LE, EXPANSION, STATUS_GENERATOR, STATUS_STORAGE, ConstraintSet, Row, VariableSpace,
)

FROM, TO = "from", "to"


def _ends(branch: Branch):
    """(end, own bus, other bus, own shunt) for both flow directions."""
    return ((FROM, branch.from_bus, branch.to_bus, branch.yc_from),
            (TO, branch.to_bus, branch.from_bus, branch.yc_to))


def load_reactive_ratio(inst: JointNetwork, load: Load, p: int, k: int) -> float:
    """Reactive/active ratio held fixed when a load is shed."""
    if load.pump_interface:
        link = next((lk for lk in inst.links if lk.load == load.id), None)
        if link is not None:
            pf = link.power_factor
            return math.sqrt(max(0.0, 1.0 - pf * pf)) / pf
    pmax = load.pmax[p][k]
    return load.qmax[p][k] / pmax if pmax > 0 else 0.0


def pump_load_capacity(inst: JointNetwork, load: Load) -> dict[str, float]:
    """Upper bound on per-conductor active power of a pump-interface load."""
    caps = {ph: 0.0 for ph in load.phases}
    for link in inst.links:
        if link.load != load.id:
            continue
        pump = inst.pump(link.pump)
        total = (pump.alpha * pump.qmax + pump.mu) / inst.base_mva
        for ph in link.conductors:
            caps[ph] += total
    return caps


def _flow_limit(inst: JointNetwork, branch: Branch, end: str, p: int) -> float:
    """|S| bound implied by voltage and admittance bounds."""
    _, own, other, shunt = next(e for e in _ends(branch) if e[0] == end)
    own_bus, other_bus = inst.bus(own), inst.bus(other)
    vo = max(max(r) for r in own_bus.vmax)
    vt = max(max(r) for r in other_bus.vmax)
    y = np.asarray(branch.y, dtype=complex)
    ys = y + np.asarray(shunt, dtype=complex)
    current = vo * np.abs(ys[p]).sum() + vt * np.abs(y[p]).sum()
    return vo * current


def declare_power_variables(vs: VariableSpace, inst: JointNetwork) -> None:
    n = inst.time_grid.n_intervals
    pts = inst.time_grid.n_points
    for bus in inst.power.buses:
        for p, ph in enumerate(bus.phases):
            vmax = max(bus.vmax[p])
            angle = -2.0 * math.pi / 3.0 * "abc".index(ph)
            for k in range(n):
                if bus.source:
                    e, f = math.cos(angle), math.sin(angle)
                    vs.add(("e", bus.id, ph, k), e, e, tag="reference voltage")
                    vs.add(("f", bus.id, ph, k), f, f, tag="reference voltage")
                else:
                    vs.add(("e", bus.id, ph, k), -vmax, vmax, tag="voltage magnitude")
                    vs.add(("f", bus.id, ph, k), -vmax, vmax, tag="voltage magnitude")
    for br in inst.power.branches:
        for end, own, _, _ in _ends(br):
            for p, ph in enumerate(inst.bus(own).phases):
                lim = _flow_limit(inst, br, end, p)
                for k in range(n):
                    if br.smax is not None:
                        lim_k = min(lim, br.smax[p][k])
                    else:
                        lim_k = lim
                    vs.add(("p", br.id, end, ph, k), -lim_k, lim_k, tag="thermal limit")
                    vs.add(("q", br.id, end, ph, k), -lim_k, lim_k, tag="thermal limit")
    for g in inst.power.generators:
        gated = g.expandable or g.status != "fixed_on"
        if g.expandable:
            vs.add(("x", "generator", g.id), 0, 1, binary=True, role=EXPANSION, tag="expansion")
        for p, ph in enumerate(g.phases):
            for k in range(n):
                lo_p, hi_p = min(g.pmin[p][k], 0.0), max(g.pmax[p][k], 0.0)
                lo_q, hi_q = min(g.qmin[p][k], 0.0), max(g.qmax[p][k], 0.0)
                if not gated:
                    lo_p, hi_p, lo_q, hi_q = g.pmin[p][k], g.pmax[p][k], g.qmin[p][k], g.qmax[p][k]
                vs.add(("pg", g.id, ph, k), lo_p, hi_p, tag="generator limits")
                vs.add(("qg", g.id, ph, k), lo_q, hi_q, tag="generator limits")
        if gated:
            for k in range(n):
                col = vs.add(("zg", g.id, k), 0, 1, binary=True, role=STATUS_GENERATOR, tag="generator status")
                if all(g.pmin[p][k] <= 0 <= g.pmax[p][k] and g.qmin[p][k] <= 0 <= g.qmax[p][k]
                       for p in range(len(g.phases))):
                    vs.dominant[col] = True
                    vs.gate[col] = vs.get(("x", "generator", g.id)) if g.expandable else -1
    for st in inst.power.storages:
        if st.expandable:
            vs.add(("x", "storage", st.id), 0, 1, binary=True, role=EXPANSION, tag="expansion")
        for k in range(n):
            vs.add(("pc", st.id, k), 0.0, st.p_charge_max, tag="storage rates")
            vs.add(("pd", st.id, k), 0.0, st.p_discharge_max, tag="storage rates")
            vs.add(("qb", st.id, k), -st.s_rating, st.s_rating, tag="storage reactive limit")
            col = vs.add(("zb", st.id, k), 0, 1, binary=True, role=STATUS_STORAGE, tag="storage status")
            vs.dominant[col] = True
            vs.gate[col] = vs.get(("x", "storage", st.id)) if st.expandable else -1
        for t in range(pts):
            if t == 0:
                vs.add(("soc", st.id, t), st.e_init, st.e_init, tag="storage initial energy")
            else:
                vs.add(("soc", st.id, t), 0.0, st.e_max, tag="storage energy")
    for ld in inst.power.loads:
        caps = pump_load_capacity(inst, ld) if ld.pump_interface else None
        linked = any(lk.load == ld.id for lk in inst.links)
        for p, ph in enumerate(ld.phases):
            for k in range(n):
                if caps is not None and linked:
                    lo, hi = 0.0, caps[ph]
                else:
                    lo, hi = ld.pmin[p][k], ld.pmax[p][k]
                vs.add(("pl", ld.id, ph, k), lo, hi, tag="load shedding")


def voltage_magnitude_bounds(vs: VariableSpace, inst: JointNetwork, bus: Bus) -> ConstraintSet:
    """``vmin^2 <= e^2 + f^2 <= vmax^2`` per phase and interval."""
    out = ConstraintSet()
    for p, ph in enumerate(bus.phases):
        for k in range(inst.time_grid.n_intervals):
            e, f = vs[("e", bus.id, ph, k)], vs[("f", bus.id, ph, k)]
            lo, hi = bus.vmin[p][k], bus.vmax[p][k]
            out.rows.append(Row(LE, "voltage magnitude", -hi * hi).add_bil(e, e, 1.0).add_bil(f, f, 1.0))
            out.rows.append(Row(LE, "voltage magnitude", lo * lo).add_bil(e, e, -1.0).add_bil(f, f, -1.0))
    return out


def _incidence(inst: JointNetwork):
    gens, stors, loads, flows = (defaultdict(list) for _ in range(4))
    for g in inst.power.generators:
        gens[g.bus].append(g)
    for s in inst.power.storages:
        stors[s.bus].append(s)
    for ld in inst.power.loads:
        loads[ld.bus].append(ld)
    for br in inst.power.branches:
        for end, own, _, _ in _ends(br):
            flows[own].append((br, end))
    return gens, stors, loads, flows


def kcl_balance(vs: VariableSpace, inst: JointNetwork, bus: Bus, incidence=None) -> ConstraintSet:
    """Generation minus storage withdrawal minus demand equals line outflow."""
    gens, stors, loads, flows = incidence or _incidence(inst)
    out = ConstraintSet()
    for ph in bus.phases:
        for k in range(inst.time_grid.n_intervals):
            rp, rq = Row(EQ, "kcl"), Row(EQ, "kcl")
            for g in gens[bus.id]:
                if ph in g.phases:
                    rp.add_lin(vs[("pg", g.id, ph, k)], 1.0)
                    rq.add_lin(vs[("qg", g.id, ph, k)], 1.0)
            for st in stors[bus.id]:
                if ph in st.phases:
                    share = 1.0 / len(st.phases)
                    rp.add_lin(vs[("pc", st.id, k)], -share).add_lin(vs[("pd", st.id, k)], share)
                    rq.add_lin(vs[("qb", st.id, k)], -share)
            for ld in loads[bus.id]:
                if ph in ld.phases:
                    p = ld.phases.index(ph)
                    col = vs[("pl", ld.id, ph, k)]
                    rp.add_lin(col, -1.0)
                    rq.add_lin(col, -load_reactive_ratio(inst, ld, p, k))
            for br, end in flows[bus.id]:
                rp.add_lin(vs[("p", br.id, end, ph, k)], -1.0)
                rq.add_lin(vs[("q", br.id, end, ph, k)], -1.0)
            out.rows += [rp, rq]
    return out


def _add_power_product(rp: Row, rq: Row, ep, fp, eq, fq, y: complex, sign: float) -> None:
    """Append ``-sign * V_p conj(y V_q)`` to the (P, Q) residual rows."""
    g, b = y.real, y.imag
    # Re: g(ep eq + fp fq) + b(fp eq - ep fq)
    rp.add_bil(ep, eq, -sign * g).add_bil(fp, fq, -sign * g)
    rp.add_bil(fp, eq, -sign * b).add_bil(ep, fq, sign * b)
    # Im: g(fp eq - ep fq) - b(ep eq + fp fq)
    rq.add_bil(fp, eq, -sign * g).add_bil(ep, fq, sign * g)
    rq.add_bil(ep, eq, sign * b).add_bil(fp, fq, sign * b)


def ohms_law(vs: VariableSpace, inst: JointNetwork, branch: Branch) -> ConstraintSet:
    """``S_ij = diag(V_i V_i^H (Y + Yc)^H - V_i V_j^H Y^H)``, both directions."""
    out = ConstraintSet()
    y = np.asarray(branch.y, dtype=complex)
    for end, own, other, shunt in _ends(branch):
        ys = y + np.asarray(shunt, dtype=complex)
        phases = inst.bus(own).phases
        for p, ph in enumerate(phases):
            for k in range(inst.time_grid.n_intervals):
                rp = Row(EQ, "ohms law").add_lin(vs[("p", branch.id, end, ph, k)], 1.0)
                rq = Row(EQ, "ohms law").add_lin(vs[("q", branch.id, end, ph, k)], 1.0)
                ep, fp = vs[("e", own, ph, k)], vs[("f", own, ph, k)]
                for q, phq in enumerate(phases):
                    eo, fo = vs[("e", own, phq, k)], vs[("f", own, phq, k)]
                    et, ft = vs[("e", other, phq, k)], vs[("f", other, phq, k)]
                    _add_power_product(rp, rq, ep, fp, eo, fo, complex(ys[p, q]), 1.0)
                    _add_power_product(rp, rq, ep, fp, et, ft, complex(y[p, q]), -1.0)
                rp.bil = _merge(rp.bil)
                rq.bil = _merge(rq.bil)
                out.rows += [rp, rq]
    return out


def _merge(terms):
    acc: dict[tuple[int, int], float] = {}
    for i, j, c in terms:
        acc[(i, j)] = acc.get((i, j), 0.0) + c
    return [(i, j, c) for (i, j), c in acc.items() if c != 0.0]


def thermal_limits(vs: VariableSpace, inst: JointNetwork, branch: Branch) -> ConstraintSet:
    """``P^2 + Q^2 <= smax^2`` both directions; nothing when unbounded."""
    out = ConstraintSet()
    if branch.smax is None:
        return out
    for end, own, _, _ in _ends(branch):
        for p, ph in enumerate(inst.bus(own).phases):
            for k in range(inst.time_grid.n_intervals):
                cp, cq = vs[("p", branch.id, end, ph, k)], vs[("q", branch.id, end, ph, k)]
                s = branch.smax[p][k]
                out.rows.append(Row(LE, "thermal limit", -s * s).add_bil(cp, cp, 1.0).add_bil(cq, cq, 1.0))
    return out


def generator_constraints(vs: VariableSpace, inst: JointNetwork, gen: Generator) -> ConstraintSet:
    """Status-scaled injection box and expansion gating of the status."""
    out = ConstraintSet()
    gated = ("zg", gen.id, 0) in vs
    if not gated:
        return out  # the box is carried by the variable bounds
    for k in range(inst.time_grid.n_intervals):
        z = vs[("zg", gen.id, k)]
        for p, ph in enumerate(gen.phases):
            for name, lo, hi in (("pg", gen.pmin, gen.pmax), ("qg", gen.qmin, gen.qmax)):
                col = vs[(name, gen.id, ph, k)]
                out.rows.append(Row(LE, "generator limits").add_lin(col, 1.0).add_lin(z, -hi[p][k]))
                out.rows.append(Row(LE, "generator limits").add_lin(z, lo[p][k]).add_lin(col, -1.0))
        if gen.expandable:
            out.rows.append(Row(LE, "generator expansion").add_lin(z, 1.0)
                            .add_lin(vs[("x", "generator", gen.id)], -1.0))
    return out


def storage_constraints(vs: VariableSpace, inst: JointNetwork, st: Storage) -> ConstraintSet:
    """Inverter rating, energy balance and recovery, rate caps, complementarity."""
    out = ConstraintSet()
    steps = inst.time_grid.steps
    n = inst.time_grid.n_intervals
    s2 = st.s_rating ** 2
    for k in range(n):
        pc, pd, qb = vs[("pc", st.id, k)], vs[("pd", st.id, k)], vs[("qb", st.id, k)]
        z = vs[("zb", st.id, k)]
        out.rows.append(
            Row(LE, "storage apparent limit").add_bil(pc, pc, 1.0).add_bil(pd, pd, 1.0)
            .add_bil(pc, pd, -2.0).add_bil(qb, qb, 1.0).add_bil(z, z, -s2)
        )
        out.rows.append(Row(LE, "storage reactive limit").add_lin(qb, 1.0).add_lin(z, -st.s_rating))
        out.rows.append(Row(LE, "storage reactive limit").add_lin(qb, -1.0).add_lin(z, -st.s_rating))
        e0, e1 = vs[("soc", st.id, k)], vs[("soc", st.id, k + 1)]
        out.rows.append(
            Row(EQ, "storage energy").add_lin(e1, 1.0).add_lin(e0, -1.0)
            .add_lin(pc, -steps[k] * st.eta_c).add_lin(pd, steps[k] / st.eta_d)
        )
        out.rows.append(Row(LE, "storage rates").add_lin(pc, 1.0).add_lin(z, -st.p_charge_max))
        out.rows.append(Row(LE, "storage rates").add_lin(pd, 1.0).add_lin(z, -st.p_discharge_max))
        out.rows.append(Row(EQ, "storage complementarity", relaxed=True).add_bil(pc, pd, 1.0))
        if st.expandable:
            out.rows.append(Row(LE, "storage expansion").add_lin(z, 1.0)
                            .add_lin(vs[("x", "storage", st.id)], -1.0))
    out.rows.append(
        Row(LE, "storage recovery").add_lin(vs[("soc", st.id, 0)], 1.0).add_lin(vs[("soc", st.id, n)], -1.0)
    )
    return out


def build_power(vs: VariableSpace, inst: JointNetwork) -> ConstraintSet:
    out = ConstraintSet()
    inc = _incidence(inst)
    for bus in inst.power.buses:
        out += voltage_magnitude_bounds(vs, inst, bus)
        out += kcl_balance(vs, inst, bus, inc)
    for br in inst.power.branches:
        out += ohms_law(vs, inst, br)
        out += thermal_limits(vs, inst, br)
    for g in inst.power.generators:
        out += generator_constraints(vs, inst, g)
    for st in inst.power.storages:
        out += storage_constraints(vs, inst, st)
    return out
