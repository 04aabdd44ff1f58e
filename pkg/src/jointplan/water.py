"""Constraint builders for the water distribution network.

Heads and tank volumes live on time points; flows, withdrawals and pump
states on intervals. Interval ``k`` uses the heads of its end point
``k + 1``. Water quantities are in SI: m, L/s, m^3.

Variable names::

    ("h", junction, t)                  hydraulic head
    ("w", edge, k)                      flow along a pipe or pump, from -> to
    ("x", "pipe"|"pump"|"tank", id)     expansion decisions
    ("zp", pump, k), ("gain", pump, k)  pump status and head gain
    ("qd", demand, k), ("qr", reservoir, k), ("qt", tank, k)
    ("vol", tank, t)
"""
from __future__ import annotations

from collections import defaultdict

from .kernels import HW_EXP
from .model import VOLUME_PER_FLOW_HOUR, JointNetwork, Junction, Pipe, Pump, Tank
from .system import EQ, LE, EXPANSION, STATUS_PUMP, Bound, ConstraintSet, Row, VariableSpace


def hazen_williams_headloss(q: float, length: float, resistance: float) -> float:
    """Head loss ``L r q |q|^0.852`` in metres for a flow in L/s."""
    return length * resistance * q * abs(q) ** HW_EXP


def pump_gain_max(pump: Pump) -> float:
    """Largest head gain on ``[0, qmax]`` (at z = 1)."""
    q = min(max(-pump.b / (2.0 * pump.a), 0.0), pump.qmax)
    return max(pump.head_gain(q), pump.head_gain(0.0), pump.head_gain(pump.qmax))


def pipe_gate(pipe: Pipe) -> tuple | None:
    """Name of the expansion variable gating a pipe, or None for existing pipes."""
    if pipe.tank is not None:
        return ("x", "tank", pipe.tank)
    if pipe.expandable:
        return ("x", "pipe", pipe.id)
    return None


def _edge_capacity(inst: JointNetwork) -> dict[str, float]:
    cap: dict[str, float] = defaultdict(float)
    for pi in inst.water.pipes:
        m = max(abs(pi.qmin), abs(pi.qmax))
        cap[pi.from_node] += m
        cap[pi.to_node] += m
    for pu in inst.water.pumps:
        cap[pu.from_node] += pu.qmax
        cap[pu.to_node] += pu.qmax
    return cap


def declare_water_variables(vs: VariableSpace, inst: JointNetwork) -> None:
    n = inst.time_grid.n_intervals
    pts = inst.time_grid.n_points
    wt = inst.water
    pinned = {r.junction: r.head for r in wt.reservoirs}
    for j in wt.junctions:
        for t in range(pts):
            if j.id in pinned:
                vs.add(("h", j.id, t), pinned[j.id], pinned[j.id], tag="reservoir head")
            else:
                vs.add(("h", j.id, t), j.hmin[t], j.hmax[t], tag="head bounds")
    for tk in wt.tanks:
        if tk.expandable:
            vs.add(("x", "tank", tk.id), 0, 1, binary=True, role=EXPANSION, tag="expansion")
    for pi in wt.pipes:
        gate = pipe_gate(pi)
        if gate is not None and gate not in vs:
            vs.add(gate, 0, 1, binary=True, role=EXPANSION, tag="expansion")
        for k in range(n):
            vs.add(("w", pi.id, k), pi.qmin, pi.qmax, tag="flow bounds")
    for pu in wt.pumps:
        if pu.expandable:
            vs.add(("x", "pump", pu.id), 0, 1, binary=True, role=EXPANSION, tag="expansion")
        gmax = pump_gain_max(pu)
        for k in range(n):
            vs.add(("w", pu.id, k), 0.0, pu.qmax, tag="pump flow")
            vs.add(("zp", pu.id, k), 0, 1, binary=True, role=STATUS_PUMP, tag="pump status")
            vs.add(("gain", pu.id, k), 0.0, gmax, tag="pump head gain")
    cap = _edge_capacity(inst)
    for d in wt.demands:
        for k in range(n):
            vs.add(("qd", d.id, k), d.qmin[k], d.qmax[k], tag="water demand")
    for r in wt.reservoirs:
        for k in range(n):
            vs.add(("qr", r.id, k), 0.0, cap[r.junction], tag="reservoir supply")
    for tk in wt.tanks:
        c = cap[tk.junction]
        for k in range(n):
            vs.add(("qt", tk.id, k), -c, c, tag="tank exchange")
        for t in range(pts):
            if t == 0:
                vs.add(("vol", tk.id, t), tk.v_init, tk.v_init, tag="tank initial volume")
            else:
                vs.add(("vol", tk.id, t), 0.0, tk.v_max, tag="tank capacity")


def head_bounds(vs: VariableSpace, inst: JointNetwork, junction: Junction) -> ConstraintSet:
    """Head bounds per time point; carried as variable bounds."""
    out = ConstraintSet()
    for t in range(inst.time_grid.n_points):
        col = vs[("h", junction.id, t)]
        out.bounds.append(Bound(col, vs.lo[col], vs.hi[col], vs.bound_tag[col]))
    return out


def flow_bounds(vs: VariableSpace, inst: JointNetwork, pipe: Pipe) -> ConstraintSet:
    """Plain bounds for existing pipes; ``qmin x <= q <= qmax x`` when gated."""
    out = ConstraintSet()
    gate = pipe_gate(pipe)
    for k in range(inst.time_grid.n_intervals):
        col = vs[("w", pipe.id, k)]
        if gate is None:
            out.bounds.append(Bound(col, pipe.qmin, pipe.qmax, "flow bounds"))
        else:
            x = vs[gate]
            out.rows.append(Row(LE, "flow bounds").add_lin(col, 1.0).add_lin(x, -pipe.qmax))
            out.rows.append(Row(LE, "flow bounds").add_lin(x, pipe.qmin).add_lin(col, -1.0))
    return out


def pipe_headloss(vs: VariableSpace, inst: JointNetwork, pipe: Pipe) -> ConstraintSet:
    """``h_i - h_j = L r q |q|^0.852`` for an existing pipe."""
    out = ConstraintSet()
    lr = pipe.length * pipe.resistance
    for k in range(inst.time_grid.n_intervals):
        out.rows.append(
            Row(EQ, "head loss").add_lin(vs[("h", pipe.from_node, k + 1)], 1.0)
            .add_lin(vs[("h", pipe.to_node, k + 1)], -1.0).add_hw(vs[("w", pipe.id, k)], -lr)
        )
    return out


def expansion_pipe_residual(vs: VariableSpace, inst: JointNetwork, pipe: Pipe) -> ConstraintSet:
    """``x (h_i - h_j) = L r q |q|^0.852``; with gated bounds, x = 0 decouples the heads."""
    out = ConstraintSet()
    lr = pipe.length * pipe.resistance
    x = vs[pipe_gate(pipe)]
    for k in range(inst.time_grid.n_intervals):
        out.rows.append(
            Row(EQ, "expansion head loss").add_bil(x, vs[("h", pipe.from_node, k + 1)], 1.0)
            .add_bil(x, vs[("h", pipe.to_node, k + 1)], -1.0).add_hw(vs[("w", pipe.id, k)], -lr)
        )
    return out


def pump_big_m(inst: JointNetwork, pump: Pump, t: int) -> tuple[float, float]:
    """Decoupling constants for ``h_to - h_from - G`` above and below zero."""
    hi_from, lo_from = _head_range(inst, pump.from_node, t)
    hi_to, lo_to = _head_range(inst, pump.to_node, t)
    slack = -min(0.0, pump.head_gain(pump.qmax))
    return (hi_to - lo_from) + slack, (hi_from - lo_to) + slack


def _head_range(inst: JointNetwork, jid: str, t: int) -> tuple[float, float]:
    for r in inst.water.reservoirs:
        if r.junction == jid:
            return r.head, r.head
    j = inst.junction(jid)
    return j.hmax[t], j.hmin[t]


def pump_constraints(vs: VariableSpace, inst: JointNetwork, pump: Pump) -> ConstraintSet:
    """Status-gated flow, concave head gain, big-M head coupling, expansion gating."""
    out = ConstraintSet()
    for k in range(inst.time_grid.n_intervals):
        q, z, g = vs[("w", pump.id, k)], vs[("zp", pump.id, k)], vs[("gain", pump.id, k)]
        hf, ht = vs[("h", pump.from_node, k + 1)], vs[("h", pump.to_node, k + 1)]
        out.rows.append(Row(LE, "pump flow").add_lin(z, pump.eps).add_lin(q, -1.0))
        out.rows.append(Row(LE, "pump flow").add_lin(q, 1.0).add_lin(z, -pump.qmax))
        out.rows.append(
            Row(EQ, "pump head gain").add_bil(q, q, pump.a).add_lin(q, pump.b)
            .add_lin(z, pump.c).add_lin(g, -1.0)
        )
        m_up, m_down = pump_big_m(inst, pump, k + 1)
        out.rows.append(
            Row(LE, "pump head coupling", -m_up).add_lin(ht, 1.0).add_lin(hf, -1.0)
            .add_lin(g, -1.0).add_lin(z, m_up)
        )
        out.rows.append(
            Row(LE, "pump head coupling", -m_down).add_lin(ht, -1.0).add_lin(hf, 1.0)
            .add_lin(g, 1.0).add_lin(z, m_down)
        )
        if pump.expandable:
            out.rows.append(Row(LE, "pump expansion").add_lin(z, 1.0).add_lin(vs[("x", "pump", pump.id)], -1.0))
    return out


def tank_constraints(vs: VariableSpace, inst: JointNetwork, tank: Tank) -> ConstraintSet:
    """Volume update, level-volume relation, recovery, and expansion gating."""
    out = ConstraintSet()
    steps = inst.time_grid.steps
    n = inst.time_grid.n_intervals
    elev = inst.junction(tank.junction).elevation
    for t in range(n + 1):
        out.rows.append(
            Row(EQ, "tank level", tank.area * elev).add_lin(vs[("vol", tank.id, t)], 1.0)
            .add_lin(vs[("h", tank.junction, t)], -tank.area)
        )
    for k in range(n):
        qt = vs[("qt", tank.id, k)]
        out.rows.append(
            Row(EQ, "tank volume").add_lin(vs[("vol", tank.id, k + 1)], 1.0)
            .add_lin(vs[("vol", tank.id, k)], -1.0).add_lin(qt, VOLUME_PER_FLOW_HOUR * steps[k])
        )
        if tank.expandable:
            x = vs[("x", "tank", tank.id)]
            cap = vs.hi[qt]
            out.rows.append(Row(LE, "tank expansion").add_lin(qt, 1.0).add_lin(x, -cap))
            out.rows.append(Row(LE, "tank expansion").add_lin(qt, -1.0).add_lin(x, -cap))
    out.rows.append(
        Row(LE, "tank recovery").add_lin(vs[("vol", tank.id, 0)], 1.0).add_lin(vs[("vol", tank.id, n)], -1.0)
    )
    return out


def _incidence(inst: JointNetwork):
    into, outof = defaultdict(list), defaultdict(list)
    for e in (*inst.water.pipes, *inst.water.pumps):
        outof[e.from_node].append(e.id)
        into[e.to_node].append(e.id)
    dem, res, tanks = defaultdict(list), defaultdict(list), defaultdict(list)
    for d in inst.water.demands:
        dem[d.junction].append(d.id)
    for r in inst.water.reservoirs:
        res[r.junction].append(r.id)
    for tk in inst.water.tanks:
        tanks[tk.junction].append(tk.id)
    return into, outof, dem, res, tanks


def flow_conservation(vs: VariableSpace, inst: JointNetwork, junction: Junction, incidence=None) -> ConstraintSet:
    """Inflow minus outflow equals demand minus reservoir and tank supply."""
    into, outof, dem, res, tanks = incidence or _incidence(inst)
    out = ConstraintSet()
    jid = junction.id
    for k in range(inst.time_grid.n_intervals):
        row = Row(EQ, "flow conservation")
        for e in into[jid]:
            row.add_lin(vs[("w", e, k)], 1.0)
        for e in outof[jid]:
            row.add_lin(vs[("w", e, k)], -1.0)
        for d in dem[jid]:
            row.add_lin(vs[("qd", d, k)], -1.0)
        for r in res[jid]:
            row.add_lin(vs[("qr", r, k)], 1.0)
        for tk in tanks[jid]:
            row.add_lin(vs[("qt", tk, k)], 1.0)
        out.rows.append(row)
    return out


def build_water(vs: VariableSpace, inst: JointNetwork) -> ConstraintSet:
    out = ConstraintSet()
    inc = _incidence(inst)
    for j in inst.water.junctions:
        out += head_bounds(vs, inst, j)
        out += flow_conservation(vs, inst, j, inc)
    for pi in inst.water.pipes:
        out += flow_bounds(vs, inst, pi)
        if pipe_gate(pi) is None:
            out += pipe_headloss(vs, inst, pi)
        else:
            out += expansion_pipe_residual(vs, inst, pi)
    for pu in inst.water.pumps:
        out += pump_constraints(vs, inst, pu)
    for tk in inst.water.tanks:
        out += tank_constraints(vs, inst, tk)
    return out
