"""Instance validation: every invariant violation is reported, nothing raises."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .model import PHASES, JointNetwork


@dataclass(frozen=True)
class Violation:
    entity: str
    rule: str
    detail: str = ""

    def __str__(self) -> str:
        msg = f"{self.entity}: {self.rule}"
        return f"{msg} ({self.detail})" if self.detail else msg


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def __len__(self) -> int:
        return len(self.violations)

    def rules(self) -> list[str]:
        return [v.rule for v in self.violations]

    def add(self, entity: str, rule: str, detail: str = "") -> None:
        self.violations.append(Violation(entity, rule, detail))

    def __str__(self) -> str:
        if self.ok:
            return "valid"
        return "\n".join(str(v) for v in self.violations)


class InvalidInstance(ValueError):
    def __init__(self, report: ValidationReport):
        super().__init__(str(report))
        self.report = report


def _shape(rep, ent, name, series, n_rows, n_cols):
    if len(series) != n_rows or any(len(r) != n_cols for r in series):
        rep.add(ent, "shape mismatch", f"{name} must be {n_rows}x{n_cols}")
        return False
    return True


def _phases(rep, ent, phases, allowed=PHASES):
    if not phases or len(set(phases)) != len(phases) or any(p not in allowed for p in phases):
        rep.add(ent, "invalid phases", ",".join(phases))
        return False
    return True


def validate(inst: JointNetwork) -> ValidationReport:
    rep = ValidationReport()
    tg = inst.time_grid
    if tg.n_points < 2:
        rep.add("time_grid", "time grid too short", f"K={tg.n_points}")
    if any(s <= 0 for s in tg.steps):
        rep.add("time_grid", "nonpositive time step")
    nk = max(tg.n_intervals, 0)
    npt = tg.n_points

    if not 0.0 <= inst.lam <= 1.0:
        rep.add("instance", "lambda out of [0,1]", str(inst.lam))
    if inst.budget < 0:
        rep.add("instance", "negative budget", str(inst.budget))
    if inst.peak_interval is not None and not 1 <= inst.peak_interval <= nk:
        rep.add("instance", "peak interval out of range", str(inst.peak_interval))

    pw, wt = inst.power, inst.water
    for kind, items in (
        ("bus", pw.buses), ("branch", pw.branches), ("generator", pw.generators),
        ("storage", pw.storages), ("load", pw.loads), ("junction", wt.junctions),
        ("pipe", wt.pipes), ("pump", wt.pumps), ("tank", wt.tanks),
        ("reservoir", wt.reservoirs), ("demand", wt.demands),
    ):
        for key, count in Counter(x.id for x in items).items():
            if count > 1:
                rep.add(f"{kind} {key}", "duplicate id")

    # power -----------------------------------------------------------------
    buses = {b.id: b for b in pw.buses}
    for b in pw.buses:
        ent = f"bus {b.id}"
        if not _phases(rep, ent, b.phases):
            continue
        if _shape(rep, ent, "vmin", b.vmin, len(b.phases), nk) and _shape(
            rep, ent, "vmax", b.vmax, len(b.phases), nk
        ):
            for lo_row, hi_row in zip(b.vmin, b.vmax):
                if any(not (0 < lo <= hi) for lo, hi in zip(lo_row, hi_row)):
                    rep.add(ent, "voltage bounds", "need 0 < vmin <= vmax")
                    break

    def _attached(ent, bus_id, phases):
        bus = buses.get(bus_id)
        if bus is None:
            rep.add(ent, "dangling reference", f"bus {bus_id}")
            return False
        if not _phases(rep, ent, phases, bus.phases):
            return False
        return True

    for br in pw.branches:
        ent = f"branch {br.id}"
        fb, tb = buses.get(br.from_bus), buses.get(br.to_bus)
        if fb is None or tb is None:
            rep.add(ent, "dangling reference", f"{br.from_bus}->{br.to_bus}")
            continue
        if fb.phases != tb.phases:
            rep.add(ent, "phase mismatch")
            continue
        n = len(fb.phases)
        for name, mat in (("y", br.y), ("yc_from", br.yc_from), ("yc_to", br.yc_to)):
            if len(mat) != n or any(len(r) != n for r in mat):
                rep.add(ent, "admittance shape", f"{name} must be {n}x{n}")
        if br.smax is not None and _shape(rep, ent, "smax", br.smax, n, nk):
            if any(v < 0 for row in br.smax for v in row):
                rep.add(ent, "negative thermal limit")

    for g in pw.generators:
        ent = f"generator {g.id}"
        if not _attached(ent, g.bus, g.phases):
            continue
        n = len(g.phases)
        shapes = all(
            _shape(rep, ent, nm, s, n, nk)
            for nm, s in (("pmin", g.pmin), ("pmax", g.pmax), ("qmin", g.qmin), ("qmax", g.qmax))
        )
        if shapes:
            for lo, hi in ((g.pmin, g.pmax), (g.qmin, g.qmax)):
                if any(a > b for ra, rb in zip(lo, hi) for a, b in zip(ra, rb)):
                    rep.add(ent, "generator bounds order")
                    break
        if g.cost < 0:
            rep.add(ent, "negative cost")
        if g.status not in ("fixed_on", "free"):
            rep.add(ent, "unknown status mode", g.status)

    for s in pw.storages:
        ent = f"storage {s.id}"
        _attached(ent, s.bus, s.phases)
        if min(s.s_rating, s.p_charge_max, s.p_discharge_max, s.e_max) < 0:
            rep.add(ent, "negative capacity")
        if not (0 < s.eta_c <= 1) or not (0 < s.eta_d <= 1):
            rep.add(ent, "efficiency out of (0,1]")
        if not 0 <= s.e_init <= s.e_max:
            rep.add(ent, "initial energy out of range")
        if s.cost < 0:
            rep.add(ent, "negative cost")

    links_by_load = Counter(link.load for link in inst.links)
    for ld in pw.loads:
        ent = f"load {ld.id}"
        if not _attached(ent, ld.bus, ld.phases):
            continue
        n = len(ld.phases)
        if all(_shape(rep, ent, nm, s, n, nk) for nm, s in (("pmax", ld.pmax), ("qmax", ld.qmax), ("pmin", ld.pmin))):
            if any(v < 0 for row in ld.pmax for v in row):
                rep.add(ent, "negative demand")
            if any(a < 0 or a > b + 1e-12 for ra, rb in zip(ld.pmin, ld.pmax) for a, b in zip(ra, rb)):
                rep.add(ent, "demand bounds order")
        if ld.pump_interface and wt.junctions and links_by_load[ld.id] != 1:
            rep.add(ent, "unlinked pump-interface load" if links_by_load[ld.id] == 0 else "load linked twice")

    # water -----------------------------------------------------------------
    juncs = {j.id: j for j in wt.junctions}
    for j in wt.junctions:
        ent = f"junction {j.id}"
        if len(j.hmin) != npt or len(j.hmax) != npt:
            rep.add(ent, "shape mismatch", f"head bounds need {npt} points")
            continue
        if any(lo > hi for lo, hi in zip(j.hmin, j.hmax)):
            rep.add(ent, "head bounds order")
        if any(j.elevation > lo + 1e-12 for lo in j.hmin):
            rep.add(ent, "elevation above head bound")

    def _node(ent, jid):
        if jid not in juncs:
            rep.add(ent, "dangling reference", f"junction {jid}")
            return False
        return True

    tanks = {t.id: t for t in wt.tanks}
    connectors = Counter()
    for p in wt.pipes:
        ent = f"pipe {p.id}"
        _node(ent, p.from_node)
        _node(ent, p.to_node)
        if p.length <= 0 or p.resistance <= 0:
            rep.add(ent, "nonpositive length or resistance")
        if p.qmin > p.qmax or p.qmin > 0 or p.qmax < 0:
            rep.add(ent, "pipe flow bounds", "need qmin <= 0 <= qmax")
        if p.cost < 0:
            rep.add(ent, "negative cost")
        if p.tank is not None:
            tk = tanks.get(p.tank)
            if tk is None:
                rep.add(ent, "dangling reference", f"tank {p.tank}")
            else:
                connectors[p.tank] += 1
                if not p.expandable or not tk.expandable:
                    rep.add(ent, "connector of non-expandable tank")
                elif tk.junction not in (p.from_node, p.to_node):
                    rep.add(ent, "connector does not touch tank junction")

    for pu in wt.pumps:
        ent = f"pump {pu.id}"
        _node(ent, pu.from_node)
        _node(ent, pu.to_node)
        if not pu.a < 0 or not pu.c > 0:
            rep.add(ent, "pump curve", "need a < 0 < c")
        if not 0 < pu.eps <= pu.qmax:
            rep.add(ent, "pump minimum flow", "need 0 < eps <= qmax")
        elif pu.a < 0 < pu.c and min(pu.head_gain(pu.eps), pu.head_gain(pu.qmax)) <= 0:
            # concave curve: positive at both ends means positive on [eps, qmax]
            rep.add(ent, "pump head gain nonpositive")
        if pu.alpha < 0 or pu.mu < 0:
            rep.add(ent, "negative power coefficient")
        if pu.cost < 0:
            rep.add(ent, "negative cost")
        if pu.power_cap is not None and len(pu.power_cap) != nk:
            rep.add(ent, "shape mismatch", "power_cap")
        if pw.buses and inst.link_for_pump(pu.id) is None and pu.power_cap is None:
            rep.add(ent, "unlinked pump")

    for t in wt.tanks:
        ent = f"tank {t.id}"
        _node(ent, t.junction)
        if t.area <= 0:
            rep.add(ent, "nonpositive tank area")
        if not 0 <= t.v_init <= t.v_max:
            rep.add(ent, "initial volume out of range")
        if t.expandable:
            if t.v_init != 0:
                rep.add(ent, "expandable tank not empty")
            if connectors[t.id] != 1:
                rep.add(ent, "expandable tank needs one connector pipe")
        if t.cost < 0:
            rep.add(ent, "negative cost")
        j = juncs.get(t.junction)
        if j is not None and len(j.hmin) == npt:
            top = j.elevation + t.v_max / t.area if t.area > 0 else j.elevation
            if any(lo > top + 1e-9 for lo in j.hmin):
                rep.add(ent, "tank head range empty")

    for r in wt.reservoirs:
        ent = f"reservoir {r.id}"
        if _node(ent, r.junction):
            j = juncs[r.junction]
            if len(j.hmin) == npt and any(not lo - 1e-9 <= r.head <= hi + 1e-9 for lo, hi in zip(j.hmin, j.hmax)):
                rep.add(ent, "reservoir head outside junction bounds")

    for d in wt.demands:
        ent = f"demand {d.id}"
        _node(ent, d.junction)
        if len(d.qmax) != nk or len(d.qmin) != nk:
            rep.add(ent, "shape mismatch", f"need {nk} intervals")
        elif any(v < 0 for v in d.qmax) or any(a < 0 or a > b + 1e-12 for a, b in zip(d.qmin, d.qmax)):
            rep.add(ent, "negative demand" if any(v < 0 for v in d.qmax) else "demand bounds order")

    # interdependencies --------------------------------------------------------
    pumps = {p.id for p in wt.pumps}
    loads = {ld.id: ld for ld in pw.loads}
    for key, count in Counter(link.pump for link in inst.links).items():
        if count > 1:
            rep.add(f"pump {key}", "pump linked twice")
    for link in inst.links:
        ent = f"link {link.pump}->{link.load}"
        ld = loads.get(link.load)
        if link.pump not in pumps or ld is None:
            rep.add(ent, "dangling interdependency")
            continue
        if not ld.pump_interface:
            rep.add(ent, "link to non-interface load")
        if not link.conductors or any(c not in ld.phases for c in link.conductors):
            rep.add(ent, "invalid conductors")
        if not 0 < link.power_factor <= 1:
            rep.add(ent, "power factor out of (0,1]")
    return rep


def require_valid(inst: JointNetwork) -> None:
    rep = validate(inst)
    if not rep.ok:
        raise InvalidInstance(rep)
