"""Domain types for a joint power/water expansion-planning instance.

Everything here is immutable. Per-phase, per-interval quantities are stored
as tuples of tuples indexed ``[phase][interval]``; per-point water
quantities as flat tuples of length ``K``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

PHASES = ("a", "b", "c")

#: m^3 moved by 1 L/s over one hour
VOLUME_PER_FLOW_HOUR = 3.6

Matrix = tuple[tuple[complex, ...], ...]
PhaseSeries = tuple[tuple[float, ...], ...]


@dataclass(frozen=True)
class TimeGrid:
    points: tuple[float, ...]

    @property
    def steps(self) -> tuple[float, ...]:
        return tuple(b - a for a, b in zip(self.points[:-1], self.points[1:]))

    @property
    def n_points(self) -> int:
        return len(self.points)

    @property
    def n_intervals(self) -> int:
        return len(self.points) - 1


@dataclass(frozen=True)
class Bus:
    id: str
    phases: tuple[str, ...]
    vmin: PhaseSeries
    vmax: PhaseSeries
    source: bool = False


@dataclass(frozen=True)
class Branch:
    id: str
    from_bus: str
    to_bus: str
    y: Matrix
    yc_from: Matrix
    yc_to: Matrix
    smax: Optional[PhaseSeries] = None  # None: unbounded


@dataclass(frozen=True)
class Generator:
    id: str
    bus: str
    phases: tuple[str, ...]
    pmin: PhaseSeries
    pmax: PhaseSeries
    qmin: PhaseSeries
    qmax: PhaseSeries
    expandable: bool = False
    cost: float = 0.0
    # "fixed_on" pins the status of an existing unit to 1; "free" lets it float
    status: str = "fixed_on"


@dataclass(frozen=True)
class Storage:
    id: str
    bus: str
    phases: tuple[str, ...]
    s_rating: float
    p_charge_max: float
    p_discharge_max: float
    e_max: float
    eta_c: float
    eta_d: float
    e_init: float
    expandable: bool = False
    cost: float = 0.0


@dataclass(frozen=True)
class Load:
    """Power demand.

    ``pmax``/``qmax`` give the nominal complex demand per phase and interval;
    served power is sheddable down to ``pmin`` at the nominal power factor.
    """

    id: str
    bus: str
    phases: tuple[str, ...]
    pmax: PhaseSeries
    qmax: PhaseSeries
    pmin: PhaseSeries
    pump_interface: bool = False


@dataclass(frozen=True)
class Junction:
    id: str
    hmin: tuple[float, ...]
    hmax: tuple[float, ...]
    elevation: float


@dataclass(frozen=True)
class Pipe:
    id: str
    from_node: str
    to_node: str
    length: float
    resistance: float
    qmin: float
    qmax: float
    expandable: bool = False
    cost: float = 0.0
    # connector pipe of an expandable tank; shares the tank's build decision
    tank: Optional[str] = None


@dataclass(frozen=True)
class Pump:
    id: str
    from_node: str
    to_node: str
    a: float
    b: float
    c: float
    qmax: float
    alpha: float
    mu: float
    q_min_active: Optional[float] = None
    expandable: bool = False
    cost: float = 0.0
    # per-interval power cap; only used by single-network (decoupled) instances
    power_cap: Optional[tuple[float, ...]] = None

    @property
    def eps(self) -> float:
        return self.q_min_active if self.q_min_active is not None else 1e-3 * self.qmax

    def head_gain(self, q: float, z: float = 1.0) -> float:
        return self.a * q * q + self.b * q + self.c * z


@dataclass(frozen=True)
class Tank:
    id: str
    junction: str
    area: float
    v_init: float
    v_max: float
    expandable: bool = False
    cost: float = 0.0


@dataclass(frozen=True)
class Reservoir:
    id: str
    junction: str
    head: float


@dataclass(frozen=True)
class WaterDemand:
    id: str
    junction: str
    qmax: tuple[float, ...]
    qmin: tuple[float, ...]


@dataclass(frozen=True)
class Link:
    pump: str
    load: str
    conductors: tuple[str, ...]
    power_factor: float = 1.0


@dataclass(frozen=True)
class PowerNetwork:
    buses: tuple[Bus, ...] = ()
    branches: tuple[Branch, ...] = ()
    generators: tuple[Generator, ...] = ()
    storages: tuple[Storage, ...] = ()
    loads: tuple[Load, ...] = ()


@dataclass(frozen=True)
class WaterNetwork:
    junctions: tuple[Junction, ...] = ()
    pipes: tuple[Pipe, ...] = ()
    pumps: tuple[Pump, ...] = ()
    tanks: tuple[Tank, ...] = ()
    reservoirs: tuple[Reservoir, ...] = ()
    demands: tuple[WaterDemand, ...] = ()


@dataclass(frozen=True)
class JointNetwork:
    time_grid: TimeGrid
    power: PowerNetwork = field(default_factory=PowerNetwork)
    water: WaterNetwork = field(default_factory=WaterNetwork)
    links: tuple[Link, ...] = ()
    budget: float = 0.0
    lam: float = 1.0
    base_mva: float = 1.0
    base_kv: float = 1.0
    name: str = ""
    normalize_objective: bool = False
    # interval (1-based) reported as "peak" by sweeps; None -> largest nominal demand
    peak_interval: Optional[int] = None
    notes: tuple[tuple[str, str], ...] = ()

    def with_budget(self, budget: float) -> "JointNetwork":
        return replace(self, budget=budget)

    def with_lambda(self, lam: float) -> "JointNetwork":
        return replace(self, lam=lam)

    # lookups -----------------------------------------------------------
    def bus(self, bid: str) -> Bus:
        return _find(self.power.buses, bid)

    def junction(self, jid: str) -> Junction:
        return _find(self.water.junctions, jid)

    def pump(self, pid: str) -> Pump:
        return _find(self.water.pumps, pid)

    def load(self, lid: str) -> Load:
        return _find(self.power.loads, lid)

    def tank(self, tid: str) -> Tank:
        return _find(self.water.tanks, tid)

    def link_for_pump(self, pid: str) -> Optional[Link]:
        for link in self.links:
            if link.pump == pid:
                return link
        return None

    def resolved_peak_interval(self) -> int:
        if self.peak_interval is not None:
            return self.peak_interval
        n = self.time_grid.n_intervals
        totals = [0.0] * n
        for load in self.power.loads:
            if load.pump_interface:
                continue
            for row in load.pmax:
                for k in range(n):
                    totals[k] += row[k]
        for dem in self.water.demands:
            for k in range(n):
                totals[k] += dem.qmax[k]
        return 1 + max(range(n), key=lambda k: (totals[k], -k))


def _find(items, key):
    for item in items:
        if item.id == key:
            return item
    raise KeyError(key)


@dataclass(frozen=True)
class Candidate:
    kind: str
    id: str
    cost: float


# storage, tank, pump, generator, pipe: the order used in plan listings
KIND_ORDER = ("storage", "tank", "pump", "generator", "pipe")


def expansion_candidates(instance: JointNetwork) -> list[Candidate]:
    """Expandable components ordered by kind, then id.

    Connector pipes of expandable tanks are folded into their tank.
    """
    found: list[Candidate] = []
    for st in instance.power.storages:
        if st.expandable:
            found.append(Candidate("storage", st.id, st.cost))
    connector_cost = {pi.tank: pi.cost for pi in instance.water.pipes if pi.tank is not None}
    for tk in instance.water.tanks:
        if tk.expandable:
            found.append(Candidate("tank", tk.id, tk.cost + connector_cost.get(tk.id, 0.0)))
    for pu in instance.water.pumps:
        if pu.expandable:
            found.append(Candidate("pump", pu.id, pu.cost))
    for gen in instance.power.generators:
        if gen.expandable:
            found.append(Candidate("generator", gen.id, gen.cost))
    for pi in instance.water.pipes:
        if pi.expandable and pi.tank is None:
            found.append(Candidate("pipe", pi.id, pi.cost))
    rank = {k: i for i, k in enumerate(KIND_ORDER)}
    found.sort(key=lambda c: (rank[c.kind], c.id))
    return found
