"""The 3-bus / 3-node demonstration network and its experiment variants.

Only the topology, voltage limits, horizon, costs and a handful of demand
figures of this network are published. Every other number below is a
reconstruction chosen so that the published orderings hold at once:

* with only the pump and PV the peak hour serves 1.00 MW,
* a tank shifts pumping out of the peak and lifts that to about 1.15 MW,
* a battery lifts it further, and both together furthest,
* with 1.05 MW fixed at the peak, a battery or a tank alone can serve
  360 L/s at the peak, while a fixed pumping allowance cannot.

The reasoning per field is stored in ``JointNetwork.notes`` and therefore
travels with the written instance file.
"""
from __future__ import annotations

from dataclasses import replace

import numpy as np

from .model import (
    PHASES, Branch, Bus, Generator, JointNetwork, Junction, Link, Load, Pipe, PowerNetwork,
    Pump, Reservoir, Storage, Tank, TimeGrid, WaterDemand, WaterNetwork,
)

HOURS = 6
#: 1-based interval of the simultaneous demand peak
PEAK = 5
#: total non-pump power demand per hour (MW); the peak entry is replaced per experiment
POWER_PROFILE = (0.60, 0.65, 0.70, 0.75, 1.05, 0.70)
#: water demand per hour (L/s)
WATER_PROFILE = (200.0, 250.0, 300.0, 320.0, 360.0, 280.0)
#: PV availability on phase a (MW)
SOLAR_PROFILE = (0.02, 0.06, 0.10, 0.10, 0.05, 0.02)
#: experiment-1 peak-hour caps per phase: phase a is effectively unlimited,
#: b and c saturate at the level served without expansion
PEAK_CAPS_EXP1 = (0.80, 0.35, 0.35)
#: upper bound on the peak-hour water demand when it is maximised
PEAK_WATER_CAP = 800.0

NOTES = {
    "time": "7 points, 6 one-hour intervals; demands peak together at hour 5",
    "power.lines": "two identical 3-phase lines, Z_self 0.004+0.008j, Z_mutual 0.001+0.003j p.u.; "
                   "no shunt; flows unbounded",
    "power.substation": "existing unit at the source bus, 0.40 MW and +-0.5 Mvar per phase",
    "power.loads": "one single-phase load per phase at bus b3, power factor 0.95; off-peak "
                   "total 0.60-0.75 MW split equally",
    "power.pv": "single-phase (a) candidate at b3, cost 0, availability peaks before the demand peak",
    "power.battery": "single-phase (a) candidate at b3, 0.25 MW / 0.5 MWh, 95% each way, starts empty",
    "water.pump": "reservoir -> junction j, gain 70 - 2e-4 q^2 m, 0.0004 MW per L/s + 0.006 MW, "
                  "fed from phase a of the pump load at b3; 360 L/s needs 0.15 MW",
    "water.tank": "candidate at node t (elevation 36 m, 200 m^2, 2000 m^3) joined to j by a 10 m connector; "
                  "an empty tank still lets the pump run (412 L/s at 36 m) and off-peak filling "
                  "stores more than one peak hour of demand",
    "water.pipe": "existing 1000 m main j -> d, 5 m head loss at 360 L/s",
    "water.elevations": "reservoir at 0 m; j and d at 20 m with at least 5 m pressure head",
}


def _phase_series(values_per_phase, n=HOURS):
    return tuple(tuple(float(v) for v in vals) for vals in values_per_phase)


def _line_admittance() -> tuple:
    z = np.full((3, 3), 0.001 + 0.003j)
    np.fill_diagonal(z, 0.004 + 0.008j)
    y = np.linalg.inv(z)
    return tuple(tuple(complex(round(v.real, 9), round(v.imag, 9)) for v in row) for row in y)


def build_testcase(experiment: int = 1, *, hours: tuple = tuple(range(1, HOURS + 1)),
                   power_scale: float = 1.0, water_scale: float = 1.0,
                   costs: tuple | None = None) -> JointNetwork:
    """The demonstration network configured for experiment 1 or 2.

    Experiment 1 fixes the water demand at every hour and the power demand
    at every hour but the peak, maximises peak power (``lambda = 1``) and
    uses costs battery 0.6, tank 0.4. Experiment 2 swaps those costs, fixes
    the peak power at 1.05 MW and maximises peak water (``lambda = 0``).

    Parameters
    ----------
    hours : tuple of int
        Consecutive 1-based hours of the day to keep; must contain the peak.
    power_scale, water_scale : float
        Factors on the off-peak demand profiles.
    costs : (float, float), optional
        Battery and tank cost, overriding the experiment's pair.
    """
    if experiment not in (1, 2):
        raise ValueError("experiment must be 1 or 2")
    hours = tuple(int(h) for h in hours)
    if PEAK not in hours or list(hours) != list(range(hours[0], hours[0] + len(hours))) \
            or hours[0] < 1 or hours[-1] > HOURS:
        raise ValueError(f"hours must be consecutive within 1..{HOURS} and contain hour {PEAK}")
    n_h = len(hours)
    grid = TimeGrid(tuple(float(t) for t in range(n_h + 1)))
    peak = hours.index(PEAK)
    sel = [h - 1 for h in hours]
    power_profile = [POWER_PROFILE[i] * (1.0 if i == PEAK - 1 else power_scale) for i in sel]
    water_profile = [WATER_PROFILE[i] * (1.0 if i == PEAK - 1 else water_scale) for i in sel]
    solar_profile = [SOLAR_PROFILE[i] for i in sel]
    zero3 = tuple((0.0,) * n_h for _ in PHASES)
    y = _line_admittance()
    yz = tuple((0j,) * 3 for _ in range(3))
    vmin = _phase_series([[0.97] * n_h] * 3)
    vmax = _phase_series([[1.03] * n_h] * 3)
    buses = (
        Bus("b1", PHASES, vmin, vmax, source=True),
        Bus("b2", PHASES, vmin, vmax),
        Bus("b3", PHASES, vmin, vmax),
    )
    branches = (Branch("l12", "b1", "b2", y, yz, yz), Branch("l23", "b2", "b3", y, yz, yz))
    gens = (
        Generator("substation", "b1", PHASES, zero3, _phase_series([[0.40] * n_h] * 3),
                  _phase_series([[-0.5] * n_h] * 3), _phase_series([[0.5] * n_h] * 3)),
        Generator("pv", "b3", ("a",), ((0.0,) * n_h,), (tuple(solar_profile),),
                  ((0.0,) * n_h,), ((0.0,) * n_h,), expandable=True, cost=0.0),
    )
    battery_cost, tank_cost = costs or ((0.6, 0.4) if experiment == 1 else (0.4, 0.6))
    storages = (Storage("battery", "b3", ("a",), 0.3, 0.25, 0.25, 0.5, 0.95, 0.95, 0.0,
                        expandable=True, cost=battery_cost),)
    tan = np.tan(np.arccos(0.95))
    loads = []
    for ph, cap in zip(PHASES, PEAK_CAPS_EXP1):
        pmax = [v / 3.0 for v in power_profile]
        if experiment == 1:
            pmax[peak] = cap
        pmin = list(pmax)
        if experiment == 1:
            pmin[peak] = 0.0
        loads.append(Load(f"load-{ph}", "b3", (ph,), (tuple(pmax),),
                          (tuple(round(p * tan, 12) for p in pmax),), (tuple(pmin),)))
    loads.append(Load("pump-load", "b3", ("a",), ((0.0,) * n_h,), ((0.0,) * n_h,),
                      ((0.0,) * n_h,), pump_interface=True))
    power = PowerNetwork(buses, branches, gens, storages, tuple(loads))

    n_pts = n_h + 1
    junctions = (
        Junction("r", (0.0,) * n_pts, (0.0,) * n_pts, 0.0),
        Junction("j", (25.0,) * n_pts, (80.0,) * n_pts, 20.0),
        Junction("d", (25.0,) * n_pts, (80.0,) * n_pts, 20.0),
        Junction("t", (36.0,) * n_pts, (46.0,) * n_pts, 36.0),
    )
    pipes = (
        Pipe("main", "j", "d", 1000.0, 9.2e-8, -800.0, 800.0),
        Pipe("connector", "t", "j", 10.0, 1e-6, -600.0, 600.0, expandable=True, cost=0.0, tank="tank"),
    )
    pumps = (Pump("pump", "r", "j", -2e-4, 0.0, 70.0, 420.0, 0.0004, 0.006, expandable=True, cost=0.0),)
    tanks = (Tank("tank", "t", 200.0, 0.0, 2000.0, expandable=True, cost=tank_cost),)
    qmax = list(water_profile)
    qmin = list(water_profile)
    if experiment == 2:
        qmax[peak] = PEAK_WATER_CAP
        qmin[peak] = 0.0
    demands = (WaterDemand("demand", "d", tuple(qmax), tuple(qmin)),)
    water = WaterNetwork(junctions, pipes, pumps, tanks, (Reservoir("source", "r", 0.0),), demands)
    links = (Link("pump", "pump-load", ("a",), 1.0),)
    return JointNetwork(
        time_grid=grid, power=power, water=water, links=links, budget=1.0,
        lam=1.0 if experiment == 1 else 0.0, name=f"demo-experiment-{experiment}",
        peak_interval=peak + 1, notes=tuple(sorted(NOTES.items())),
    )


def random_shrink(seed: int) -> JointNetwork:
    """A seeded, smaller variant of the demonstration network.

    Keeps 2 to 4 consecutive hours around the peak, scales the off-peak
    demands by up to 5 %, draws both storage costs from [0.2, 0.8] and the
    budget from [0, 1.2]; the experiment (1 or 2) is drawn as well.
    """
    rng = np.random.default_rng(seed)
    experiment = int(rng.integers(1, 3))
    n_h = int(rng.integers(2, 5))
    first = int(rng.integers(max(1, PEAK - n_h + 1), min(PEAK, HOURS - n_h + 1) + 1))
    inst = build_testcase(
        experiment,
        hours=tuple(range(first, first + n_h)),
        power_scale=float(rng.uniform(0.95, 1.05)),
        water_scale=float(rng.uniform(0.95, 1.05)),
        costs=(round(float(rng.uniform(0.2, 0.8)), 2), round(float(rng.uniform(0.2, 0.8)), 2)),
    )
    return replace(inst.with_budget(round(float(rng.uniform(0.0, 1.2)), 2)), name=f"demo-shrink-{seed}")


def with_peak_targets(inst: JointNetwork, power_mw: float | None, water_lps: float | None) -> JointNetwork:
    """Fix peak-hour served demand to the given totals.

    Power is split equally over the phases of the non-pump loads, water in
    proportion to the peak-hour caps of the demands.
    """
    k = inst.resolved_peak_interval() - 1
    loads = list(inst.power.loads)
    if power_mw is not None:
        entries = [(i, p) for i, ld in enumerate(loads) if not ld.pump_interface for p in range(len(ld.phases))]
        share = power_mw / inst.base_mva / max(len(entries), 1)
        for i, p in entries:
            ld = loads[i]
            ratio = ld.qmax[p][k] / ld.pmax[p][k] if ld.pmax[p][k] > 0 else 0.0
            loads[i] = replace(
                ld,
                pmax=_set(ld.pmax, p, k, share),
                pmin=_set(ld.pmin, p, k, share),
                qmax=_set(ld.qmax, p, k, share * ratio),
            )
    demands = list(inst.water.demands)
    if water_lps is not None:
        total = sum(d.qmax[k] for d in demands)
        for i, d in enumerate(demands):
            v = water_lps * (d.qmax[k] / total if total > 0 else 1.0 / len(demands))
            demands[i] = replace(d, qmax=_set1(d.qmax, k, v), qmin=_set1(d.qmin, k, v))
    return replace(
        inst,
        power=replace(inst.power, loads=tuple(loads)),
        water=replace(inst.water, demands=tuple(demands)),
    )


def _set(series, p, k, v):
    rows = [list(r) for r in series]
    rows[p][k] = float(v)
    return tuple(tuple(r) for r in rows)


def _set1(seq, k, v):
    out = list(seq)
    out[k] = float(v)
    return tuple(out)
