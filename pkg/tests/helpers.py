"""Small instance builders and evaluation shortcuts shared by the tests."""
import numpy as np

from jointplan import kernels
from jointplan.model import (
    Branch, Bus, Generator, JointNetwork, Junction, Link, Load, Pipe, PowerNetwork, Pump, Reservoir,
    Storage, Tank, TimeGrid, WaterDemand, WaterNetwork,
)
from jointplan.nlp import from_constraints
from jointplan.power import declare_power_variables
from jointplan.system import ConstraintSet, Tape, VariableSpace
from jointplan.water import declare_water_variables


def grid(n):
    return TimeGrid(tuple(float(t) for t in range(n + 1)))


def per_phase(value, n, phases=1):
    return tuple((float(value),) * n for _ in range(phases))


def one_bus(n=2, gen_p=(0.0, 1.0), load_p=0.5, storage=None, phases=("a",), vmin=0.9, vmax=1.1):
    """One source bus with a generator and a load on each listed phase."""
    npH = len(phases)
    bus = Bus("b", phases, per_phase(vmin, n, npH), per_phase(vmax, n, npH), source=True)
    gen = Generator("g", "b", phases, per_phase(gen_p[0], n, npH), per_phase(gen_p[1], n, npH),
                    per_phase(-1.0, n, npH), per_phase(1.0, n, npH))
    load = Load("l", "b", phases, per_phase(load_p, n, npH), per_phase(0.0, n, npH), per_phase(0.0, n, npH))
    power = PowerNetwork((bus,), (), (gen,), tuple(storage or ()), (load,))
    return JointNetwork(time_grid=grid(n), power=power, lam=1.0)


def two_bus(n=1, y=complex(1.0, -3.0), yc=0j, smax=None):
    """Source bus and load bus on one phase joined by one branch."""
    b1 = Bus("b1", ("a",), per_phase(0.9, n), per_phase(1.1, n), source=True)
    b2 = Bus("b2", ("a",), per_phase(0.9, n), per_phase(1.1, n))
    br = Branch("l", "b1", "b2", ((y,),), ((yc,),), ((yc,),), smax)
    gen = Generator("g", "b1", ("a",), per_phase(0.0, n), per_phase(2.0, n), per_phase(-2.0, n), per_phase(2.0, n))
    load = Load("d", "b2", ("a",), per_phase(0.3, n), per_phase(0.1, n), per_phase(0.0, n))
    return JointNetwork(time_grid=grid(n), power=PowerNetwork((b1, b2), (br,), (gen,), (), (load,)), lam=1.0)


def water_line(n=2, demand=50.0, pump=True, tank=None, expandable_pipe=False):
    """Reservoir -> (pump) -> junction j -> pipe -> demand node d."""
    pts = n + 1
    junctions = [
        Junction("r", (0.0,) * pts, (0.0,) * pts, 0.0),
        Junction("j", (0.0,) * pts, (100.0,) * pts, 0.0),
        Junction("d", (0.0,) * pts, (100.0,) * pts, 0.0),
    ]
    pipes = [Pipe("p", "j", "d", 100.0, 0.01, -200.0, 200.0, expandable=expandable_pipe, cost=0.1)]
    pumps = []
    if pump:
        pumps.append(Pump("pu", "r", "j", -1e-3, 0.0, 60.0, 200.0, 0.002, 0.01))
    else:
        pipes.append(Pipe("feed", "r", "j", 10.0, 0.01, -200.0, 200.0))
    tanks = []
    if tank is not None:
        junctions.append(Junction("t", (10.0,) * pts, (30.0,) * pts, 10.0))
        pipes.append(Pipe("c", "t", "j", 1.0, 1e-4, -200.0, 200.0, expandable=True, cost=0.0, tank="tk"))
        tanks.append(Tank("tk", "t", tank, 0.0, tank * 20.0, expandable=True, cost=0.3))
    water = WaterNetwork(tuple(junctions), tuple(pipes), tuple(pumps), tuple(tanks),
                         (Reservoir("src", "r", 0.0),), (WaterDemand("dem", "d", (demand,) * n, (0.0,) * n),))
    return JointNetwork(time_grid=grid(n), water=water, lam=0.0)


def space_for(inst):
    vs = VariableSpace()
    declare_power_variables(vs, inst)
    declare_water_variables(vs, inst)
    return vs


def residuals(cons: ConstraintSet, x, delta=0.0):
    tape = Tape.from_rows(cons.rows)
    return kernels.residuals(tape, np.asarray(x, dtype=float), delta)


def point(vs, values=None, default=0.0):
    x = np.full(len(vs), float(default))
    for name, v in (values or {}).items():
        x[vs[name]] = v
    return x


def system_of(vs, cons, inst=None):
    return from_constraints(vs, cons, np.zeros(len(vs)), inst)


__all__ = [
    "grid", "per_phase", "one_bus", "two_bus", "water_line", "space_for", "residuals", "point", "system_of",
    "Link", "Load", "Storage", "Tank",
]
