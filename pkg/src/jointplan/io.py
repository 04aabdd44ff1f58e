"""Reading and writing ``jwpx-1`` JSON instance documents."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .model import (
    Branch, Bus, Generator, JointNetwork, Junction, Link, Load, PowerNetwork, Pipe, Pump,
    Reservoir, Storage, Tank, TimeGrid, WaterDemand, WaterNetwork,
)

FORMAT = "jwpx-1"


class FormatError(ValueError):
    pass


def _series(v) -> tuple:
    return tuple(tuple(float(x) for x in row) for row in v)


def _flat(v) -> tuple[float, ...]:
    return tuple(float(x) for x in v)


def _matrix(v) -> tuple:
    re, im = v["re"], v["im"]
    return tuple(tuple(complex(a, b) for a, b in zip(ra, ib)) for ra, ib in zip(re, im))


def _emit_matrix(m) -> dict:
    return {"re": [[z.real for z in row] for row in m], "im": [[z.imag for z in row] for row in m]}


def _rows(v) -> list:
    return [list(row) for row in v]


def from_dict(doc: dict[str, Any]) -> JointNetwork:
    if doc.get("format") != FORMAT:
        raise FormatError(f"expected format {FORMAT!r}, got {doc.get('format')!r}")
    try:
        tg = doc["time_grid"]
        points = _flat(tg["points"])
        grid = TimeGrid(points)
        if "steps" in tg and tuple(float(s) for s in tg["steps"]) != grid.steps:
            raise FormatError("time_grid.steps inconsistent with points")
        p = doc.get("power", {})
        w = doc.get("water", {})
        power = PowerNetwork(
            buses=tuple(
                Bus(b["id"], tuple(b["phases"]), _series(b["vmin"]), _series(b["vmax"]), bool(b.get("source", False)))
                for b in p.get("buses", [])
            ),
            branches=tuple(
                Branch(
                    br["id"], br["from_bus"], br["to_bus"], _matrix(br["y"]),
                    _matrix(br["yc_from"]), _matrix(br["yc_to"]),
                    None if br.get("smax") is None else _series(br["smax"]),
                )
                for br in p.get("branches", [])
            ),
            generators=tuple(
                Generator(
                    g["id"], g["bus"], tuple(g["phases"]), _series(g["pmin"]), _series(g["pmax"]),
                    _series(g["qmin"]), _series(g["qmax"]), bool(g.get("expandable", False)),
                    float(g.get("cost", 0.0)), g.get("status", "fixed_on"),
                )
                for g in p.get("generators", [])
            ),
            storages=tuple(
                Storage(
                    s["id"], s["bus"], tuple(s["phases"]), float(s["s_rating"]), float(s["p_charge_max"]),
                    float(s["p_discharge_max"]), float(s["e_max"]), float(s["eta_c"]), float(s["eta_d"]),
                    float(s["e_init"]), bool(s.get("expandable", False)), float(s.get("cost", 0.0)),
                )
                for s in p.get("storages", [])
            ),
            loads=tuple(
                Load(
                    ld["id"], ld["bus"], tuple(ld["phases"]), _series(ld["pmax"]), _series(ld["qmax"]),
                    _series(ld["pmin"]) if "pmin" in ld else tuple(tuple(0.0 for _ in r) for r in ld["pmax"]),
                    bool(ld.get("pump_interface", False)),
                )
                for ld in p.get("loads", [])
            ),
        )
        water = WaterNetwork(
            junctions=tuple(
                Junction(j["id"], _flat(j["hmin"]), _flat(j["hmax"]), float(j["elevation"]))
                for j in w.get("junctions", [])
            ),
            pipes=tuple(
                Pipe(
                    pi["id"], pi["from"], pi["to"], float(pi["length"]), float(pi["resistance"]),
                    float(pi["qmin"]), float(pi["qmax"]), bool(pi.get("expandable", False)),
                    float(pi.get("cost", 0.0)), pi.get("tank"),
                )
                for pi in w.get("pipes", [])
            ),
            pumps=tuple(
                Pump(
                    pu["id"], pu["from"], pu["to"], float(pu["a"]), float(pu["b"]), float(pu["c"]),
                    float(pu["qmax"]), float(pu["alpha"]), float(pu["mu"]),
                    None if pu.get("q_min_active") is None else float(pu["q_min_active"]),
                    bool(pu.get("expandable", False)), float(pu.get("cost", 0.0)),
                    None if pu.get("power_cap") is None else _flat(pu["power_cap"]),
                )
                for pu in w.get("pumps", [])
            ),
            tanks=tuple(
                Tank(
                    t["id"], t["junction"], float(t["area"]), float(t["v_init"]), float(t["v_max"]),
                    bool(t.get("expandable", False)), float(t.get("cost", 0.0)),
                )
                for t in w.get("tanks", [])
            ),
            reservoirs=tuple(Reservoir(r["id"], r["junction"], float(r["head"])) for r in w.get("reservoirs", [])),
            demands=tuple(
                WaterDemand(
                    d["id"], d["junction"], _flat(d["qmax"]),
                    _flat(d["qmin"]) if "qmin" in d else tuple(0.0 for _ in d["qmax"]),
                )
                for d in w.get("demands", [])
            ),
        )
        links = tuple(
            Link(lk["pump"], lk["load"], tuple(lk["conductors"]), float(lk.get("power_factor", 1.0)))
            for lk in doc.get("links", [])
        )
        base = doc.get("base", {})
        return JointNetwork(
            time_grid=grid,
            power=power,
            water=water,
            links=links,
            budget=float(doc.get("budget", 0.0)),
            lam=float(doc.get("lambda", 1.0)),
            base_mva=float(base.get("mva", 1.0)),
            base_kv=float(base.get("kv", 1.0)),
            name=doc.get("name", ""),
            normalize_objective=bool(doc.get("normalize_objective", False)),
            peak_interval=doc.get("peak_interval"),
            notes=tuple(sorted((str(k), str(v)) for k, v in doc.get("notes", {}).items())),
        )
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed instance: {exc!r}") from exc


def to_dict(inst: JointNetwork) -> dict[str, Any]:
    p, w = inst.power, inst.water
    doc: dict[str, Any] = {
        "format": FORMAT,
        "name": inst.name,
        "base": {"mva": inst.base_mva, "kv": inst.base_kv},
        "time_grid": {"points": list(inst.time_grid.points), "steps": list(inst.time_grid.steps)},
        "power": {
            "buses": [
                {"id": b.id, "phases": list(b.phases), "vmin": _rows(b.vmin), "vmax": _rows(b.vmax), "source": b.source}
                for b in p.buses
            ],
            "branches": [
                {
                    "id": br.id, "from_bus": br.from_bus, "to_bus": br.to_bus, "y": _emit_matrix(br.y),
                    "yc_from": _emit_matrix(br.yc_from), "yc_to": _emit_matrix(br.yc_to),
                    "smax": None if br.smax is None else _rows(br.smax),
                }
                for br in p.branches
            ],
            "generators": [
                {
                    "id": g.id, "bus": g.bus, "phases": list(g.phases), "pmin": _rows(g.pmin), "pmax": _rows(g.pmax),
                    "qmin": _rows(g.qmin), "qmax": _rows(g.qmax), "expandable": g.expandable, "cost": g.cost,
                    "status": g.status,
                }
                for g in p.generators
            ],
            "storages": [
                {
                    "id": s.id, "bus": s.bus, "phases": list(s.phases), "s_rating": s.s_rating,
                    "p_charge_max": s.p_charge_max, "p_discharge_max": s.p_discharge_max, "e_max": s.e_max,
                    "eta_c": s.eta_c, "eta_d": s.eta_d, "e_init": s.e_init, "expandable": s.expandable,
                    "cost": s.cost,
                }
                for s in p.storages
            ],
            "loads": [
                {
                    "id": ld.id, "bus": ld.bus, "phases": list(ld.phases), "pmax": _rows(ld.pmax),
                    "qmax": _rows(ld.qmax), "pmin": _rows(ld.pmin), "pump_interface": ld.pump_interface,
                }
                for ld in p.loads
            ],
        },
        "water": {
            "junctions": [
                {"id": j.id, "hmin": list(j.hmin), "hmax": list(j.hmax), "elevation": j.elevation}
                for j in w.junctions
            ],
            "pipes": [
                {
                    "id": pi.id, "from": pi.from_node, "to": pi.to_node, "length": pi.length,
                    "resistance": pi.resistance, "qmin": pi.qmin, "qmax": pi.qmax,
                    "expandable": pi.expandable, "cost": pi.cost, "tank": pi.tank,
                }
                for pi in w.pipes
            ],
            "pumps": [
                {
                    "id": pu.id, "from": pu.from_node, "to": pu.to_node, "a": pu.a, "b": pu.b, "c": pu.c,
                    "qmax": pu.qmax, "alpha": pu.alpha, "mu": pu.mu, "q_min_active": pu.q_min_active,
                    "expandable": pu.expandable, "cost": pu.cost,
                    "power_cap": None if pu.power_cap is None else list(pu.power_cap),
                }
                for pu in w.pumps
            ],
            "tanks": [
                {
                    "id": t.id, "junction": t.junction, "area": t.area, "v_init": t.v_init, "v_max": t.v_max,
                    "expandable": t.expandable, "cost": t.cost,
                }
                for t in w.tanks
            ],
            "reservoirs": [{"id": r.id, "junction": r.junction, "head": r.head} for r in w.reservoirs],
            "demands": [
                {"id": d.id, "junction": d.junction, "qmax": list(d.qmax), "qmin": list(d.qmin)}
                for d in w.demands
            ],
        },
        "links": [
            {"pump": lk.pump, "load": lk.load, "conductors": list(lk.conductors), "power_factor": lk.power_factor}
            for lk in inst.links
        ],
        "budget": inst.budget,
        "lambda": inst.lam,
        "normalize_objective": inst.normalize_objective,
        "peak_interval": inst.peak_interval,
    }
    if inst.notes:
        doc["notes"] = dict(inst.notes)
    return doc


def loads(text: str) -> JointNetwork:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(str(exc)) from exc
    return from_dict(doc)


def dumps(inst: JointNetwork) -> str:
    return json.dumps(to_dict(inst), indent=1) + "\n"


def read_instance(path: str | Path) -> JointNetwork:
    return loads(Path(path).read_text(encoding="utf-8"))


def write_instance(inst: JointNetwork, path: str | Path) -> None:
    Path(path).write_text(dumps(inst), encoding="utf-8", newline="\n")
