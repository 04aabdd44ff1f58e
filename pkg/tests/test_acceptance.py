"""Acceptance suite: each check runs at its stated tolerance and time limit.

Outcomes are collected by ``record_criterion`` and printed as one line per
criterion at the end of the pytest run.
"""
import os
import subprocess
import sys
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jointplan.model import VOLUME_PER_FLOW_HOUR
from jointplan.nlp import EQ, assemble, eval_jacobian, eval_residuals
from jointplan.scenarios import compare_joint_vs_independent, experiment1, experiment2
from jointplan.solver import branch_and_bound, enumerate_oracle, water_only
from jointplan.testcase import build_testcase, random_shrink
from jointplan.water import hazen_williams_headloss

FIXED_PEAK_WATER = 360.0  # experiment-1 peak-hour water demand, L/s
PEAK_POWER_TARGET = 1.05  # MW


# ---------------------------------------------------------------- criterion 1

class TestOracleEquivalence:
    def test_branch_and_bound_matches_enumeration(self, record_criterion):
        instances = [build_testcase(1)] + [random_shrink(seed) for seed in range(10)]
        t0 = time.perf_counter()
        worst, mismatched = 0.0, []
        for inst in instances:
            assert assemble(inst).n_binaries() <= 24
            bb, oracle = branch_and_bound(inst), enumerate_oracle(inst)
            if bb.feasible != oracle.feasible:
                mismatched.append(inst.name)
                continue
            if oracle.feasible:
                rel = abs(bb.objective - oracle.objective) / max(1.0, abs(oracle.objective))
                worst = max(worst, rel)
                if rel > 1e-6:
                    mismatched.append(inst.name)
        seconds = time.perf_counter() - t0
        ok = not mismatched and seconds <= 300.0
        record_criterion(1, ok, f"{len(instances)} instances, worst rel diff {worst:.1e}, {seconds:.0f} s")
        assert not mismatched, mismatched
        assert seconds <= 300.0


# ---------------------------------------------------------------- criterion 2

class TestExperimentOneRegimes:
    def test_regimes(self, record_criterion):
        t0 = time.perf_counter()
        res = experiment1()
        seconds = time.perf_counter() - t0
        plans = {round(r.budget, 10): set(r.plan) for r in res.rows}
        obj = {round(r.budget, 10): r.objective for r in res.rows}
        low = all(p == {"pump", "pv"} for b, p in plans.items() if b < 0.4)
        mid = all(p == {"pump", "pv", "tank"} for b, p in plans.items() if 0.4 <= b < 0.6)
        high = all("battery" in p for b, p in plans.items() if b >= 0.6)
        full = plans[1.0] == {"battery", "tank", "pump", "pv"}
        steps = obj[0.4] > obj[0.35] and obj[0.6] > obj[0.55]
        ok = low and mid and high and full and steps and res.is_monotone(rtol=0.0) and seconds <= 120.0
        record_criterion(2, ok, f"tank at {res.first_budget_with('tank')}, battery at "
                                f"{res.first_budget_with('battery')}, {seconds:.0f} s")
        assert low and mid and high and full
        assert steps and res.is_monotone(rtol=0.0)
        assert seconds <= 120.0


# ---------------------------------------------------------------- criterion 3

@pytest.fixture(scope="module")
def experiment_two():
    return experiment2()


class TestExperimentTwoReversal:
    def test_battery_before_tank(self, experiment_two, record_criterion):
        battery = experiment_two.first_budget_with("battery")
        tank = experiment_two.first_budget_with("tank")
        ok = battery is not None and tank is not None and battery < tank
        record_criterion(3, ok, f"battery at {battery}, tank at {tank}")
        assert ok

    def test_peak_water_below_fixed_demand(self, experiment_two, record_criterion):
        water = next(r.peak_served for r in experiment_two.rows if r.budget == 1.0)
        ok = water < FIXED_PEAK_WATER
        record_criterion(3, ok, f"peak water at B=1 {water:.2f} L/s vs {FIXED_PEAK_WATER:.0f}")
        assert ok


# ---------------------------------------------------------------- criterion 4

class TestJointVersusIndependent:
    def test_joint_builds_one_component(self, record_criterion):
        rep = compare_joint_vs_independent(build_testcase(1), PEAK_POWER_TARGET, FIXED_PEAK_WATER)
        costly = {"battery", "tank"}
        ok = (rep.status == "ok" and set(rep.independent_plan) == costly and len(rep.joint_plan) == 1
              and set(rep.joint_plan) <= costly and rep.joint_cost <= rep.independent_cost)
        record_criterion(4, ok, f"joint {rep.joint_plan} cost {rep.joint_cost}, independent "
                                f"{rep.independent_plan} cost {rep.independent_cost}")
        assert ok


# ---------------------------------------------------------------- criterion 5

@pytest.fixture(scope="module")
def accepted():
    """Accepted solutions across both experiments and several budgets."""
    out = []
    for experiment, budgets in ((1, (0.0, 0.4, 1.0)), (2, (0.4, 1.0))):
        for b in budgets:
            inst = build_testcase(experiment).with_budget(b)
            sol = branch_and_bound(inst)
            assert sol.feasible and sol.report.accepted
            out.append((inst, assemble(inst), sol.x))
    return out


def _timed(record_criterion, check):
    t0 = time.perf_counter()
    ok, detail = check()
    seconds = time.perf_counter() - t0
    ok = ok and seconds <= 30.0
    record_criterion(5, ok, f"{detail} ({seconds:.1f} s)")
    return ok


def _random_point(system, rng):
    lo = np.where(np.isfinite(system.lo), system.lo, -5.0)
    hi = np.where(np.isfinite(system.hi), system.hi, 5.0)
    return lo + rng.uniform(0.05, 0.95, system.n) * (hi - lo)


class TestPhysics:
    def test_jacobian_matches_finite_differences(self, record_criterion):
        systems = [assemble(build_testcase(1)), assemble(water_only(build_testcase(1), 0.15))]

        def check():
            rng = np.random.default_rng(0)
            worst = {}
            h = 1e-6
            for system in systems:
                tags = np.array(system.tags)
                for _ in range(100):
                    x = _random_point(system, rng)
                    jac = eval_jacobian(system, x).toarray()
                    fd = np.empty_like(jac)
                    for j in range(system.n):
                        x[j] += h
                        up = eval_residuals(system, x)
                        x[j] -= 2 * h
                        fd[:, j] = (up - eval_residuals(system, x)) / (2 * h)
                        x[j] += h
                    err = (np.abs(jac - fd) / np.maximum(1.0, np.abs(jac))).max(axis=1)
                    for tag in set(tags):
                        worst[tag] = max(worst.get(tag, 0.0), float(err[tags == tag].max()))
            top = max(worst.values())
            return top <= 1e-5, f"jacobian: {len(worst)} families, worst {top:.1e}"

        assert _timed(record_criterion, check)

    def test_mass_and_energy_telescope(self, accepted, record_criterion):
        def check():
            worst = 0.0
            for inst, system, x in accepted:
                vs = system.space
                n = inst.time_grid.n_intervals
                steps = inst.time_grid.steps
                for k in range(n):
                    net = (sum(x[vs[("qr", r.id, k)]] for r in inst.water.reservoirs)
                           + sum(x[vs[("qt", t.id, k)]] for t in inst.water.tanks)
                           - sum(x[vs[("qd", d.id, k)]] for d in inst.water.demands))
                    worst = max(worst, abs(net))
                for t in inst.water.tanks:
                    drawn = VOLUME_PER_FLOW_HOUR * sum(steps[k] * x[vs[("qt", t.id, k)]] for k in range(n))
                    worst = max(worst, abs(x[vs[("vol", t.id, n)]] - x[vs[("vol", t.id, 0)]] + drawn))
                for s in inst.power.storages:
                    net = sum(steps[k] * (s.eta_c * x[vs[("pc", s.id, k)]] - x[vs[("pd", s.id, k)]] / s.eta_d)
                              for k in range(n))
                    worst = max(worst, abs(x[vs[("soc", s.id, n)]] - x[vs[("soc", s.id, 0)]] - net))
            return worst <= 1e-10, f"telescoping: worst {worst:.1e}"

        assert _timed(record_criterion, check)

    def test_recovery(self, accepted, record_criterion):
        def check():
            worst = np.inf
            for inst, system, x in accepted:
                vs = system.space
                n = inst.time_grid.n_intervals
                for t in inst.water.tanks:
                    worst = min(worst, x[vs[("vol", t.id, n)]] - x[vs[("vol", t.id, 0)]])
                for s in inst.power.storages:
                    worst = min(worst, x[vs[("soc", s.id, n)]] - x[vs[("soc", s.id, 0)]])
            return worst >= 0.0, f"recovery: min end minus start {worst:.1e}"

        assert _timed(record_criterion, check)

    def test_hazen_williams_shape(self, record_criterion):
        failures = []

        @settings(max_examples=500, deadline=None, derandomize=True)
        @given(a=st.floats(-1e3, 1e3), b=st.floats(-1e3, 1e3), lr=st.floats(1e-4, 10.0))
        def prop(a, b, lr):
            if hazen_williams_headloss(-a, lr, 1.0) != -hazen_williams_headloss(a, lr, 1.0):
                failures.append(("odd", a))
            lo, hi = min(a, b), max(a, b)
            if hazen_williams_headloss(lo, lr, 1.0) > hazen_williams_headloss(hi, lr, 1.0):
                failures.append(("monotone", lo, hi))

        def check():
            prop()
            return not failures, f"hazen-williams: {len(failures)} violations"

        assert _timed(record_criterion, check)

    def test_pump_curves(self, record_criterion):
        def check():
            pumps = [p for inst in [build_testcase(1), build_testcase(2)] + [random_shrink(s) for s in range(10)]
                     for p in inst.water.pumps]
            bad = [p.id for p in pumps if not (2 * p.a < 0 and p.head_gain(p.eps) > 0)]
            return not bad, f"pumps: {len(pumps)} checked, {len(bad)} bad"

        assert _timed(record_criterion, check)

    def test_balance_residuals(self, accepted, record_criterion):
        def check():
            worst = 0.0
            for _, system, x in accepted:
                r = eval_residuals(system, x, 0.0)
                mask = np.array([t in ("kcl", "flow conservation") for t in system.tags])
                assert np.all(system.kind[mask] == EQ)
                worst = max(worst, float(np.abs(r[mask]).max()))
            return worst <= 1e-8, f"kcl and conservation: worst {worst:.1e}"

        assert _timed(record_criterion, check)


# ---------------------------------------------------------------- criterion 6

class TestDeterminism:
    def test_sweep_csv_byte_identical(self, tmp_path, record_criterion):
        inst = tmp_path / "demo.json"
        env = dict(os.environ)
        cli = [sys.executable, "-m", "jointplan.cli"]
        subprocess.run(cli + ["testcase", "--out", str(inst)], check=True, env=env)
        outs = []
        for name in ("a.csv", "b.csv"):
            out = tmp_path / name
            subprocess.run(cli + ["sweep", str(inst), "--budgets", "0:1:0.1", "--seed", "0", "--out", str(out)],
                           check=True, env=env)
            outs.append(out.read_bytes())
        ok = outs[0] == outs[1] and len(outs[0].splitlines()) == 12
        record_criterion(6, ok, f"two sweeps of {len(outs[0])} bytes, identical={outs[0] == outs[1]}")
        assert ok
