"""Pump-as-load coupling, the weighted objective and the budget row."""
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import point, residuals, space_for, water_line
from jointplan.coupling import (
    budget_constraint, build_coupling, objective, objective_weights, pump_as_load, pump_power,
    pump_power_cap,
)
from jointplan.testcase import build_testcase


class TestPumpPower:
    def test_reference(self):
        assert pump_power(100.0, 1.0, 0.002, 0.01) == pytest.approx(0.21)

    def test_off_draws_nothing(self):
        assert pump_power(0.0, 0.0, 0.002, 0.01) == 0.0

    @settings(max_examples=50, deadline=None)
    @given(q=st.floats(0, 400), alpha=st.floats(0, 1e-2), mu=st.floats(0, 1e-1))
    def test_nonnegative_and_monotone(self, q, alpha, mu):
        p = pump_power(q, 1.0, alpha, mu)
        assert p >= 0.0
        assert pump_power(q + 1.0, 1.0, alpha, mu) >= p


class TestPumpAsLoad:
    def test_load_equals_pump_power(self):
        inst = build_testcase()
        vs = space_for(inst)
        pump = inst.pump("pump")
        cons = pump_as_load(vs, inst, inst.links[0])
        x = point(vs)
        for k in range(inst.time_grid.n_intervals):
            x[vs[("w", "pump", k)]] = 300.0
            x[vs[("zp", "pump", k)]] = 1.0
            x[vs[("pl", "pump-load", "a", k)]] = pump_power(300.0, 1.0, pump.alpha, pump.mu) / inst.base_mva
        assert np.abs(residuals(cons, x)).max() <= 1e-12

    def test_mismatch_is_reported(self):
        inst = build_testcase()
        vs = space_for(inst)
        cons = pump_as_load(vs, inst, inst.links[0])
        x = point(vs, {("w", "pump", 0): 100.0, ("zp", "pump", 0): 1.0})
        assert residuals(cons, x)[0] == pytest.approx(0.0004 * 100 + 0.006)

    def test_pump_load_is_not_served_demand(self):
        inst = build_testcase()
        vs = space_for(inst)
        grad = objective(vs, inst)
        assert grad[vs[("pl", "pump-load", "a", 0)]] == 0.0
        assert grad[vs[("pl", "load-a", "a", 0)]] == 1.0


class TestPowerCap:
    def test_absent_cap_emits_nothing(self):
        inst = water_line(n=1)
        vs = space_for(inst)
        assert not pump_power_cap(vs, inst, "pu").rows

    def test_cap_limits_flow(self):
        inst = water_line(n=1)
        wt = inst.water
        inst = replace(inst, water=replace(wt, pumps=(replace(wt.pumps[0], power_cap=(0.21,)),)))
        vs = space_for(inst)
        cons = pump_power_cap(vs, inst, "pu")
        x = point(vs, {("w", "pu", 0): 100.0, ("zp", "pu", 0): 1.0})
        assert residuals(cons, x)[0] == pytest.approx(0.0, abs=1e-12)
        x[vs[("w", "pu", 0)]] = 101.0
        assert residuals(cons, x)[0] > 0

    def test_linked_pump_ignores_cap(self):
        inst = build_testcase()
        wt = inst.water
        inst = replace(inst, water=replace(wt, pumps=(replace(wt.pumps[0], power_cap=(0.0,) * 6),)))
        tags = {row.tag for row in build_coupling(space_for(inst), inst).rows}
        assert "pump power cap" not in tags and "pump as load" in tags


class TestObjective:
    def test_raw_weights(self):
        inst = build_testcase().with_lambda(0.3)
        assert objective_weights(inst) == pytest.approx((0.3, 0.7))

    def test_normalized_weights(self):
        inst = replace(build_testcase().with_lambda(0.5), normalize_objective=True)
        wp, ww = objective_weights(inst)
        n = inst.time_grid.n_intervals
        pmax = max(sum(row[k] for ld in inst.power.loads if not ld.pump_interface for row in ld.pmax)
                   for k in range(n))
        qmax = max(sum(d.qmax[k] for d in inst.water.demands) for k in range(n))
        assert wp == pytest.approx(0.5 / pmax)
        assert ww == pytest.approx(0.5 / qmax)

    def test_water_weight(self):
        inst = build_testcase().with_lambda(0.0)
        vs = space_for(inst)
        grad = objective(vs, inst)
        d = inst.water.demands[0].id
        assert grad[vs[("qd", d, 2)]] == 1.0
        assert grad[vs[("pl", "load-a", "a", 2)]] == 0.0


class TestBudget:
    def test_costs_and_limit(self):
        inst = build_testcase().with_budget(0.5)
        vs = space_for(inst)
        cons = budget_constraint(vs, inst)
        assert len(cons.rows) == 1
        x = point(vs, {("x", "tank", "tank"): 1.0})
        assert residuals(cons, x)[0] == pytest.approx(-0.1)
        x[vs[("x", "storage", "battery")]] = 1.0
        assert residuals(cons, x)[0] == pytest.approx(0.5)

    def test_no_candidates_no_budget(self):
        inst = water_line(n=1)
        tags = {row.tag for row in build_coupling(space_for(inst), inst).rows}
        assert "budget" not in tags
