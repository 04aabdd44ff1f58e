"""Water-network residuals: head loss, pumps, tanks and conservation."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import point, residuals, space_for, water_line
from jointplan import kernels
from jointplan.model import VOLUME_PER_FLOW_HOUR
from jointplan.water import (
    expansion_pipe_residual, flow_bounds, flow_conservation, hazen_williams_headloss, pipe_headloss,
    pump_big_m, pump_constraints, pump_gain_max, tank_constraints,
)

# 0.5 ** 1.852 evaluated at 50 digits, frozen
HW_HALF = 0.2770080870


def _tags_violated(cons, x, tol=1e-9, delta=0.0):
    return {row.tag for row, r in zip(cons.rows, residuals(cons, x, delta)) if
            (r > tol if row.kind else abs(r) > tol)}


class TestHazenWilliams:
    def test_reference_value(self):
        assert hazen_williams_headloss(0.5, 1.0, 1.0) == pytest.approx(HW_HALF, abs=1e-9)

    def test_matches_log_form(self):
        q = 37.5
        assert hazen_williams_headloss(q, 100.0, 0.01) == pytest.approx(math.exp(math.log(q) * 1.852), rel=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(q=st.floats(-500, 500), lr=st.floats(1e-4, 10.0))
    def test_odd_in_flow(self, q, lr):
        assert hazen_williams_headloss(-q, lr, 1.0) == -hazen_williams_headloss(q, lr, 1.0)

    @settings(max_examples=100, deadline=None)
    @given(a=st.floats(-300, 300), b=st.floats(-300, 300))
    def test_monotone(self, a, b):
        lo, hi = min(a, b), max(a, b)
        assert hazen_williams_headloss(lo, 1.0, 1.0) <= hazen_williams_headloss(hi, 1.0, 1.0)

    def test_smoothed_form_close_to_exact(self):
        q = np.array([0.5, 5.0, 50.0])
        exact = kernels.hw_value(q, 0.0)
        smooth = kernels.hw_value(q, 1e-4)
        assert np.allclose(smooth, exact, rtol=1e-7)

    def test_smoothed_derivative_reference(self):
        assert float(kernels.hw_deriv(np.array([0.5]), 1e-4)[0]) == pytest.approx(1.0260379527, abs=1e-9)

    def test_smoothed_derivative_at_zero_is_finite_and_positive(self):
        d = float(kernels.hw_deriv(np.array([0.0]), 1e-4)[0])
        assert 0.0 < d < 1e-2


class TestPipeHeadLoss:
    def test_residual_zero_on_consistent_heads(self):
        inst = water_line(n=1)
        vs = space_for(inst)
        pipe = inst.water.pipes[0]
        q = 40.0
        drop = hazen_williams_headloss(q, pipe.length, pipe.resistance)
        x = point(vs, {("w", "p", 0): q, ("h", "j", 1): 50.0, ("h", "d", 1): 50.0 - drop})
        assert np.abs(residuals(pipe_headloss(vs, inst, pipe), x)).max() <= 1e-12

    def test_uses_end_point_heads(self):
        inst = water_line(n=1)
        vs = space_for(inst)
        cons = pipe_headloss(vs, inst, inst.water.pipes[0])
        x = point(vs, {("h", "j", 0): 99.0})
        assert np.abs(residuals(cons, x)).max() == 0.0

    def test_unbuilt_pipe_decouples_heads(self):
        inst = water_line(n=1, expandable_pipe=True)
        vs = space_for(inst)
        pipe = inst.water.pipes[0]
        x = point(vs, {("x", "pipe", "p"): 0.0, ("h", "j", 1): 80.0, ("h", "d", 1): 5.0})
        assert np.abs(residuals(expansion_pipe_residual(vs, inst, pipe), x)).max() == 0.0
        x[vs[("w", "p", 0)]] = 1.0
        assert _tags_violated(flow_bounds(vs, inst, pipe), x) == {"flow bounds"}

    def test_built_pipe_obeys_head_loss(self):
        inst = water_line(n=1, expandable_pipe=True)
        vs = space_for(inst)
        pipe = inst.water.pipes[0]
        drop = hazen_williams_headloss(20.0, pipe.length, pipe.resistance)
        x = point(vs, {("x", "pipe", "p"): 1.0, ("w", "p", 0): 20.0, ("h", "j", 1): 60.0, ("h", "d", 1): 60.0 - drop})
        assert np.abs(residuals(expansion_pipe_residual(vs, inst, pipe), x)).max() <= 1e-12
        assert not _tags_violated(flow_bounds(vs, inst, pipe), x)


class TestPump:
    def _setup(self):
        inst = water_line(n=1)
        return inst, space_for(inst), inst.water.pumps[0]

    def test_gain_max(self):
        _, _, pump = self._setup()
        assert pump_gain_max(pump) == pytest.approx(60.0)

    def test_off_forces_zero_flow(self):
        inst, vs, pump = self._setup()
        cons = pump_constraints(vs, inst, pump)
        x = point(vs, {("zp", "pu", 0): 0.0, ("w", "pu", 0): 1.0, ("h", "j", 1): 30.0})
        assert "pump flow" in _tags_violated(cons, x)

    def test_off_decouples_heads(self):
        inst, vs, pump = self._setup()
        cons = pump_constraints(vs, inst, pump)
        for head in (0.0, 37.0, 100.0):
            x = point(vs, {("zp", "pu", 0): 0.0, ("h", "j", 1): head})
            assert not _tags_violated(cons, x)

    def test_on_enforces_head_gain(self):
        inst, vs, pump = self._setup()
        cons = pump_constraints(vs, inst, pump)
        q = 100.0
        g = pump.head_gain(q)
        x = point(vs, {("zp", "pu", 0): 1.0, ("w", "pu", 0): q, ("gain", "pu", 0): g, ("h", "j", 1): g})
        assert g == pytest.approx(50.0)
        assert not _tags_violated(cons, x)
        x[vs[("h", "j", 1)]] = g + 0.5
        assert _tags_violated(cons, x) == {"pump head coupling"}

    def test_on_requires_minimum_flow(self):
        inst, vs, pump = self._setup()
        cons = pump_constraints(vs, inst, pump)
        x = point(vs, {("zp", "pu", 0): 1.0, ("w", "pu", 0): 0.0, ("gain", "pu", 0): 60.0, ("h", "j", 1): 60.0})
        assert _tags_violated(cons, x) == {"pump flow"}

    def test_big_m_covers_head_range(self):
        inst, _, pump = self._setup()
        up, down = pump_big_m(inst, pump, 1)
        assert up >= 100.0 and down >= 0.0


class TestTank:
    def _setup(self, area=2.0):
        inst = water_line(n=2, tank=area)
        return inst, space_for(inst), inst.water.tanks[0]

    def test_volume_update_in_cubic_metres(self):
        inst, vs, tank = self._setup()
        cons = tank_constraints(vs, inst, tank)
        # supplying 1 L/s for one hour removes 3.6 m^3
        x = point(vs, {("x", "tank", "tk"): 1.0, ("vol", "tk", 0): 10.0, ("qt", "tk", 0): 1.0,
                       ("vol", "tk", 1): 10.0 - VOLUME_PER_FLOW_HOUR, ("vol", "tk", 2): 10.0})
        r = [v for row, v in zip(cons.rows, residuals(cons, x)) if row.tag == "tank volume"]
        assert r[0] == pytest.approx(0.0, abs=1e-12)
        assert VOLUME_PER_FLOW_HOUR == 3.6

    def test_level_matches_volume(self):
        inst, vs, tank = self._setup(area=2.0)
        cons = tank_constraints(vs, inst, tank)
        x = point(vs, {("vol", "tk", t): 8.0 for t in range(3)})
        for t in range(3):
            x[vs[("h", "t", t)]] = 10.0 + 8.0 / 2.0
        r = [v for row, v in zip(cons.rows, residuals(cons, x)) if row.tag == "tank level"]
        assert np.abs(r).max() <= 1e-12

    def test_unbuilt_tank_blocks_exchange(self):
        inst, vs, tank = self._setup()
        cons = tank_constraints(vs, inst, tank)
        x = point(vs, {("x", "tank", "tk"): 0.0, ("qt", "tk", 1): -0.5})
        assert "tank expansion" in _tags_violated(cons, x)

    def test_recovery(self):
        inst, vs, tank = self._setup()
        cons = tank_constraints(vs, inst, tank)
        x = point(vs, {("vol", "tk", 0): 5.0, ("vol", "tk", 2): 4.0})
        r = [v for row, v in zip(cons.rows, residuals(cons, x)) if row.tag == "tank recovery"]
        assert r == [pytest.approx(1.0)]

    @settings(max_examples=50, deadline=None)
    @given(flows=st.lists(st.floats(-5, 5), min_size=2, max_size=2))
    def test_volume_telescopes(self, flows):
        inst, vs, tank = self._setup()
        cons = tank_constraints(vs, inst, tank)
        v = [20.0]
        for q in flows:
            v.append(v[-1] - VOLUME_PER_FLOW_HOUR * q)
        x = point(vs, {("qt", "tk", k): q for k, q in enumerate(flows)})
        for t, val in enumerate(v):
            x[vs[("vol", "tk", t)]] = val
        r = [val for row, val in zip(cons.rows, residuals(cons, x)) if row.tag == "tank volume"]
        assert np.abs(r).max() <= 1e-9
        assert v[-1] - v[0] == pytest.approx(-VOLUME_PER_FLOW_HOUR * sum(flows), abs=1e-9)


class TestFlowConservation:
    def test_demand_node(self):
        inst = water_line(n=1)
        vs = space_for(inst)
        cons = flow_conservation(vs, inst, inst.junction("d"))
        x = point(vs, {("w", "p", 0): 30.0, ("qd", "dem", 0): 30.0})
        assert residuals(cons, x)[0] == 0.0
        x[vs[("qd", "dem", 0)]] = 31.0
        assert residuals(cons, x)[0] == pytest.approx(-1.0)

    def test_reservoir_supplies_pump(self):
        inst = water_line(n=1)
        vs = space_for(inst)
        cons = flow_conservation(vs, inst, inst.junction("r"))
        x = point(vs, {("w", "pu", 0): 30.0, ("qr", "src", 0): 30.0})
        assert residuals(cons, x)[0] == 0.0

    def test_tank_exchange_enters_node(self):
        inst = water_line(n=1, tank=1.0)
        vs = space_for(inst)
        cons = flow_conservation(vs, inst, inst.junction("t"))
        x = point(vs, {("qt", "tk", 0): 4.0, ("w", "c", 0): 4.0})
        assert residuals(cons, x)[0] == 0.0
