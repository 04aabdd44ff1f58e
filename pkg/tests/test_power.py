"""Power-network residuals checked against direct complex arithmetic."""
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import one_bus, per_phase, point, residuals, space_for, two_bus
from jointplan.model import Storage
from jointplan.power import (
    generator_constraints, kcl_balance, ohms_law, storage_constraints, thermal_limits,
    voltage_magnitude_bounds,
)
from jointplan.testcase import build_testcase


class TestVoltageMagnitude:
    def test_pinned_magnitude(self):
        inst = one_bus(vmin=1.0, vmax=1.0)
        vs = space_for(inst)
        cons = voltage_magnitude_bounds(vs, inst, inst.power.buses[0])
        x = point(vs, {("e", "b", "a", 0): 0.6, ("f", "b", "a", 0): 0.8, ("e", "b", "a", 1): 0.6,
                       ("f", "b", "a", 1): 0.8})
        assert np.allclose(residuals(cons, x), 0.0)
        x2 = point(vs, {("e", "b", "a", 0): 0.6, ("f", "b", "a", 0): 0.81})
        assert residuals(cons, x2)[0] > 0

    def test_demo_bounds_are_squared(self):
        inst = build_testcase()
        vs = space_for(inst)
        cons = voltage_magnitude_bounds(vs, inst, inst.power.buses[1])
        assert cons.rows[0].const == pytest.approx(-1.03 ** 2)
        assert cons.rows[1].const == pytest.approx(0.97 ** 2)

    def test_single_phase_row_count(self):
        inst = one_bus(n=5)
        vs = space_for(inst)
        assert len(voltage_magnitude_bounds(vs, inst, inst.power.buses[0]).rows) == 2 * 5


class TestKcl:
    def test_generator_meets_load(self):
        inst = one_bus(n=1)
        vs = space_for(inst)
        cons = kcl_balance(vs, inst, inst.power.buses[0])
        x = point(vs, {("pg", "g", "a", 0): 0.5, ("pl", "l", "a", 0): 0.5})
        assert np.allclose(residuals(cons, x), 0.0)
        x[vs[("pg", "g", "a", 0)]] = 0.7
        assert residuals(cons, x)[0] == pytest.approx(0.2)

    def test_storage_withdrawal_sign(self):
        stor = Storage("s", "b", ("a",), 1.0, 1.0, 1.0, 2.0, 1.0, 1.0, 0.0)
        inst = one_bus(n=1, storage=[stor])
        vs = space_for(inst)
        cons = kcl_balance(vs, inst, inst.power.buses[0])
        # charging draws power: generation 0.8 = load 0.5 + charge 0.3
        x = point(vs, {("pg", "g", "a", 0): 0.8, ("pl", "l", "a", 0): 0.5, ("pc", "s", 0): 0.3})
        assert residuals(cons, x)[0] == pytest.approx(0.0)

    def test_load_bus_rows_balance_line_flow(self):
        inst = two_bus()
        vs = space_for(inst)
        cons = kcl_balance(vs, inst, inst.power.buses[1])
        x = point(vs, {("pl", "d", "a", 0): 0.3, ("p", "l", "to", "a", 0): -0.3,
                       ("q", "l", "to", "a", 0): -0.1})
        assert np.allclose(residuals(cons, x), 0.0)


def _oracle_flow(y, yc, vi, vj):
    """diag(Vi Vi^H (Y + Yc)^H - Vi Vj^H Y^H) by plain complex algebra."""
    return np.diag(np.outer(vi, vi.conj()) @ (y + yc).conj().T - np.outer(vi, vj.conj()) @ y.conj().T)


def _branch_point(inst, vs, rng):
    br = inst.power.branches[0]
    y = np.asarray(br.y, dtype=complex)
    yc_f, yc_t = np.asarray(br.yc_from, dtype=complex), np.asarray(br.yc_to, dtype=complex)
    phases = inst.bus(br.from_bus).phases
    vi = rng.uniform(0.9, 1.1, len(phases)) * np.exp(1j * rng.uniform(-np.pi, np.pi, len(phases)))
    vj = rng.uniform(0.9, 1.1, len(phases)) * np.exp(1j * rng.uniform(-np.pi, np.pi, len(phases)))
    x = np.zeros(len(vs))
    for p, ph in enumerate(phases):
        x[vs[("e", br.from_bus, ph, 0)]], x[vs[("f", br.from_bus, ph, 0)]] = vi[p].real, vi[p].imag
        x[vs[("e", br.to_bus, ph, 0)]], x[vs[("f", br.to_bus, ph, 0)]] = vj[p].real, vj[p].imag
    s_ij = _oracle_flow(y, yc_f, vi, vj)
    s_ji = _oracle_flow(y, yc_t, vj, vi)
    for p, ph in enumerate(phases):
        x[vs[("p", br.id, "from", ph, 0)]], x[vs[("q", br.id, "from", ph, 0)]] = s_ij[p].real, s_ij[p].imag
        x[vs[("p", br.id, "to", ph, 0)]], x[vs[("q", br.id, "to", ph, 0)]] = s_ji[p].real, s_ji[p].imag
    return br, x, s_ij, s_ji


class TestOhmsLaw:
    def test_equal_voltages_no_flow(self):
        inst = two_bus()
        vs = space_for(inst)
        cons = ohms_law(vs, inst, inst.power.branches[0])
        x = point(vs, {("e", "b1", "a", 0): 1.0, ("e", "b2", "a", 0): 1.0})
        assert np.allclose(residuals(cons, x), 0.0)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_complex_oracle_single_phase(self, seed):
        inst = two_bus(y=complex(2.0, -5.0), yc=complex(0.0, 0.05))
        vs = space_for(inst)
        br, x, _, _ = _branch_point(inst, vs, np.random.default_rng(seed))
        assert np.abs(residuals(ohms_law(vs, inst, br), x)).max() <= 1e-12

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_complex_oracle_three_phase(self, seed):
        inst = build_testcase()
        vs = space_for(inst)
        br, x, _, _ = _branch_point(inst, vs, np.random.default_rng(seed))
        cons = ohms_law(vs, inst, br)
        r = residuals(cons, x)
        assert r.size == 2 * 3 * inst.time_grid.n_intervals * 2
        # only interval 0 was populated; pick rows touching its flow variables
        k0 = {vs[(t, br.id, end, ph, 0)] for t in "pq" for end in ("from", "to") for ph in "abc"}
        mask = np.array([any(c in k0 for c, _ in row.lin) for row in cons.rows])
        assert mask.sum() == 12
        assert np.abs(r[mask]).max() <= 1e-9

    def test_lossless_line(self):
        inst = two_bus(y=complex(0.0, -4.0))
        vs = space_for(inst)
        _, _, s_ij, s_ji = _branch_point(inst, vs, np.random.default_rng(3))
        assert s_ij[0].real + s_ji[0].real == pytest.approx(0.0, abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_passive_line_losses_nonnegative(self, seed):
        inst = two_bus(y=complex(1.5, -4.0))
        vs = space_for(inst)
        _, _, s_ij, s_ji = _branch_point(inst, vs, np.random.default_rng(seed))
        assert s_ij[0].real + s_ji[0].real >= -1e-12


class TestThermalLimits:
    def test_unbounded_emits_nothing(self):
        inst = build_testcase()
        vs = space_for(inst)
        assert len(thermal_limits(vs, inst, inst.power.branches[0]).rows) == 0

    def test_three_four_five(self):
        inst = two_bus(smax=per_phase(1.0, 1))
        vs = space_for(inst)
        cons = thermal_limits(vs, inst, inst.power.branches[0])
        x = point(vs, {("p", "l", "from", "a", 0): 0.6, ("q", "l", "from", "a", 0): 0.8})
        assert residuals(cons, x)[0] == pytest.approx(0.0, abs=1e-15)

    def test_zero_limit_forces_zero_flow(self):
        inst = two_bus(smax=per_phase(0.0, 1))
        vs = space_for(inst)
        cons = thermal_limits(vs, inst, inst.power.branches[0])
        x = point(vs, {("p", "l", "from", "a", 0): 1e-3})
        assert residuals(cons, x)[0] > 0


class TestGenerator:
    def _pv(self):
        inst = build_testcase()
        return inst, space_for(inst), inst.power.generators[1]

    def test_off_forces_zero(self):
        inst, vs, pv = self._pv()
        cons = generator_constraints(vs, inst, pv)
        x = point(vs, {("zg", "pv", 0): 0.0, ("pg", "pv", "a", 0): 0.01})
        assert residuals(cons, x).max() > 0
        x[vs[("pg", "pv", "a", 0)]] = 0.0
        assert residuals(cons, x).max() <= 0

    def test_expansion_gates_status(self):
        inst, vs, pv = self._pv()
        cons = generator_constraints(vs, inst, pv)
        x = point(vs, {("zg", "pv", 3): 1.0, ("x", "generator", "pv"): 0.0})
        tags = [row.tag for row, r in zip(cons.rows, residuals(cons, x)) if r > 0]
        assert tags == ["generator expansion"]

    def test_on_gives_box(self):
        inst = one_bus(n=1)
        inst = replace(inst, power=replace(inst.power, generators=(
            replace(inst.power.generators[0], expandable=True, status="free"),)))
        vs = space_for(inst)
        cons = generator_constraints(vs, inst, inst.power.generators[0])
        for p in (0.0, 0.5, 1.0):
            x = point(vs, {("zg", "g", 0): 1.0, ("x", "generator", "g"): 1.0, ("pg", "g", "a", 0): p})
            assert residuals(cons, x).max() <= 0
        x = point(vs, {("zg", "g", 0): 1.0, ("x", "generator", "g"): 1.0, ("pg", "g", "a", 0): 1.01})
        assert residuals(cons, x).max() > 0

    def test_existing_generator_status_fixed_on(self):
        inst = build_testcase()
        vs = space_for(inst)
        assert ("zg", "substation", 0) not in vs


class TestStorage:
    def _unit(self, **kw):
        args = dict(eta_c=0.9, eta_d=1.0, e_init=1.0)
        args.update(kw)
        stor = Storage("s", "b", ("a",), 2.0, 1.0, 1.0, 5.0, args["eta_c"], args["eta_d"], args["e_init"])
        inst = one_bus(n=2, storage=[stor])
        vs = space_for(inst)
        return inst, vs, storage_constraints(vs, inst, stor)

    def test_energy_update(self):
        _, vs, cons = self._unit()
        x = point(vs, {("soc", "s", 0): 1.0, ("soc", "s", 1): 1.9, ("pc", "s", 0): 1.0, ("zb", "s", 0): 1.0})
        energy = [r for row, r in zip(cons.rows, residuals(cons, x)) if row.tag == "storage energy"]
        assert energy[0] == pytest.approx(0.0, abs=1e-15)

    def test_lossless_round_trip(self):
        _, vs, cons = self._unit(eta_c=1.0, eta_d=1.0)
        x = point(vs, {("soc", "s", 0): 1.0, ("soc", "s", 1): 1.5, ("soc", "s", 2): 1.0,
                       ("pc", "s", 0): 0.5, ("pd", "s", 1): 0.5, ("zb", "s", 0): 1.0, ("zb", "s", 1): 1.0})
        r = residuals(cons, x)
        assert r.max() <= 1e-15
        energy = [v for row, v in zip(cons.rows, r) if row.tag in ("storage energy", "storage recovery")]
        assert np.abs(energy).max() <= 1e-15

    def test_off_forces_zero(self):
        _, vs, cons = self._unit()
        for name in (("pc", "s", 0), ("pd", "s", 0), ("qb", "s", 0)):
            x = point(vs, {("soc", "s", 0): 1.0, ("soc", "s", 1): 1.0, ("soc", "s", 2): 1.0, name: 0.1})
            if name[0] == "pc":
                x[vs[("soc", "s", 1)]] = x[vs[("soc", "s", 2)]] = 1.09
            if name[0] == "pd":
                x[vs[("soc", "s", 1)]] = x[vs[("soc", "s", 2)]] = 0.9
            bad = {row.tag for row, r in zip(cons.rows, residuals(cons, x)) if r > 1e-12}
            assert bad & {"storage rates", "storage reactive limit", "storage apparent limit"}

    def test_energy_row_derivative_wrt_charge(self):
        _, vs, cons = self._unit()
        row = next(r for r in cons.rows if r.tag == "storage energy")
        coef = dict(row.lin)[vs[("pc", "s", 0)]]
        assert coef == pytest.approx(-1.0 * 0.9)

    def test_recovery_row(self):
        _, vs, cons = self._unit()
        x = point(vs, {("soc", "s", 0): 1.0, ("soc", "s", 2): 0.99})
        rec = [r for row, r in zip(cons.rows, residuals(cons, x)) if row.tag == "storage recovery"]
        assert rec == [pytest.approx(0.01)]

    def test_complementarity_is_relaxed_for_subsolver(self):
        _, _, cons = self._unit()
        comp = [row for row in cons.rows if row.tag == "storage complementarity"]
        assert comp and all(row.relaxed for row in comp)
