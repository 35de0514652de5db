import math
from dataclasses import replace

import numpy as np
import pytest

from pmplan.lifetime import DiscreteWeibull
from pmplan.renewal import (
    OneComponentEconomics,
    best_of,
    cost_constant,
    critical_value_loss,
    cycle_moments,
    no_pm_cost,
    q,
    selected_costs,
)


def scan_q(econ, t):
    """Cycle cost over cycle length, summed term by term."""
    life = econ.lifetime
    surv = lambda k: math.exp(-life.scale * k**life.shape)  # noqa: E731
    length = sum(k * (surv(k - 1) - surv(k)) for k in range(1, t + 1)) + t * surv(t)
    cost = (1 - surv(t)) * econ.cm_cost + surv(t) * (econ.pm_base_cost + econ.value_loss_rate * t)
    return cost / length


def with_m(econ, m):
    return replace(econ, value_loss_rate=m)


class TestCycleCost:
    def test_matches_term_by_term_sum(self, rotor_econ):
        for t in (1, 2, 17, 68, 150):
            assert q(rotor_econ, t) == pytest.approx(scan_q(rotor_econ, t), rel=1e-12)

    def test_vectorised_matches_scalar(self, generator_econ):
        t = np.arange(1, 60)
        np.testing.assert_allclose(q(generator_econ, t), [q(generator_econ, int(k)) for k in t], rtol=1e-15)

    def test_rejects_zero_age(self, rotor_econ):
        with pytest.raises(ValueError):
            q(rotor_econ, 0)

    def test_long_horizon_tends_to_run_to_failure(self, rotor_econ):
        cap = rotor_econ.lifetime.support_cap()
        assert q(rotor_econ, cap) == pytest.approx(no_pm_cost(rotor_econ), rel=1e-9)

    def test_length_at_cap_is_mean(self, spec):
        for j in range(spec.n):
            econ = spec.economics(j)
            cap = econ.lifetime.support_cap()
            _, length = cycle_moments(econ, cap)
            assert length == pytest.approx(econ.lifetime.mean(), abs=1e-9)

    @pytest.mark.parametrize("factor", [0.5, 2.0, 10.0])
    def test_cost_scaling(self, rotor_econ, factor):
        t = np.arange(1, 300)
        scaled = rotor_econ.scaled(factor)
        np.testing.assert_allclose(q(scaled, t), factor * q(rotor_econ, t), rtol=1e-13)
        assert cost_constant(scaled).argmin_t == cost_constant(rotor_econ).argmin_t

    def test_pm_never_beats_cm_at_equal_cost(self):
        econ = OneComponentEconomics(100.0, 100.0, 0.0, DiscreteWeibull(1e-4, 2))
        t = np.arange(1, econ.lifetime.support_cap() + 1)
        assert np.all(q(econ, t) >= no_pm_cost(econ) * (1 - 1e-12))

    def test_warns_when_pm_dearer_than_cm(self):
        with pytest.warns(UserWarning):
            OneComponentEconomics(10.0, 20.0, 0.0, DiscreteWeibull(1e-4, 2))


class TestCostConstant:
    def test_equals_exhaustive_scan(self, spec):
        for j in range(spec.n):
            econ = spec.economics(j)
            cap = econ.lifetime.support_cap()
            costs = [scan_q(econ, t) for t in range(1, cap + 1)]
            best = min(min(costs), no_pm_cost(econ))
            const = cost_constant(econ)
            assert const.value == pytest.approx(best, rel=1e-12)
            assert const.argmin_t == 1 + int(np.argmin(costs))

    def test_bounds_every_option(self, generator_econ):
        const = cost_constant(generator_econ)
        assert np.all(const.value <= const.costs + 1e-12)
        assert const.value <= const.no_pm + 1e-12

    def test_frozen_table1_constants(self, spec):
        # values from the exhaustive scan above
        expected = {"rotor": (1.643771, 68), "main_bearing": (1.065082, 123), "gearbox": (2.452709, 54), "generator": (1.593653, 98)}
        for name, (value, t) in expected.items():
            const = cost_constant(spec.economics(spec.index(name)))
            assert const.value == pytest.approx(value, abs=1e-6)
            assert const.argmin_t == t

    def test_huge_value_loss_means_no_pm(self, rotor_econ):
        const = cost_constant(with_m(rotor_econ, 1e6))
        assert const.argmin_t is None
        assert const.value == rotor_econ.cm_cost / rotor_econ.lifetime.mean()

    def test_non_decreasing_in_value_loss(self, rotor_econ):
        values = [cost_constant(with_m(rotor_econ, m)).value for m in np.arange(0, 1.0001, 0.05)]
        assert np.all(np.diff(values) >= -1e-12)

    def test_no_spurious_optimum_past_support(self, rotor_econ):
        # past the support q_t equals q_inf up to rounding; that must not register as PM
        assert cost_constant(with_m(rotor_econ, 0.9)).argmin_t is None

    def test_smallest_minimiser_on_ties(self):
        law = DiscreteWeibull(40.0, 1.0)  # dies in month 1 with certainty
        const = cost_constant(OneComponentEconomics(5.0, 1.0, 0.0, law), search_cap=5)
        assert const.argmin_t is None
        assert const.value == pytest.approx(5.0)

    def test_cost_curve_pairs(self, rotor_econ):
        const = cost_constant(rotor_econ, search_cap=10)
        assert [t for t, _ in const.cost_curve] == list(range(1, 11))


class TestRotorValueLoss:
    """Rotor with the shared downtime folded in: g = 172, h = 55."""

    def test_five_options(self, rotor_econ):
        for m, winner in [(0.51, 70), (0.62, 80), (0.75, None)]:
            assert best_of(selected_costs(with_m(rotor_econ, m), (70, 80, 90, 100))) == winner

    def test_full_argmin_values(self, rotor_econ):
        # frozen from the exhaustive scan; the unrestricted optimum is not on the 10-month grid
        assert cost_constant(with_m(rotor_econ, 0.51)).argmin_t == 73
        assert cost_constant(with_m(rotor_econ, 0.62)).argmin_t == 77

    def test_critical_value_loss(self, rotor_econ):
        grid = np.round(np.arange(0.30, 0.9001, 0.01), 2)
        m0 = critical_value_loss(rotor_econ, grid)
        assert m0 == pytest.approx(0.73)
        assert abs(m0 - 0.72) <= 0.02

    def test_selected_costs_are_linear_in_value_loss(self, rotor_econ):
        a, b, c = (selected_costs(with_m(rotor_econ, m), (80,))[80] for m in (0.3, 0.5, 0.7))
        assert b - a == pytest.approx(c - b, rel=1e-10)
