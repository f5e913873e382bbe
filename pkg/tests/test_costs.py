import math

import numpy as np
import pytest

from persuasim import (
    CostModelError,
    GarblingPolicy,
    HittingStats,
    LaplaceMixtureCost,
    LinearCost,
    PowerCost,
    SimConfig,
    SumCost,
    TabulatedCost,
    TerminalLaw,
    coupled_no_garbling_comparison,
    eval_cost,
    expected_cost,
    icx_dominates,
    laplace_exit_transform,
    make_two_atom_law,
    simulate_exit,
    stats_from_outcomes,
)
from persuasim.costs import cost_from_json_dict

LN3 = math.log(3.0)

EXAMPLE_MIXTURE = LaplaceMixtureCost(affine_rate=1.0, atoms=((1.0, -1.0),))


class TestEvalCost:
    def test_linear(self):
        assert eval_cost(LinearCost(2.0), 3.0) == 6.0

    def test_power(self):
        assert eval_cost(PowerCost(1.0, 2.0), 3.0) == 9.0

    def test_mixture_hand_value(self):
        # c(t) = t - (1 - e^-t), so c(1) = e^-1
        assert eval_cost(EXAMPLE_MIXTURE, 1.0) == pytest.approx(math.exp(-1.0), abs=1e-15)

    def test_tabulated_interpolation_and_extrapolation(self):
        c = TabulatedCost(knots=((0.0, 0.0), (1.0, 1.0), (2.0, 3.0)))
        assert eval_cost(c, 0.5) == pytest.approx(0.5)
        assert eval_cost(c, 1.5) == pytest.approx(2.0)
        assert eval_cost(c, 4.0) == pytest.approx(3.0 + 2.0 * 2.0)  # final slope 2

    @pytest.mark.parametrize(
        "cost",
        [
            LinearCost(0.7),
            PowerCost(0.5, 1.5),
            EXAMPLE_MIXTURE,
            TabulatedCost(knots=((0.0, 0.0), (1.0, 0.5), (3.0, 2.5))),
        ],
    )
    def test_normalized_increasing_convex(self, cost):
        t = np.linspace(0.0, 8.0, 400)
        c = eval_cost(cost, t)
        assert c[0] == pytest.approx(0.0, abs=1e-12)
        assert np.all(np.diff(c) >= -1e-12)
        assert np.all(np.diff(c, 2) >= -1e-9)

    def test_negative_time_rejected(self):
        with pytest.raises(CostModelError):
            eval_cost(LinearCost(1.0), -0.5)

    @pytest.mark.parametrize(
        "factory",
        [
            lambda: LinearCost(0.0),
            lambda: LinearCost(-1.0),
            lambda: PowerCost(0.0, 2.0),
            lambda: PowerCost(1.0, 0.5),
            lambda: LaplaceMixtureCost(affine_rate=-0.1, atoms=()),
            lambda: LaplaceMixtureCost(affine_rate=0.0, atoms=((1.0, 1.0),)),  # concave
            lambda: LaplaceMixtureCost(affine_rate=0.5, atoms=((1.0, 1.0),)),  # still concave
            lambda: TabulatedCost(knots=((0.0, 0.0),)),
            lambda: TabulatedCost(knots=((0.5, 0.0), (1.0, 1.0))),  # must start at t=0
            lambda: TabulatedCost(knots=((0.0, 0.1), (1.0, 1.0))),  # c(0) != 0
            lambda: TabulatedCost(knots=((0.0, 0.0), (1.0, 1.0), (2.0, 1.5))),  # non-convex
            lambda: TabulatedCost(knots=((0.0, 0.0), (1.0, -0.5), (2.0, 1.0))),  # decreasing
        ],
    )
    def test_invalid_models_rejected(self, factory):
        with pytest.raises(CostModelError):
            factory()

    def test_json_round_trip(self):
        for cost in (
            LinearCost(0.3),
            PowerCost(2.0, 3.0),
            EXAMPLE_MIXTURE,
            TabulatedCost(knots=((0.0, 0.0), (2.0, 1.0), (4.0, 3.0))),
            SumCost(parts=(LinearCost(0.1), PowerCost(1.0, 2.0))),
        ):
            assert cost_from_json_dict(cost.to_json_dict()) == cost

    def test_unknown_variant_rejected(self):
        with pytest.raises(CostModelError):
            cost_from_json_dict({"variant": "cubic"})


class TestExpectedCost:
    def test_linear_closed_form(self, bench_params):
        law = make_two_atom_law(bench_params, 0.5)
        est = expected_cost(LinearCost(1.0), law, bench_params)
        assert est.value == pytest.approx(LN3, abs=1e-14)
        assert est.std_err == 0.0

    def test_point_mass_is_free(self, bench_params):
        law = make_two_atom_law(bench_params, 0.0)
        assert expected_cost(PowerCost(1.0, 2.0), law, bench_params).value == 0.0

    def test_mixture_assembles_transform(self, bench_params):
        law = make_two_atom_law(bench_params, 0.5)
        est = expected_cost(EXAMPLE_MIXTURE, law, bench_params)
        phi1 = laplace_exit_transform(1.0, 0.5, 0.25, 0.75, bench_params)
        assert est.value == pytest.approx(LN3 - 1.0 + phi1, abs=1e-12)

    def test_mixture_matches_monte_carlo(self, bench_params, no_garbling):
        law = make_two_atom_law(bench_params, 0.5)
        est = expected_cost(EXAMPLE_MIXTURE, law, bench_params)
        cfg = SimConfig(n_paths=20000, du=5e-5, max_u=4.0, seed=64, bridge_correction=True)
        taus = np.array(
            [o.tau for o in simulate_exit(bench_params, 0.25, 0.75, no_garbling, cfg)]
        )
        draws = eval_cost(EXAMPLE_MIXTURE, taus)
        se = draws.std(ddof=1) / math.sqrt(draws.size)
        assert abs(draws.mean() - est.value) <= 3.0 * se

    def test_monte_carlo_variants_report_error(self, bench_params):
        law = make_two_atom_law(bench_params, 0.5)
        cfg = SimConfig(n_paths=4096, du=2e-4, max_u=6.0, seed=7, bridge_correction=True)
        est = expected_cost(PowerCost(1.0, 2.0), law, bench_params, cfg)
        other = expected_cost(PowerCost(1.0, 2.0), law, bench_params,
                              SimConfig(n_paths=4096, du=2e-4, max_u=6.0, seed=8,
                                        bridge_correction=True))
        assert est.std_err > 0.0
        assert abs(est.value - other.value) <= 3.0 * (est.std_err + other.std_err)

    def test_sum_cost_splits_linearly(self, bench_params):
        law = make_two_atom_law(bench_params, 0.5)
        combined = SumCost(parts=(LinearCost(0.5), LinearCost(1.5)))
        assert expected_cost(combined, law, bench_params).value == pytest.approx(
            expected_cost(LinearCost(2.0), law, bench_params).value, abs=1e-14
        )

    def test_three_atom_law_rejected(self, bench_params):
        law = TerminalLaw(atoms=((0.2, 0.3), (0.5, 0.2), (0.75, 0.5)))
        with pytest.raises(CostModelError):
            expected_cost(LinearCost(1.0), law, bench_params)

    def test_boundary_at_zero_rejected(self, bench_params):
        law = make_two_atom_law(bench_params, 2.0 / 3.0)
        with pytest.raises(CostModelError):
            expected_cost(LinearCost(1.0), law, bench_params)


class TestDominance:
    def test_monotone_transfer_is_pathwise(self, bench_params, quick_cfg):
        phi = GarblingPolicy.piecewise([0.0, 0.5, 1.0], [0.5, 1.0])
        cmp_ = coupled_no_garbling_comparison(bench_params, 0.25, 0.75, phi, quick_cfg)
        tabulated = TabulatedCost(knots=((0.0, 0.0), (1.0, 0.5), (2.0, 2.0)))
        for cost in (LinearCost(1.0), PowerCost(1.0, 2.0), EXAMPLE_MIXTURE, tabulated):
            garbled = eval_cost(cost, cmp_.tau_garbled)
            clean = eval_cost(cost, cmp_.tau_clean)
            assert np.all(garbled >= clean)  # monotonicity transfers path by path
            assert garbled.mean() >= clean.mean()

    def test_reflexive(self):
        stats = HittingStats(samples=np.array([1.0, 2.0, 4.0]),
                             success_indicator=np.array([True, True, False]))
        assert icx_dominates(stats, stats, np.linspace(0, 5, 11))

    def test_smaller_constant_does_not_dominate(self):
        a = HittingStats(samples=np.full(10, 1.0), success_indicator=np.ones(10, bool))
        b = HittingStats(samples=np.full(10, 2.0), success_indicator=np.ones(10, bool))
        assert not icx_dominates(a, b, np.linspace(0, 3, 7))
        assert icx_dominates(b, a, np.linspace(0, 3, 7))

    def test_wider_interval_dominates(self, bench_params, no_garbling):
        cfg = SimConfig(n_paths=20000, du=1e-4, max_u=6.0, seed=99, bridge_correction=True)
        wide = stats_from_outcomes(
            simulate_exit(bench_params, 0.2, 0.75, no_garbling, cfg), 0.75
        )
        narrow = stats_from_outcomes(
            simulate_exit(bench_params, 0.25, 0.75, no_garbling, cfg), 0.75
        )
        grid = np.linspace(0.0, float(np.quantile(wide.samples, 0.99)), 50)
        assert icx_dominates(wide, narrow, grid)

    def test_residual_dominance_transfers_to_costs(self, bench_params, no_garbling):
        cfg = SimConfig(n_paths=20000, du=1e-4, max_u=6.0, seed=99, bridge_correction=True)
        wide = stats_from_outcomes(
            simulate_exit(bench_params, 0.2, 0.75, no_garbling, cfg), 0.75
        )
        narrow = stats_from_outcomes(
            simulate_exit(bench_params, 0.25, 0.75, no_garbling, cfg), 0.75
        )
        grid = np.linspace(0.0, float(np.quantile(wide.samples, 0.99)), 50)
        assert icx_dominates(wide, narrow, grid)
        for cost in (LinearCost(1.0), PowerCost(1.0, 2.0), EXAMPLE_MIXTURE):
            cw = eval_cost(cost, wide.samples)
            cn = eval_cost(cost, narrow.samples)
            se = (cw.std(ddof=1) / math.sqrt(cw.size) + cn.std(ddof=1) / math.sqrt(cn.size))
            assert cw.mean() >= cn.mean() - 3.0 * se
