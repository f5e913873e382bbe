import json
import math

import numpy as np
import pytest

from persuasim import (
    GarblingPolicy,
    HittingStats,
    InvalidModelError,
    ModelParams,
    TerminalLaw,
    make_two_atom_law,
    validate_law,
)


class TestModelParams:
    def test_signal_to_noise(self, bench_params):
        assert bench_params.k == 1.0
        assert ModelParams(mu_h=2.0, mu_l=0.0, sigma=4.0, p0=0.4, p_bar=0.6).k == 0.5

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(mu_h=0.0, mu_l=0.0, sigma=1.0, p0=0.5, p_bar=0.75),  # drifts equal
            dict(mu_h=0.0, mu_l=1.0, sigma=1.0, p0=0.5, p_bar=0.75),  # drifts flipped
            dict(mu_h=1.0, mu_l=0.0, sigma=0.0, p0=0.5, p_bar=0.75),  # zero volatility
            dict(mu_h=1.0, mu_l=0.0, sigma=-1.0, p0=0.5, p_bar=0.75),
            dict(mu_h=1.0, mu_l=0.0, sigma=1.0, p0=0.0, p_bar=0.75),
            dict(mu_h=1.0, mu_l=0.0, sigma=1.0, p0=0.5, p_bar=1.0),
            dict(mu_h=1.0, mu_l=0.0, sigma=1.0, p0=0.75, p_bar=0.75),  # degenerate prior
            dict(mu_h=1.0, mu_l=0.0, sigma=1.0, p0=0.8, p_bar=0.75),
        ],
    )
    def test_invalid_params_rejected(self, kwargs):
        with pytest.raises(InvalidModelError):
            ModelParams(**kwargs)

    def test_json_round_trip_exact_keys(self, bench_params):
        payload = json.loads(bench_params.to_json())
        assert set(payload) == {"mu_h", "mu_l", "sigma", "p0", "p_bar"}
        assert ModelParams.from_json(bench_params.to_json()) == bench_params

    def test_with_snr_rescales_sigma(self, bench_params):
        rescaled = bench_params.with_snr(2.0)
        assert rescaled.k == pytest.approx(2.0, abs=1e-15)
        assert rescaled.p0 == bench_params.p0


class TestTerminalLaw:
    def test_two_atom_construction(self, bench_params):
        law = make_two_atom_law(bench_params, 0.5)
        assert law.atoms == ((0.25, 0.5), (0.75, 0.5))
        assert law.mean == pytest.approx(0.5, abs=1e-15)

    def test_zero_success_degenerates_to_prior_point_mass(self, bench_params):
        law = make_two_atom_law(bench_params, 0.0)
        assert law.atoms == ((0.5, 1.0),)
        assert law.is_point_mass

    def test_max_success_puts_lower_atom_at_zero(self, bench_params):
        law = make_two_atom_law(bench_params, 2.0 / 3.0)
        assert law.beliefs[0] == pytest.approx(0.0, abs=1e-15)
        assert law.masses[1] == pytest.approx(2.0 / 3.0, abs=1e-15)
        assert law.mean == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize("p_success", [-0.1, 0.7, 1.0, 1.5])
    def test_infeasible_success_probability_rejected(self, bench_params, p_success):
        with pytest.raises(InvalidModelError):
            make_two_atom_law(bench_params, p_success)

    def test_feasible_grid_all_valid_and_lower_decreasing(self, bench_params):
        lowers = []
        for p in np.linspace(0.0, bench_params.p0 / bench_params.p_bar, 33):
            law = make_two_atom_law(bench_params, float(p))
            assert validate_law(law, bench_params).ok
            lowers.append(law.beliefs[0])
        widening = np.diff(lowers[:-1])  # last point repeats belief 0
        assert np.all(widening < 0)

    def test_mass_renormalization_within_tolerance(self):
        drift = 1e-13
        law = TerminalLaw(atoms=((0.2, 0.5 + drift), (0.8, 0.5)))
        assert math.fsum(m for _, m in law.atoms) == 1.0

    @pytest.mark.parametrize(
        "atoms",
        [
            (),
            ((0.5, 0.5),),  # short mass
            ((0.2, 0.5), (0.8, 0.6)),  # excess mass
            ((0.8, 0.5), (0.2, 0.5)),  # decreasing support
            ((0.2, 0.5), (0.2, 0.5)),  # duplicate support
            ((-0.1, 0.5), (0.8, 0.5)),
            ((0.2, 0.0), (0.8, 1.0)),  # zero mass atom
        ],
    )
    def test_bad_atoms_rejected(self, atoms):
        with pytest.raises(InvalidModelError):
            TerminalLaw(atoms=atoms)

    def test_json_round_trip(self):
        law = TerminalLaw(atoms=((0.25, 0.5), (0.75, 0.5)))
        assert json.loads(law.to_json()) == {"atoms": [[0.25, 0.5], [0.75, 0.5]]}
        assert TerminalLaw.from_json(law.to_json()) == law


class TestValidateLaw:
    def test_constructor_output_ok(self, bench_params):
        report = validate_law(make_two_atom_law(bench_params, 0.4), bench_params)
        assert report.ok and report.violations == ()

    def test_balanced_law_ok(self, bench_params):
        law = TerminalLaw(atoms=((0.2, 0.5), (0.8, 0.5)))
        assert validate_law(law, bench_params).ok

    def test_mean_violation_reported_with_discrepancy(self, bench_params):
        law = TerminalLaw(atoms=((0.2, 0.5), (0.9, 0.5)))
        report = validate_law(law, bench_params)
        assert not report.ok
        assert any("0.55" in v and "0.5" in v for v in report.violations)


class TestGarblingPolicy:
    def test_identity(self):
        phi = GarblingPolicy.none()
        assert phi.is_identity
        assert phi(0.3) == 1.0

    def test_constant(self):
        phi = GarblingPolicy.constant(0.5)
        np.testing.assert_allclose(phi(np.array([0.1, 0.9])), [0.5, 0.5])

    def test_piecewise_cells_right_open(self):
        phi = GarblingPolicy.piecewise([0.0, 0.5, 1.0], [0.5, 1.0])
        np.testing.assert_allclose(phi(np.array([0.0, 0.49, 0.5, 0.51, 1.0])),
                                   [0.5, 0.5, 1.0, 1.0, 1.0])

    def test_tabulated_interpolates(self):
        phi = GarblingPolicy.tabulated([0.0, 1.0], [0.2, 1.0])
        assert phi(0.5) == pytest.approx(0.6)

    @pytest.mark.parametrize(
        "factory",
        [
            lambda: GarblingPolicy.constant(1.5),
            lambda: GarblingPolicy.constant(-0.1),
            lambda: GarblingPolicy.piecewise([0.0, 1.0], [0.5, 1.0]),  # wrong arity
            lambda: GarblingPolicy.piecewise([0.1, 0.5, 1.0], [0.5, 1.0]),  # must span [0,1]
            lambda: GarblingPolicy.tabulated([0.5], [1.0]),  # too short
            lambda: GarblingPolicy.tabulated([0.5, 0.4], [1.0, 1.0]),  # not increasing
        ],
    )
    def test_invalid_policies_rejected(self, factory):
        with pytest.raises(InvalidModelError):
            factory()

    def test_json_round_trip(self):
        for phi in (
            GarblingPolicy.constant(0.7),
            GarblingPolicy.piecewise([0.0, 0.3, 1.0], [0.4, 1.0]),
            GarblingPolicy.tabulated([0.0, 0.5, 1.0], [1.0, 0.3, 1.0]),
        ):
            assert GarblingPolicy.from_json_dict(phi.to_json_dict()) == phi


class TestHittingStats:
    def test_moments(self):
        stats = HittingStats(samples=np.array([1.0, 2.0, 3.0]),
                             success_indicator=np.array([True, False, True]))
        assert stats.n == 3
        assert stats.mean == pytest.approx(2.0)
        assert stats.std_err == pytest.approx(np.std([1, 2, 3], ddof=1) / math.sqrt(3))
        assert stats.upper_hit_fraction == pytest.approx(2.0 / 3.0)

    def test_rejects_empty_or_negative(self):
        with pytest.raises(InvalidModelError):
            HittingStats(samples=np.array([]), success_indicator=np.array([]))
        with pytest.raises(InvalidModelError):
            HittingStats(samples=np.array([-1.0]), success_indicator=np.array([True]))
