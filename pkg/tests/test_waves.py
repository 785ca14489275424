import warnings

import numpy as np
import pytest
from sklearn.base import clone

from nonlocal_wave_lab.exceptions import ConvergenceError, InadmissibleVelocityError, ValidationError
from nonlocal_wave_lab.functionals import b_weighted_norm_sq, functional_Ic, functional_Q, m1_from_wave
from nonlocal_wave_lab.model import boussinesq, double_dispersion, improved_boussinesq, klein_gordon
from nonlocal_wave_lab.spectral import GridFunction, SymbolSpec, make_grid, shift
from nonlocal_wave_lab.waves import (
    ConstrainedMinimizer,
    PetviashviliSolver,
    TruncationWarning,
    center_profile,
    exact_boussinesq_wave,
    exact_double_dispersion_wave,
    exact_improved_boussinesq_wave,
    minimize_m1,
    ode_residual,
    solve_wave_fixed_point,
    wave_from_profile,
)

GRID = make_grid(1024, 80.0)
MID = GRID.n // 2


class TestExactWaves:
    def test_boussinesq_p3(self):
        w = exact_boussinesq_wave(3, 0.0, GRID)
        assert w.profile.values[MID] == pytest.approx(np.sqrt(2), rel=1e-15)
        assert w.profile.values.max() == w.profile.values[MID]

    def test_boussinesq_p2(self):
        w = exact_boussinesq_wave(2, 0.0, GRID)
        np.testing.assert_allclose(w.profile.values, 1.5 / np.cosh(GRID.x / 2) ** 2, atol=1e-15)

    @pytest.mark.parametrize("c", [1.0, -1.0, 1.2])
    def test_boussinesq_rejects(self, c):
        with pytest.raises(InadmissibleVelocityError, match="velocity outside admissible range"):
            exact_boussinesq_wave(3, c, GRID)

    def test_improved_p3(self):
        w = exact_improved_boussinesq_wave(3, np.sqrt(2), GRID)
        assert w.profile.values[MID] == pytest.approx(np.sqrt(2), rel=1e-14)

    def test_improved_p2(self):
        w = exact_improved_boussinesq_wave(2, 2.0, GRID)
        expected = 4.5 / np.cosh(0.5 * np.sqrt(0.75) * GRID.x) ** 2
        np.testing.assert_allclose(w.profile.values, expected, atol=1e-14)

    @pytest.mark.parametrize("c", [1.0, 0.5])
    def test_improved_rejects(self, c):
        with pytest.raises(InadmissibleVelocityError):
            exact_improved_boussinesq_wave(3, c, GRID)

    def test_double_dispersion_unit(self):
        w = exact_double_dispersion_wave(3, 0.0, 1.0, 1.0, GRID)
        np.testing.assert_allclose(w.profile.values, np.sqrt(2) / np.cosh(GRID.x), atol=1e-15)

    def test_double_dispersion_amplitude(self):
        # [3/2 (1 - 0.25)]^(1/(p-1)) with p = 2
        w = exact_double_dispersion_wave(2, 0.5, 2.0, 1.0, GRID)
        assert w.profile.values[MID] == pytest.approx(1.125, rel=1e-14)

    def test_double_dispersion_regime_b_rejects(self):
        with pytest.raises(InadmissibleVelocityError):
            exact_double_dispersion_wave(3, np.sqrt(1.5), 1.0, 2.0, GRID, regime="B")

    def test_double_dispersion_regime_b(self):
        w = exact_double_dispersion_wave(3, np.sqrt(3.0), 1.0, 2.0, GRID, regime="B")
        assert w.converged
        assert ode_residual(w.profile, w.model, w.c) < 1e-8

    def test_bad_regime_name(self):
        with pytest.raises(ValidationError):
            exact_double_dispersion_wave(3, 0.0, 1.0, 1.0, GRID, regime="C")


class TestResidual:
    def test_zero(self, bq3):
        assert ode_residual(GridFunction.zeros(GRID), bq3, 0.5) == 0.0

    def test_exact_wave(self, bq3):
        w = exact_boussinesq_wave(3, 0.5, GRID)
        assert ode_residual(w.profile, bq3, 0.5) <= 1e-8

    def test_perturbed_amplitude(self, bq3):
        w = exact_boussinesq_wave(3, 0.5, GRID)
        assert ode_residual(1.1 * w.profile, bq3, 0.5) > 1e-2


class TestFixedPoint:
    @pytest.mark.parametrize(
        "model, exact",
        [
            (boussinesq(3), lambda: exact_boussinesq_wave(3, 0.5, GRID)),
            (improved_boussinesq(3), lambda: exact_improved_boussinesq_wave(3, 1.5, GRID)),
            (
                double_dispersion(2.0, 1.0, 3, -1),
                lambda: exact_double_dispersion_wave(3, 0.5, 2.0, 1.0, GRID),
            ),
        ],
    )
    def test_matches_closed_form(self, model, exact):
        ref = exact()
        wave = solve_wave_fixed_point(model, ref.c, GRID)
        assert np.max(np.abs(wave.profile.values - ref.profile.values)) <= 1e-6
        assert abs(wave.diagnostics.stabilizing_factor_final - 1) <= 1e-10
        assert wave.converged

    def test_klein_gordon_scaling(self, kg3):
        phi0 = solve_wave_fixed_point(kg3, 0.0, GRID).profile.values
        phi6 = solve_wave_fixed_point(kg3, 0.6, GRID).profile.values
        np.testing.assert_allclose(phi6, (1 - 0.36) ** 0.5 * phi0, atol=1e-6)

    def test_pairing_identity(self, kg3):
        w = solve_wave_fixed_point(kg3, 0.3, GRID)
        assert 2 * functional_Ic(w.profile, kg3, 0.3) == pytest.approx(functional_Q(w.profile, 3), rel=1e-6)

    def test_regime_b_pairing_sign(self):
        m = improved_boussinesq(3)
        w = solve_wave_fixed_point(m, 1.5, GRID)
        assert -2 * functional_Ic(w.profile, m, 1.5) == pytest.approx(functional_Q(w.profile, 3), rel=1e-6)

    def test_profile_even_and_centered(self, kg3):
        w = solve_wave_fixed_point(kg3, 0.4, GRID)
        v = w.profile.values
        assert np.argmax(v) == MID
        np.testing.assert_allclose(v[1:], v[1:][::-1], atol=1e-12)
        assert v.min() > -1e-12

    def test_non_integer_p_resolution_doubling(self):
        m = boussinesq(2.5)
        coarse = solve_wave_fixed_point(m, 0.5, make_grid(1024, 80.0))
        fine = solve_wave_fixed_point(m, 0.5, make_grid(2048, 80.0))
        ref = exact_boussinesq_wave(2.5, 0.5, GRID)
        assert np.max(np.abs(coarse.profile.values - fine.profile.values[::2])) <= 1e-6
        assert np.max(np.abs(coarse.profile.values - ref.profile.values)) <= 1e-6

    def test_inadmissible(self, bq3):
        with pytest.raises(InadmissibleVelocityError, match="velocity outside admissible range"):
            solve_wave_fixed_point(bq3, 1.0, GRID)

    def test_non_convergence(self):
        # quartic symbol: the sech guess is not exact
        model = klein_gordon(3, SymbolSpec(1.0, ((1.0, -2),)))
        with pytest.raises(ConvergenceError):
            solve_wave_fixed_point(model, 0.3, GRID, max_iter=2)
        assert solve_wave_fixed_point(model, 0.3, GRID).converged

    def test_zero_guess_breaks_down(self, kg3):
        with pytest.raises(ConvergenceError):
            solve_wave_fixed_point(kg3, 0.3, GRID, initial_guess=np.zeros(GRID.n))

    def test_off_center_guess(self, kg3):
        guess = 2.0 / np.cosh(0.8 * (GRID.x - 5.3))
        w = solve_wave_fixed_point(kg3, 0.3, GRID, initial_guess=guess)
        ref = solve_wave_fixed_point(kg3, 0.3, GRID)
        assert np.max(np.abs(w.profile.values - ref.profile.values)) <= 1e-8

    def test_estimator_api(self, kg3):
        est = PetviashviliSolver(model=kg3, c=0.2, tol=1e-11)
        assert clone(est).get_params()["c"] == 0.2
        est.fit(GRID)
        assert est.n_iter_ >= 1
        assert abs(est.stabilizing_factor_ - 1) < 1e-10
        x = np.array([0.0, 0.37])
        np.testing.assert_allclose(est.predict(x)[0], est.profile_.values[MID], rtol=1e-14)

    def test_truncation_warning(self):
        with pytest.warns(TruncationWarning):
            solve_wave_fixed_point(boussinesq(3), 0.995, make_grid(256, 20.0))


class TestMinimizer:
    def test_constraint_and_value(self, bq3):
        psi, m = minimize_m1(bq3, 0.0, GRID)
        assert functional_Q(psi, 3) == pytest.approx(1.0, abs=1e-10)
        assert functional_Ic(psi, bq3, 0.0) == pytest.approx(m, rel=1e-12)

    def test_matches_exact_wave(self, bq3):
        _, m = minimize_m1(bq3, 0.0, GRID)
        assert m == pytest.approx(m1_from_wave(exact_boussinesq_wave(3, 0.0, GRID)), rel=1e-5)

    def test_scaling(self, kg3):
        _, m1 = minimize_m1(kg3, 0.3, GRID)
        _, m2 = minimize_m1(kg3, 0.3, GRID, constraint=2.0)
        assert m2 == pytest.approx(2 ** (2 / 4) * m1, rel=1e-4)

    def test_cross_check_with_fixed_point(self, kg3):
        est = ConstrainedMinimizer(model=kg3, c=0.5).fit(GRID)
        wave = solve_wave_fixed_point(kg3, 0.5, GRID)
        phi = (2 * est.m_) ** (1 / 2) * est.psi_.values
        err = np.linalg.norm(phi - wave.profile.values) / np.linalg.norm(wave.profile.values)
        assert err <= 1e-5
        assert est.to_wave().converged

    def test_regime_b(self):
        m = improved_boussinesq(3)
        psi, value = minimize_m1(m, 1.5, GRID)
        assert value > 0
        assert value == pytest.approx(m1_from_wave(solve_wave_fixed_point(m, 1.5, GRID)), rel=1e-8)

    def test_monotone_concave_derivative(self, bq3):
        cs = np.linspace(0.0, 0.95, 10)
        m = np.array([minimize_m1(bq3, c, GRID)[1] for c in cs])
        assert np.all(np.diff(m) < 0)
        assert np.all(np.diff(m, 2) <= 1e-6)
        h = 1e-4
        for c in cs[1:-1]:
            m_plus = minimize_m1(bq3, c + h, GRID)[1]
            m_minus = minimize_m1(bq3, c - h, GRID)[1]
            psi, _ = minimize_m1(bq3, c, GRID)
            law = -c * b_weighted_norm_sq(psi, bq3)
            assert (m_plus - m_minus) / (2 * h) == pytest.approx(law, rel=1e-3)

    def test_rejects_bad_constraint(self, bq3):
        with pytest.raises(ValidationError):
            ConstrainedMinimizer(model=bq3, constraint=0.0).fit(GRID)


class TestHelpers:
    def test_center_profile(self):
        f = GridFunction(GRID, 1.0 / np.cosh(GRID.x - 3.21))
        centered = center_profile(f)
        np.testing.assert_allclose(centered.values, 1.0 / np.cosh(GRID.x), atol=1e-12)

    def test_center_flips_sign(self):
        f = GridFunction(GRID, -1.0 / np.cosh(GRID.x))
        assert center_profile(f).values[MID] == pytest.approx(1.0)

    def test_wave_from_profile_diagnostics(self, bq3):
        ref = exact_boussinesq_wave(3, 0.5, GRID)
        w = wave_from_profile(shift(ref.profile, 0.0), bq3, 0.5)
        assert w.diagnostics.d == pytest.approx(ref.diagnostics.d, rel=1e-14)
        assert w.to_dict()["diagnostics"]["residual_l2"] < 1e-8

    def test_no_warning_on_large_box(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error", TruncationWarning)
            exact_boussinesq_wave(3, 0.5, GRID)

    def test_klein_gordon_closed_form(self, kg3):
        # L = I, B = (1 - d_xx)^(-1), p = 3, c = 0: phi = sqrt(2) sech
        w = solve_wave_fixed_point(kg3, 0.0, GRID)
        np.testing.assert_allclose(w.profile.values, np.sqrt(2) / np.cosh(GRID.x), atol=1e-12)
        assert klein_gordon(3).s0 == 1
