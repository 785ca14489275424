import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_bump, smooth_random
from nonlocal_wave_lab.exceptions import GridMismatchError, NotConvergedWaveError
from nonlocal_wave_lab.functionals import (
    SystemState,
    b_weighted_norm_sq,
    dee_from_m1,
    dee_from_wave,
    energy,
    functional_Ic,
    functional_Jc,
    functional_Q,
    functional_report,
    m1_from_Q,
    m1_from_wave,
    momentum,
    sigma_minus_check,
    x_norm,
)
from nonlocal_wave_lab.model import boussinesq, double_dispersion, improved_boussinesq, klein_gordon
from nonlocal_wave_lab.spectral import GridFunction, make_grid, sobolev_norm, symbol_on_grid
from nonlocal_wave_lab.waves import exact_boussinesq_wave, wave_from_profile

GRID = make_grid(256, 40.0)
seeds = st.integers(0, 2**32 - 1)


def _regime_a_case(a1, a2, frac):
    m = double_dispersion(a1, a2, 3, -1)
    return m, np.sqrt(frac * m.c1sq)


def _regime_b_case(a1, a2, excess):
    m = double_dispersion(a1, a2, 3, 1)
    return m, np.sqrt(m.c2sq * (1 + excess))


class TestQuadraticFunctionals:
    def test_zero(self, bq3):
        z = GridFunction.zeros(GRID)
        assert functional_Ic(z, bq3, 0.5) == 0.0
        assert functional_Jc(z, bq3, 0.5) == 0.0
        assert functional_Q(z, 3) == 0.0

    def test_sech_q(self, grid80):
        # integral of sech^4 is 4/3
        f = GridFunction(grid80, 1.0 / np.cosh(grid80.x))
        assert functional_Q(f, 3) == pytest.approx(4.0 / 3.0, rel=1e-13)

    def test_pairing_on_exact_wave(self, bq3, grid80):
        wave = exact_boussinesq_wave(3, 0.5, grid80)
        ic = functional_Ic(wave.profile, bq3, 0.5)
        assert 2 * ic == pytest.approx(functional_Q(wave.profile, 3), rel=1e-10)

    @settings(max_examples=100, deadline=None)
    @given(seed=seeds, t=st.floats(0.01, 10.0), p=st.floats(1.1, 6.0))
    def test_homogeneity(self, seed, t, p):
        m = boussinesq(p)
        psi = random_bump(GRID, seed)
        assert functional_Ic(t * psi, m, 0.3) == pytest.approx(t**2 * functional_Ic(psi, m, 0.3), rel=1e-12)
        assert functional_Q(t * psi, p) == pytest.approx(t ** (p + 1) * functional_Q(psi, p), rel=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(seed=seeds, c=st.floats(0.0, 3.0))
    def test_jc_negates_ic(self, seed, c):
        psi = smooth_random(GRID, seed)
        m = improved_boussinesq(3)
        assert functional_Ic(psi, m, c) + functional_Jc(psi, m, c) == 0.0

    def test_jc_positive_in_regime_b(self):
        psi = random_bump(GRID, 11)
        assert functional_Jc(psi, improved_boussinesq(3), 1.5) > 0

    def test_grid_mismatch(self, bq3):
        u = GridFunction.zeros(GRID)
        w = GridFunction.zeros(make_grid(256, 20.0))
        with pytest.raises(GridMismatchError):
            SystemState(u, w)


class TestCoercivity:
    @settings(max_examples=100, deadline=None)
    @given(seed=seeds, a1=st.floats(0.1, 4.0), a2=st.floats(0.1, 4.0), frac=st.floats(0.0, 0.99))
    def test_regime_a_sandwich(self, seed, a1, a2, frac):
        m, c = _regime_a_case(a1, a2, frac)
        psi = smooth_random(GRID, seed)
        norm_sq = sobolev_norm(psi, m.s0) ** 2
        ic = functional_Ic(psi, m, c)
        lower = (m.c1sq - c * c) / (2 * m.c4sq) * norm_sq
        upper = m.c2sq / (2 * m.c3sq) * norm_sq
        assert lower <= ic * (1 + 1e-9) + 1e-300
        assert ic <= upper * (1 + 1e-9)

    @settings(max_examples=100, deadline=None)
    @given(seed=seeds, a1=st.floats(0.1, 4.0), a2=st.floats(0.1, 4.0), excess=st.floats(0.01, 3.0))
    def test_regime_b_sandwich(self, seed, a1, a2, excess):
        m, c = _regime_b_case(a1, a2, excess)
        psi = smooth_random(GRID, seed)
        norm_sq = sobolev_norm(psi, m.s0) ** 2
        jc = functional_Jc(psi, m, c)
        lower = (c * c - m.c2sq) / (2 * m.c4sq) * norm_sq
        upper = c * c / (2 * m.c3sq) * norm_sq
        assert lower <= jc * (1 + 1e-9)
        assert jc <= upper * (1 + 1e-9)

    @settings(max_examples=100, deadline=None)
    @given(a1=st.floats(0.1, 4.0), a2=st.floats(0.1, 4.0), frac=st.floats(0.0, 0.99))
    def test_kc_splitting(self, a1, a2, frac):
        m, c = _regime_a_case(a1, a2, frac)
        gamma = (m.c1sq - c * c) / (2 * m.c4sq)
        k_sq = (symbol_on_grid(m.l_spec, GRID) - c * c) / symbol_on_grid(m.b_spec, GRID) - gamma
        weight = (1 + GRID.xi**2) ** m.s0
        assert np.all(k_sq >= gamma * weight - 1e-9 * weight)


class TestConservedQuantities:
    def test_zero_state(self, bq3):
        z = SystemState.zeros(GRID)
        assert energy(z, bq3) == 0.0
        assert momentum(z, bq3) == 0.0
        assert x_norm(z, bq3) == 0.0

    def test_traveling_momentum(self, kg3):
        phi = random_bump(GRID, 5)
        state = SystemState.traveling(phi, 0.4)
        assert momentum(state, kg3) == pytest.approx(-0.4 * b_weighted_norm_sq(phi, kg3), rel=1e-13)

    def test_x_norm_without_w(self, bq3):
        u = random_bump(GRID, 6)
        state = SystemState(u, GridFunction.zeros(GRID))
        assert x_norm(state, bq3) == pytest.approx(sobolev_norm(u, 1), rel=1e-14)

    def test_x_norm_boussinesq_indices(self, bq3):
        u, w = random_bump(GRID, 7), random_bump(GRID, 8)
        expected = sobolev_norm(u, 1) + sobolev_norm(w, 0)
        assert x_norm(SystemState(u, w), bq3) == pytest.approx(expected, rel=1e-14)

    @settings(max_examples=100, deadline=None)
    @given(
        seed=seeds,
        c=st.floats(-0.95, 0.95),
        model=st.sampled_from([boussinesq(3), klein_gordon(2), improved_boussinesq(3), boussinesq(2.5)]),
    )
    def test_decomposition_identity(self, seed, c, model):
        u, w = random_bump(GRID, seed), random_bump(GRID, seed + 1)
        state = SystemState(u, w)
        lhs = energy(state, model) + c * momentum(state, model)
        rhs = (
            0.5 * b_weighted_norm_sq(w + c * u, model)
            + functional_Ic(u, model, c)
            + model.sigma * functional_Q(u, model.p) / (model.p + 1)
        )
        scale = energy(state, model) + abs(c * momentum(state, model)) + functional_Q(u, model.p)
        assert abs(lhs - rhs) <= 1e-9 * scale

    def test_report_consistent(self, bq3):
        state = SystemState(random_bump(GRID, 1), random_bump(GRID, 2))
        rep = functional_report(state, bq3, 0.3)
        assert rep.EcM == rep.E + 0.3 * rep.M
        assert set(rep.to_dict()) >= {"t", "E", "M", "Ic", "Q", "x_norm"}


@pytest.fixture(scope="module")
def wave():
    return exact_boussinesq_wave(3, 0.5, make_grid(1024, 80.0))


class TestWaveIdentities:
    def test_sigma_minus_on_wave(self, wave):
        d = dee_from_wave(wave)
        assert sigma_minus_check(wave.state(), wave.model, 0.5, d) == (False, False)

    def test_sigma_minus_scaled_up(self, wave):
        d = dee_from_wave(wave)
        assert sigma_minus_check(wave.state(1.05), wave.model, 0.5, d) == (True, True)

    def test_sigma_minus_scaled_down(self, wave):
        d = dee_from_wave(wave)
        assert sigma_minus_check(wave.state(0.5), wave.model, 0.5, d)[1] is False

    def test_d_expressions_agree(self, wave):
        d = dee_from_wave(wave)
        q = functional_Q(wave.profile, 3)
        assert d == pytest.approx(0.25 * q, rel=1e-8)
        assert d == pytest.approx(dee_from_m1(m1_from_wave(wave), 3), rel=1e-8)
        assert m1_from_wave(wave) == pytest.approx(m1_from_Q(q, 3), rel=1e-15)

    def test_d_equals_energy_plus_momentum(self, wave):
        state = wave.state()
        ecm = energy(state, wave.model) + 0.5 * momentum(state, wave.model)
        assert ecm == pytest.approx(dee_from_wave(wave), rel=1e-10)

    def test_d_scaling_boussinesq(self, grid80):
        d0 = dee_from_wave(exact_boussinesq_wave(3, 0.0, grid80))
        d5 = dee_from_wave(exact_boussinesq_wave(3, 0.5, grid80))
        assert d5 / d0 == pytest.approx(0.75**1.5, rel=1e-10)

    def test_rejects_unconverged(self, wave, bq3):
        bad = wave_from_profile(1.1 * wave.profile, bq3, 0.5)
        assert not bad.converged
        with pytest.raises(NotConvergedWaveError):
            dee_from_wave(bad)
        with pytest.raises(NotConvergedWaveError):
            m1_from_wave(bad)
