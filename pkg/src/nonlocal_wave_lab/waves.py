"""Traveling-wave profiles.

A wave of speed ``c`` is ``u(x, t) = phi(x - c t)`` where ``phi`` solves
``A phi = |phi|^(p-1) phi`` for the positive operator ``A`` of the regime
(see :meth:`PDEModel.positive_symbol`).  Two independent solvers are provided:
a stabilized fixed-point iteration and a constrained minimizer of ``I_c``
(``J_c`` in regime B) at fixed ``Q``.  Closed-form sech profiles of the
classical examples serve as references.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .exceptions import ConvergenceError, InadmissibleVelocityError, ValidationError
from .functionals import SystemState, functional_Ic, functional_Q, m1_from_Q
from .model import PDEModel, boussinesq, classify_regime, double_dispersion, improved_boussinesq
from .spectral import (
    Grid,
    GridFunction,
    dealias_factor,
    interpolate,
    power_nonlinearity_hat,
    shift,
    spectral_inner,
    symbol_on_grid,
    tail_mass,
)

__all__ = [
    "TravelingWave",
    "WaveDiagnostics",
    "TruncationWarning",
    "PetviashviliSolver",
    "ConstrainedMinimizer",
    "solve_wave_fixed_point",
    "minimize_m1",
    "exact_boussinesq_wave",
    "exact_improved_boussinesq_wave",
    "exact_double_dispersion_wave",
    "ode_residual",
    "center_profile",
    "default_initial_guess",
    "wave_from_profile",
    "TAIL_TOLERANCE",
]

# Profiles with more relative L2 mass than this in the outer half of the box
# are flagged: the periodic box no longer approximates the line.
TAIL_TOLERANCE = 1e-10


class TruncationWarning(RuntimeWarning):
    """The profile does not decay enough inside the periodic box."""


@dataclass(frozen=True)
class WaveDiagnostics:
    residual_l2: float
    iterations: int
    stabilizing_factor_final: float
    Ic: float
    Q: float
    m1: float
    d: float
    tail_mass: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True, eq=False)
class TravelingWave:
    """Profile ``phi_c`` of a traveling wave together with its diagnostics."""

    c: float
    profile: GridFunction
    model: PDEModel
    diagnostics: WaveDiagnostics
    tol: float
    method: str = "exact"

    @property
    def grid(self) -> Grid:
        return self.profile.grid

    @property
    def converged(self) -> bool:
        return bool(self.diagnostics.residual_l2 <= self.tol)

    def state(self, scale: float = 1.0) -> SystemState:
        """Initial data ``scale * (phi_c, -c phi_c)``."""
        return SystemState.traveling(self.profile, self.c, scale)

    def to_dict(self) -> dict:
        return {
            "c": self.c,
            "method": self.method,
            "tol": self.tol,
            "converged": self.converged,
            "model": self.model.to_dict(),
            "grid": self.grid.to_dict(),
            "diagnostics": self.diagnostics.to_dict(),
        }


def ode_residual(phi: GridFunction, model: PDEModel, c: float) -> float:
    """L2 norm of ``(L - c^2) B^(-1) phi + sigma |phi|^(p-1) phi``."""
    grid = phi.grid
    weight = (symbol_on_grid(model.l_spec, grid) - c * c) / symbol_on_grid(model.b_spec, grid)
    linear = np.fft.irfft(weight * phi.spectrum, n=grid.n)
    v = phi.values
    res = linear + model.sigma * np.abs(v) ** (model.p - 1) * v
    return float(np.sqrt(np.sum(res**2) * grid.spacing))


def wave_from_profile(
    profile: GridFunction,
    model: PDEModel,
    c: float,
    *,
    tol: float = 1e-8,
    iterations: int = 0,
    stabilizing_factor: float = 1.0,
    method: str = "exact",
) -> TravelingWave:
    """Wrap a profile and compute its diagnostics."""
    p = model.p
    ic = functional_Ic(profile, model, c)
    q = functional_Q(profile, p)
    tm = tail_mass(profile)
    if tm > TAIL_TOLERANCE:
        warnings.warn(
            f"wave at c={c} carries relative tail mass {tm:.2e} > {TAIL_TOLERANCE:.0e}; "
            "enlarge the box",
            TruncationWarning,
            stacklevel=3,
        )
    diag = WaveDiagnostics(
        residual_l2=ode_residual(profile, model, c),
        iterations=int(iterations),
        stabilizing_factor_final=float(stabilizing_factor),
        Ic=ic,
        Q=q,
        m1=m1_from_Q(q, p),
        d=(p - 1) / (p + 1) * ic,
        tail_mass=tm,
    )
    return TravelingWave(float(c), profile, model, diag, float(tol), method)


# ---------------------------------------------------------------------------
# Closed forms


def _sech(z: np.ndarray) -> np.ndarray:
    e = np.exp(-np.abs(z))
    return 2.0 * e / (1.0 + e * e)


def _sech_profile(grid: Grid, amplitude_base: float, kappa: float, p: float) -> GridFunction:
    """``amplitude_base^(1/(p-1)) sech^(2/(p-1))(kappa (p-1) x / 2)``."""
    amp = amplitude_base ** (1.0 / (p - 1))
    values = amp * _sech(0.5 * (p - 1) * kappa * grid.x) ** (2.0 / (p - 1))
    return GridFunction(grid, values)


def exact_boussinesq_wave(p: float, c: float, grid: Grid, tol: float = 1e-8) -> TravelingWave:
    """Closed-form solitary wave of the generalized Boussinesq equation.

    ``phi_c = [(p+1)(1-c^2)/2]^(1/(p-1)) sech^(2/(p-1))((p-1) sqrt(1-c^2) x / 2)``.

    Raises
    ------
    InadmissibleVelocityError
        If ``c^2 >= 1``.
    """
    c2 = float(c) ** 2
    if c2 >= 1:
        raise InadmissibleVelocityError(
            f"velocity outside admissible range: Boussinesq waves need c^2 < 1, got {c2}"
        )
    model = boussinesq(p)
    phi = _sech_profile(grid, 0.5 * (p + 1) * (1 - c2), np.sqrt(1 - c2), p)
    return wave_from_profile(phi, model, c, tol=tol)


def exact_improved_boussinesq_wave(
    p: float, c: float, grid: Grid, tol: float = 1e-8
) -> TravelingWave:
    """Closed-form solitary wave of the improved Boussinesq equation.

    ``phi_c = [(p+1)(c^2-1)/2]^(1/(p-1)) sech^(2/(p-1))((p-1) sqrt(1-1/c^2) x / 2)``.

    Raises
    ------
    InadmissibleVelocityError
        If ``c^2 <= 1``.
    """
    c2 = float(c) ** 2
    if c2 <= 1:
        raise InadmissibleVelocityError(
            f"velocity outside admissible range: improved Boussinesq waves need c^2 > 1, got {c2}"
        )
    model = improved_boussinesq(p)
    phi = _sech_profile(grid, 0.5 * (p + 1) * (c2 - 1), np.sqrt(1 - 1 / c2), p)
    return wave_from_profile(phi, model, c, tol=tol)


def exact_double_dispersion_wave(
    p: float, c: float, a1: float, a2: float, grid: Grid, regime: str = "A", tol: float = 1e-8
) -> TravelingWave:
    """Closed-form solitary wave of the double dispersion equation.

    Regime ``"A"`` (``g = -|u|^(p-1) u``) needs ``c^2 < min(1, a2/a1)``,
    regime ``"B"`` (``g = +|u|^(p-1) u``) needs ``c^2 > max(1, a2/a1)``.
    The width parameter is ``sqrt((1-c^2)/(a2-a1 c^2))`` in both.
    """
    c2 = float(c) ** 2
    if a1 < 0 or a2 < 0:
        raise ValidationError(f"a1, a2 must be non-negative, got {a1}, {a2}")
    ratio = a2 / a1 if a1 > 0 else np.inf
    if regime == "A":
        if not c2 < min(1.0, ratio):
            raise InadmissibleVelocityError(
                f"velocity outside admissible range: regime A needs c^2 < {min(1.0, ratio)}, got {c2}"
            )
        sigma, base = -1, 1 - c2
    elif regime == "B":
        if not c2 > max(1.0, ratio):
            raise InadmissibleVelocityError(
                f"velocity outside admissible range: regime B needs c^2 > {max(1.0, ratio)}, got {c2}"
            )
        sigma, base = 1, c2 - 1
    else:
        raise ValidationError(f"regime must be 'A' or 'B', got {regime!r}")
    model = double_dispersion(a1, a2, p, sigma)
    kappa = np.sqrt((1 - c2) / (a2 - a1 * c2))
    phi = _sech_profile(grid, 0.5 * (p + 1) * base, kappa, p)
    return wave_from_profile(phi, model, c, tol=tol)


# ---------------------------------------------------------------------------
# Numerical solvers


def center_profile(f: GridFunction, max_newton: int = 30) -> GridFunction:
    """Make ``f`` nonnegative-peaked and translate its maximum to ``x = 0``.

    The peak is located to sub-grid accuracy by Newton's method on the
    derivative of the trigonometric interpolant.
    """
    if -f.values.min() > f.values.max():
        f = -f
    grid = f.grid
    k = int(np.argmax(f.values))
    x0 = grid.x[k]
    for _ in range(max_newton):
        d1 = interpolate(f, x0, 1)[0]
        d2 = interpolate(f, x0, 2)[0]
        if d2 >= 0:
            break
        step = d1 / d2
        if abs(step) > grid.spacing:
            break
        x0 -= step
        if abs(step) < 1e-15 * grid.length:
            break
    return shift(f, -x0)


def _admissible_symbol(model: PDEModel, c: float, grid: Grid) -> np.ndarray:
    info = classify_regime(model, c)
    if not info.admissible:
        raise InadmissibleVelocityError(
            f"velocity outside admissible range: c={c} in regime {info.regime} needs {info.description}"
        )
    a = model.positive_symbol(c, grid)
    if not np.all(a > 0):
        raise InadmissibleVelocityError(
            f"velocity outside admissible range: profile operator not positive at c={c}"
        )
    return a


def default_initial_guess(model: PDEModel, c: float, grid: Grid) -> GridFunction:
    """Unit-amplitude ``sech^(2/(p-1))`` with decay rate fitted to the operator.

    For ``a(xi) = a0 + a1 xi^2`` the rate ``sqrt(a0/a1)`` is exact, which
    covers the classical examples.
    """
    l0, l1 = model.l_spec(np.array([0.0, 1.0]))
    b0, b1 = model.b_spec(np.array([0.0, 1.0]))
    sign = 1.0 if model.regime == "A" else -1.0
    a0 = sign * (l0 - c * c) / b0
    a1 = sign * (l1 - c * c) / b1 - a0
    kappa = np.sqrt(a0 / a1) if a0 > 0 and a1 > 0 else 1.0
    kappa = float(np.clip(kappa, 0.05, 20.0))
    p = model.p
    return GridFunction(grid, _sech(0.5 * (p - 1) * kappa * grid.x) ** (2.0 / (p - 1)))


def _initial_spectrum(estimator, grid: Grid) -> np.ndarray:
    guess = estimator.initial_guess
    if guess is None:
        return default_initial_guess(estimator.model, estimator.c, grid).spectrum
    if isinstance(guess, GridFunction):
        if guess.grid != grid:
            raise ValidationError("initial guess lives on a different grid")
        return guess.spectrum
    values = np.asarray(guess, dtype=float)
    if values.shape != (grid.n,):
        raise ValidationError(f"initial guess must have shape ({grid.n},)")
    return np.fft.rfft(values)


def _check_model(model):
    if not isinstance(model, PDEModel):
        raise ValidationError("model must be a PDEModel")


class PetviashviliSolver(BaseEstimator):
    """Stabilized fixed-point solver for ``A phi = |phi|^(p-1) phi``.

    Iterates ``phi <- M^gamma A^(-1) N(phi)`` with the stabilizing factor
    ``M = <A phi, phi> / <N(phi), phi>``, which removes the unstable
    direction of the plain iteration created by the homogeneity of ``N``.

    Parameters
    ----------
    model : PDEModel
    c : float
        Wave speed; must be admissible for the model.
    tol : float
        Stops once the relative L2 update and ``|M - 1|`` are both below it.
        Also the residual bound used by ``converged``.
    max_iter : int
    gamma_exp : float, optional
        Exponent of ``M``; defaults to ``p/(p-1)``.
    dealias : {"auto", False} or float
        Padding of the nonlinear term, see :func:`dealias_factor`.
    initial_guess : GridFunction or array, optional
    residual_tol : float, optional
        Residual accepted as converged; defaults to ``max(tol, 1e-8)``.

    Attributes
    ----------
    wave_ : TravelingWave
    profile_ : GridFunction
    n_iter_ : int
    stabilizing_factor_ : float
    """

    def __init__(
        self,
        model=None,
        c=0.0,
        tol=1e-12,
        max_iter=2000,
        gamma_exp=None,
        dealias="auto",
        initial_guess=None,
        residual_tol=None,
    ):
        self.model = model
        self.c = c
        self.tol = tol
        self.max_iter = max_iter
        self.gamma_exp = gamma_exp
        self.dealias = dealias
        self.initial_guess = initial_guess
        self.residual_tol = residual_tol

    def fit(self, grid: Grid, y=None):
        _check_model(self.model)
        if not isinstance(grid, Grid):
            raise ValidationError("fit expects a Grid")
        if self.tol <= 0 or self.max_iter < 1:
            raise ValidationError("tol must be positive and max_iter at least 1")
        model, c, n = self.model, float(self.c), grid.n
        p = model.p
        a = _admissible_symbol(model, c, grid)
        gamma = p / (p - 1) if self.gamma_exp is None else float(self.gamma_exp)
        pad = dealias_factor(p, self.dealias)

        ph = _initial_spectrum(self, grid)
        m_factor = np.nan
        for it in range(1, self.max_iter + 1):
            nh = power_nonlinearity_hat(ph, n, p, pad)
            num = spectral_inner(a * ph, ph, grid)
            den = spectral_inner(nh, ph, grid)
            if not (np.isfinite(num) and np.isfinite(den)) or den <= 0:
                raise ConvergenceError(f"fixed-point iteration broke down at step {it}")
            m_factor = num / den
            new = m_factor**gamma * nh / a
            norm_new = np.sqrt(spectral_inner(new, new, grid))
            if norm_new < 1e-12:
                raise ConvergenceError("fixed-point iteration collapsed to zero")
            update = np.sqrt(spectral_inner(new - ph, new - ph, grid)) / norm_new
            ph = new
            if update < self.tol and abs(m_factor - 1) < self.tol:
                break
        else:
            raise ConvergenceError(
                f"no convergence in {self.max_iter} iterations "
                f"(last update {update:.2e}, |M-1|={abs(m_factor - 1):.2e})"
            )

        profile = center_profile(GridFunction.from_spectrum(grid, ph))
        nh = power_nonlinearity_hat(profile.spectrum, n, p, pad)
        m_final = spectral_inner(a * profile.spectrum, profile.spectrum, grid) / spectral_inner(
            nh, profile.spectrum, grid
        )
        rtol = max(self.tol, 1e-8) if self.residual_tol is None else self.residual_tol
        self.wave_ = wave_from_profile(
            profile,
            model,
            c,
            tol=rtol,
            iterations=it,
            stabilizing_factor=m_final,
            method="fixed_point",
        )
        self.profile_ = profile
        self.n_iter_ = it
        self.stabilizing_factor_ = m_final
        return self

    def predict(self, x) -> np.ndarray:
        """Evaluate the profile at arbitrary positions by spectral interpolation."""
        return interpolate(self.profile_, x)


class ConstrainedMinimizer(BaseEstimator):
    """Minimize ``I_c`` (``J_c`` in regime B) on ``{Q(psi) = constraint}``.

    Projected gradient descent in the metric of ``A``: the gradient is
    preconditioned by ``A^(-1)``, projected onto the tangent space of the
    constraint and followed by renormalization to the constraint surface.
    A unit step is the normalized power iteration ``psi <- A^(-1) N(psi)``;
    shorter steps come from Armijo backtracking.

    Parameters
    ----------
    model : PDEModel
    c : float
    constraint : float
        Value ``lambda > 0`` of ``Q`` on the admissible set.
    tol : float
        Stops once the relative L2 change of ``psi`` drops below it.
    max_iter : int
    initial_guess : GridFunction or array, optional

    Attributes
    ----------
    psi_ : GridFunction
        The minimizer, centered with its maximum at ``x = 0``.
    m_ : float
        Minimum value ``m_lambda(c)``.
    n_iter_ : int
    """

    def __init__(self, model=None, c=0.0, constraint=1.0, tol=1e-12, max_iter=5000, initial_guess=None):
        self.model = model
        self.c = c
        self.constraint = constraint
        self.tol = tol
        self.max_iter = max_iter
        self.initial_guess = initial_guess

    def fit(self, grid: Grid, y=None):
        _check_model(self.model)
        if not isinstance(grid, Grid):
            raise ValidationError("fit expects a Grid")
        if not self.constraint > 0:
            raise ValidationError(f"constraint must be positive, got {self.constraint}")
        model, c, n = self.model, float(self.c), grid.n
        p, lam = model.p, float(self.constraint)
        a = _admissible_symbol(model, c, grid)
        h = grid.spacing

        def normalize(sh):
            v = np.fft.irfft(sh, n=n)
            q = np.sum(np.abs(v) ** (p + 1)) * h
            return sh * (lam / q) ** (1.0 / (p + 1))

        def objective(sh):
            return 0.5 * spectral_inner(a * sh, sh, grid)

        ph = normalize(_initial_spectrum(self, grid))
        f0 = objective(ph)
        tau = 1.0
        for it in range(1, self.max_iter + 1):
            v = np.fft.irfft(ph, n=n)
            nh = np.fft.rfft(np.abs(v) ** (p - 1) * v)
            z = nh / a
            mu = spectral_inner(ph, nh, grid) / spectral_inner(z, nh, grid)
            g = ph - mu * z
            slope = spectral_inner(a * g, g, grid)
            tau = min(1.0, 2.0 * tau)
            while True:
                trial = normalize(ph - tau * g)
                f1 = objective(trial)
                if f1 <= f0 - 1e-4 * tau * slope + 1e-14 * abs(f0):
                    break
                tau *= 0.5
                if tau < 1e-12:
                    raise ConvergenceError(f"line search failed at iteration {it}")
            diff = trial - ph
            change = np.sqrt(spectral_inner(diff, diff, grid) / spectral_inner(trial, trial, grid))
            ph, f0 = trial, f1
            if change < self.tol:
                break
        else:
            raise ConvergenceError(f"no convergence in {self.max_iter} iterations (last change {change:.2e})")

        psi = center_profile(GridFunction.from_spectrum(grid, ph))
        self.psi_ = psi
        self.m_ = objective(psi.spectrum)
        self.n_iter_ = it
        return self

    @property
    def m1_(self) -> float:
        """``m_1(c)`` recovered from ``m_lambda = lambda^(2/(p+1)) m_1``."""
        return self.m_ * self.constraint ** (-2.0 / (self.model.p + 1))

    def to_wave(self, tol: float = 1e-8) -> TravelingWave:
        """Rescale the minimizer into a wave ``[2 m_1]^(1/(p-1)) psi`` (``Q = 1`` form)."""
        p = self.model.p
        unit = self.psi_ * (1.0 / self.constraint) ** (1.0 / (p + 1))
        phi = unit * (2.0 * self.m1_) ** (1.0 / (p - 1))
        return wave_from_profile(
            phi, self.model, float(self.c), tol=tol, iterations=self.n_iter_, method="minimizer"
        )

    def predict(self, x) -> np.ndarray:
        return interpolate(self.psi_, x)


def solve_wave_fixed_point(
    model: PDEModel,
    c: float,
    grid: Grid,
    *,
    max_iter: int = 2000,
    tol: float = 1e-12,
    gamma_exp: float | None = None,
    dealias="auto",
    initial_guess=None,
    residual_tol: float | None = None,
) -> TravelingWave:
    """Functional form of :class:`PetviashviliSolver`."""
    solver = PetviashviliSolver(
        model=model,
        c=c,
        tol=tol,
        max_iter=max_iter,
        gamma_exp=gamma_exp,
        dealias=dealias,
        initial_guess=initial_guess,
        residual_tol=residual_tol,
    )
    return solver.fit(grid).wave_


def minimize_m1(
    model: PDEModel,
    c: float,
    grid: Grid,
    *,
    constraint: float = 1.0,
    tol: float = 1e-12,
    max_iter: int = 5000,
    initial_guess=None,
) -> tuple[GridFunction, float]:
    """Functional form of :class:`ConstrainedMinimizer`; returns ``(psi, m)``."""
    est = ConstrainedMinimizer(
        model=model, c=c, constraint=constraint, tol=tol, max_iter=max_iter, initial_guess=initial_guess
    )
    est.fit(grid)
    return est.psi_, est.m_
