"""Stability and blow-up experiments around a traveling wave.

The orbit of a wave ``Phi_c = (phi_c, -c phi_c)`` is the family of its
translates; distances to it are measured in the energy norm
``||u||_{H^s0} + ||w||_{H^(s0 - rho/2)}``.  Strict convexity of
``d(c) = E(Phi_c) + c M(Phi_c)`` signals stability, and data in the set
``{E + cM < d(c), 2 I_c(u) < Q(u)}`` blow up in finite time.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from .evolution import Trajectory, evolve, primitive_x
from .exceptions import GridMismatchError, ValidationError
from .functionals import (
    SystemState,
    dee_from_wave,
    functional_Ic,
    functional_Q,
    m1_from_Q,
    m1_from_wave,
    momentum,
    sigma_minus_check,
    x_norm,
)
from .model import PDEModel
from .spectral import Grid, GridFunction, sobolev_norm, symbol_on_grid
from .waves import TravelingWave, solve_wave_fixed_point

__all__ = [
    "orbital_distance",
    "DcCurve",
    "dc_curve",
    "BoussinesqWindow",
    "threshold_boussinesq",
    "threshold_klein_gordon",
    "BlowupData",
    "build_blowup_data",
    "Perturbation",
    "StabilityReport",
    "stability_experiment",
    "BlowupReport",
    "blowup_experiment",
    "check_blowup_hypothesis",
    "LevineSeries",
    "levine_monitor",
    "lemma_bound_holds",
]


# ---------------------------------------------------------------------------
# Orbital distance


def _shift_objective_coeffs(state: SystemState, wave: TravelingWave, model: PDEModel):
    grid = state.grid
    one = 1.0 + grid.xi**2
    wu = grid.parseval_weights * one**model.s0
    ww = grid.parseval_weights * one**model.w_index
    ph = wave.profile.spectrum
    # <u, phi_y>_u - c <w, phi_y>_w = sum Re(a_k exp(i xi_k y))
    a = (wu * state.u.spectrum - wave.c * ww * state.w.spectrum) * np.conj(ph)
    return a, wu, ww


def _distance_at(y, state, wave, wu, ww):
    phase = np.exp(-1j * state.grid.xi * y)
    ph = wave.profile.spectrum * phase
    du = state.u.spectrum - ph
    dw = state.w.spectrum + wave.c * ph
    return float(np.sqrt(np.sum(wu * np.abs(du) ** 2)) + np.sqrt(np.sum(ww * np.abs(dw) ** 2)))


def orbital_distance(
    state: SystemState,
    wave: TravelingWave,
    model: PDEModel | None = None,
    *,
    refine: int = 4,
    return_shift: bool = False,
):
    """Distance from ``state`` to the translates of ``(phi_c, -c phi_c)``.

    The squared-norm proxy is a trigonometric polynomial in the shift, so it
    is evaluated at all ``refine * n`` equispaced shifts with one FFT,
    polished by Newton steps, and the true (sum of norms) distance is then
    minimized by a bounded Brent search around that shift.

    Parameters
    ----------
    state : SystemState
    wave : TravelingWave
    model : PDEModel, optional
        Defaults to ``wave.model``.
    refine : int
        Oversampling of the coarse shift grid.
    return_shift : bool
        Also return the minimizing shift ``y`` (``phi_c(x - y)``).
    """
    model = model if model is not None else wave.model
    grid = state.grid
    if grid != wave.grid:
        raise GridMismatchError("state and wave live on different grids")
    if refine < 1:
        raise ValidationError("refine must be a positive integer")
    a, wu, ww = _shift_objective_coeffs(state, wave, model)
    m = grid.n * int(refine)
    spread = np.zeros(m, dtype=complex)
    spread[: len(a)] = a
    # xi_k y_j = 2 pi k j / m on the shift grid y_j = j L / m
    corr = (np.fft.ifft(spread) * m).real
    j = int(np.argmax(corr))
    step = grid.length / m
    y = j * step
    xi = grid.xi
    for _ in range(20):
        e = a * np.exp(1j * xi * y)
        f1 = float(np.sum((1j * xi * e).real))
        f2 = float(np.sum((-(xi**2) * e).real))
        if f2 >= 0:
            break
        dy = -f1 / f2
        if abs(dy) > step:
            break
        y += dy
        if abs(dy) < 1e-15 * grid.length:
            break

    def objective(t):
        return _distance_at(t, state, wave, wu, ww)

    best_y, best = y, objective(y)
    res = minimize_scalar(
        objective, bounds=(y - step, y + step), method="bounded", options={"xatol": 1e-12 * grid.length}
    )
    if res.fun < best:
        best_y, best = float(res.x), float(res.fun)
    best_y = (best_y + 0.5 * grid.length) % grid.length - 0.5 * grid.length
    return (best, best_y) if return_shift else best


# ---------------------------------------------------------------------------
# d(c) curves


@dataclass(frozen=True)
class DcCurve:
    """``d(c)``, ``m1(c)`` and finite-difference derivatives on a set of speeds.

    Derivatives use local central stencils ``c +/- fd_step`` with extra wave
    solves, so their accuracy does not depend on the spacing of the
    samples.  ``noise_floor`` is ten times an error estimate for ``d''``
    (Richardson comparison with step ``2 fd_step`` plus round-off).
    """

    model: PDEModel
    c_samples: np.ndarray
    m1_values: np.ndarray
    d_values: np.ndarray
    d_prime: np.ndarray
    d_prime_from_M: np.ndarray
    d_second: np.ndarray
    noise_floor: np.ndarray
    classification: tuple
    fd_step: float

    CSV_COLUMNS = ("c", "m1", "d", "d1", "d1_from_M", "d2", "class")

    def rows(self) -> list:
        return [
            (c, m, d, d1, dm, d2, k)
            for c, m, d, d1, dm, d2, k in zip(
                self.c_samples,
                self.m1_values,
                self.d_values,
                self.d_prime,
                self.d_prime_from_M,
                self.d_second,
                self.classification,
            )
        ]

    def flip_points(self, start: str = "Concave", end: str = "Convex") -> list:
        """Intervals ``(c_lo, c_hi)`` over which the class changes from ``start`` to ``end``.

        Indeterminate samples between the two are skipped over.
        """
        out = []
        last = None
        for c, k in zip(self.c_samples, self.classification):
            if k == start:
                last = c
            elif k == end and last is not None:
                out.append((float(last), float(c)))
                last = None
            elif k == end:
                last = None
        return out

    def convex_intervals(self) -> list:
        """Maximal runs of consecutive ``Convex`` samples as ``(c_first, c_last)``."""
        runs, first, prev = [], None, None
        for c, k in zip(self.c_samples, self.classification):
            if k == "Convex":
                first = c if first is None else first
                prev = c
            elif first is not None:
                runs.append((float(first), float(prev)))
                first = None
        if first is not None:
            runs.append((float(first), float(prev)))
        return runs


def _classify(d2: float, floor: float) -> str:
    if d2 > floor:
        return "Convex"
    if d2 < -floor:
        return "Concave"
    return "Indeterminate"


def _dee(model, c, grid, solver_opts):
    try:
        wave = solve_wave_fixed_point(model, c, grid, **solver_opts)
        return wave, dee_from_wave(wave)
    except Exception as exc:  # annotate with the offending speed, keep the type
        raise exc.__class__(f"at c={c}: {exc}") from exc


def _curve_cell(args):
    model, c, grid, fd_step, solver_opts = args
    wave, d = _dee(model, c, grid, solver_opts)
    sides = {}
    for k in (-2, -1, 1, 2):
        sides[k] = _dee(model, c + k * fd_step, grid, solver_opts)[1]
    d1 = (sides[1] - sides[-1]) / (2 * fd_step)
    d2 = (sides[1] - 2 * d + sides[-1]) / fd_step**2
    d2_coarse = (sides[2] - 2 * d + sides[-2]) / (2 * fd_step) ** 2
    roundoff = 4 * 1e-13 * max(abs(d), 1e-300) / fd_step**2
    floor = 10.0 * (abs(d2_coarse - d2) / 3.0 + roundoff)
    mom = momentum(wave.state(), model)
    m1 = m1_from_Q(wave.diagnostics.Q, model.p)
    return m1, d, d1, mom, d2, floor


def dc_curve(
    model: PDEModel,
    c_grid,
    grid: Grid,
    solver_opts: dict | None = None,
    *,
    fd_step: float = 1e-3,
    workers: int = 1,
) -> DcCurve:
    """Solve waves along ``c_grid`` and tabulate ``d``, ``m1`` and derivatives.

    Parameters
    ----------
    model : PDEModel
    c_grid : array_like
        Speeds; each, and each ``c +/- 2 fd_step``, must be admissible.
    grid : Grid
    solver_opts : dict, optional
        Forwarded to :func:`solve_wave_fixed_point`.
    fd_step : float
        Half-width of the local difference stencils.
    workers : int
        Number of processes; cells are independent and merged by index.
    """
    c_samples = np.asarray(c_grid, dtype=float)
    if c_samples.ndim != 1 or len(c_samples) == 0:
        raise ValidationError("c_grid must be a non-empty 1-d sequence")
    if not fd_step > 0:
        raise ValidationError("fd_step must be positive")
    opts = dict(solver_opts or {})
    cells = [(model, float(c), grid, fd_step, opts) for c in c_samples]
    workers = int(workers or 1)
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(cells))) as pool:
            results = list(pool.map(_curve_cell, cells))
    else:
        results = [_curve_cell(cell) for cell in cells]
    m1, d, d1, mom, d2, floor = (np.array(col) for col in zip(*results))
    return DcCurve(
        model=model,
        c_samples=c_samples,
        m1_values=m1,
        d_values=d,
        d_prime=d1,
        d_prime_from_M=mom,
        d_second=d2,
        noise_floor=floor,
        classification=tuple(_classify(a, b) for a, b in zip(d2, floor)),
        fd_step=float(fd_step),
    )


# ---------------------------------------------------------------------------
# Closed-form thresholds


def _exact(p) -> Fraction:
    if isinstance(p, Fraction):
        q = p
    elif isinstance(p, int):
        q = Fraction(p)
    else:
        q = Fraction(str(float(p)))
    if q <= 1:
        raise ValidationError(f"p must exceed 1, got {p}")
    return q


class BoussinesqWindow(NamedTuple):
    """Speeds ``low < c^2 < high`` with strictly convex ``d`` for Boussinesq."""

    low: Fraction
    high: Fraction

    @property
    def empty(self) -> bool:
        return self.low >= self.high


def threshold_boussinesq(p) -> BoussinesqWindow:
    """``((p-1)/4, 1)``; empty for ``p >= 5``."""
    q = _exact(p)
    return BoussinesqWindow((q - 1) / 4, Fraction(1))


def threshold_klein_gordon(p) -> Fraction:
    """``(p-1)/(p+3)``: ``d`` is strictly convex exactly for larger ``c^2``."""
    q = _exact(p)
    return (q - 1) / (q + 3)


# ---------------------------------------------------------------------------
# Blow-up data


@dataclass(frozen=True)
class BlowupData:
    state: SystemState
    lam: float
    h: float
    filter_distance: float
    relative_filter_distance: float


def build_blowup_data(wave: TravelingWave, lam: float, h="auto", cap: float = 0.25) -> BlowupData:
    """Scaled, high-pass filtered wave ``U0 = lam ((v0)_x, -c (v0)_x)``.

    ``v0`` is the primitive of ``phi_c`` with all modes ``|xi| < h`` removed,
    so ``u0 = (v0)_x`` has a periodic primitive as required by the
    concavity argument.

    Parameters
    ----------
    wave : TravelingWave
    lam : float
        Scaling, ``lam > 1``.
    h : float or "auto"
        Filter cut-off; ``"auto"`` is the first nonzero wavenumber, smaller
        values would leave the filter vacuous and are rejected.
    cap : float
        Largest admissible ``||(v0)_x - phi_c||_{H^s0} / ||phi_c||_{H^s0}``.
    """
    grid = wave.grid
    if not lam > 1:
        raise ValidationError(f"lambda must exceed 1, got {lam}")
    k1 = grid.first_wavenumber
    h = k1 if h == "auto" else float(h)
    if h < k1 * (1 - 1e-12):
        raise ValidationError(
            f"h={h} is below the first nonzero wavenumber {k1}; the filter would be vacuous"
        )
    ph = wave.profile.spectrum
    keep = np.abs(grid.xi_deriv) >= h * (1 - 1e-12)
    uh = np.where(keep, ph, 0.0)
    u0 = GridFunction.from_spectrum(grid, uh)
    s0 = wave.model.s0
    dist = sobolev_norm(u0 - wave.profile, s0)
    rel = dist / sobolev_norm(wave.profile, s0)
    if rel > cap:
        raise ValidationError(
            f"filtered profile differs from the wave by {rel:.3g} (relative) > cap {cap}"
        )
    state = SystemState(lam * u0, (-wave.c * lam) * u0)
    return BlowupData(state, float(lam), float(h), float(dist), float(rel))


def check_blowup_hypothesis(state: SystemState, wave: TravelingWave) -> tuple[bool, bool]:
    """Refuse data outside ``{E + cM < d(c), 2 I_c(u) < Q(u)}``.

    Raises
    ------
    ValidationError
        If either condition fails.
    """
    d = dee_from_wave(wave)
    cond = sigma_minus_check(state, wave.model, wave.c, d)
    if not all(cond):
        raise ValidationError(
            f"data violate the blow-up hypothesis: E+cM<d is {cond[0]}, 2I-Q<0 is {cond[1]}"
        )
    return cond


def lemma_bound_holds(state: SystemState, model: PDEModel, c: float, d: float, slack: float = 1e-9) -> bool:
    """Whether ``2 I_c(u) < Q(u)`` implies ``((p+1)/(p-1)) d(c) < I_c(u)`` at ``state``."""
    p = model.p
    ic = functional_Ic(state.u, model, c)
    q = functional_Q(state.u, p)
    if 2 * ic - q >= 0:
        return True
    return bool((p + 1) / (p - 1) * d < ic + slack)


# ---------------------------------------------------------------------------
# Levine functional


@dataclass(frozen=True)
class LevineSeries:
    """``H = ||B^(-1/2) v||^2 / 2`` with ``v_x = u`` along a trajectory.

    ``H1``/``H2`` are the analytic derivatives, ``H1_fd``/``H2_fd``
    centered differences in time of the sampled ``H``.
    """

    times: np.ndarray
    H: np.ndarray
    H1: np.ndarray
    H2: np.ndarray
    H1_fd: np.ndarray
    H2_fd: np.ndarray
    condition: np.ndarray
    nu_factor: float

    COLUMNS = ("t", "H", "H1", "H2", "H1_fd", "H2_fd", "condition")

    def rows(self) -> list:
        return list(zip(*(getattr(self, k) for k in ("times",) + self.COLUMNS[1:])))


def levine_monitor(traj: Trajectory, model: PDEModel | None = None, c: float | None = None) -> LevineSeries:
    """Levine functional on the stored pre-blow-up snapshots of ``traj``.

    ``c`` is accepted for symmetry with the other monitors; ``H`` does not
    depend on it.  Raises ``ValidationError`` for states whose ``u`` has a
    nonzero mean.
    """
    model = model if model is not None else traj.model
    states = traj.stable_snapshots()
    grid = traj.grid
    b_inv = 1.0 / symbol_on_grid(model.b_spec, grid)
    l_over_b = symbol_on_grid(model.l_spec, grid) * b_inv
    w8 = grid.parseval_weights
    p = model.p
    t, H, H1, H2 = [], [], [], []
    for s in states:
        v = primitive_x(s.u)
        # v_t = w minus its (conserved) mean
        wh = np.array(s.w.spectrum)
        wh[0] = 0.0
        vh, uh = v.spectrum, s.u.spectrum
        t.append(s.t)
        H.append(0.5 * np.sum(w8 * b_inv * np.abs(vh) ** 2))
        H1.append(np.sum(w8 * b_inv * (vh * np.conj(wh)).real))
        q = functional_Q(s.u, p)
        kinetic = np.sum(w8 * b_inv * np.abs(wh) ** 2)
        H2.append(kinetic - np.sum(w8 * l_over_b * np.abs(uh) ** 2) - model.sigma * q)
    t, H, H1, H2 = (np.array(a, dtype=float) for a in (t, H, H1, H2))
    if len(t) >= 3:
        H1_fd = np.gradient(H, t, edge_order=2)
        H2_fd = np.gradient(H1_fd, t, edge_order=2)
    else:
        H1_fd = np.full_like(H, np.nan)
        H2_fd = np.full_like(H, np.nan)
    nu = (p + 3) / 4
    return LevineSeries(t, H, H1, H2, H1_fd, H2_fd, H * H2 - nu * H1**2, nu)


# ---------------------------------------------------------------------------
# Experiments


@dataclass(frozen=True)
class Perturbation:
    """Initial data ``lam * Phi_c`` plus optional smooth noise of size ``eps``.

    ``h`` selects the high-pass filtered construction of
    :func:`build_blowup_data` (``"auto"`` or a cut-off); ``None`` uses the
    unfiltered wave.
    """

    lam: float = 1.0
    h: float | str | None = None
    eps: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        if not self.lam > 0:
            raise ValidationError(f"lambda must be positive, got {self.lam}")
        if self.eps < 0:
            raise ValidationError(f"eps must be non-negative, got {self.eps}")
        if self.h is not None and self.h != "auto" and not float(self.h) > 0:
            raise ValidationError(f"h must be positive, 'auto' or None, got {self.h}")

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "h": self.h, "eps": self.eps, "seed": self.seed}


def smooth_noise(grid: Grid, seed: int | None) -> GridFunction:
    """Random smooth function with unit L2 norm (Gaussian spectral decay)."""
    rng = np.random.default_rng(seed)
    k = grid.n // 2 + 1
    coeffs = (rng.standard_normal(k) + 1j * rng.standard_normal(k)) * np.exp(-0.5 * grid.xi**2)
    coeffs[0] = coeffs[0].real
    coeffs[-1] = 0.0
    f = GridFunction.from_spectrum(grid, coeffs)
    return f / math.sqrt(f.inner(f))


def perturbed_data(wave: TravelingWave, perturbation: Perturbation) -> SystemState:
    if perturbation.h is not None:
        state = build_blowup_data(wave, perturbation.lam, perturbation.h).state
    else:
        state = wave.state(perturbation.lam)
    if perturbation.eps > 0:
        noise = smooth_noise(wave.grid, perturbation.seed)
        state = SystemState(state.u + perturbation.eps * noise, state.w, state.t)
    return state


@dataclass(frozen=True, eq=False)
class StabilityReport:
    """Outcome of evolving perturbed wave data and tracking the orbital distance.

    ``status`` is ``StayedClose`` (ratio within bound, no blow-up),
    ``Departed``, ``BlewUp`` or ``Aborted``.
    """

    model: PDEModel
    c: float
    perturbation: Perturbation
    t_end: float
    initial_distance: float
    max_distance: float
    ratio: float
    ratio_bound: float
    status: str
    t_star: float | None
    sigma_minus_initial: tuple
    times: np.ndarray
    distances: np.ndarray
    sigma_minus: list
    d: float
    m1: float
    trajectory: Trajectory = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "c": self.c,
            "perturbation": self.perturbation.to_dict(),
            "t_end": self.t_end,
            "initial_distance": self.initial_distance,
            "max_distance": self.max_distance,
            "ratio": self.ratio,
            "ratio_bound": self.ratio_bound,
            "status": self.status,
            "t_star": self.t_star,
            "d": self.d,
            "m1": self.m1,
            "evolution_status": self.trajectory.status.to_dict(),
            "sigma_minus_initial": list(self.sigma_minus_initial),
            "sigma_minus_all_steps": [bool(all(s)) for s in zip(*self.sigma_minus)],
        }


def stability_experiment(
    model: PDEModel,
    c: float,
    perturbation: Perturbation,
    t_end: float,
    grid: Grid,
    *,
    wave: TravelingWave | None = None,
    dt: float | None = None,
    ratio_bound: float = 10.0,
    distance_floor: float = 1e-6,
    solver_opts: dict | None = None,
    evolve_opts: dict | None = None,
) -> StabilityReport:
    """Evolve ``perturbation`` applied to the wave of speed ``c`` and classify the outcome.

    Distances below ``distance_floor * x_norm(Phi_c)`` are clipped to that
    floor before forming the ratio, so that discretization noise on an
    unperturbed wave does not produce meaningless ratios.
    """
    if wave is None:
        wave = solve_wave_fixed_point(model, c, grid, **(solver_opts or {}))
    elif wave.grid != grid:
        raise GridMismatchError("wave lives on a different grid")
    d = dee_from_wave(wave)
    U0 = perturbed_data(wave, perturbation)
    opts = {"snapshot_stride": 10}
    opts.update(evolve_opts or {})
    traj = evolve(U0, model, dt, t_end, **opts)
    floor = distance_floor * x_norm(wave.state(), model)
    snaps = traj.stable_snapshots()
    times = np.array([s.t for s in snaps])
    dist = np.array([orbital_distance(s, wave, model) for s in snaps])
    sig = [sigma_minus_check(s, model, c, d) for s in snaps]
    clipped = np.maximum(dist, floor)
    ratio = float(clipped.max() / clipped[0])
    if traj.status.kind == "BlewUp":
        status = "BlewUp"
    elif traj.status.kind == "Aborted":
        status = "Aborted"
    elif ratio <= ratio_bound:
        status = "StayedClose"
    else:
        status = "Departed"
    return StabilityReport(
        model=model,
        c=float(c),
        perturbation=perturbation,
        t_end=float(t_end),
        initial_distance=float(dist[0]),
        max_distance=float(dist.max()),
        ratio=ratio,
        ratio_bound=float(ratio_bound),
        status=status,
        t_star=traj.status.t_star,
        sigma_minus_initial=sig[0],
        times=times,
        distances=dist,
        sigma_minus=list(zip(*sig)),
        d=float(d),
        m1=float(m1_from_wave(wave)),
        trajectory=traj,
    )


@dataclass(frozen=True, eq=False)
class BlowupReport:
    """Blow-up run from filtered, scaled wave data with the invariant-set checks."""

    wave: TravelingWave
    data: BlowupData
    d: float
    sigma_minus_initial: tuple
    momentum_condition: bool | None
    trajectory: Trajectory
    times: np.ndarray
    sigma_minus: np.ndarray
    lemma_bound: np.ndarray
    levine: LevineSeries

    @property
    def status(self) -> str:
        return self.trajectory.status.kind

    @property
    def t_star(self):
        return self.trajectory.status.t_star

    def to_dict(self) -> dict:
        return {
            "c": self.wave.c,
            "lambda": self.data.lam,
            "h": self.data.h,
            "filter_distance": self.data.filter_distance,
            "relative_filter_distance": self.data.relative_filter_distance,
            "d": self.d,
            "sigma_minus_initial": list(self.sigma_minus_initial),
            "momentum_condition": self.momentum_condition,
            "status": self.trajectory.status.to_dict(),
            "steps": int(len(self.trajectory.times) - 1),
            "sigma_minus_all_steps": bool(np.all(self.sigma_minus)),
            "lemma_bound_all_steps": bool(np.all(self.lemma_bound)),
        }


def momentum_condition(state: SystemState, wave: TravelingWave, d: float) -> bool | None:
    """``-c M(U0) > (2 c^2 / (1 - c^2)) ((p+1)/(p-1)) d(c)`` for ``L = I``; ``None`` otherwise."""
    model = wave.model
    if not model.l_spec.is_identity or wave.c == 0:
        return None
    c, p = wave.c, model.p
    lhs = -c * momentum(state, model)
    rhs = 2 * c * c / (1 - c * c) * (p + 1) / (p - 1) * d
    return bool(lhs > rhs)


def blowup_experiment(
    wave: TravelingWave,
    lam: float,
    t_end: float,
    *,
    h="auto",
    dt: float | None = None,
    cap: float = 0.25,
    evolve_opts: dict | None = None,
) -> BlowupReport:
    """Build filtered data, verify the blow-up hypothesis, evolve and monitor.

    Data outside the invariant set are refused with ``ValidationError``
    rather than run.
    """
    data = build_blowup_data(wave, lam, h, cap)
    initial = check_blowup_hypothesis(data.state, wave)
    d = dee_from_wave(wave)
    opts = {"snapshot_stride": 1, "step_control": True}
    opts.update(evolve_opts or {})
    traj = evolve(data.state, wave.model, dt, t_end, **opts)
    snaps = traj.stable_snapshots()
    model, c = wave.model, wave.c
    sig = np.array([all(sigma_minus_check(s, model, c, d)) for s in snaps])
    lem = np.array([lemma_bound_holds(s, model, c, d) for s in snaps])
    return BlowupReport(
        wave=wave,
        data=data,
        d=d,
        sigma_minus_initial=initial,
        momentum_condition=momentum_condition(data.state, wave, d),
        trajectory=traj,
        times=np.array([s.t for s in snaps]),
        sigma_minus=sig,
        lemma_bound=lem,
        levine=levine_monitor(traj, model, c),
    )
