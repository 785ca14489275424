"""Time integration of ``u_t = w_x``, ``w_t = L u_x + B g(u)_x``.

The linear part is a rotation in each Fourier mode at frequency
``omega = |xi| sqrt(l(xi))`` and is advanced exactly; the nonlinear term is
handled by the classical RK4 stages in the rotating frame (Lawson's
integrating-factor Runge-Kutta method).  The linear part can be arbitrarily
stiff (``omega ~ xi^2`` for Boussinesq), the nonlinear remainder is not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import StepSizeError, ValidationError
from .functionals import SystemState
from .model import PDEModel
from .spectral import (
    Grid,
    GridFunction,
    dealias_factor,
    power_nonlinearity_hat,
    symbol_on_grid,
)

__all__ = [
    "LinearPropagator",
    "linear_propagator",
    "Status",
    "Trajectory",
    "evolve",
    "conserved_drift",
    "primitive_x",
    "spectral_tail",
    "nonlinear_rate",
    "default_time_step",
    "RK4_STABILITY_LIMIT",
]

# Extent of the RK4 stability region along the imaginary axis is 2*sqrt(2);
# a little margin is kept.
RK4_STABILITY_LIMIT = 2.8
MAX_REFINEMENT = 60


@dataclass(frozen=True, eq=False)
class LinearPropagator:
    """Per-mode coefficients of the exact linear flow over a time ``dt``.

    ``u_hat <- cos * u_hat + uw * w_hat`` and ``w_hat <- wu * u_hat + cos * w_hat``.
    """

    dt: float
    cos: np.ndarray
    uw: np.ndarray
    wu: np.ndarray

    def apply(self, uh: np.ndarray, wh: np.ndarray):
        return self.cos * uh + self.uw * wh, self.wu * uh + self.cos * wh


def linear_propagator(grid: Grid, model: PDEModel, dt: float) -> LinearPropagator:
    """Exact propagator of ``u_hat' = i xi w_hat``, ``w_hat' = i xi l u_hat``.

    ``sin(omega dt)/omega`` is evaluated as ``dt * sinc``, which has the correct
    limit ``dt`` at ``omega = 0``.  The Nyquist mode uses ``xi = 0``,
    consistent with the odd derivative on an even grid.
    """
    xi = grid.xi_deriv
    l = symbol_on_grid(model.l_spec, grid)
    omega = np.abs(xi) * np.sqrt(l)
    s = dt * np.sinc(omega * dt / np.pi)
    return LinearPropagator(
        dt=float(dt),
        cos=np.cos(omega * dt),
        uw=1j * xi * s,
        wu=1j * xi * l * s,
    )


def nonlinear_rate(model: PDEModel, grid: Grid, u: GridFunction) -> float:
    """Largest rate of the nonlinear coupling in the rotating frame.

    In the normal modes of the linear flow the term ``B g(u)_x`` acts on mode
    ``xi`` with gain ``|xi| b(xi) / sqrt(l(xi))`` times ``|g'(u)|``.
    """
    xi = grid.xi_deriv
    gain = np.abs(xi) * symbol_on_grid(model.b_spec, grid) / np.sqrt(symbol_on_grid(model.l_spec, grid))
    gprime = model.p * u.max_abs() ** (model.p - 1)
    return float(gprime * np.max(gain))


def default_time_step(model: PDEModel, u: GridFunction) -> float:
    rate = nonlinear_rate(model, u.grid, u)
    return 0.5 / rate if rate > 0 else 0.1


@dataclass(frozen=True)
class Status:
    """Outcome of a run: ``Completed``, ``BlewUp`` (with ``t_star``) or ``Aborted``."""

    kind: str
    t_star: float | None = None
    reason: str | None = None

    @property
    def blew_up(self) -> bool:
        return self.kind == "BlewUp"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "t_star": self.t_star, "reason": self.reason}


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Record of a run.

    ``times`` and the arrays in ``series`` hold one entry per step (including
    the initial state).  When the run blew up, the last entry is the step
    that crossed the threshold and ``blowup_index`` points at it.
    """

    model: PDEModel
    grid: Grid
    dt: float
    times: np.ndarray
    series: dict
    snapshots: list
    snapshot_index: np.ndarray
    status: Status
    blowup_index: int | None = None
    config: dict = field(default_factory=dict)

    SERIES = ("E", "M", "x_norm", "sup_norm")

    def pre_blowup_slice(self) -> slice:
        return slice(0, self.blowup_index if self.blowup_index is not None else len(self.times))

    def stable_snapshots(self) -> list:
        """Snapshots recorded strictly before the blow-up threshold triggered."""
        if self.blowup_index is None:
            return list(self.snapshots)
        return [s for s, k in zip(self.snapshots, self.snapshot_index) if k < self.blowup_index]

    @property
    def final_state(self) -> SystemState:
        return self.snapshots[-1]

    def manifest(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "grid": self.grid.to_dict(),
            "dt": self.dt,
            "t_end": float(self.times[-1]),
            "steps": int(len(self.times) - 1),
            "status": self.status.kind,
            "t_star": self.status.t_star,
            "reason": self.status.reason,
            **self.config,
        }


class _Diagnostics:
    """Energy, momentum and norms evaluated directly on spectra."""

    def __init__(self, model: PDEModel, grid: Grid, nonlinear: bool = True):
        b = symbol_on_grid(model.b_spec, grid)
        l = symbol_on_grid(model.l_spec, grid)
        w = grid.parseval_weights
        one = 1.0 + grid.xi**2
        self.kin = w / b
        self.pot = w * l / b
        self.hu = w * one**model.s0
        self.hw = w * one**model.w_index
        self.model, self.n, self.h = model, grid.n, grid.spacing
        # The linear flow conserves the quadratic part of E only.
        self.sigma = model.sigma if nonlinear else 0

    def __call__(self, uh, wh, u):
        p = self.model.p
        au, aw = np.abs(uh) ** 2, np.abs(wh) ** 2
        q = np.sum(np.abs(u) ** (p + 1)) * self.h
        e = 0.5 * np.sum(self.kin * aw) + 0.5 * np.sum(self.pot * au) + self.sigma * q / (p + 1)
        m = np.sum(self.kin * (uh * np.conj(wh)).real)
        xn = np.sqrt(np.sum(self.hu * au)) + np.sqrt(np.sum(self.hw * aw))
        return e, m, xn, np.max(np.abs(u))


def evolve(
    U0: SystemState,
    model: PDEModel,
    dt: float | None = None,
    t_end: float = 1.0,
    *,
    snapshot_stride: int = 10,
    blowup_factor: float = 1e6,
    dealias="auto",
    nonlinear: bool = True,
    check_step: bool = True,
    step_control: bool = False,
    step_control_target: float = 0.5,
    resolution_tol: float | None = None,
    observer=None,
) -> Trajectory:
    """Integrate the system from ``U0`` to ``t_end``.

    Parameters
    ----------
    U0 : SystemState
        Initial data; ``U0.t`` is the start time.
    model : PDEModel
    dt : float, optional
        Nominal step, shrunk slightly so that ``t_end`` is hit exactly.  A
        negative step integrates backwards.  Defaults to ``0.5 / rate`` with
        ``rate`` from :func:`nonlinear_rate`.
    t_end : float
    snapshot_stride : int
        Store every ``snapshot_stride``-th state; the last state is always kept.
    blowup_factor : float
        Stop with ``BlewUp`` once the energy-space norm exceeds this multiple of
        its initial value, or on non-finite values.
    dealias : {"auto", False} or float
    nonlinear : bool
        ``False`` switches the nonlinear term off (linear flow).
    check_step : bool
        Refuse steps beyond the RK4 stability limit of the nonlinear term.
    step_control : bool
        Halve the step (repeatedly) whenever ``|dt| * rate`` of the current
        solution exceeds ``step_control_target``.  Keeps growing solutions
        resolved in time up to the blow-up threshold; steps are dyadic
        fractions of ``dt``.
    step_control_target : float
    resolution_tol : float, optional
        Stop with ``Aborted`` once :func:`spectral_tail` of ``u`` exceeds this
        value: beyond that point the grid no longer resolves the solution
        and neither the diagnostics nor a later threshold crossing mean
        anything.
    observer : callable, optional
        Called as ``observer(step, t, state)`` on each stored snapshot; a
        truthy return aborts the run.

    Returns
    -------
    Trajectory
    """
    if not isinstance(model, PDEModel):
        raise ValidationError("model must be a PDEModel")
    grid = U0.grid
    if snapshot_stride < 1:
        raise ValidationError("snapshot_stride must be at least 1")
    if not blowup_factor > 1:
        raise ValidationError("blowup_factor must exceed 1")
    if nonlinear:
        model.warn_if_rough()
    t0 = float(U0.t)
    span = float(t_end) - t0
    if dt is None:
        dt = math.copysign(default_time_step(model, U0.u), span if span != 0 else 1.0)
    dt = float(dt)
    if dt == 0 or not np.isfinite(dt):
        raise ValidationError(f"time step must be finite and nonzero, got {dt}")
    if span != 0 and math.copysign(1.0, span) != math.copysign(1.0, dt):
        raise ValidationError("dt must point from U0.t towards t_end")
    rate = nonlinear_rate(model, grid, U0.u) if nonlinear else 0.0
    if check_step and abs(dt) * rate > RK4_STABILITY_LIMIT:
        raise StepSizeError(
            f"dt={abs(dt):.3e} exceeds the stability bound {RK4_STABILITY_LIMIT / rate:.3e} "
            "of the nonlinear term"
        )
    n_steps = int(math.ceil(abs(span) / abs(dt) * (1 - 1e-12))) if span != 0 else 0
    h = span / n_steps if n_steps else dt

    n = grid.n
    p = model.p
    pad = dealias_factor(p, dealias)
    gain = 1j * grid.xi_deriv * symbol_on_grid(model.b_spec, grid) * model.sigma
    rate_scale = nonlinear_rate(model, grid, GridFunction(grid, np.ones(n))) / p
    diag = _Diagnostics(model, grid, nonlinear)
    propagators = {}

    def propagators_for(hh):
        if hh not in propagators:
            propagators[hh] = (linear_propagator(grid, model, hh), linear_propagator(grid, model, hh / 2))
        return propagators[hh]

    def nl(uh):
        return gain * power_nonlinearity_hat(uh, n, p, pad)

    def step(uh, wh, hh):
        full, half = propagators_for(hh)
        if not nonlinear:
            return full.apply(uh, wh)
        # Stage vectors are (0, k): the nonlinear term only feeds w.
        ua, _ = half.apply(uh, wh)
        uf, wf = full.apply(uh, wh)
        k1 = nl(uh)
        k2 = nl(ua + 0.5 * hh * half.uw * k1)
        k3 = nl(ua)
        k4 = nl(uf + hh * half.uw * k3)
        k23 = k2 + k3
        u_new = uf + (hh / 6) * (full.uw * k1 + 2 * half.uw * k23)
        w_new = wf + (hh / 6) * (full.cos * k1 + 2 * half.cos * k23 + k4)
        return u_new, w_new

    uh = np.array(U0.u.spectrum, dtype=complex)
    wh = np.array(U0.w.spectrum, dtype=complex)
    u = np.array(U0.u.values)
    times = [t0]
    e, m, xn, sup = diag(uh, wh, u)
    rows = [(e, m, xn, sup)]
    threshold = blowup_factor * xn
    snapshots = [SystemState(U0.u, U0.w, t0)]
    snap_index = [0]
    status = Status("Completed")
    blowup_index = None
    if observer is not None and observer(0, t0, snapshots[0]):
        status = Status("Aborted", reason="stopped by observer")
        n_steps = 0

    t, k, done = t0, 0, n_steps == 0
    while not done:
        hh = h
        if step_control and nonlinear:
            rate = rate_scale * p * np.max(np.abs(u)) ** (p - 1)
            level = 0
            while abs(hh) * rate > step_control_target and level < MAX_REFINEMENT:
                hh, level = hh / 2, level + 1
            if abs(hh) * rate > step_control_target:
                status = Status("Aborted", reason="step size underflow")
                break
        remaining = float(t_end) - t
        # round-off in t must not leave a sliver of a step behind
        if abs(remaining) <= abs(hh) * (1 + 1e-8):
            hh, done = remaining, True
        k += 1
        with np.errstate(over="ignore", invalid="ignore"):
            uh, wh = step(uh, wh, hh)
            u = np.fft.irfft(uh, n=n)
            finite = bool(np.all(np.isfinite(u)) and np.all(np.isfinite(wh)))
            t = float(t_end) if done else t + hh
            if finite:
                row = diag(uh, wh, u)
                finite = bool(np.all(np.isfinite(row)))
        times.append(t)
        if not finite:
            rows.append((np.nan, np.nan, np.inf, np.inf))
            status = Status("BlewUp", t_star=times[-2], reason="non-finite values")
            blowup_index = k
            break
        rows.append(row)
        crossed = row[2] > threshold
        unresolved = (
            not crossed and resolution_tol is not None and spectral_tail(uh) > resolution_tol
        )
        if crossed or unresolved or k % snapshot_stride == 0 or done:
            state = SystemState(GridFunction(grid, u), GridFunction.from_spectrum(grid, wh), t)
            snapshots.append(state)
            snap_index.append(k)
            if crossed:
                status = Status("BlewUp", t_star=times[-2], reason="norm threshold exceeded")
                blowup_index = k
                break
            if unresolved:
                status = Status("Aborted", reason=f"resolution lost at t={t:.9g}")
                break
            if observer is not None and observer(k, t, state):
                status = Status("Aborted", reason="stopped by observer")
                break

    data = np.array(rows, dtype=float).reshape(-1, 4)
    series = {name: data[:, j].copy() for j, name in enumerate(Trajectory.SERIES)}
    return Trajectory(
        model=model,
        grid=grid,
        dt=h,
        times=np.array(times),
        series=series,
        snapshots=snapshots,
        snapshot_index=np.array(snap_index),
        status=status,
        blowup_index=blowup_index,
        config={
            "snapshot_stride": snapshot_stride,
            "blowup_factor": blowup_factor,
            "step_control": bool(step_control),
            "resolution_tol": resolution_tol,
        },
    )


def spectral_tail(uh: np.ndarray, fraction: float = 0.125) -> float:
    """Largest coefficient among the top ``fraction`` of wavenumbers, relative to the largest overall."""
    a = np.abs(uh[:-1])
    top = a.max()
    if top == 0:
        return 0.0
    k = max(1, int(len(a) * fraction))
    return float(a[-k:].max() / top)


def conserved_drift(traj: Trajectory) -> tuple[float, float]:
    """Largest relative change of ``E`` and ``M`` over the pre-blow-up samples."""
    sl = traj.pre_blowup_slice()
    out = []
    for name in ("E", "M"):
        x = traj.series[name][sl]
        if len(x) < 2:
            raise ValidationError("drift needs at least two samples")
        out.append(float(np.max(np.abs(x - x[0])) / max(abs(x[0]), 1e-30)))
    return out[0], out[1]


def primitive_x(u: GridFunction, atol: float = 1e-12) -> GridFunction:
    """Zero-mean antiderivative ``v`` with ``v_x = u``.

    Raises
    ------
    ValidationError
        If ``u`` has a mean larger than ``atol``; no periodic primitive exists.
    """
    grid = u.grid
    mean = u.spectrum[0].real / grid.n
    if abs(mean) > atol:
        raise ValidationError(f"u has nonzero mean {mean:.3e}; no periodic primitive")
    xi = grid.xi_deriv
    vh = np.zeros_like(u.spectrum)
    nz = xi != 0
    vh[nz] = u.spectrum[nz] / (1j * xi[nz])
    return GridFunction.from_spectrum(grid, vh)
