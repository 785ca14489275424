"""Scalar functionals of the model evaluated on grid data.

Quadratic functionals are evaluated in Plancherel form, with the symbols
``l(xi)`` and ``b(xi)`` tabulated on the grid; fractional powers such as
``B^(-1/2)`` therefore never need a physical-space kernel.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .exceptions import GridMismatchError, NotConvergedWaveError, ValidationError
from .model import PDEModel
from .spectral import GridFunction, sobolev_norm, spectral_inner, symbol_on_grid

__all__ = [
    "SystemState",
    "FunctionalReport",
    "functional_Ic",
    "functional_Jc",
    "functional_Q",
    "energy",
    "momentum",
    "x_norm",
    "b_weighted_norm_sq",
    "sigma_minus_check",
    "dee_from_wave",
    "m1_from_wave",
    "m1_from_Q",
    "dee_from_m1",
    "functional_report",
]


@dataclass(frozen=True)
class SystemState:
    """Pair ``(u, w)`` of the first-order system at time ``t``."""

    u: GridFunction
    w: GridFunction
    t: float = 0.0

    def __post_init__(self):
        if self.u.grid != self.w.grid:
            raise GridMismatchError("u and w live on different grids")

    @property
    def grid(self):
        return self.u.grid

    @classmethod
    def zeros(cls, grid, t: float = 0.0) -> "SystemState":
        z = GridFunction.zeros(grid)
        return cls(z, z, t)

    @classmethod
    def traveling(cls, phi: GridFunction, c: float, scale: float = 1.0) -> "SystemState":
        """The state ``scale * (phi, -c phi)`` of a wave moving at speed ``c``."""
        return cls(scale * phi, (-c * scale) * phi)

    def scaled(self, lam: float) -> "SystemState":
        return SystemState(lam * self.u, lam * self.w, self.t)


def _b_inv(model: PDEModel, grid) -> np.ndarray:
    return 1.0 / symbol_on_grid(model.b_spec, grid)


def _l_over_b(model: PDEModel, grid) -> np.ndarray:
    return symbol_on_grid(model.l_spec, grid) / symbol_on_grid(model.b_spec, grid)


def b_weighted_norm_sq(f: GridFunction, model: PDEModel) -> float:
    """``||B^(-1/2) f||^2``."""
    return spectral_inner(f.spectrum, f.spectrum, f.grid, _b_inv(model, f.grid))


def functional_Ic(psi: GridFunction, model: PDEModel, c: float) -> float:
    """``1/2 ||L^(1/2) B^(-1/2) psi||^2 - c^2/2 ||B^(-1/2) psi||^2``."""
    grid = psi.grid
    weight = (symbol_on_grid(model.l_spec, grid) - c * c) * _b_inv(model, grid)
    return 0.5 * spectral_inner(psi.spectrum, psi.spectrum, grid, weight)


def functional_Jc(psi: GridFunction, model: PDEModel, c: float) -> float:
    return -functional_Ic(psi, model, c)


def functional_Q(psi: GridFunction, p: float) -> float:
    """``int |psi|^(p+1)``."""
    if p <= 1:
        raise ValidationError(f"p must exceed 1, got {p}")
    return float(np.sum(np.abs(psi.values) ** (p + 1)) * psi.grid.spacing)


def energy(state: SystemState, model: PDEModel) -> float:
    grid = state.grid
    uh, wh = state.u.spectrum, state.w.spectrum
    kinetic = 0.5 * spectral_inner(wh, wh, grid, _b_inv(model, grid))
    potential = 0.5 * spectral_inner(uh, uh, grid, _l_over_b(model, grid))
    return kinetic + potential + model.sigma * functional_Q(state.u, model.p) / (model.p + 1)


def momentum(state: SystemState, model: PDEModel) -> float:
    """``int (B^(-1/2) u)(B^(-1/2) w)``."""
    grid = state.grid
    return spectral_inner(state.u.spectrum, state.w.spectrum, grid, _b_inv(model, grid))


def x_norm(state: SystemState, model: PDEModel) -> float:
    """Energy-space norm ``||u||_{H^s0} + ||w||_{H^(s0 - rho/2)}``."""
    return sobolev_norm(state.u, model.s0) + sobolev_norm(state.w, model.w_index)


def sigma_minus_check(
    state: SystemState, model: PDEModel, c: float, d_c: float, rtol: float = 1e-10
) -> tuple[bool, bool]:
    """Membership conditions of the invariant blow-up set.

    Returns ``(E + cM < d(c), 2 I_c(u) - Q(u) < 0)``.  Both inequalities are
    strict with a relative margin ``rtol``: values equal to the threshold up
    to round-off (the wave itself) do not count.
    """
    ecm = energy(state, model) + c * momentum(state, model)
    ic = functional_Ic(state.u, model, c)
    q = functional_Q(state.u, model.p)
    first = ecm < d_c - rtol * abs(d_c)
    second = 2.0 * ic - q < -rtol * max(abs(q), abs(2.0 * ic))
    return bool(first), bool(second)


def m1_from_Q(q: float, p: float) -> float:
    """Invert ``Q(phi_c) = 2^((p+1)/(p-1)) m1^((p+1)/(p-1))``."""
    return (q / 2.0 ** ((p + 1) / (p - 1))) ** ((p - 1) / (p + 1))


def dee_from_m1(m1: float, p: float) -> float:
    return 2.0 ** (2 / (p - 1)) * ((p - 1) / (p + 1)) * m1 ** ((p + 1) / (p - 1))


def _require_converged(wave):
    if not wave.converged:
        raise NotConvergedWaveError(
            f"wave at c={wave.c} is not converged (residual "
            f"{wave.diagnostics.residual_l2:.3e} > tol {wave.tol:.1e})"
        )


def dee_from_wave(wave, model: PDEModel | None = None, rtol: float = 1e-8) -> float:
    """``d(c) = ((p-1)/(p+1)) I_c(phi_c)``, cross-checked against the ``Q`` form.

    Raises
    ------
    NotConvergedWaveError
        If the wave is not converged or the two expressions disagree by more
        than ``rtol``: the identity only holds at exact critical points.
    """
    _require_converged(wave)
    model = model if model is not None else wave.model
    p = model.p
    ic = functional_Ic(wave.profile, model, wave.c)
    q = functional_Q(wave.profile, p)
    d_ic = (p - 1) / (p + 1) * ic
    d_q = -model.sigma * 0.5 * (p - 1) / (p + 1) * q
    d_m = -model.sigma * dee_from_m1(m1_from_Q(q, p), p)
    scale = max(abs(d_ic), abs(d_q))
    if abs(d_ic - d_q) > rtol * scale or abs(d_q - d_m) > rtol * scale:
        raise NotConvergedWaveError(
            f"d(c) expressions disagree: from I_c {d_ic:.15g}, from Q {d_q:.15g}"
        )
    return d_ic


def m1_from_wave(wave, model: PDEModel | None = None) -> float:
    """Minimum of the constrained problem recovered from ``Q(phi_c)``."""
    _require_converged(wave)
    model = model if model is not None else wave.model
    return m1_from_Q(functional_Q(wave.profile, model.p), model.p)


@dataclass(frozen=True)
class FunctionalReport:
    t: float
    Ic: float
    Q: float
    E: float
    M: float
    EcM: float
    x_norm: float
    sign_2Ic_minus_Q: int

    COLUMNS = ("t", "E", "M", "Ic", "Q", "x_norm")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.COLUMNS}

    def full_dict(self) -> dict:
        return asdict(self)


def functional_report(state: SystemState, model: PDEModel, c: float) -> FunctionalReport:
    ic = functional_Ic(state.u, model, c)
    q = functional_Q(state.u, model.p)
    e = energy(state, model)
    m = momentum(state, model)
    return FunctionalReport(
        t=state.t,
        Ic=ic,
        Q=q,
        E=e,
        M=m,
        EcM=e + c * m,
        x_norm=x_norm(state, model),
        sign_2Ic_minus_Q=int(np.sign(2 * ic - q)),
    )
