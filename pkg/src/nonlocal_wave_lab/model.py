"""The model ``u_tt - L u_xx = B(g(u))_xx`` with ``g(u) = sigma |u|^(p-1) u``."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .exceptions import ModelError, ValidationError
from .spectral import IDENTITY, Grid, SymbolSpec, coercivity_constants

__all__ = [
    "PDEModel",
    "RegimeInfo",
    "build_model",
    "classify_regime",
    "boussinesq",
    "improved_boussinesq",
    "double_dispersion",
    "klein_gordon",
    "VELOCITY_GUARD",
]

# Guard band keeping c^2 away from the coercivity bound, where the
# lower coercivity constant of I_c degenerates.
VELOCITY_GUARD = 1e-9


@dataclass(frozen=True)
class PDEModel:
    """Validated operator pair ``(L, B)`` with power nonlinearity.

    Parameters
    ----------
    l_spec : SymbolSpec
        Symbol of ``L``, of order ``rho``.
    b_spec : SymbolSpec
        Symbol of ``B``, of order ``-r`` with ``r >= 0``.
    p : float
        Exponent of the nonlinearity, ``p > 1``.
    sigma : int
        Sign of ``g``; ``-1`` pairs with ``rho >= 0`` and ``+1`` with ``rho <= 0``.
    """

    l_spec: SymbolSpec
    b_spec: SymbolSpec
    p: float
    sigma: int

    def __post_init__(self):
        if not isinstance(self.l_spec, SymbolSpec) or not isinstance(self.b_spec, SymbolSpec):
            raise ValidationError("l_spec and b_spec must be SymbolSpec instances")
        p = float(self.p)
        if not np.isfinite(p) or p <= 1:
            raise ModelError(f"exponent p must satisfy p > 1, got {self.p}")
        if self.sigma not in (1, -1):
            raise ModelError(f"sigma must be +1 or -1, got {self.sigma}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "sigma", int(self.sigma))

        rho, r = self.rho, self.r
        if r < 0:
            raise ModelError(f"B must have order -r with r >= 0, got r={r}")
        if rho > -2:
            if r + rho / 2 < 1:
                raise ModelError(
                    f"admissibility violated: rho={rho} > -2 requires r + rho/2 >= 1, "
                    f"got {r + rho / 2}"
                )
        elif r < 2:
            raise ModelError(
                f"admissibility violated: rho={rho} <= -2 requires r >= 2, got r={r}"
            )
        if self.sigma == -1 and rho < 0:
            raise ModelError(
                f"regime mismatch: sigma=-1 requires rho >= 0, got rho={rho}"
            )
        if self.sigma == 1 and rho > 0:
            raise ModelError(
                f"regime mismatch: rho={rho} > 0 demands sigma=-1, got sigma=+1"
            )

    @property
    def rho(self) -> float:
        return self.l_spec.order

    @property
    def r(self) -> float:
        return 0.0 - self.b_spec.order

    @property
    def regime(self) -> str:
        """``"A"`` (small velocities, sigma=-1) or ``"B"`` (large, sigma=+1)."""
        return "A" if self.sigma == -1 else "B"

    @property
    def s0(self) -> float:
        if self.regime == "A":
            return self.r / 2 + self.rho / 2
        return self.r / 2

    @property
    def w_index(self) -> float:
        """Sobolev index of the ``w`` component in the energy space."""
        return self.s0 - self.rho / 2

    @cached_property
    def l_constants(self) -> tuple[float, float]:
        return coercivity_constants(self.l_spec)

    @cached_property
    def b_constants(self) -> tuple[float, float]:
        return coercivity_constants(self.b_spec)

    @property
    def c1sq(self) -> float:
        return self.l_constants[0]

    @property
    def c2sq(self) -> float:
        return self.l_constants[1]

    @property
    def c3sq(self) -> float:
        return self.b_constants[0]

    @property
    def c4sq(self) -> float:
        return self.b_constants[1]

    @property
    def weak_stability_only(self) -> bool:
        """``(rho, r) == (0, 1)``: only an ``H^(1/2)`` version of stability holds."""
        return self.rho == 0 and self.r == 1

    def smoothness_ok(self) -> bool:
        """Whether ``p >= ceil(s0) + 1`` so that ``g`` has the classical smoothness."""
        return self.p >= math.ceil(self.s0) + 1

    def warn_if_rough(self):
        if not self.smoothness_ok():
            warnings.warn(
                f"p={self.p} < ceil(s0)+1={math.ceil(self.s0) + 1}: the nonlinearity "
                "is below the classical smoothness threshold",
                RuntimeWarning,
                stacklevel=3,
            )

    def positive_symbol(self, c: float, grid: Grid) -> np.ndarray:
        """Symbol of the positive operator of the profile equation on ``grid``.

        ``(l - c^2)/b`` in regime A and ``(c^2 - l)/b`` in regime B.
        """
        l = self.l_spec(grid.xi)
        b = self.b_spec(grid.xi)
        a = (l - c * c) / b
        return a if self.regime == "A" else -a

    def to_dict(self) -> dict:
        return {
            "l": self.l_spec.to_dict(),
            "b": self.b_spec.to_dict(),
            "p": self.p,
            "sigma": self.sigma,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PDEModel":
        unknown = set(data) - {"l", "b", "p", "sigma"}
        if unknown:
            raise ValidationError(f"unknown model keys: {sorted(unknown)}")
        missing = {"l", "b", "p", "sigma"} - set(data)
        if missing:
            raise ValidationError(f"missing model keys: {sorted(missing)}")
        return build_model(
            SymbolSpec.from_dict(data["l"]),
            SymbolSpec.from_dict(data["b"]),
            data["p"],
            data["sigma"],
        )


def build_model(l_spec: SymbolSpec, b_spec: SymbolSpec, p: float, sigma: int) -> PDEModel:
    return PDEModel(l_spec, b_spec, p, sigma)


@dataclass(frozen=True)
class RegimeInfo:
    regime: str
    c_sq_bound: float
    c_sq: float
    admissible: bool

    @property
    def description(self) -> str:
        op = "<" if self.regime == "A" else ">"
        return f"c^2 {op} {self.c_sq_bound:.12g}"


def classify_regime(model: PDEModel, c: float) -> RegimeInfo:
    """Regime of ``model`` and whether traveling waves of speed ``c`` exist."""
    c_sq = float(c) ** 2
    if model.regime == "A":
        bound = model.c1sq
        ok = c_sq < bound - VELOCITY_GUARD
    else:
        bound = model.c2sq
        ok = c_sq > bound + VELOCITY_GUARD
    return RegimeInfo(model.regime, bound, c_sq, bool(ok))


# ---------------------------------------------------------------------------
# Classical members of the family


def _h1(a: float = 1.0, e=1) -> SymbolSpec:
    return SymbolSpec(1.0, ((a, e),))


def boussinesq(p: float) -> PDEModel:
    """``L = I - d_xx``, ``B = I``, ``g = -|u|^(p-1) u``."""
    return build_model(_h1(1.0, 1), IDENTITY, p, -1)


def improved_boussinesq(p: float) -> PDEModel:
    """``L = B = (I - d_xx)^(-1)``, ``g = +|u|^(p-1) u``."""
    return build_model(_h1(1.0, -1), _h1(1.0, -1), p, 1)


def double_dispersion(a1: float, a2: float, p: float, sigma: int) -> PDEModel:
    """``L = (I - a1 d_xx)^(-1)(I - a2 d_xx)``, ``B = (I - a1 d_xx)^(-1)``.

    ``a1 = 0`` or ``a2 = 0`` drop the corresponding factor, recovering the
    Boussinesq and improved Boussinesq limits.
    """
    l_spec = SymbolSpec(1.0, ((a1, -1), (a2, 1)))
    b_spec = SymbolSpec(1.0, ((a1, -1),))
    return build_model(l_spec, b_spec, p, sigma)


def klein_gordon(p: float, b_spec: SymbolSpec | None = None) -> PDEModel:
    """``L = I`` with a smoothing ``B`` (default ``(I - d_xx)^(-1)``), ``g = -|u|^(p-1) u``."""
    return build_model(IDENTITY, b_spec if b_spec is not None else _h1(1.0, -1), p, -1)
