"""Periodic grids, Fourier symbols and multiplier operators.

All transforms are real-to-real through ``numpy.fft.rfft``/``irfft``, so every
array of Fourier coefficients in this package is indexed by the non-negative
wavenumbers ``grid.xi``.  Symbols are even in the wavenumber, which makes the
half spectrum sufficient.

Norms follow the rectangle rule on the periodic box; with that convention
``sobolev_norm(f, 0) == lp_norm(f, 2)`` exactly (Parseval).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Union

import numpy as np
from scipy.optimize import minimize_scalar

from .exceptions import GridMismatchError, ValidationError

__all__ = [
    "Grid",
    "GridFunction",
    "SymbolSpec",
    "TabulatedSymbol",
    "make_grid",
    "symbol_eval",
    "symbol_mul",
    "symbol_pow",
    "symbol_shift_sub",
    "symbol_infimum",
    "apply_multiplier",
    "coercivity_constants",
    "sobolev_norm",
    "lp_norm",
    "derivative",
    "shift",
    "tail_mass",
    "interpolate",
    "dealias_factor",
    "power_nonlinearity_hat",
]

MIN_POINTS = 16


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[-length/2, length/2)``.

    The box midpoint ``x = 0`` sits at index ``n // 2``.
    """

    n: int
    length: float

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n:
            raise ValidationError(f"n must be an integer, got {self.n!r}")
        n = int(self.n)
        if n % 2:
            raise ValidationError(f"n must be even, got odd n={n}")
        if n < MIN_POINTS:
            raise ValidationError(f"n must be >= {MIN_POINTS}, got {n}")
        if not np.isfinite(self.length) or self.length <= 0:
            raise ValidationError(f"length must be positive, got {self.length}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "length", float(self.length))

    @property
    def spacing(self) -> float:
        return self.length / self.n

    @cached_property
    def x(self) -> np.ndarray:
        x = -0.5 * self.length + self.spacing * np.arange(self.n)
        x.flags.writeable = False
        return x

    @cached_property
    def xi(self) -> np.ndarray:
        """Non-negative wavenumbers matching the ``rfft`` layout."""
        xi = 2.0 * np.pi / self.length * np.arange(self.n // 2 + 1)
        xi.flags.writeable = False
        return xi

    @cached_property
    def xi_deriv(self) -> np.ndarray:
        """Wavenumbers for odd-order derivatives: the Nyquist entry is zeroed."""
        xi = self.xi.copy()
        xi[-1] = 0.0
        xi.flags.writeable = False
        return xi

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """All wavenumbers ``2*pi*k/length`` for ``k = -n/2, ..., n/2 - 1``."""
        k = np.arange(-self.n // 2, self.n // 2)
        return 2.0 * np.pi / self.length * k

    @property
    def first_wavenumber(self) -> float:
        return 2.0 * np.pi / self.length

    @property
    def max_wavenumber(self) -> float:
        return np.pi * self.n / self.length

    @cached_property
    def parseval_weights(self) -> np.ndarray:
        """Weights turning half-spectrum sums into rectangle-rule integrals."""
        w = np.full(self.n // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        w *= self.spacing / self.n
        w.flags.writeable = False
        return w

    def to_dict(self) -> dict:
        return {"n": self.n, "length": self.length}


def make_grid(n: int, length: float) -> Grid:
    """Build a :class:`Grid`, rejecting odd or small ``n`` and bad lengths."""
    return Grid(n, length)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real samples of a function on a :class:`Grid`."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValidationError(
                f"expected {self.grid.n} samples, got shape {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise ValidationError("grid function contains non-finite values")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_spectrum(cls, grid: Grid, spectrum: np.ndarray) -> "GridFunction":
        return cls(grid, np.fft.irfft(spectrum, n=grid.n))

    @classmethod
    def from_callable(cls, grid: Grid, func) -> "GridFunction":
        return cls(grid, func(grid.x))

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros(grid.n))

    @cached_property
    def spectrum(self) -> np.ndarray:
        s = np.fft.rfft(self.values)
        s.flags.writeable = False
        return s

    def _check(self, other: "GridFunction"):
        if other.grid != self.grid:
            raise GridMismatchError("grid functions live on different grids")

    def __add__(self, other):
        if isinstance(other, GridFunction):
            self._check(other)
            return GridFunction(self.grid, self.values + other.values)
        return GridFunction(self.grid, self.values + other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            self._check(other)
            return GridFunction(self.grid, self.values - other.values)
        return GridFunction(self.grid, self.values - other)

    def __neg__(self):
        return GridFunction(self.grid, -self.values)

    def __mul__(self, other):
        if isinstance(other, GridFunction):
            self._check(other)
            return GridFunction(self.grid, self.values * other.values)
        return GridFunction(self.grid, self.values * float(other))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return GridFunction(self.grid, self.values / float(scalar))

    def inner(self, other: "GridFunction") -> float:
        """Rectangle-rule L2 inner product."""
        self._check(other)
        return float(np.dot(self.values, other.values) * self.grid.spacing)

    def mean(self) -> float:
        return float(np.mean(self.values))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __len__(self):
        return self.grid.n


# ---------------------------------------------------------------------------
# Symbols


def _as_fraction(e) -> Fraction:
    if isinstance(e, Fraction):
        return e
    if isinstance(e, (int, np.integer)):
        return Fraction(int(e))
    return Fraction(float(e)).limit_denominator(10_000)


@dataclass(frozen=True)
class SymbolSpec:
    """Even positive symbol ``prefactor * prod_j (1 + a_j xi^2) ** e_j``.

    Factors with ``a == 0`` are the identity and are dropped; factors sharing
    the same ``a`` are merged and vanishing exponents removed, so two specs
    describing the same function compare equal.
    """

    prefactor: float = 1.0
    factors: tuple = ()

    def __post_init__(self):
        pref = float(self.prefactor)
        if not np.isfinite(pref) or pref <= 0:
            raise ValidationError(f"prefactor must be positive, got {self.prefactor}")
        merged: dict[float, Fraction] = {}
        for item in self.factors:
            if isinstance(item, dict):
                a, e = item["a"], item["e"]
            else:
                a, e = item
            a = float(a)
            if not np.isfinite(a) or a < 0:
                raise ValidationError(f"factor coefficient a must be positive, got {a}")
            if a == 0.0:
                continue
            merged[a] = merged.get(a, Fraction(0)) + _as_fraction(e)
        factors = tuple(sorted((a, e) for a, e in merged.items() if e != 0))
        object.__setattr__(self, "prefactor", pref)
        object.__setattr__(self, "factors", factors)

    @property
    def order(self) -> float:
        return float(self.order_exact)

    @property
    def order_exact(self) -> Fraction:
        return sum((2 * e for _, e in self.factors), Fraction(0))

    @property
    def is_identity(self) -> bool:
        return self.prefactor == 1.0 and not self.factors

    def __call__(self, xi) -> np.ndarray:
        xi2 = np.square(np.asarray(xi, dtype=float))
        out = np.full(np.shape(xi2), self.prefactor)
        for a, e in self.factors:
            out = out * (1.0 + a * xi2) ** float(e)
        return out

    def __mul__(self, other: "SymbolSpec") -> "SymbolSpec":
        return symbol_mul(self, other)

    def __pow__(self, q) -> "SymbolSpec":
        return symbol_pow(self, q)

    def limit_at_infinity_ratio(self) -> float:
        """Limit of ``symbol(xi) * (1 + xi^2) ** (-order/2)`` as ``|xi| -> inf``."""
        out = self.prefactor
        for a, e in self.factors:
            out *= a ** float(e)
        return out

    def to_dict(self) -> dict:
        return {
            "prefactor": self.prefactor,
            "factors": [{"a": a, "e": float(e)} for a, e in self.factors],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SymbolSpec":
        unknown = set(data) - {"prefactor", "factors"}
        if unknown:
            raise ValidationError(f"unknown symbol keys: {sorted(unknown)}")
        return cls(data.get("prefactor", 1.0), tuple(data.get("factors", ())))


IDENTITY = SymbolSpec()


@dataclass(frozen=True, eq=False)
class TabulatedSymbol:
    """Symbol known only at the wavenumbers of one grid (``rfft`` layout)."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != self.grid.xi.shape:
            raise ValidationError("tabulated symbol has the wrong length")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)


Symbol = Union[SymbolSpec, TabulatedSymbol]


def symbol_eval(spec: SymbolSpec, xi):
    """Evaluate ``spec`` at ``xi`` (scalar or array)."""
    out = spec(xi)
    return float(out) if np.ndim(out) == 0 else out


def symbol_mul(s1: SymbolSpec, s2: SymbolSpec) -> SymbolSpec:
    return SymbolSpec(s1.prefactor * s2.prefactor, s1.factors + s2.factors)


def symbol_pow(s: SymbolSpec, q) -> SymbolSpec:
    qf = _as_fraction(q)
    return SymbolSpec(s.prefactor ** float(qf), tuple((a, e * qf) for a, e in s.factors))


def _ratio_to_order(spec: SymbolSpec, xi) -> np.ndarray:
    xi2 = np.square(np.asarray(xi, dtype=float))
    out = np.full(np.shape(xi2), spec.prefactor)
    for a, e in spec.factors:
        out = out * ((1.0 + a * xi2) / (1.0 + xi2)) ** float(e)
    return out


def _sample_points(spec: SymbolSpec, n_samples: int) -> np.ndarray:
    scales = [1.0] + [1.0 / np.sqrt(a) for a, _ in spec.factors]
    lo, hi = min(scales) * 1e-4, max(scales) * 1e4
    return np.concatenate([[0.0], np.geomspace(lo, hi, n_samples)])


def _refined_extremum(f, xi: np.ndarray, values: np.ndarray, sign: float):
    """Polish the best sample of ``sign * f`` with a bounded 1-d search in log(xi)."""
    k = int(np.argmin(sign * values))
    best = sign * values[k]
    if 0 < k < len(xi) - 1:
        lo, hi = np.log(max(xi[k - 1], 1e-300)), np.log(xi[k + 1])
        res = minimize_scalar(
            lambda s: sign * float(f(np.exp(s))),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-12},
        )
        best = min(best, float(res.fun))
    return sign * best


def coercivity_constants(spec: SymbolSpec, n_samples: int = 10_000):
    """Best constants ``(low, high)`` with ``low <= s(xi) (1+xi^2)^(-order/2) <= high``.

    The ratio is sampled on a log-spaced grid covering every length scale
    ``1/sqrt(a_j)`` of the symbol, the two limits ``xi -> 0`` and
    ``|xi| -> inf`` are added, and the best samples are polished by a bounded
    scalar search.
    """
    xi = _sample_points(spec, n_samples)
    values = _ratio_to_order(spec, xi)
    f = lambda t: _ratio_to_order(spec, t)
    at_inf = spec.limit_at_infinity_ratio()
    low = min(_refined_extremum(f, xi, values, 1.0), at_inf, spec.prefactor)
    high = max(_refined_extremum(f, xi, values, -1.0), at_inf, spec.prefactor)
    return float(low), float(high)


def symbol_infimum(spec: SymbolSpec, n_samples: int = 10_000) -> float:
    """Infimum of ``spec`` itself over the real line."""
    xi = _sample_points(spec, n_samples)
    values = spec(xi)
    candidates = [_refined_extremum(spec, xi, values, 1.0), spec.prefactor]
    if spec.order_exact < 0:
        candidates.append(0.0)
    elif spec.order_exact == 0:
        candidates.append(spec.limit_at_infinity_ratio())
    return float(min(candidates))


def symbol_shift_sub(spec: SymbolSpec, kappa: float, grid: Grid) -> TabulatedSymbol:
    """Tabulate ``spec(xi) - kappa`` on ``grid``; requires ``kappa < inf spec``."""
    inf = symbol_infimum(spec)
    if not kappa < inf:
        raise ValidationError(
            f"shift kappa={kappa} is not below the symbol infimum {inf}; "
            "the shifted symbol would not stay positive"
        )
    return TabulatedSymbol(grid, spec(grid.xi) - kappa)


@lru_cache(maxsize=256)
def _tabulate(spec: SymbolSpec, grid: Grid) -> np.ndarray:
    v = spec(grid.xi)
    v.flags.writeable = False
    return v


def symbol_on_grid(s: Symbol, grid: Grid) -> np.ndarray:
    """Values of a symbol at the ``rfft`` wavenumbers of ``grid``."""
    if isinstance(s, TabulatedSymbol):
        if s.grid != grid:
            raise GridMismatchError("tabulated symbol belongs to another grid")
        return s.values
    return _tabulate(s, grid)


def apply_multiplier(f: GridFunction, s: Symbol) -> GridFunction:
    """Apply the Fourier multiplier with symbol ``s`` to ``f``."""
    return GridFunction.from_spectrum(f.grid, symbol_on_grid(s, f.grid) * f.spectrum)


def derivative(f: GridFunction, order: int = 1) -> GridFunction:
    """Spectral derivative, one factor ``i xi`` at a time (Nyquist zeroed)."""
    spec = f.spectrum * (1j * f.grid.xi_deriv) ** order
    return GridFunction.from_spectrum(f.grid, spec)


def shift(f: GridFunction, y: float) -> GridFunction:
    """Periodic translate ``f(x - y)`` via the Fourier shift theorem."""
    phase = np.exp(-1j * f.grid.xi * y)
    return GridFunction.from_spectrum(f.grid, f.spectrum * phase)


def sobolev_norm(f: GridFunction, s: float) -> float:
    """``H^s`` norm with weight ``(1 + xi^2)^s`` on the periodic box."""
    w = f.grid.parseval_weights * (1.0 + f.grid.xi**2) ** s
    return float(np.sqrt(np.sum(w * np.abs(f.spectrum) ** 2)))


def lp_norm(f: GridFunction, q: float) -> float:
    if q < 1:
        raise ValidationError(f"L^q norm needs q >= 1, got {q}")
    return float((np.sum(np.abs(f.values) ** q) * f.grid.spacing) ** (1.0 / q))


def tail_mass(f: GridFunction) -> float:
    """Fraction of the L2 mass lying outside the central half of the box."""
    total = np.sum(f.values**2)
    if total == 0:
        return 0.0
    outside = np.abs(f.grid.x) >= 0.25 * f.grid.length
    return float(np.sum(f.values[outside] ** 2) / total)


def spectral_inner(fh: np.ndarray, gh: np.ndarray, grid: Grid, weight=None) -> float:
    """``<f, W g>`` from ``rfft`` coefficients, ``W`` an optional real symbol array."""
    prod = (fh * np.conj(gh)).real * grid.parseval_weights
    if weight is not None:
        prod = prod * weight
    return float(np.sum(prod))


def check_same_grid(*fs: Iterable[GridFunction]):
    grids = {id(f.grid): f.grid for f in fs}
    first = next(iter(grids.values()))
    for g in grids.values():
        if g != first:
            raise GridMismatchError("grid functions live on different grids")
    return first


def dealias_factor(p: float, dealias="auto"):
    """Zero-padding factor for the pointwise power ``|u|^(p-1) u``.

    ``"auto"`` pads by ``(p+1)/2`` for integer ``p`` in 2..5, the smallest
    factor keeping a degree-``p`` product of band-limited modes free of
    aliasing (``3/2`` for ``p = 2``); other ``p`` use plain collocation.
    ``False``/``None`` disables padding, a number forces that factor.
    """
    if dealias is None or dealias is False:
        return None
    if dealias == "auto" or dealias is True:
        if float(p).is_integer() and 2 <= p <= 5:
            return (p + 1) / 2
        return None
    factor = float(dealias)
    if factor < 1:
        raise ValidationError(f"dealias factor must be >= 1, got {dealias}")
    return factor if factor > 1 else None


def power_nonlinearity_hat(fh: np.ndarray, n: int, p: float, pad=None) -> np.ndarray:
    """``rfft`` of ``|f|^(p-1) f`` given the ``rfft`` coefficients of ``f``.

    With ``pad`` the product is formed on a grid ``pad`` times finer and
    truncated back; the Nyquist modes are zeroed in that case.
    """
    if pad is None:
        f = np.fft.irfft(fh, n=n)
        return np.fft.rfft(np.abs(f) ** (p - 1) * f)
    m = int(np.ceil(pad * n / 2.0)) * 2
    big = np.zeros(m // 2 + 1, dtype=complex)
    big[: n // 2] = fh[: n // 2]
    f = np.fft.irfft(big, n=m) * (m / n)
    gh = np.fft.rfft(np.abs(f) ** (p - 1) * f)[: n // 2 + 1] * (n / m)
    gh[-1] = 0.0
    return gh


def interpolate(f: GridFunction, x, deriv: int = 0) -> np.ndarray:
    """Evaluate the trigonometric interpolant of ``f`` (or a derivative) at ``x``."""
    grid = f.grid
    x = np.atleast_1d(np.asarray(x, dtype=float))
    weights = np.full(grid.n // 2 + 1, 2.0 / grid.n)
    weights[0] = weights[-1] = 1.0 / grid.n
    coeff = weights * f.spectrum * (1j * grid.xi) ** deriv
    phase = np.exp(1j * np.outer(x - grid.x[0], grid.xi))
    return (phase @ coeff).real
