"""Pseudo-spectral laboratory for nonlocal nonlinear wave equations.

The model is ``u_tt - L u_xx = B(g(u))_xx`` with Fourier multipliers ``L``
and ``B`` and power nonlinearity ``g(u) = sigma |u|^(p-1) u`` on a periodic
grid.  The package computes traveling waves, the scalar function ``d(c)``
and its convexity, and evolves perturbed waves to probe orbital stability
and finite-time blow-up.
"""

__version__ = "0.1.0"

from .evolution import Trajectory, evolve
from .exceptions import (
    ConvergenceError,
    GridMismatchError,
    InadmissibleVelocityError,
    NumericalError,
    ValidationError,
)
from .functionals import (
    SystemState,
    dee_from_wave,
    energy,
    functional_Ic,
    functional_Q,
    m1_from_wave,
    momentum,
    sigma_minus_check,
    x_norm,
)
from .model import PDEModel, boussinesq, double_dispersion, improved_boussinesq, klein_gordon
from .spectral import Grid, GridFunction, SymbolSpec, make_grid
from .stability import (
    Perturbation,
    blowup_experiment,
    dc_curve,
    orbital_distance,
    stability_experiment,
    threshold_boussinesq,
    threshold_klein_gordon,
)
from .waves import (
    ConstrainedMinimizer,
    PetviashviliSolver,
    TravelingWave,
    exact_boussinesq_wave,
    exact_double_dispersion_wave,
    exact_improved_boussinesq_wave,
    minimize_m1,
    solve_wave_fixed_point,
)

__all__ = [
    "__version__",
    "blowup_experiment",
    "boussinesq",
    "ConstrainedMinimizer",
    "ConvergenceError",
    "dc_curve",
    "dee_from_wave",
    "double_dispersion",
    "energy",
    "evolve",
    "exact_boussinesq_wave",
    "exact_double_dispersion_wave",
    "exact_improved_boussinesq_wave",
    "functional_Ic",
    "functional_Q",
    "Grid",
    "GridFunction",
    "GridMismatchError",
    "improved_boussinesq",
    "InadmissibleVelocityError",
    "klein_gordon",
    "m1_from_wave",
    "make_grid",
    "minimize_m1",
    "momentum",
    "NumericalError",
    "orbital_distance",
    "PDEModel",
    "Perturbation",
    "PetviashviliSolver",
    "sigma_minus_check",
    "solve_wave_fixed_point",
    "stability_experiment",
    "SymbolSpec",
    "SystemState",
    "threshold_boussinesq",
    "threshold_klein_gordon",
    "Trajectory",
    "TravelingWave",
    "ValidationError",
    "x_norm",
]
