import numpy as np
import pytest

from nonlocal_wave_lab.model import boussinesq, klein_gordon
from nonlocal_wave_lab.spectral import GridFunction, make_grid


def smooth_random(grid, seed, n_modes=24, decay=0.3, zero_mean=False):
    """Random real trigonometric polynomial with Gaussian-decaying spectrum."""
    rng = np.random.default_rng(seed)
    k = np.arange(n_modes)
    amp = np.exp(-decay * k) * (rng.standard_normal(n_modes) + 1j * rng.standard_normal(n_modes))
    if zero_mean:
        amp[0] = 0.0
    xi0 = 2 * np.pi / grid.length
    x = grid.x - grid.x[0]
    values = sum((amp[j] * np.exp(1j * j * xi0 * x)).real for j in range(n_modes))
    return GridFunction(grid, values)


def random_bump(grid, seed):
    """Localized random profile: sum of a few Gaussians inside the central half."""
    rng = np.random.default_rng(seed)
    v = np.zeros(grid.n)
    for _ in range(rng.integers(1, 4)):
        x0 = rng.uniform(-grid.length / 8, grid.length / 8)
        width = rng.uniform(0.8, 3.0)
        v += rng.uniform(-2, 2) * np.exp(-(((grid.x - x0) / width) ** 2))
    return GridFunction(grid, v)


@pytest.fixture(scope="session")
def grid80():
    return make_grid(1024, 80.0)


@pytest.fixture(scope="session")
def grid_small():
    return make_grid(256, 40.0)


@pytest.fixture(scope="session")
def bq3():
    return boussinesq(3)


@pytest.fixture(scope="session")
def kg3():
    return klein_gordon(3)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def record_acceptance(number, title, checks, elapsed):
    """Store and print a PASS/FAIL line; return whether every check held."""
    failed = [name for name, ok in checks.items() if not ok]
    verdict = "FAIL" if failed else "PASS"
    line = f"criterion {number:>2} {verdict}  {title} ({elapsed:.1f} s)"
    if failed:
        line += "  failed: " + "; ".join(failed)
    ACCEPTANCE_LINES.append(line)
    print(line)
    return not failed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
