from contextlib import ExitStack as DoesNotRaise

import numpy as np
import pytest
from scipy.linalg import eigh_tridiagonal

from gpps.config import ITERATIONS_HEADER
from gpps.grid.core import Grid, Wavefunction, make_grid
from gpps.ground_state.gradient_flow import FlowOutcome, minimize_gradient_flow
from gpps.models.core import ModelKind
from gpps.utils.internal import ConvergenceError, GPPSWarnings
from test.test_utils import mock_params, random_band_limited

CB = 5.8504


def _perturbed_gaussian(grid: Grid, seed: int) -> Wavefunction:
    noise = random_band_limited(grid, seed=seed, fraction=0.2)
    noise /= np.max(np.abs(noise))
    values = np.exp(-0.5 * grid.radius_squared / 1.3**2) * (1.0 + 0.5 * noise)
    return Wavefunction(grid=grid, values=values).normalized()


def _radial_limit_2d_profile(
    coupling: float, radius: float = 8.0, step: float = 0.005
) -> tuple:
    """
    Self-consistent finite-difference ground state of
    `-(phi'' + phi'/r) / 2 + r^2 phi / 2 + g phi^3 = mu phi`, unit mass in 2D.
    """
    r = (np.arange(int(round(radius / step))) + 0.5) * step
    faces = np.arange(1, r.size + 1) * step
    off_diagonal = -0.5 * faces[:-1] / (np.sqrt(r[:-1] * r[1:]) * step**2)
    kinetic = np.full(r.size, 1.0 / step**2)
    density = np.exp(-(r**2)) / np.pi
    for _ in range(500):
        diagonal = kinetic + 0.5 * r**2 + coupling * density
        _, vectors = eigh_tridiagonal(
            diagonal, off_diagonal, select="i", select_range=(0, 0)
        )
        phi = vectors[:, 0] / np.sqrt(r)
        phi /= np.sqrt(2.0 * np.pi * step * np.sum(r * phi**2))
        phi *= np.sign(phi[0])
        updated = 0.5 * density + 0.5 * phi**2
        if np.max(np.abs(updated - density)) < 1e-14:
            break
        density = updated
    return r, phi


@pytest.mark.parametrize("dim, expected", [(2, 1.0), (1, 0.5)])
def test_minimize_gradient_flow_harmonic(dim: int, expected: float) -> None:
    grid = make_grid(dim=dim, extents=8.0, points=128)
    kind = ModelKind.LIMIT_2D if dim == 2 else ModelKind.LIMIT_1D
    params = mock_params(kind)
    result = minimize_gradient_flow(params, Wavefunction.gaussian(grid, width=1.5))

    assert result.outcome == FlowOutcome.CONVERGED
    assert result.converged
    assert result.energy.total == pytest.approx(expected, abs=1e-6)
    assert result.chemical_potential == pytest.approx(expected, abs=1e-6)
    assert result.residual < 1e-7
    exact = np.pi ** (-dim / 4.0) * np.exp(-0.5 * grid.radius_squared)
    assert np.max(np.abs(result.state.values - exact)) < 1e-6


def test_minimize_gradient_flow_energy_is_monotone() -> None:
    grid = make_grid(dim=2, extents=8.0, points=64)
    params = mock_params(ModelKind.QUASI_2D_I, beta=2.0, lam=1.0, eps=0.5)
    result = minimize_gradient_flow(params, _perturbed_gaussian(grid, seed=3))

    history = result.energy_history
    assert history.size == result.iterations >= 100
    trailing = history[history.size // 10 :]
    slack = 1e-12 * max(1.0, abs(result.energy.total))
    assert np.all(np.diff(trailing) <= slack)
    assert list(result.log[0]) == ITERATIONS_HEADER


def test_minimize_gradient_flow_positive_ground_state_is_unique() -> None:
    grid = make_grid(dim=2, extents=8.0, points=64)
    params = mock_params(ModelKind.QUASI_2D_I, beta=2.0, lam=1.0, eps=0.5)
    first = minimize_gradient_flow(params, _perturbed_gaussian(grid, seed=1))
    second = minimize_gradient_flow(params, _perturbed_gaussian(grid, seed=2))

    assert np.max(np.abs(first.state.values - second.state.values)) < 1e-6
    assert np.all(first.state.values.real >= -1e-10)
    assert first.energy.total == pytest.approx(second.energy.total, abs=1e-10)


def test_minimize_gradient_flow_is_phase_invariant() -> None:
    grid = make_grid(dim=2, extents=8.0, points=64)
    params = mock_params(ModelKind.QUASI_2D_I, beta=2.0, lam=1.0, eps=0.5)
    init = _perturbed_gaussian(grid, seed=4)
    plain = minimize_gradient_flow(params, init)
    rotated = minimize_gradient_flow(
        params, init.with_values(np.exp(0.7j) * init.values)
    )

    assert np.max(
        np.abs(np.abs(plain.state.values) - np.abs(rotated.state.values))
    ) < 1e-6


def test_minimize_gradient_flow_matches_radial_solver() -> None:
    grid = make_grid(dim=2, extents=8.0, points=64)
    params = mock_params(ModelKind.LIMIT_2D, beta=1.0)
    result = minimize_gradient_flow(params, Wavefunction.gaussian(grid))

    r, profile = _radial_limit_2d_profile(params.local_coefficient)
    center = grid.shape[1] // 2
    x = grid.axes[0][center:]
    along_axis = result.state.values.real[center:, center]
    np.testing.assert_allclose(along_axis, np.interp(x, r, profile), atol=1e-4)


def test_minimize_gradient_flow_reports_collapse() -> None:
    grid = make_grid(dim=2, extents=8.0, points=64)
    params = mock_params(ModelKind.LIMIT_2D, beta=-3.0 * CB * np.sqrt(2.0 * np.pi))
    with pytest.warns(GPPSWarnings):
        result = minimize_gradient_flow(params, Wavefunction.gaussian(grid), c_b=CB)

    assert result.outcome == FlowOutcome.NONEXISTENCE_SUSPECTED
    assert not result.converged
    assert result.energy.total < 0
    assert result.state.mass == pytest.approx(1.0, rel=1e-10)


def test_minimize_gradient_flow_iteration_cap() -> None:
    grid = make_grid(dim=1, extents=8.0, points=64)
    params = mock_params(ModelKind.LIMIT_1D)
    with pytest.raises(ConvergenceError):
        minimize_gradient_flow(
            params, Wavefunction.gaussian(grid, width=2.0), max_iterations=3
        )


@pytest.mark.parametrize(
    "dim, mass, tau, exception",
    [
        (1, 1.0, None, DoesNotRaise()),
        (1, 1.1, None, pytest.raises(ValueError)),
        (2, 1.0, None, pytest.raises(ValueError)),
        (1, 1.0, -0.1, pytest.raises(ValueError)),
    ],
)
def test_minimize_gradient_flow_validation(
    dim: int, mass: float, tau, exception: Exception
) -> None:
    grid = make_grid(dim=dim, extents=8.0, points=64)
    params = mock_params(ModelKind.LIMIT_1D, beta=1.0)
    init = Wavefunction.gaussian(grid)
    init = init.with_values(np.sqrt(mass) * init.values)
    with exception:
        minimize_gradient_flow(params, init, tau=tau, max_iterations=50000)
