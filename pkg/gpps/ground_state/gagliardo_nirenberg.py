from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy import integrate as scipy_integrate

from gpps.config import (
    CB_DEFAULT_EXTENT,
    CB_DEFAULT_POINTS,
    CB_MAX_ITERATIONS,
    CB_SHOOTING_RADIUS,
    CB_TOLERANCE,
)
from gpps.grid.core import Grid, make_grid
from gpps.grid.spectral import dirichlet_integral, fftn, ifftn, integrate, laplacian
from gpps.utils.internal import ConvergenceError


@dataclass(frozen=True)
class GNConstant:
    """
    Estimate of the 2D Gagliardo-Nirenberg constant
    `C_b = inf |grad f|^2 |f|^2 / |f|_4^4`.

    Attributes:
        value (float): Reported constant.
        method (str): Estimators that produced it.
        accuracy (float): Relative disagreement between the estimators.
        descent (float): Quotient-descent value on the grid.
        shooting (float): Value from the radial ground-state profile.
    """

    value: float
    method: str
    accuracy: float
    descent: float
    shooting: float

    def __post_init__(self):
        if not self.value > 0:
            raise ValueError(f"C_b must be positive, {self.value} given.")

    @property
    def bracket(self) -> Tuple[float, float]:
        return min(self.descent, self.shooting), max(self.descent, self.shooting)


def gn_quotient(values: np.ndarray, grid: Grid) -> float:
    """
    `|grad f|^2 |f|^2 / |f|_4^4` of a field on a 2D grid.

    Example:
        ```python
        import numpy as np
        from gpps import make_grid
        from gpps.ground_state import gn_quotient

        grid = make_grid(dim=2, extents=10.0, points=128)
        gn_quotient(np.exp(-0.5 * grid.radius_squared), grid)
        # 6.2831... (2 pi)
        ```
    """
    if grid.dim != 2:
        raise ValueError(f"The quotient is defined on 2D grids, {grid.dim}D given.")
    density = np.abs(values) ** 2
    quartic = integrate(density**2, grid)
    if quartic <= 0:
        raise ValueError("The quotient is undefined for a zero field.")
    return dirichlet_integral(values, grid) * integrate(density, grid) / quartic


def _log_quotient_gradient(
    values: np.ndarray, grid: Grid
) -> Tuple[float, np.ndarray]:
    gradient_energy = dirichlet_integral(values, grid)
    mass = integrate(values**2, grid)
    quartic = integrate(values**4, grid)
    log_value = np.log(gradient_energy) + np.log(mass) - np.log(quartic)
    gradient = (
        -2.0 * laplacian(values, grid) / gradient_energy
        + 2.0 * values / mass
        - 4.0 * values**3 / quartic
    )
    return float(log_value), gradient


def _sobolev_precondition(gradient: np.ndarray, grid: Grid) -> np.ndarray:
    return np.real(ifftn(fftn(gradient) / (1.0 + grid.k_squared)))


def quotient_descent(
    grid: Grid,
    tol: float = 1e-9,
    max_iterations: int = CB_MAX_ITERATIONS,
) -> float:
    """
    Minimize the scale-invariant quotient by preconditioned gradient descent
    from a Gaussian, with an Armijo line search on `log J`.

    Args:
        grid (Grid): 2D grid wide enough for an `exp(-|x|)` tail.
        tol (float): Stop when the preconditioned gradient norm drops below it.
        max_iterations (int): Iteration cap.

    Returns:
        float: Smallest quotient reached.

    Raises:
        ConvergenceError: When the cap is hit before convergence.
    """
    values = np.exp(-0.5 * grid.radius_squared)
    values /= np.sqrt(integrate(values**2, grid))
    log_value, gradient = _log_quotient_gradient(values, grid)
    step = 1.0
    for _ in range(max_iterations):
        direction = _sobolev_precondition(gradient, grid)
        slope = integrate(gradient * direction, grid)
        if np.sqrt(max(slope, 0.0)) < tol:
            return float(np.exp(log_value))
        while True:
            trial = values - step * direction
            trial /= np.sqrt(integrate(trial**2, grid))
            trial_log, trial_gradient = _log_quotient_gradient(trial, grid)
            if trial_log <= log_value - 1e-4 * step * slope:
                break
            step *= 0.5
            if step < 1e-14:
                # no representable descent left
                return float(np.exp(log_value))
        values, log_value, gradient = trial, trial_log, trial_gradient
        step *= 1.5
    raise ConvergenceError(
        f"Quotient descent did not converge in {max_iterations} iterations."
    )


def _radial_rhs(r: float, y: np.ndarray) -> np.ndarray:
    q, dq = y
    return np.array([dq, -dq / r + q - q**3])


def _overshoot(r: float, y: np.ndarray) -> float:
    return y[0]


_overshoot.terminal = True
_overshoot.direction = -1


def _undershoot(r: float, y: np.ndarray) -> float:
    return y[1]


_undershoot.terminal = True
_undershoot.direction = 1


def _shoot(amplitude: float, radius: float):
    r0 = 1e-6
    start = [amplitude, 0.5 * (amplitude - amplitude**3) * r0]
    return scipy_integrate.solve_ivp(
        _radial_rhs,
        (r0, radius),
        start,
        method="DOP853",
        events=(_overshoot, _undershoot),
        dense_output=True,
        rtol=1e-12,
        atol=1e-14,
    )


def radial_ground_state(
    radius: float = CB_SHOOTING_RADIUS, bracket: Tuple[float, float] = (1.5, 3.0)
):
    """
    Positive radial solution of `Q'' + Q'/r - Q + Q^3 = 0` by bisection on
    `Q(0)`: overshooting amplitudes cross zero, undershooting ones turn back up.

    Returns:
        Tuple[float, OdeResult]: `Q(0)` and the accepted trajectory.
    """
    low, high = bracket
    solution = None
    for _ in range(200):
        amplitude = 0.5 * (low + high)
        solution = _shoot(amplitude, radius)
        if solution.t_events[0].size > 0:
            high = amplitude
        elif solution.t_events[1].size > 0:
            low = amplitude
        else:
            return amplitude, solution
        if high - low < 1e-14:
            return amplitude, solution
    raise ConvergenceError("Radial shooting did not bracket the ground state.")


def shooting_estimate(radius: float = CB_SHOOTING_RADIUS) -> float:
    """Quotient of the radial ground state, `|Q|_2^2 / 2` in exact arithmetic."""
    _, solution = radial_ground_state(radius)
    r = np.linspace(solution.t[0], solution.t[-1], 40001)
    q, dq = solution.sol(r)
    weight = 2.0 * np.pi * r
    mass = scipy_integrate.simpson(weight * q**2, x=r)
    gradient_energy = scipy_integrate.simpson(weight * dq**2, x=r)
    quartic = scipy_integrate.simpson(weight * q**4, x=r)
    return float(gradient_energy * mass / quartic)


def estimate_cb(
    grid: Optional[Grid] = None,
    tol: float = CB_TOLERANCE,
    max_iterations: int = CB_MAX_ITERATIONS,
) -> GNConstant:
    """
    Estimate `C_b` with two independent methods and cross-check them.

    Args:
        grid (Optional[Grid]): 2D grid for the quotient descent; defaults to
            `[-16, 16)^2` with 256 nodes per axis.
        tol (float): Allowed relative disagreement between the estimators.
        max_iterations (int): Cap for the quotient descent.

    Returns:
        GNConstant: The shooting value with the descent value as cross-check.

    Raises:
        ConvergenceError: When an estimator fails or they disagree beyond `tol`.

    Example:
        ```python
        from gpps import make_grid
        from gpps.ground_state import estimate_cb

        estimate_cb(make_grid(dim=2, extents=16.0, points=128)).value
        # 5.8503...
        ```
    """
    if grid is None:
        grid = make_grid(dim=2, extents=CB_DEFAULT_EXTENT, points=CB_DEFAULT_POINTS)
    if grid.dim != 2:
        raise ValueError(f"C_b is estimated on a 2D grid, {grid.dim}D given.")
    descent = quotient_descent(grid, max_iterations=max_iterations)
    shooting = shooting_estimate()
    accuracy = abs(descent - shooting) / shooting
    if accuracy > tol:
        raise ConvergenceError(
            f"C_b estimators disagree: descent {descent}, shooting {shooting}."
        )
    return GNConstant(
        value=shooting,
        method="shooting+quotient_descent",
        accuracy=accuracy,
        descent=descent,
        shooting=shooting,
    )


@lru_cache(maxsize=1)
def default_cb() -> GNConstant:
    return estimate_cb()
