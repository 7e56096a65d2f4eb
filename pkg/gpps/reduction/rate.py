from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from gpps.config import TRANSVERSE_DT_FACTOR
from gpps.grid.core import Wavefunction
from gpps.models.core import ModelParams
from gpps.reduction.core import (
    ReductionErrors,
    Trajectory,
    limit_gpe,
    reduction_error,
    solve_rescaled_3d,
)
from gpps.reduction.transverse import TransverseCase, TransverseMode, transverse_mode

MIN_RATE_SAMPLES = 3
MIN_RATE_SPAN = 4.0


def _check_ladder(eps: np.ndarray) -> None:
    if eps.ndim != 1 or eps.size < MIN_RATE_SAMPLES:
        raise ValueError(
            f"A rate fit needs at least {MIN_RATE_SAMPLES} eps values, "
            f"{eps.size} given."
        )
    if np.any(~np.isfinite(eps)) or np.any(eps <= 0):
        raise ValueError(f"eps values must be positive, {eps.tolist()} given.")
    if len(np.unique(eps)) != eps.size:
        raise ValueError(f"eps values must be distinct, {eps.tolist()} given.")
    if np.max(eps) / np.min(eps) < MIN_RATE_SPAN * (1.0 - 1e-12):
        raise ValueError(
            f"eps values must span a factor of at least {MIN_RATE_SPAN}, "
            f"{eps.tolist()} given."
        )


def fit_rate(eps: Sequence[float], errors: Sequence[float]) -> Tuple[float, float]:
    """
    Least-squares slope of `log(error)` against `log(eps)`.

    Args:
        eps (Sequence[float]): At least 3 distinct positive values spanning a
            factor of 4.
        errors (Sequence[float]): Positive finite error per eps.

    Returns:
        Tuple[float, float]: Slope and root-mean-square residual of the fit
            in log space.

    Example:
        ```python
        from gpps.reduction import fit_rate

        fit_rate([0.25, 0.125, 0.0625], [0.1, 0.05, 0.025])
        # (1.0, 0.0)
        ```
    """
    eps = np.asarray(eps, dtype=float)
    errors = np.asarray(errors, dtype=float)
    _check_ladder(eps)
    if errors.shape != eps.shape:
        raise ValueError(f"Expected {eps.size} errors, {errors.size} given.")
    if np.any(~np.isfinite(errors)) or np.any(errors <= 0):
        raise ValueError(
            f"Errors must be positive and finite, {errors.tolist()} given."
        )
    x, y = np.log(eps), np.log(errors)
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return float(slope), residual


@dataclass
class RateFit:
    """
    Convergence-rate fits of an error table, one per sample time.

    Attributes:
        eps (np.ndarray): Confinement parameters.
        times (np.ndarray): Sample times.
        errors (np.ndarray): Errors with shape `(len(eps), len(times))`.
        slopes (np.ndarray): Fitted slope per time.
        residuals (np.ndarray): Fit residual per time.
    """

    eps: np.ndarray
    times: np.ndarray
    errors: np.ndarray
    slopes: np.ndarray
    residuals: np.ndarray

    @classmethod
    def from_errors(
        cls, eps: Sequence[float], times: Sequence[float], errors: np.ndarray
    ) -> RateFit:
        eps = np.asarray(eps, dtype=float)
        times = np.asarray(times, dtype=float)
        errors = np.asarray(errors, dtype=float)
        if errors.shape != (eps.size, times.size):
            raise ValueError(
                f"Error table must have shape {(eps.size, times.size)}, "
                f"{errors.shape} given."
            )
        fits = [fit_rate(eps, errors[:, j]) for j in range(times.size)]
        return cls(
            eps=eps,
            times=times,
            errors=errors,
            slopes=np.array([slope for slope, _ in fits]),
            residuals=np.array([residual for _, residual in fits]),
        )

    def as_dict(self) -> Dict[str, List]:
        return {
            "eps": self.eps.tolist(),
            "times": self.times.tolist(),
            "errors": self.errors.tolist(),
            "slopes": self.slopes.tolist(),
            "residuals": self.residuals.tolist(),
        }


@dataclass
class ReductionStudy:
    """
    Outcome of `reduction_study`.

    Attributes:
        case (TransverseCase): Confinement geometry.
        limit (Trajectory): Limit-equation trajectory shared by every run.
        errors (Dict[float, ReductionErrors]): Error series per eps.
        fit (RateFit): Rate fit of the total error.
        transverse_fit (Optional[RateFit]): Rate fit of the transverse
            leakage, `None` when some leakage vanishes.
    """

    case: TransverseCase
    limit: Trajectory
    errors: Dict[float, ReductionErrors]
    fit: RateFit
    transverse_fit: Optional[RateFit] = None


def _commensurate_step(times: Sequence[float], T: float, dt_max: float) -> float:
    count = int(np.ceil(T / dt_max - 1e-9))
    for steps in range(count, 64 * count + 64):
        dt = T / steps
        if all(abs(t / dt - round(t / dt)) <= 1e-9 * max(1.0, t / dt) for t in times):
            return dt
    raise ValueError(f"No time step below {dt_max} divides the sample times {times}.")


def reduction_study(
    params: ModelParams,
    phi0: Wavefunction,
    eps_values: Sequence[float],
    T: float,
    dt: float,
    sample_times: Optional[Sequence[float]] = None,
    thread_workers: int = 1,
    mode: Optional[TransverseMode] = None,
    show_progress: bool = False,
) -> ReductionStudy:
    """
    Run the rescaled 3D problem for every eps, compare each run with the limit
    equation and fit the convergence rate at every sample time.

    Each run uses the largest step that is at most `dt` and
    `eps^2 * TRANSVERSE_DT_FACTOR` and divides every sample time. Runs are
    independent and fan out over a thread pool.

    Args:
        params (ModelParams): O(1) weak-regime parameters.
        phi0 (Wavefunction): Unit-mass longitudinal initial state, 2D for a
            pancake and 1D for a cigar.
        eps_values (Sequence[float]): At least 3 values spanning a factor of 4.
        T (float): Final time.
        dt (float): Upper bound of the time step, also used for the limit
            equation.
        sample_times (Optional[Sequence[float]]): Positive times in `(0, T]`;
            `(T/4, T/2, T)` by default.
        thread_workers (int): Worker threads.
        mode (Optional[TransverseMode]): Transverse discretization, the
            default one when omitted.
        show_progress (bool): Show a progress bar per run.

    Returns:
        ReductionStudy: Error series and rate fits.
    """
    eps_array = np.asarray(eps_values, dtype=float)
    _check_ladder(eps_array)
    if int(thread_workers) != thread_workers or thread_workers < 1:
        raise ValueError(
            f"thread_workers must be a positive integer, {thread_workers} given."
        )
    times = [0.25 * T, 0.5 * T, T] if sample_times is None else list(sample_times)
    if any(t <= 0 for t in times):
        raise ValueError(f"Sample times must be positive, {times} given.")
    case = TransverseCase.from_dim(phi0.grid.dim)
    if mode is None:
        mode = transverse_mode(case)
    elif mode.case != case:
        raise ValueError(
            f"A {phi0.grid.dim}D initial state needs a {case.value} mode, "
            f"{mode.case.value} given."
        )

    limit_dt = _commensurate_step(times, T, dt)
    limit = limit_gpe(params, phi0, case, T, limit_dt, sample_times=times)

    def run(eps: float) -> ReductionErrors:
        step = _commensurate_step(times, T, min(dt, TRANSVERSE_DT_FACTOR * eps**2))
        rescaled = solve_rescaled_3d(
            params,
            phi0,
            eps,
            T,
            step,
            sample_times=times,
            mode=mode,
            show_progress=show_progress,
        )
        return reduction_error(rescaled, limit)

    errors: Dict[float, ReductionErrors] = {}
    with ThreadPoolExecutor(max_workers=int(thread_workers)) as executor:
        futures = {executor.submit(run, float(eps)): float(eps) for eps in eps_array}
        for future in as_completed(futures):
            errors[futures[future]] = future.result()

    ordered = [errors[float(eps)] for eps in eps_array]
    fit = RateFit.from_errors(eps_array, times, np.array([e.total for e in ordered]))
    leakage = np.array([e.transverse for e in ordered])
    transverse_fit = None
    if np.all(leakage > 0):
        transverse_fit = RateFit.from_errors(eps_array, times, leakage)
    return ReductionStudy(
        case=case,
        limit=limit,
        errors={float(eps): errors[float(eps)] for eps in eps_array},
        fit=fit,
        transverse_fit=transverse_fit,
    )
