from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from tqdm.auto import tqdm

from gpps.config import (
    INITIAL_MASS_TOLERANCE,
    REDUCTION_HEADER,
    SPECTRAL_TAIL_TOLERANCE,
    TRANSVERSE_DT_FACTOR,
)
from gpps.dynamics.core import evolve
from gpps.grid.core import Grid, Wavefunction
from gpps.grid.spectral import fftn, gradient_spectral, ifftn, spectral_tail_fraction
from gpps.kernels.core import KernelSymbol
from gpps.models.core import ModelParams
from gpps.reduction.transverse import TransverseCase, TransverseMode, transverse_mode
from gpps.utils.internal import NumericalAlarm, ResolutionAlarm

_TIME_TOLERANCE = 1e-9


@dataclass
class Trajectory:
    """
    States sampled at increasing times.

    Attributes:
        times (List[float]): Sample times.
        states (List[Wavefunction]): State at each sample time.
        eps (Optional[float]): Confinement parameter of a rescaled 3D run.
        mode (Optional[TransverseMode]): Transverse mode of a rescaled 3D run.
    """

    times: List[float] = field(default_factory=list)
    states: List[Wavefunction] = field(default_factory=list)
    eps: Optional[float] = None
    mode: Optional[TransverseMode] = None

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValueError(
                f"Got {len(self.times)} times for {len(self.states)} states."
            )

    def __len__(self) -> int:
        return len(self.times)

    def append(self, t: float, psi: Wavefunction) -> None:
        if self.times and t <= self.times[-1]:
            raise ValueError(
                f"Sample times must increase, {t} given after {self.times[-1]}."
            )
        self.times.append(float(t))
        self.states.append(psi)


def _sample_steps(times: Sequence[float], dt: float, T: float) -> List[int]:
    steps = []
    for t in times:
        count = t / dt
        if t < 0 or t > T * (1.0 + _TIME_TOLERANCE):
            raise ValueError(f"Sample time {t} lies outside [0, {T}].")
        if abs(count - round(count)) > _TIME_TOLERANCE * max(1.0, count):
            raise ValueError(f"Sample time {t} is not a multiple of dt = {dt}.")
        steps.append(int(round(count)))
    if any(b <= a for a, b in zip(steps, steps[1:])):
        raise ValueError(f"Sample times must be strictly increasing, {times} given.")
    return steps


def _check_unit_mass(phi0: Wavefunction) -> None:
    if abs(phi0.mass - 1.0) > INITIAL_MASS_TOLERANCE:
        raise ValueError(f"Initial state must have unit mass, {phi0.mass} given.")


def rescaled_grid(longitudinal: Grid, mode: TransverseMode) -> Grid:
    """3D grid with the confined axes of `mode` placed as in `TransverseCase`."""
    axis = mode.basis.grid
    if mode.case == TransverseCase.PANCAKE:
        return Grid(
            extents=longitudinal.extents + axis.extents,
            points=longitudinal.points + axis.points,
        )
    return Grid(
        extents=axis.extents * 2 + longitudinal.extents,
        points=axis.points * 2 + longitudinal.points,
    )


def _expand(longitudinal: np.ndarray, mode: TransverseMode) -> np.ndarray:
    """Tensor product of a longitudinal field with the transverse ground mode."""
    w = mode.mode_function
    if mode.case == TransverseCase.PANCAKE:
        return longitudinal[:, :, None] * w[None, None, :]
    return w[:, :, None] * longitudinal[None, None, :]


class RescaledStepper:
    """
    Strang step for the rescaled 3D problem
    `i d_t psi = [H_long + eps^-2 H_trans + (beta - lam) |psi|^2
    + 3 lam m_eps(D) |psi|^2] psi`, where `H_long` carries the trap of the
    longitudinal axes and `m_eps` is the rescaled projection symbol. The linear
    part is exact: Fourier phases along the longitudinal axes and the discrete
    oscillator propagator `exp(-i dt H_trans / eps^2)` along each confined axis.
    On the slice where all confined wavenumbers vanish, `m_eps` is replaced by
    its mean over the origin cell, see `rescaled_projection_table`.
    """

    def __init__(
        self,
        params: ModelParams,
        grid: Grid,
        mode: TransverseMode,
        eps: float,
        dt: float,
    ):
        case = mode.case
        self.params = params
        self.grid = grid
        self.mode = mode
        self.dt = float(dt)
        longitudinal = grid.sub_grid(case.longitudinal_axes)
        trap = params.potential.evaluate(longitudinal)
        k_squared = longitudinal.k_squared
        if case == TransverseCase.PANCAKE:
            self._trap = trap[:, :, None]
            self._kinetic_phase = np.exp(-0.5j * self.dt * k_squared)[:, :, None]
        else:
            self._trap = trap[None, None, :]
            self._kinetic_phase = np.exp(-0.5j * self.dt * k_squared)[None, None, :]
        self._transverse = mode.basis.propagator(self.dt / eps**2)
        self._last_output: Optional[np.ndarray] = None
        self._last_potential: Optional[np.ndarray] = None
        self._kernel: Optional[KernelSymbol] = None
        if params.lam != 0:
            self._kernel = KernelSymbol.rescaled_dipolar_3d(
                grid, params.axis, eps, case.confined_axes
            )

    def potential(self, values: np.ndarray) -> np.ndarray:
        rho = np.abs(values) ** 2
        total = self._trap + (self.params.beta - self.params.lam) * rho
        if self._kernel is not None:
            total = total + 3.0 * self.params.lam * self._kernel.apply(rho)
        return total

    def _linear(self, values: np.ndarray) -> np.ndarray:
        axes = self.mode.case.longitudinal_axes
        values = ifftn(self._kinetic_phase * fftn(values, axes=axes), axes=axes)
        u = self._transverse
        if self.mode.case == TransverseCase.PANCAKE:
            return np.einsum("kj,xyj->xyk", u, values)
        values = np.einsum("ia,ayz->iyz", u, values)
        return np.einsum("jb,ibz->ijz", u, values)

    def step(self, values: np.ndarray) -> np.ndarray:
        if values is self._last_output:
            total = self._last_potential
        else:
            total = self.potential(values)
        values = self._linear(np.exp(-0.5j * self.dt * total) * values)
        total = self.potential(values)
        values = np.exp(-0.5j * self.dt * total) * values
        self._last_output, self._last_potential = values, total
        return values


def solve_rescaled_3d(
    params: ModelParams,
    phi0: Wavefunction,
    eps: float,
    T: float,
    dt: float,
    sample_times: Optional[Sequence[float]] = None,
    mode: Optional[TransverseMode] = None,
    show_progress: bool = False,
) -> Trajectory:
    """
    Evolve the rescaled 3D problem from `phi0 (x) w0` in the weak interaction
    regime.

    The longitudinal dimension of `phi0` selects the geometry: 2D for a
    pancake, 1D for a cigar. Only `beta`, `lam`, `axis` and `potential` of
    `params` are used; the potential acts on the longitudinal axes. Initial
    data always sit in the transverse ground mode.

    Args:
        params (ModelParams): O(1) weak-regime parameters.
        phi0 (Wavefunction): Unit-mass longitudinal initial state.
        eps (float): Confinement parameter, positive.
        T (float): Final time.
        dt (float): Time step, at most `eps^2 * TRANSVERSE_DT_FACTOR`.
        sample_times (Optional[Sequence[float]]): Multiples of `dt` in
            `[0, T]`; `(0, T)` by default.
        mode (Optional[TransverseMode]): Transverse mode, the default
            discretization when omitted.
        show_progress (bool): Show a progress bar.

    Returns:
        Trajectory: 3D states at the sample times with `eps` and `mode`.

    Raises:
        ResolutionAlarm: When `dt` violates the transverse step constraint or
            the spectral tail exceeds `SPECTRAL_TAIL_TOLERANCE` at a sample.
        NumericalAlarm: When the state stops being finite.
    """
    if not np.isfinite(eps) or eps <= 0:
        raise ValueError(f"eps must be positive, {eps} given.")
    if not np.isfinite(T) or T <= 0:
        raise ValueError(f"Final time must be positive, {T} given.")
    if not np.isfinite(dt) or dt <= 0:
        raise ValueError(f"Time step must be positive, {dt} given.")
    case = TransverseCase.from_dim(phi0.grid.dim)
    if mode is None:
        mode = transverse_mode(case)
    elif mode.case != case:
        raise ValueError(
            f"A {phi0.grid.dim}D initial state needs a {case.value} mode, "
            f"{mode.case.value} given."
        )
    _check_unit_mass(phi0)
    limit = TRANSVERSE_DT_FACTOR * eps**2
    if dt > limit * (1.0 + _TIME_TOLERANCE):
        raise ResolutionAlarm(
            f"dt = {dt} exceeds eps^2 * {TRANSVERSE_DT_FACTOR} = {limit:.3e}."
        )
    total_steps = int(round(T / dt))
    if abs(total_steps * dt - T) > _TIME_TOLERANCE * T:
        raise ValueError(f"T = {T} is not a multiple of dt = {dt}.")
    times = [0.0, T] if sample_times is None else list(sample_times)
    steps = _sample_steps(times, dt, T)

    grid = rescaled_grid(phi0.grid, mode)
    stepper = RescaledStepper(params, grid, mode, eps, dt)
    values = _expand(phi0.values, mode)
    trajectory = Trajectory(eps=float(eps), mode=mode)
    pending = dict(zip(steps, times))

    def sample(step: int) -> None:
        tail = spectral_tail_fraction(values, grid)
        if tail > SPECTRAL_TAIL_TOLERANCE:
            raise ResolutionAlarm(
                f"Spectral tail {tail:.3e} exceeds {SPECTRAL_TAIL_TOLERANCE:.0e} "
                f"at t = {step * dt:.6g} (eps = {eps})."
            )
        trajectory.append(pending.pop(step), Wavefunction(grid=grid, values=values))

    if 0 in pending:
        sample(0)
    last = max(steps)
    progress = tqdm(total=last, desc=f"eps={eps:g}", disable=not show_progress)
    with progress as bar:
        for step in range(1, last + 1):
            values = stepper.step(values)
            if not np.all(np.isfinite(values)):
                raise NumericalAlarm(
                    f"Rescaled 3D state became non-finite at t = {step * dt:.6g}."
                )
            bar.update(1)
            if step in pending:
                sample(step)
    return trajectory


def project_ground_mode(
    psi: Wavefunction, t: float, eps: float, mode: TransverseMode
) -> Wavefunction:
    """
    `phi^eps(x, t) = exp(i mu0 t / eps^2) int psi(x, z, t) w0(z) dz`.

    Args:
        psi (Wavefunction): State on the rescaled 3D grid.
        t (float): Time of `psi`.
        eps (float): Confinement parameter.
        mode (TransverseMode): Transverse mode of the run.

    Returns:
        Wavefunction: Longitudinal field.
    """
    grid = psi.grid
    if grid.dim != 3:
        raise ValueError(f"Projection needs a 3D state, {grid.dim}D given.")
    w = mode.mode_function
    weight = mode.grid.cell_volume
    if mode.case == TransverseCase.PANCAKE:
        projected = np.tensordot(psi.values, w, axes=([2], [0])) * weight
    else:
        projected = np.tensordot(w, psi.values, axes=([0, 1], [0, 1])) * weight
    phase = np.exp(1j * mode.eigenvalue * t / eps**2)
    longitudinal = grid.sub_grid(mode.case.longitudinal_axes)
    return Wavefunction(grid=longitudinal, values=phase * projected)


def limit_gpe(
    params: ModelParams,
    phi0: Wavefunction,
    case: TransverseCase,
    T: float,
    dt: float,
    sample_times: Optional[Sequence[float]] = None,
) -> Trajectory:
    """
    Evolve the eps-independent cubic limit of one geometry with `evolve`, using
    the `Limit2D` (pancake) or `Limit1D` (cigar) model kind on the same
    parameters.

    Args:
        params (ModelParams): O(1) weak-regime parameters.
        phi0 (Wavefunction): Unit-mass longitudinal initial state.
        case (TransverseCase): Confinement geometry.
        T (float): Final time.
        dt (float): Time step.
        sample_times (Optional[Sequence[float]]): Multiples of `dt` in
            `[0, T]`; `(0, T)` by default.

    Returns:
        Trajectory: Longitudinal states at the sample times.
    """
    if not isinstance(case, TransverseCase):
        case = TransverseCase(case)
    if phi0.grid.dim != len(case.longitudinal_axes):
        raise ValueError(
            f"{case.value} limit needs a {len(case.longitudinal_axes)}D state, "
            f"{phi0.grid.dim}D given."
        )
    limit_params = params.with_kind(case.limit_kind)
    times = [0.0, T] if sample_times is None else list(sample_times)
    _sample_steps(times, dt, T)
    result = evolve(limit_params, phi0, T, dt, snapshot_times=times)
    if result.alarm is not None:
        raise result.alarm
    trajectory = Trajectory()
    for t in times:
        trajectory.append(t, result.snapshots[float(t)])
    return trajectory


@dataclass
class ReductionErrors:
    """
    Error series of one rescaled run against the limit equation.

    Attributes:
        eps (float): Confinement parameter.
        t (np.ndarray): Sample times.
        total (np.ndarray): `|psi^eps - exp(-i mu0 t/eps^2) phi (x) w0|_2`.
        transverse (np.ndarray): Leakage `|psi^eps - P psi^eps|_2` out of the
            ground mode.
        transverse_gradient (np.ndarray): `|grad_trans (psi^eps - P psi^eps)|_2`.
        projected (np.ndarray): `|phi^eps - phi|_2`.
        gradient_norm (np.ndarray): `|grad psi^eps|_2`.
    """

    eps: float
    t: np.ndarray
    total: np.ndarray
    transverse: np.ndarray
    transverse_gradient: np.ndarray
    projected: np.ndarray
    gradient_norm: np.ndarray

    def rows(self) -> List[Dict[str, Any]]:
        columns = [getattr(self, name) for name in REDUCTION_HEADER]
        return [
            dict(zip(REDUCTION_HEADER, (float(c[i]) for c in columns)))
            for i in range(self.t.size)
        ]

    def at(self, t: float) -> Dict[str, Any]:
        """Row of the sample closest to `t`."""
        index = int(np.argmin(np.abs(self.t - t)))
        return self.rows()[index]


def _l2(values: np.ndarray, grid: Grid) -> float:
    return float(np.sqrt(np.sum(np.abs(values) ** 2) * grid.cell_volume))


def _gradient_norm(components: Sequence[np.ndarray], grid: Grid) -> float:
    return float(np.sqrt(sum(_l2(g, grid) ** 2 for g in components)))


def reduction_error(
    rescaled: Trajectory,
    limit: Trajectory,
    mode: Optional[TransverseMode] = None,
    times: Optional[Sequence[float]] = None,
) -> ReductionErrors:
    """
    Compare a rescaled 3D trajectory with the limit trajectory at shared times.

    Since `P psi = exp(-i mu0 t/eps^2) phi^eps (x) w0`, the total error splits
    orthogonally into the transverse leakage and the projected error.

    Args:
        rescaled (Trajectory): Output of `solve_rescaled_3d`.
        limit (Trajectory): Output of `limit_gpe`.
        mode (Optional[TransverseMode]): Defaults to `rescaled.mode`.
        times (Optional[Sequence[float]]): Subset of the shared times; all of
            them by default.

    Returns:
        ReductionErrors: One row per time.

    Raises:
        ValueError: When the trajectories do not share time stamps.
    """
    mode = mode or rescaled.mode
    eps = rescaled.eps
    if mode is None or eps is None:
        raise ValueError("The rescaled trajectory must carry its eps and mode.")
    if len(rescaled) != len(limit) or not np.allclose(
        rescaled.times, limit.times, rtol=0.0, atol=_TIME_TOLERANCE
    ):
        raise ValueError(
            f"Trajectories do not share time stamps: {rescaled.times} and "
            f"{limit.times}."
        )
    indices = range(len(rescaled))
    if times is not None:
        indices = []
        for t in times:
            match = np.flatnonzero(np.abs(np.asarray(rescaled.times) - t) <= 1e-9)
            if match.size == 0:
                raise ValueError(f"Time {t} is not a sample of both trajectories.")
            indices.append(int(match[0]))

    rows: Dict[str, List[float]] = {name: [] for name in REDUCTION_HEADER}
    for i in indices:
        t = rescaled.times[i]
        psi = rescaled.states[i]
        phi = limit.states[i]
        grid = psi.grid
        phase = np.exp(-1j * mode.eigenvalue * t / eps**2)
        projected = project_ground_mode(psi, t, eps, mode)
        remainder = psi.values - phase * _expand(projected.values, mode)
        leakage_gradient = gradient_spectral(remainder, grid)
        transverse_gradient = [leakage_gradient[a] for a in mode.case.confined_axes]
        gradient = gradient_spectral(psi.values, grid)

        rows["t"].append(t)
        rows["total"].append(_l2(psi.values - phase * _expand(phi.values, mode), grid))
        rows["transverse"].append(_l2(remainder, grid))
        rows["transverse_gradient"].append(_gradient_norm(transverse_gradient, grid))
        rows["projected"].append(_l2(projected.values - phi.values, phi.grid))
        rows["gradient_norm"].append(_gradient_norm(gradient, grid))
    return ReductionErrors(eps=float(eps), **{k: np.array(v) for k, v in rows.items()})
