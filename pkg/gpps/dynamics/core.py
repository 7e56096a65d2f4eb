from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from tqdm.auto import tqdm

from gpps.config import (
    DEFAULT_RECORD_EVERY,
    INITIAL_MASS_TOLERANCE,
    OBSERVABLES_HEADER,
    PEAK_GROWTH_BLOWUP_FACTOR,
    SPECTRAL_TAIL_TOLERANCE,
)
from gpps.dynamics.virial import (
    variance,
    variance_diagnostics,
    variance_rate,
    virial_rhs,
)
from gpps.grid.core import Grid, Wavefunction
from gpps.grid.spectral import fftn, ifftn, spectral_tail_fraction
from gpps.models.core import EnergyBreakdown, ModelParams, energy, nonlocal_potential
from gpps.utils.internal import (
    BlowupSuspected,
    NumericalAlarm,
    ResolutionAlarm,
    warn,
)

_TIME_TOLERANCE = 1e-9


class StrangStepper:
    """
    Symmetric splitting step for `i d_t psi = -Laplacian psi / 2 + (V + W[psi]) psi`:
    half a step of the potential phase, a full kinetic step in Fourier space,
    and another potential half step with `W` recomputed. The potential phase
    leaves `|psi|^2` and hence `W` unchanged, so each sub-step is exact and
    every step preserves the mass up to round-off.

    The interaction of the last output is reused by the next step when the
    same array is passed back in.

    Attributes:
        params (ModelParams): Model parameters.
        grid (Grid): Grid of dimension `params.dim`.
        dt (float): Time step, positive.
    """

    def __init__(self, params: ModelParams, grid: Grid, dt: float):
        if grid.dim != params.dim:
            raise ValueError(
                f"{params.kind.value} needs a {params.dim}D grid, {grid.dim}D given."
            )
        if not np.isfinite(dt) or dt <= 0:
            raise ValueError(f"Time step must be positive, {dt} given.")
        self.params = params
        self.grid = grid
        self.dt = float(dt)
        self._trap = params.potential.evaluate(grid)
        self._kinetic_phase = np.exp(-0.5j * self.dt * grid.k_squared)
        self._last_output: Optional[np.ndarray] = None
        self._last_potential: Optional[np.ndarray] = None

    def potential(self, values: np.ndarray) -> np.ndarray:
        """`V + W` for the density of `values`."""
        rho = np.abs(values) ** 2
        interaction = self.params.local_coefficient * rho + nonlocal_potential(
            self.params, rho, self.grid
        )
        return self._trap + interaction

    def step(self, values: np.ndarray) -> np.ndarray:
        if values is self._last_output:
            total = self._last_potential
        else:
            total = self.potential(values)
        half = np.exp(-0.5j * self.dt * total)
        values = ifftn(self._kinetic_phase * fftn(half * values))
        total = self.potential(values)
        values = np.exp(-0.5j * self.dt * total) * values
        self._last_output, self._last_potential = values, total
        return values


def step_strang(params: ModelParams, psi: Wavefunction, dt: float) -> Wavefunction:
    """
    Advance a state by one Strang splitting step.

    Args:
        params (ModelParams): Model parameters.
        psi (Wavefunction): Current state.
        dt (float): Time step, positive.

    Returns:
        Wavefunction: State at `t + dt`.

    Raises:
        NumericalAlarm: When the step produced non-finite values.

    Example:
        ```python
        from gpps import ModelKind, ModelParams, Wavefunction, make_grid
        from gpps.dynamics import step_strang

        grid = make_grid(dim=1, extents=8.0, points=64)
        params = ModelParams(kind=ModelKind.LIMIT_1D, beta=1.0, lam=0.0)
        psi = step_strang(params, Wavefunction.gaussian(grid), dt=1e-3)
        psi.mass
        # 1.0
        ```
    """
    values = StrangStepper(params, psi.grid, dt).step(psi.values)
    if not np.all(np.isfinite(values)):
        raise NumericalAlarm("Strang step produced non-finite values.")
    return psi.with_values(values)


@dataclass
class ObservableSeries:
    """
    Observables of an evolution, one entry per recorded sample.

    Attributes:
        t (List[float]): Strictly increasing sample times.
        mass (List[float]): `int |psi|^2`.
        energy (List[EnergyBreakdown]): Energy parts.
        sigma_v (List[float]): Variance `int |x|^2 |psi|^2`.
        dsigma_v (List[float]): `2 Im int conj(psi) (x . grad psi)`.
        virial_rhs (List[float]): Analytic `d^2 sigma_V / dt^2`.
        peak_density (List[float]): `max |psi|^2`.
        virial_residual (Optional[np.ndarray]): Output of
            `variance_diagnostics`, when it could be evaluated.
    """

    t: List[float] = field(default_factory=list)
    mass: List[float] = field(default_factory=list)
    energy: List[EnergyBreakdown] = field(default_factory=list)
    sigma_v: List[float] = field(default_factory=list)
    dsigma_v: List[float] = field(default_factory=list)
    virial_rhs: List[float] = field(default_factory=list)
    peak_density: List[float] = field(default_factory=list)
    virial_residual: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return len(self.t)

    def record(self, t: float, params: ModelParams, psi: Wavefunction) -> None:
        if self.t and t <= self.t[-1]:
            raise ValueError(
                f"Sample times must increase, {t} given after {self.t[-1]}."
            )
        self.t.append(float(t))
        self.mass.append(psi.mass)
        self.energy.append(energy(params, psi))
        self.sigma_v.append(variance(psi))
        self.dsigma_v.append(variance_rate(psi))
        self.virial_rhs.append(virial_rhs(params, psi))
        self.peak_density.append(float(np.max(psi.density)))

    @property
    def energy_total(self) -> np.ndarray:
        return np.array([parts.total for parts in self.energy])

    def energy_drift(self) -> float:
        """`max_t |E(t) - E(0)|`."""
        totals = self.energy_total
        return float(np.max(np.abs(totals - totals[0])))

    def mass_drift(self) -> float:
        masses = np.asarray(self.mass)
        return float(np.max(np.abs(masses - masses[0])))

    def rows(self) -> List[Dict[str, Any]]:
        """One dict per sample with the keys of `OBSERVABLES_HEADER`."""
        residual = self.virial_residual
        if residual is None:
            residual = np.full(len(self), np.nan)
        rows = []
        for i, parts in enumerate(self.energy):
            values = [
                self.t[i],
                self.mass[i],
                parts.total,
                parts.kinetic,
                parts.potential,
                parts.contact,
                parts.dipolar,
                self.sigma_v[i],
                self.dsigma_v[i],
                float(residual[i]),
                self.peak_density[i],
            ]
            rows.append(dict(zip(OBSERVABLES_HEADER, values)))
        return rows


@dataclass
class EvolutionResult:
    """
    Outcome of `evolve`.

    Attributes:
        state (Wavefunction): Last finite state.
        series (ObservableSeries): Recorded observables, partial after an
            alarm.
        steps (int): Completed time steps.
        alarm (Optional[NumericalAlarm]): First alarm raised, if any.
        snapshots (Dict[float, Wavefunction]): States at the requested
            snapshot times, keyed by the requested time.
    """

    state: Wavefunction
    series: ObservableSeries
    steps: int
    alarm: Optional[NumericalAlarm] = None
    snapshots: Dict[float, Wavefunction] = field(default_factory=dict)

    @property
    def completed(self) -> bool:
        return self.alarm is None

    @property
    def time(self) -> float:
        return self.series.t[-1] if self.series.t else 0.0


def _non_finite_alarm(peak_growth: float) -> NumericalAlarm:
    if peak_growth > PEAK_GROWTH_BLOWUP_FACTOR:
        return BlowupSuspected(
            f"Non-finite state after the peak density grew {peak_growth:.3e} "
            "times."
        )
    return NumericalAlarm(
        f"Non-finite state with peak density growth {peak_growth:.3e} only."
    )


def evolve(
    params: ModelParams,
    psi0: Wavefunction,
    T: float,
    dt: float,
    record_every: int = DEFAULT_RECORD_EVERY,
    snapshot_times: Optional[Sequence[float]] = None,
    raise_on_alarm: bool = False,
    show_progress: bool = False,
) -> EvolutionResult:
    """
    Propagate a unit-mass state with Strang splitting up to time `T`.

    Observables are recorded at `t = 0`, every `record_every` steps and at the
    final step. The run stops at the first alarm: a spectral tail above
    `SPECTRAL_TAIL_TOLERANCE` at a recording step (`ResolutionAlarm`) or a
    non-finite state (`BlowupSuspected` when the peak density had grown by
    more than `PEAK_GROWTH_BLOWUP_FACTOR`). The variance residual is attached
    to the series when the cadence allows it.

    Args:
        params (ModelParams): Model parameters.
        psi0 (Wavefunction): Initial state with unit mass.
        T (float): Final time, positive.
        dt (float): Time step; `T` must be a whole number of steps.
        record_every (int): Recording cadence in steps.
        snapshot_times (Optional[Sequence[float]]): Times at which to keep a
            copy of the state; the first step at or after each time is used.
        raise_on_alarm (bool): Raise the alarm instead of returning it.
        show_progress (bool): Show a progress bar.

    Returns:
        EvolutionResult: Final state, observables and alarm.

    Example:
        ```python
        from gpps import ModelKind, ModelParams, PotentialSpec, Wavefunction
        from gpps import make_grid
        from gpps.dynamics import evolve

        grid = make_grid(dim=2, extents=8.0, points=64)
        params = ModelParams(
            kind=ModelKind.QUASI_2D_I, beta=1.0, lam=0.5, eps=0.5,
            potential=PotentialSpec.harmonic(1.0),
        )
        result = evolve(params, Wavefunction.gaussian(grid, width=0.8), 1.0, 1e-3)
        result.series.energy_drift()
        # ~1e-7
        ```
    """
    if psi0.grid.dim != params.dim:
        raise ValueError(
            f"{params.kind.value} needs a {params.dim}D state, "
            f"{psi0.grid.dim}D given."
        )
    if abs(psi0.mass - 1.0) > INITIAL_MASS_TOLERANCE:
        raise ValueError(f"Initial state must have unit mass, {psi0.mass} given.")
    if not np.isfinite(T) or T <= 0:
        raise ValueError(f"Final time must be positive, {T} given.")
    if int(record_every) != record_every or record_every < 1:
        raise ValueError(
            f"record_every must be a positive integer, {record_every} given."
        )
    stepper = StrangStepper(params, psi0.grid, dt)
    total_steps = int(round(T / dt))
    if total_steps < 1:
        raise ValueError(f"T = {T} is shorter than one step dt = {dt}.")
    if abs(total_steps * dt - T) > _TIME_TOLERANCE * T:
        raise ValueError(f"T = {T} is not a multiple of dt = {dt}.")
    pending = sorted(float(t) for t in (snapshot_times or []))

    grid = psi0.grid
    series = ObservableSeries()
    snapshots: Dict[float, Wavefunction] = {}
    alarm: Optional[NumericalAlarm] = None
    values = psi0.values.copy()
    initial_peak = float(np.max(np.abs(values) ** 2))
    peak = initial_peak
    step = 0

    def record(at_step: int) -> Optional[NumericalAlarm]:
        psi = Wavefunction(grid=grid, values=values)
        series.record(at_step * stepper.dt, params, psi)
        tail = spectral_tail_fraction(values, grid)
        if tail > SPECTRAL_TAIL_TOLERANCE:
            return ResolutionAlarm(
                f"Spectral tail {tail:.3e} exceeds {SPECTRAL_TAIL_TOLERANCE:.0e} "
                f"at t = {at_step * stepper.dt:.6g}."
            )
        return None

    def take_snapshots(at_step: int) -> None:
        while pending and at_step * stepper.dt >= pending[0] - 1e-12 * max(1.0, T):
            snapshots[pending.pop(0)] = Wavefunction(grid=grid, values=values.copy())

    take_snapshots(0)
    alarm = record(0)
    with tqdm(total=total_steps, desc="evolve", disable=not show_progress) as bar:
        while alarm is None and step < total_steps:
            advanced = stepper.step(values)
            if not np.all(np.isfinite(advanced)):
                peak = max(peak, float(np.max(np.abs(values) ** 2)))
                alarm = _non_finite_alarm(peak / initial_peak)
                break
            values = advanced
            step += 1
            bar.update(1)
            take_snapshots(step)
            if step % record_every == 0 or step == total_steps:
                peak = max(peak, float(np.max(np.abs(values) ** 2)))
                alarm = record(step)

    uniform = series
    if total_steps % record_every != 0 and step == total_steps:
        uniform = _drop_last(series)
    if len(uniform) >= 5:
        try:
            residual = variance_diagnostics(params, uniform)
            if uniform is not series:
                residual = np.append(residual, np.nan)
            series.virial_residual = residual
        except ValueError as error:
            warn(f"Virial residual not evaluated: {error}")

    if alarm is not None and raise_on_alarm:
        raise alarm
    return EvolutionResult(
        state=Wavefunction(grid=grid, values=values),
        series=series,
        steps=step,
        alarm=alarm,
        snapshots=snapshots,
    )


def _drop_last(series: ObservableSeries) -> ObservableSeries:
    return ObservableSeries(
        t=series.t[:-1],
        mass=series.mass[:-1],
        energy=series.energy[:-1],
        sigma_v=series.sigma_v[:-1],
        dsigma_v=series.dsigma_v[:-1],
        virial_rhs=series.virial_rhs[:-1],
        peak_density=series.peak_density[:-1],
    )
