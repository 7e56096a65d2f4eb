from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
from tqdm.auto import tqdm

from gpps.config import (
    COLLAPSE_TAIL_FRACTION,
    GRADIENT_FLOW_ENERGY_SLACK,
    GRADIENT_FLOW_GROWTH_INTERVAL,
    GRADIENT_FLOW_MAX_HALVINGS,
    GRADIENT_FLOW_MAX_ITERATIONS,
    GRADIENT_FLOW_MAX_TAU,
    GRADIENT_FLOW_TOLERANCE,
    GRADIENT_FLOW_WARMUP_STEPS,
    NONEXISTENCE_ENERGY_FLOOR,
)
from gpps.grid.core import Wavefunction
from gpps.grid.spectral import fftn, ifftn, integrate, spectral_tail_fraction
from gpps.ground_state.regime import Verdict, classify_regime
from gpps.models.core import (
    EnergyBreakdown,
    ModelParams,
    effective_potential,
    energy,
    hamiltonian_apply,
)
from gpps.utils.internal import ConvergenceError, warn


class FlowOutcome(Enum):
    CONVERGED = "converged"
    NONEXISTENCE_SUSPECTED = "nonexistence_suspected"

    @classmethod
    def list(cls):
        return list(map(lambda c: c.value, cls))


@dataclass
class GroundStateResult:
    """
    Result of a normalized gradient-flow run.

    Attributes:
        state (Wavefunction): Final unit-mass state, phase-aligned so that it is
            real and non-negative whenever the converged field allows it.
        energy (EnergyBreakdown): Energy of `state`.
        iterations (int): Accepted steps.
        outcome (FlowOutcome): Convergence or suspected nonexistence.
        tau (float): Step size at exit.
        chemical_potential (float): `<H psi, psi>` at exit.
        residual (float): `|H psi - mu psi|_2` at exit.
        halvings (int): Number of step-size halvings.
        log (List[Dict[str, Any]]): One row per accepted step with the keys of
            `gpps.config.ITERATIONS_HEADER`.
    """

    state: Wavefunction
    energy: EnergyBreakdown
    iterations: int
    outcome: FlowOutcome
    tau: float
    chemical_potential: float
    residual: float
    halvings: int = 0
    log: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.outcome == FlowOutcome.CONVERGED

    @property
    def energy_history(self) -> np.ndarray:
        return np.array([row["E_total"] for row in self.log])


def _strip_phase(values: np.ndarray) -> np.ndarray:
    peak = np.unravel_index(np.argmax(np.abs(values)), values.shape)
    aligned = values * np.exp(-1j * np.angle(values[peak]))
    if np.max(np.abs(aligned.imag)) <= 1e-6 * np.max(np.abs(aligned)):
        return np.abs(aligned)
    return aligned


def _residual(params: ModelParams, psi: Wavefunction) -> tuple:
    h_psi = hamiltonian_apply(params, psi)
    mu = float(np.real(integrate(np.conj(psi.values) * h_psi, psi.grid)))
    residual = np.sqrt(integrate(np.abs(h_psi - mu * psi.values) ** 2, psi.grid))
    return mu, float(residual)


def _flow_step(
    params: ModelParams, psi: Wavefunction, tau: float, real: bool
) -> np.ndarray:
    # kinetic part implicit, trap and interaction explicit with a constant shift
    grid = psi.grid
    total = params.potential.evaluate(grid) + effective_potential(params, psi)
    shifted = total - np.min(total)
    stabilizer = 0.5 * np.max(shifted)
    explicit = (1.0 + tau * (stabilizer - shifted)) * psi.values
    implicit = 1.0 + tau * (stabilizer + 0.5 * grid.k_squared)
    values = ifftn(fftn(explicit) / implicit)
    if real:
        values = values.real
    return values


def minimize_gradient_flow(
    params: ModelParams,
    init: Wavefunction,
    tau: Optional[float] = None,
    tol: float = GRADIENT_FLOW_TOLERANCE,
    max_iterations: int = GRADIENT_FLOW_MAX_ITERATIONS,
    c_b: Optional[float] = None,
    show_progress: bool = False,
) -> GroundStateResult:
    """
    Minimize the model energy on the unit-mass sphere with a semi-implicit
    normalized gradient flow.

    Each step treats the kinetic term implicitly in Fourier space and the trap
    and interaction terms explicitly around a constant stabilizer, then
    renormalizes. The step size starts at `tau`, doubles every few accepted
    steps up to a cap and is halved (lowering the cap) whenever the energy
    increases after the warm-up steps.

    Args:
        params (ModelParams): Model parameters.
        init (Wavefunction): Unit-mass initial state.
        tau (Optional[float]): Initial step; `0.1 * min(spacing)^2` by default.
        tol (float): Stop once `max|psi_new - psi| / tau < tol` and the
            eigen-residual is below `10 * tol`.
        max_iterations (int): Iteration cap.
        c_b (Optional[float]): When given, the regime is classified first and a
            `NotExists` verdict is reported as a warning.
        show_progress (bool): Show a progress bar.

    Returns:
        GroundStateResult: Final state, energy and run diagnostics.

    Raises:
        ValueError: When `init` is not normalized or has the wrong dimension.
        ConvergenceError: When the iteration cap or the halving budget is
            exhausted.

    Example:
        ```python
        from gpps import ModelKind, ModelParams, PotentialSpec, Wavefunction
        from gpps import make_grid
        from gpps.ground_state import minimize_gradient_flow

        grid = make_grid(dim=2, extents=8.0, points=128)
        params = ModelParams(
            kind=ModelKind.LIMIT_2D, beta=0.0, lam=0.0,
            potential=PotentialSpec.harmonic(1.0),
        )
        init = Wavefunction.gaussian(grid, width=1.5)
        result = minimize_gradient_flow(params, init)
        result.energy.total
        # 1.0000000...
        ```
    """
    if init.grid.dim != params.dim:
        raise ValueError(
            f"{params.kind.value} needs a {params.dim}D state, "
            f"{init.grid.dim}D given."
        )
    if abs(init.mass - 1.0) > 1e-8:
        raise ValueError(f"Initial state must have unit mass, {init.mass} given.")
    if c_b is not None:
        verdict = classify_regime(params, c_b, grid=init.grid)
        if verdict.verdict == Verdict.NOT_EXISTS:
            warn(
                f"No ground state exists under {verdict.matched_condition}; "
                "running the flow as a probe."
            )

    grid = init.grid
    tau = 0.1 * min(grid.spacing) ** 2 if tau is None else float(tau)
    if not tau > 0:
        raise ValueError(f"Step size must be positive, {tau} given.")
    tau_cap = max(GRADIENT_FLOW_MAX_TAU, tau)
    psi = init
    real = not np.any(init.values.imag)
    current = energy(params, psi)
    log: List[Dict[str, Any]] = []
    halvings = 0
    accepted_streak = 0
    outcome = FlowOutcome.CONVERGED

    progress = tqdm(
        total=max_iterations, desc="gradient flow", disable=not show_progress
    )
    iteration = 0
    try:
        while iteration < max_iterations:
            values = _flow_step(params, psi, tau, real)
            mass = integrate(np.abs(values) ** 2, grid)
            if not np.isfinite(mass) or mass <= 0:
                outcome = FlowOutcome.NONEXISTENCE_SUSPECTED
                break
            candidate = psi.with_values(values / np.sqrt(mass))
            candidate_energy = energy(params, candidate)
            collapsing = candidate_energy.total < NONEXISTENCE_ENERGY_FLOOR or (
                iteration >= GRADIENT_FLOW_WARMUP_STEPS
                and spectral_tail_fraction(candidate.values, grid)
                > COLLAPSE_TAIL_FRACTION
            )
            if collapsing:
                psi, current = candidate, candidate_energy
                outcome = FlowOutcome.NONEXISTENCE_SUSPECTED
                break

            slack = GRADIENT_FLOW_ENERGY_SLACK * max(1.0, abs(current.total))
            if (
                iteration >= GRADIENT_FLOW_WARMUP_STEPS
                and candidate_energy.total > current.total + slack
            ):
                halvings += 1
                if halvings > GRADIENT_FLOW_MAX_HALVINGS:
                    raise ConvergenceError(
                        f"Energy kept increasing after {halvings - 1} step "
                        "halvings."
                    )
                tau *= 0.5
                tau_cap = tau
                accepted_streak = 0
                warn(f"Gradient-flow energy increased; step halved to {tau:.3e}.")
                continue

            change = float(np.max(np.abs(candidate.values - psi.values))) / tau
            psi, current = candidate, candidate_energy
            iteration += 1
            progress.update(1)
            log.append(
                {
                    "iteration": iteration,
                    "tau": tau,
                    "E_total": current.total,
                    "change": change,
                }
            )
            if change < tol and _residual(params, psi)[1] < 10.0 * tol:
                break
            accepted_streak += 1
            if accepted_streak % GRADIENT_FLOW_GROWTH_INTERVAL == 0:
                tau = min(2.0 * tau, tau_cap)
        else:
            raise ConvergenceError(
                f"Gradient flow did not converge in {max_iterations} iterations."
            )
    finally:
        progress.close()

    if outcome == FlowOutcome.CONVERGED:
        psi = psi.with_values(_strip_phase(psi.values))
        current = energy(params, psi)
    mu, residual = _residual(params, psi)
    return GroundStateResult(
        state=psi,
        energy=current,
        iterations=iteration,
        outcome=outcome,
        tau=tau,
        chemical_potential=mu,
        residual=residual,
        halvings=halvings,
        log=log,
    )
