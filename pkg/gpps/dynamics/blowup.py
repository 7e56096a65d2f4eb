from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from gpps.config import ENERGY_ZERO_TOLERANCE
from gpps.dynamics.virial import variance, variance_rate
from gpps.grid.core import Wavefunction
from gpps.ground_state.regime import classify_regime
from gpps.models.core import ModelKind, ModelParams, energy


class BlowupCase(Enum):
    GUARANTEED_I = "Guaranteed(i)"
    GUARANTEED_II = "Guaranteed(ii)"
    GUARANTEED_III = "Guaranteed(iii)"
    INCONCLUSIVE = "Inconclusive"

    @classmethod
    def list(cls):
        return list(map(lambda c: c.value, cls))


@dataclass(frozen=True)
class BlowupVerdict:
    """
    Outcome of the finite-time blow-up criteria on one initial state.

    Guaranteed verdicts carry the quadratic bound
    `sigma_V(t) <= a t^2 + b t + c`, which reaches zero in finite time.

    Attributes:
        verdict (BlowupCase): Matched case or `Inconclusive`.
        a (float): `2 E` (or `3 E` under the `3V + x.grad V >= 0` assumption).
        b (float): Initial variance rate `sigma_V'(0)`.
        c (float): Initial variance `sigma_V(0)`.
        assumption (Optional[str]): `"A"` or `"B"` for the quasi-2D II
            criteria, `None` otherwise.
        reason (Optional[str]): Why the verdict is inconclusive.
    """

    verdict: BlowupCase
    a: float
    b: float
    c: float
    assumption: Optional[str] = None
    reason: Optional[str] = None

    @property
    def guaranteed(self) -> bool:
        return self.verdict != BlowupCase.INCONCLUSIVE

    @property
    def coefficients(self) -> Tuple[float, float, float]:
        return self.a, self.b, self.c

    def bound(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self.a * t**2 + self.b * t + self.c

    @property
    def time_bound(self) -> Optional[float]:
        """First positive zero of the quadratic bound, `None` when it has none."""
        roots = np.roots([self.a, self.b, self.c])
        positive = [r.real for r in roots if abs(r.imag) < 1e-12 and r.real > 0]
        return min(positive) if positive else None


def _trap_holds(params: ModelParams, psi: Wavefunction, factor: float) -> bool:
    grid = psi.grid
    trap = params.potential.evaluate(grid)
    combined = factor * trap + params.potential.virial_term(grid)
    return bool(np.all(combined >= -1e-12 * (1.0 + np.abs(trap))))


def _dipoles_defocus(params: ModelParams) -> bool:
    # lam = 0, or lam > 0 with the nonlocal energy non-positive
    return params.lam == 0 or (params.lam > 0 and params.axis.n3_squared >= 0.5)


def _match_case(
    total: float, rate: float, width: float, factor: float
) -> Optional[BlowupCase]:
    # rate is Im int conj(psi) x.grad psi; width is |x psi|_2
    if total < -ENERGY_ZERO_TOLERANCE:
        return BlowupCase.GUARANTEED_I
    if abs(total) <= ENERGY_ZERO_TOLERANCE:
        return BlowupCase.GUARANTEED_II if rate < -ENERGY_ZERO_TOLERANCE else None
    if rate < -np.sqrt(factor * total) * width:
        return BlowupCase.GUARANTEED_III
    return None


def blowup_criterion(
    params: ModelParams, psi0: Wavefunction, c_b: float
) -> BlowupVerdict:
    """
    Check the finite-time blow-up criteria of the 2D models on an initial state.

    `Quasi2DI` and `Limit2D` need `2V + x.grad V >= 0` on the grid and either
    `lam = 0` or `lam > 0` with `n3^2 >= 1/2`; the bound is
    `2E t^2 + sigma'(0) t + sigma(0)`. `Quasi2DII` accepts either
    assumption `"A"` (`3V + x.grad V >= 0` and local coefficient
    `>= -C_b / mass`, bound `3E t^2 + ...`) or assumption `"B"` (as for
    `Quasi2DI`). In every case the ground-state existence conditions with
    `C_b / mass` must fail. Then blow-up is guaranteed when `E < 0` (i),
    `E = 0` and `Im int conj(psi) x.grad psi < 0` (ii), or `E > 0` and that
    imaginary part is below `-sqrt(2E) |x psi|_2` (`sqrt(3E)` under
    assumption A) (iii).

    Args:
        params (ModelParams): Model parameters.
        psi0 (Wavefunction): Initial state.
        c_b (float): Gagliardo-Nirenberg constant.

    Returns:
        BlowupVerdict: Matched case with its quadratic bound.

    Raises:
        ValueError: On a dimension mismatch or a non-finite variance.

    Example:
        ```python
        import numpy as np
        from gpps import ModelKind, ModelParams, PotentialSpec, Wavefunction
        from gpps import make_grid
        from gpps.dynamics import blowup_criterion

        grid = make_grid(dim=2, extents=6.0, points=128)
        params = ModelParams(
            kind=ModelKind.QUASI_2D_I, beta=-3.0 * np.sqrt(2.0 * np.pi) * 5.85,
            lam=0.0, eps=1.0, potential=PotentialSpec.harmonic(1.0),
        )
        blowup_criterion(params, Wavefunction.gaussian(grid), c_b=5.85).verdict
        # BlowupCase.GUARANTEED_I
        ```
    """
    if psi0.grid.dim != params.dim:
        raise ValueError(
            f"{params.kind.value} needs a {params.dim}D state, "
            f"{psi0.grid.dim}D given."
        )
    sigma = variance(psi0)
    if not np.isfinite(sigma):
        raise ValueError(f"Initial variance must be finite, {sigma} given.")
    rate = variance_rate(psi0)
    total = energy(params, psi0).total
    mass = psi0.mass

    def inconclusive(reason: str) -> BlowupVerdict:
        return BlowupVerdict(
            verdict=BlowupCase.INCONCLUSIVE, a=0.0, b=rate, c=sigma, reason=reason
        )

    kind = params.kind
    if kind not in (ModelKind.QUASI_2D_I, ModelKind.QUASI_2D_II, ModelKind.LIMIT_2D):
        return inconclusive(f"No blow-up criterion for {kind.value}.")
    if classify_regime(params, c_b, mass=mass).exists:
        return inconclusive("A ground-state existence condition holds.")

    # (assumption label, factor in the quadratic bound)
    assumptions: List[Tuple[Optional[str], float]] = []
    if kind == ModelKind.QUASI_2D_II:
        if _trap_holds(params, psi0, 3.0) and params.local_coefficient >= -c_b / mass:
            assumptions.append(("A", 3.0))
        if _trap_holds(params, psi0, 2.0) and _dipoles_defocus(params):
            assumptions.append(("B", 2.0))
    elif _trap_holds(params, psi0, 2.0) and _dipoles_defocus(params):
        assumptions.append((None, 2.0))
    if not assumptions:
        return inconclusive("Trap or dipole-orientation hypotheses fail.")

    width = np.sqrt(sigma)
    for label, factor in assumptions:
        case = _match_case(total, 0.5 * rate, width, factor)
        if case is not None:
            return BlowupVerdict(
                verdict=case, a=factor * total, b=rate, c=sigma, assumption=label
            )
    return inconclusive("Energy and variance-rate conditions fail.")
