from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from gpps.grid.core import Grid
from gpps.models.core import ModelKind, ModelParams
from gpps.utils.internal import warn

# n3 == 0 and n3 != 0 are decided against this
AXIS_ZERO_TOLERANCE = 1e-12


class Verdict(Enum):
    EXISTS = "Exists"
    EXISTS_UNIQUE_POSITIVE = "ExistsUniquePositive"
    NOT_EXISTS = "NotExists"
    UNDETERMINED = "Undetermined"

    @classmethod
    def list(cls):
        return list(map(lambda c: c.value, cls))


@dataclass(frozen=True)
class RegimeVerdict:
    """
    Outcome of checking model parameters against the ground-state conditions.

    Attributes:
        verdict (Verdict): Strongest statement that applies.
        matched_condition (Optional[str]): Label of the deciding condition,
            e.g. `"A1′"` or `"B1″"`; `None` when undetermined.
        margin (float): Slack of the deciding inequality; positive inside an
            existence region, negative inside a nonexistence region.
        confining (Optional[bool]): Result of the trap growth check when a
            grid was supplied.
    """

    verdict: Verdict
    matched_condition: Optional[str]
    margin: float
    confining: Optional[bool] = None

    @property
    def exists(self) -> bool:
        return self.verdict in (Verdict.EXISTS, Verdict.EXISTS_UNIQUE_POSITIVE)


# (label, holds, margin) candidates, checked in order
Candidates = List[Tuple[str, bool, float]]


def _first_match(
    unique: Candidates, exists: Candidates, not_exists: Candidates
) -> Tuple[Verdict, Optional[str], float]:
    for verdict, candidates in (
        (Verdict.EXISTS_UNIQUE_POSITIVE, unique),
        (Verdict.EXISTS, exists),
        (Verdict.NOT_EXISTS, not_exists),
    ):
        for label, holds, margin in candidates:
            if holds:
                return verdict, label, margin
    margins = [margin for _, _, margin in exists] or [0.0]
    return Verdict.UNDETERMINED, None, max(margins)


def _quasi_2d_i(beta: float, lam: float, n3_squared: float, threshold: float):
    if lam >= 0:
        existence = beta - lam
        unique = [("A1′", existence >= 0, existence)]
        exists = [("A1", existence > -threshold, existence + threshold)]
    else:
        existence = beta + 0.5 * (1.0 + 3.0 * abs(2.0 * n3_squared - 1.0)) * lam
        unique = [("A2′", existence >= 0, existence)]
        exists = [("A2", existence > -threshold, existence + threshold)]
    collapse = beta + 0.5 * lam * (1.0 - 3.0 * n3_squared) + threshold
    not_exists = [("A3(iii)", collapse < 0, collapse)]
    return _first_match(unique, exists, not_exists)


def _quasi_2d_ii(beta: float, lam: float, n3_squared: float, threshold: float):
    vertical_free = n3_squared <= AXIS_ZERO_TOLERANCE
    oblate = n3_squared >= 0.5
    unique: Candidates = []
    exists: Candidates = []
    not_exists: Candidates = []
    if lam == 0:
        unique.append(("B1′", beta >= 0, beta))
        exists.append(("B1", beta > -threshold, beta + threshold))
        not_exists.append(("B3″", beta < -threshold, beta + threshold))
    elif lam > 0:
        if vertical_free:
            unique.append(("B2′", beta >= lam, beta - lam))
            exists.append(("B2", beta - lam > -threshold, beta - lam + threshold))
        else:
            not_exists.append(("B1″", True, -min(lam, n3_squared)))
    else:
        if oblate:
            existence = beta - (1.0 - 3.0 * n3_squared) * lam
            unique.append(("B3′", existence >= 0, existence))
            exists.append(("B3", existence > -threshold, existence + threshold))
        else:
            not_exists.append(("B2″", True, -min(-lam, 0.5 - n3_squared)))
    return _first_match(unique, exists, not_exists)


def _quasi_1d(beta: float, lam: float, n3_squared: float):
    anisotropy = lam * (1.0 - 3.0 * n3_squared)
    if anisotropy >= 0:
        label, margin = "C1", beta - anisotropy
    else:
        label, margin = "C2", beta + 0.5 * anisotropy
    unique = [(label, margin >= 0, margin)]
    exists = [("C-always", True, margin)]
    return _first_match(unique, exists, [])


def _gpps_3d(beta: float, lam: float):
    margin = min(beta, lam + 0.5 * beta, beta - lam)
    candidate = [("D3D", margin >= 0, margin)]
    return _first_match(candidate, candidate, [])


def _limit_2d(coupling: float, threshold: float):
    unique = [("L2D′", coupling >= 0, coupling)]
    exists = [("L2D", coupling > -threshold, coupling + threshold)]
    not_exists = [("L2D″", coupling < -threshold, coupling + threshold)]
    return _first_match(unique, exists, not_exists)


def _limit_1d(coupling: float):
    return _first_match([("L1D′", coupling >= 0, coupling)], [("L1D", True, 0.0)], [])


def classify_regime(
    params: ModelParams,
    c_b: float,
    mass: float = 1.0,
    grid: Optional[Grid] = None,
) -> RegimeVerdict:
    """
    Evaluate the existence, uniqueness and nonexistence conditions for one
    parameter set. Thresholds use `C_b / mass`.

    Args:
        params (ModelParams): Model parameters.
        c_b (float): Gagliardo-Nirenberg constant.
        mass (float): Mass of the state the statement is applied to.
        grid (Optional[Grid]): When given, the trap is checked for growth on
            it and existence verdicts without confinement become
            `Undetermined`.

    Returns:
        RegimeVerdict: Strongest verdict with its condition label.

    Example:
        ```python
        from gpps import DipoleAxis, ModelKind, ModelParams
        from gpps.ground_state import classify_regime

        params = ModelParams(
            kind=ModelKind.QUASI_2D_I, beta=2.0, lam=1.0, eps=0.1,
            axis=DipoleAxis(0.0, 0.0, 1.0),
        )
        classify_regime(params, c_b=5.85).matched_condition
        # 'A1′'
        ```
    """
    if not c_b > 0:
        raise ValueError(f"C_b must be positive, {c_b} given.")
    if not mass > 0:
        raise ValueError(f"Mass must be positive, {mass} given.")
    beta, lam = params.beta, params.lam
    n3_squared = params.axis.n3_squared
    scaled_cb = c_b / mass
    kind = params.kind
    if kind in (ModelKind.QUASI_2D_I, ModelKind.QUASI_2D_II):
        threshold = np.sqrt(2.0 * np.pi) * scaled_cb * params.eps
        classify = _quasi_2d_i if kind == ModelKind.QUASI_2D_I else _quasi_2d_ii
        verdict, label, margin = classify(beta, lam, n3_squared, threshold)
    elif kind == ModelKind.QUASI_1D:
        verdict, label, margin = _quasi_1d(beta, lam, n3_squared)
    elif kind == ModelKind.GPPS_3D:
        verdict, label, margin = _gpps_3d(beta, lam)
    elif kind == ModelKind.LIMIT_2D:
        verdict, label, margin = _limit_2d(params.local_coefficient, scaled_cb)
    else:
        verdict, label, margin = _limit_1d(params.local_coefficient)

    confining = None
    if grid is not None:
        confining = params.potential.is_confining(grid)
        if not confining and verdict in (
            Verdict.EXISTS,
            Verdict.EXISTS_UNIQUE_POSITIVE,
        ):
            warn(
                f"Potential does not grow towards the boundary; condition {label} "
                "needs a confining trap."
            )
            verdict = Verdict.UNDETERMINED
    return RegimeVerdict(
        verdict=verdict,
        matched_condition=label if verdict != Verdict.UNDETERMINED else None,
        margin=float(margin),
        confining=confining,
    )
