from contextlib import ExitStack as DoesNotRaise
from typing import Optional, Sequence

import numpy as np
import pytest

from gpps.grid.core import make_grid
from gpps.ground_state.regime import Verdict, classify_regime
from gpps.models.core import ModelKind
from gpps.utils.internal import GPPSWarnings
from test.test_utils import mock_params

CB = 5.8504
X_AXIS = (1.0, 0.0, 0.0)
Z_AXIS = (0.0, 0.0, 1.0)
HALF_TILT = (np.sqrt(0.75), 0.0, 0.5)
UNIQUE = "ExistsUniquePositive"


def _threshold(eps: float, c_b: float = CB) -> float:
    return np.sqrt(2.0 * np.pi) * c_b * eps


@pytest.mark.parametrize(
    "kind, beta, lam, eps, axis, verdict, label",
    [
        (ModelKind.QUASI_2D_I, 2.0, 1.0, 0.1, Z_AXIS, UNIQUE, "A1′"),
        (ModelKind.QUASI_2D_I, 0.5, 1.0, 0.1, Z_AXIS, "Exists", "A1"),
        (ModelKind.QUASI_2D_I, 2.5, -1.0, 0.1, Z_AXIS, UNIQUE, "A2′"),
        (ModelKind.QUASI_2D_I, 1.0, -1.0, 0.1, Z_AXIS, "Exists", "A2"),
        (ModelKind.QUASI_2D_II, 1.0, 1.0, 0.1, HALF_TILT, "NotExists", "B1″"),
        (ModelKind.QUASI_2D_II, 1.0, -1.0, 0.1, X_AXIS, "NotExists", "B2″"),
        (ModelKind.QUASI_2D_II, 1.0, 0.0, 0.1, X_AXIS, UNIQUE, "B1′"),
        (ModelKind.QUASI_2D_II, -1.0, 0.0, 0.1, X_AXIS, "Exists", "B1"),
        (ModelKind.QUASI_2D_II, -5.0, 0.0, 0.1, X_AXIS, "NotExists", "B3″"),
        (ModelKind.QUASI_2D_II, 3.0, 1.0, 0.1, X_AXIS, UNIQUE, "B2′"),
        (ModelKind.QUASI_2D_II, 0.5, 1.0, 0.1, X_AXIS, "Exists", "B2"),
        (ModelKind.QUASI_2D_II, 3.0, -1.0, 0.1, Z_AXIS, UNIQUE, "B3′"),
        (ModelKind.QUASI_2D_II, 1.0, -1.0, 0.1, Z_AXIS, "Exists", "B3"),
        (ModelKind.QUASI_1D, 1.5, 1.0, 0.1, X_AXIS, UNIQUE, "C1"),
        (ModelKind.QUASI_1D, 3.0, 1.0, 0.1, Z_AXIS, UNIQUE, "C2"),
        (ModelKind.QUASI_1D, -5.0, 1.0, 0.1, X_AXIS, "Exists", "C-always"),
        (ModelKind.GPPS_3D, 2.0, 1.0, None, Z_AXIS, UNIQUE, "D3D"),
        (ModelKind.GPPS_3D, 2.0, -1.0, None, Z_AXIS, UNIQUE, "D3D"),
        (ModelKind.GPPS_3D, 1.0, 2.0, None, Z_AXIS, "Undetermined", None),
        (ModelKind.LIMIT_2D, 1.0, 0.0, None, Z_AXIS, UNIQUE, "L2D′"),
        (ModelKind.LIMIT_1D, -1.0, 0.0, None, Z_AXIS, "Exists", "L1D"),
        (ModelKind.LIMIT_1D, 1.0, 0.0, None, Z_AXIS, UNIQUE, "L1D′"),
    ],
)
def test_classify_regime_conditions(
    kind: ModelKind,
    beta: float,
    lam: float,
    eps: Optional[float],
    axis: Sequence[float],
    verdict: str,
    label: Optional[str],
) -> None:
    params = mock_params(kind, beta=beta, lam=lam, eps=eps, axis=axis, gamma=None)
    result = classify_regime(params, CB)
    assert result.verdict == Verdict(verdict)
    assert result.matched_condition == label
    assert result.confining is None


@pytest.mark.parametrize(
    "factor, verdict, label",
    [
        (0.5, Verdict.EXISTS, "A1"),
        (1.5, Verdict.NOT_EXISTS, "A3(iii)"),
        (1.0, Verdict.UNDETERMINED, None),  # equality is not covered
    ],
)
def test_classify_regime_contact_threshold(
    factor: float, verdict: Verdict, label: Optional[str]
) -> None:
    eps = 0.1
    beta = -np.sqrt(2.0 * np.pi) * CB * eps * factor
    params = mock_params(ModelKind.QUASI_2D_I, beta=beta, lam=0.0, eps=eps)
    result = classify_regime(params, CB)
    assert result.verdict == verdict
    assert result.matched_condition == label


def test_classify_regime_margins() -> None:
    params = mock_params(ModelKind.QUASI_2D_I, beta=2.0, lam=1.0, eps=0.1)
    assert classify_regime(params, CB).margin == pytest.approx(1.0)

    eps = 0.1
    params = mock_params(
        ModelKind.QUASI_2D_I, beta=-0.5 * _threshold(eps), lam=0.0, eps=eps
    )
    result = classify_regime(params, CB)
    assert result.margin == pytest.approx(0.5 * _threshold(eps))
    assert result.exists


@pytest.mark.parametrize("scale", [0.25, 2.0, 10.0])
@pytest.mark.parametrize(
    "kind, beta, lam, axis, label",
    [
        (ModelKind.QUASI_2D_I, 2.0, 1.0, Z_AXIS, "A1′"),
        (ModelKind.QUASI_2D_I, 2.0, -1.0, HALF_TILT, "A2′"),
        (ModelKind.QUASI_2D_II, 3.0, 1.0, X_AXIS, "B2′"),
        (ModelKind.QUASI_2D_II, 3.0, -1.0, Z_AXIS, "B3′"),
        (ModelKind.QUASI_1D, 3.0, 1.0, Z_AXIS, "C2"),
    ],
)
def test_classify_regime_primed_conditions_are_homogeneous(
    scale: float,
    kind: ModelKind,
    beta: float,
    lam: float,
    axis: Sequence[float],
    label: str,
) -> None:
    params = mock_params(
        kind, beta=scale * beta, lam=scale * lam, eps=0.1, axis=axis, gamma=None
    )
    result = classify_regime(params, CB)
    assert result.verdict == Verdict.EXISTS_UNIQUE_POSITIVE
    assert result.matched_condition == label


def test_classify_regime_scales_threshold_with_mass() -> None:
    eps = 0.1
    params = mock_params(
        ModelKind.QUASI_2D_I, beta=-0.8 * _threshold(eps), lam=0.0, eps=eps
    )
    assert classify_regime(params, CB, mass=1.0).verdict == Verdict.EXISTS
    heavy = classify_regime(params, CB, mass=2.0)
    assert heavy.verdict == Verdict.NOT_EXISTS
    assert heavy.matched_condition == "A3(iii)"


def test_classify_regime_limit_2d_thresholds() -> None:
    # local coefficient of Limit2D with lam = 0 is beta / sqrt(2 pi)
    scale = np.sqrt(2.0 * np.pi) * CB
    weak = mock_params(ModelKind.LIMIT_2D, beta=-0.5 * scale, gamma=None)
    strong = mock_params(ModelKind.LIMIT_2D, beta=-2.0 * scale, gamma=None)
    assert classify_regime(weak, CB).matched_condition == "L2D"
    assert classify_regime(strong, CB).verdict == Verdict.NOT_EXISTS
    assert classify_regime(strong, CB).matched_condition == "L2D″"


def test_classify_regime_confinement_check() -> None:
    grid = make_grid(dim=2, extents=8.0, points=32)
    trapped = mock_params(ModelKind.QUASI_2D_I, beta=2.0, lam=1.0, eps=0.1)
    result = classify_regime(trapped, CB, grid=grid)
    assert result.verdict == Verdict.EXISTS_UNIQUE_POSITIVE
    assert result.confining is True

    free = mock_params(ModelKind.QUASI_2D_I, beta=2.0, lam=1.0, eps=0.1, gamma=None)
    with pytest.warns(GPPSWarnings):
        result = classify_regime(free, CB, grid=grid)
    assert result.verdict == Verdict.UNDETERMINED
    assert result.matched_condition is None
    assert result.confining is False


@pytest.mark.parametrize(
    "c_b, mass, exception",
    [
        (CB, 1.0, DoesNotRaise()),
        (0.0, 1.0, pytest.raises(ValueError)),
        (CB, 0.0, pytest.raises(ValueError)),
    ],
)
def test_classify_regime_validation(c_b: float, mass: float, exception) -> None:
    params = mock_params(ModelKind.QUASI_2D_I, beta=2.0, lam=1.0, eps=0.1)
    with exception:
        classify_regime(params, c_b, mass=mass)


def test_verdict_list() -> None:
    assert Verdict.list() == [
        "Exists",
        "ExistsUniquePositive",
        "NotExists",
        "Undetermined",
    ]
