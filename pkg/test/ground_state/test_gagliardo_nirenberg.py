from contextlib import ExitStack as DoesNotRaise

import numpy as np
import pytest

from gpps.grid.core import make_grid
from gpps.ground_state.gagliardo_nirenberg import (
    GNConstant,
    estimate_cb,
    gn_quotient,
    radial_ground_state,
    shooting_estimate,
)

TOWNES_AMPLITUDE = 2.20620086
TOWNES_CB = 5.85043


@pytest.mark.parametrize("width", [1.0, 1.5, 0.7])
def test_gn_quotient_of_gaussian(width: float) -> None:
    grid = make_grid(dim=2, extents=10.0, points=128)
    values = np.exp(-0.5 * grid.radius_squared / width**2)
    assert gn_quotient(values, grid) == pytest.approx(2.0 * np.pi, rel=1e-8)


@pytest.mark.parametrize(
    "dim, zero, exception",
    [
        (2, False, DoesNotRaise()),
        (1, False, pytest.raises(ValueError)),
        (2, True, pytest.raises(ValueError)),
    ],
)
def test_gn_quotient_validation(dim: int, zero: bool, exception: Exception) -> None:
    grid = make_grid(dim=dim, extents=8.0, points=64)
    values = np.exp(-0.5 * grid.radius_squared)
    if zero:
        values = np.zeros(grid.shape)
    with exception:
        gn_quotient(values, grid)


def test_radial_ground_state_amplitude() -> None:
    amplitude, _ = radial_ground_state()
    assert amplitude == pytest.approx(TOWNES_AMPLITUDE, rel=1e-5)


def test_shooting_estimate() -> None:
    value = shooting_estimate()
    assert value == pytest.approx(TOWNES_CB, rel=1e-4)
    assert value < 2.0 * np.pi


def test_estimate_cb_estimators_agree() -> None:
    grid = make_grid(dim=2, extents=16.0, points=128)
    constant = estimate_cb(grid)
    assert constant.accuracy < 1e-3
    assert constant.value == pytest.approx(TOWNES_CB, rel=1e-4)
    low, high = constant.bracket
    assert low <= constant.value <= high
    assert high < 2.0 * np.pi


def test_estimate_cb_rejects_1d_grid() -> None:
    with pytest.raises(ValueError):
        estimate_cb(make_grid(dim=1, extents=16.0, points=128))


@pytest.mark.parametrize(
    "value, exception",
    [
        (5.85, DoesNotRaise()),
        (0.0, pytest.raises(ValueError)),
        (-1.0, pytest.raises(ValueError)),
    ],
)
def test_gn_constant_validation(value: float, exception: Exception) -> None:
    with exception:
        GNConstant(
            value=value, method="manual", accuracy=0.0, descent=5.9, shooting=5.8
        )
