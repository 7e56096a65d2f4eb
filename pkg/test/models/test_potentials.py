from contextlib import ExitStack as DoesNotRaise
from typing import Any, Dict

import numpy as np
import pytest

from gpps.grid.core import make_grid
from gpps.models.potentials import PotentialForm, PotentialSpec


@pytest.mark.parametrize(
    "kwargs, exception",
    [
        ({"form": "harmonic", "gamma": 2.0}, DoesNotRaise()),
        ({"form": PotentialForm.ZERO}, DoesNotRaise()),
        ({"form": "quartic"}, pytest.raises(ValueError)),
        ({"form": "harmonic", "gamma": np.inf}, pytest.raises(ValueError)),
        (
            {"form": "harmonic_plus_lattice", "amplitude": -1.0},
            pytest.raises(ValueError),
        ),
        ({"form": "tabulated"}, pytest.raises(ValueError)),  # no samples
        (
            {"form": "tabulated", "values": np.array([1.0, -0.5])},
            pytest.raises(ValueError),
        ),
    ],
)
def test_potential_spec_validation(
    kwargs: Dict[str, Any], exception: Exception
) -> None:
    with exception:
        spec = PotentialSpec(**kwargs)
        assert isinstance(spec.form, PotentialForm)


def test_harmonic_potential() -> None:
    grid = make_grid(dim=2, extents=4.0, points=16)
    x, y = grid.mesh
    potential = PotentialSpec.harmonic((1.0, 2.0)).evaluate(grid)
    np.testing.assert_allclose(potential, 0.5 * x**2 + 2.0 * y**2, rtol=1e-15)


def test_per_axis_parameters_truncate_to_grid_dimension() -> None:
    spec = PotentialSpec.harmonic((1.0, 1.0, 5.0))
    grid = make_grid(dim=2, extents=4.0, points=16)
    np.testing.assert_allclose(spec.evaluate(grid), 0.5 * grid.radius_squared)
    with pytest.raises(ValueError):
        PotentialSpec.harmonic((1.0, 2.0)).evaluate(make_grid(3, 4.0, 8))


def test_lattice_potential() -> None:
    grid = make_grid(dim=1, extents=6.0, points=64)
    (x,) = grid.mesh
    spec = PotentialSpec.harmonic_plus_lattice(gamma=1.0, amplitude=2.0, wavevector=3.0)
    expected = 0.5 * x**2 + 2.0 * np.sin(3.0 * x) ** 2
    np.testing.assert_allclose(spec.evaluate(grid), expected, rtol=1e-14)
    np.testing.assert_allclose(
        spec.virial_term(grid), x**2 + 6.0 * x * np.sin(6.0 * x), atol=1e-12
    )


def test_harmonic_virial_term_is_twice_the_potential() -> None:
    grid = make_grid(dim=3, extents=4.0, points=8)
    spec = PotentialSpec.harmonic((1.0, 0.5, 3.0))
    np.testing.assert_allclose(spec.virial_term(grid), 2.0 * spec.evaluate(grid))


def test_tabulated_potential() -> None:
    grid = make_grid(dim=1, extents=10.0, points=128)
    (x,) = grid.mesh
    bump = np.exp(-(x**2))
    spec = PotentialSpec.tabulated(bump)
    np.testing.assert_array_equal(spec.evaluate(grid), bump)
    np.testing.assert_allclose(spec.virial_term(grid), -2.0 * x**2 * bump, atol=1e-10)
    with pytest.raises(ValueError):
        spec.evaluate(make_grid(dim=1, extents=10.0, points=64))


def test_zero_potential() -> None:
    grid = make_grid(dim=2, extents=3.0, points=8)
    spec = PotentialSpec.zero()
    assert np.all(spec.evaluate(grid) == 0.0)
    assert np.all(spec.virial_term(grid) == 0.0)


@pytest.mark.parametrize(
    "spec, expected",
    [
        (PotentialSpec.harmonic(1.0), True),
        (PotentialSpec.harmonic_plus_lattice(1.0, 5.0, 2.0), True),
        (PotentialSpec.zero(), False),
    ],
)
def test_is_confining(spec: PotentialSpec, expected: bool) -> None:
    grid = make_grid(dim=2, extents=8.0, points=32)
    assert spec.is_confining(grid) is expected


def test_bump_is_not_confining() -> None:
    grid = make_grid(dim=1, extents=8.0, points=32)
    spec = PotentialSpec.tabulated(np.exp(-grid.mesh[0] ** 2))
    assert not spec.is_confining(grid)
