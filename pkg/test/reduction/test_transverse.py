from contextlib import ExitStack as DoesNotRaise

import numpy as np
import pytest

from gpps.models.core import ModelKind
from gpps.reduction.transverse import (
    TransverseCase,
    oscillator_basis,
    transverse_mode,
)
from test.test_utils import assert_almost_equal


def test_transverse_case_list() -> None:
    assert TransverseCase.list() == ["Pancake", "Cigar"]


@pytest.mark.parametrize(
    "dim, expected_result, exception",
    [
        (2, TransverseCase.PANCAKE, DoesNotRaise()),
        (1, TransverseCase.CIGAR, DoesNotRaise()),
        (3, None, pytest.raises(ValueError)),
        (0, None, pytest.raises(ValueError)),
    ],
)
def test_transverse_case_from_dim(dim, expected_result, exception) -> None:
    with exception:
        assert TransverseCase.from_dim(dim) == expected_result


@pytest.mark.parametrize(
    "case, confined_axes, longitudinal_axes, limit_kind",
    [
        (TransverseCase.PANCAKE, (2,), (0, 1), ModelKind.LIMIT_2D),
        (TransverseCase.CIGAR, (0, 1), (2,), ModelKind.LIMIT_1D),
    ],
)
def test_transverse_case_axes(
    case, confined_axes, longitudinal_axes, limit_kind
) -> None:
    assert case.confined_axes == confined_axes
    assert case.longitudinal_axes == longitudinal_axes
    assert case.limit_kind == limit_kind


def test_oscillator_energies() -> None:
    basis = oscillator_basis()
    for k in range(4):
        assert_almost_equal(basis.energies[k], k + 0.5, tolerance=1e-6)
    assert np.all(np.diff(basis.energies) > 0)


def test_oscillator_functions_match_hermite_functions() -> None:
    basis = oscillator_basis()
    z = basis.grid.axes[0]
    w0 = np.pi**-0.25 * np.exp(-0.5 * z**2)
    w1 = np.sqrt(2.0) * np.pi**-0.25 * z * np.exp(-0.5 * z**2)
    assert np.allclose(basis.functions[:, 0], w0, rtol=0.0, atol=1e-6)
    assert np.allclose(basis.functions[:, 1], w1, rtol=0.0, atol=1e-6)


def test_oscillator_functions_are_orthonormal() -> None:
    basis = oscillator_basis()
    gram = basis.grid.spacing[0] * basis.functions.T @ basis.functions
    assert np.allclose(gram, np.eye(gram.shape[0]), rtol=0.0, atol=1e-12)


def test_oscillator_basis_is_read_only() -> None:
    basis = oscillator_basis()
    with pytest.raises(ValueError):
        basis.functions[0, 0] = 1.0


def test_propagator_is_unitary_and_diagonal_on_modes() -> None:
    basis = oscillator_basis()
    tau = 3.7
    u = basis.propagator(tau)
    assert np.allclose(u @ u.conj().T, np.eye(u.shape[0]), rtol=0.0, atol=1e-12)
    w0 = basis.functions[:, 0]
    expected = np.exp(-1j * tau * basis.energies[0]) * w0
    assert np.allclose(u @ w0, expected, rtol=0.0, atol=1e-12)


@pytest.mark.parametrize(
    "case, dim, eigenvalue",
    [
        (TransverseCase.PANCAKE, 1, 0.5),
        (TransverseCase.CIGAR, 2, 1.0),
    ],
)
def test_transverse_mode(case, dim, eigenvalue) -> None:
    mode = transverse_mode(case)
    assert mode.grid.dim == dim
    assert mode.mode_function.shape == mode.grid.shape
    assert_almost_equal(mode.eigenvalue, eigenvalue, tolerance=1e-6)
    assert mode.norm_error() < 1e-12
    assert mode.residual() < 1e-10


def test_transverse_mode_from_value() -> None:
    mode = transverse_mode("Cigar")
    assert mode.case == TransverseCase.CIGAR


@pytest.mark.parametrize("case", [TransverseCase.PANCAKE, TransverseCase.CIGAR])
def test_excited_function_is_orthogonal_to_ground_mode(case) -> None:
    mode = transverse_mode(case)
    overlap = np.sum(mode.excited_function(1) * mode.mode_function)
    assert abs(overlap * mode.grid.cell_volume) < 1e-12
