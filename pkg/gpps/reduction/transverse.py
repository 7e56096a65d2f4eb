from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Tuple

import numpy as np

from gpps.config import TRANSVERSE_EXTENT, TRANSVERSE_POINTS
from gpps.grid.core import Grid
from gpps.grid.spectral import fftn, ifftn
from gpps.models.core import ModelKind


class TransverseCase(Enum):
    """
    Geometry of the strong confinement: one confined axis (`Pancake`, the last
    axis of the rescaled 3D grid) or two (`Cigar`, the first two axes).
    """

    PANCAKE = "Pancake"
    CIGAR = "Cigar"

    @classmethod
    def list(cls):
        return list(map(lambda c: c.value, cls))

    @classmethod
    def from_dim(cls, dim: int) -> TransverseCase:
        """Case whose longitudinal problem has dimension `dim`."""
        if dim == 2:
            return cls.PANCAKE
        if dim == 1:
            return cls.CIGAR
        raise ValueError(f"Longitudinal dimension must be 1 or 2, {dim} given.")

    @property
    def confined_axes(self) -> Tuple[int, ...]:
        return (2,) if self == TransverseCase.PANCAKE else (0, 1)

    @property
    def longitudinal_axes(self) -> Tuple[int, ...]:
        return (0, 1) if self == TransverseCase.PANCAKE else (2,)

    @property
    def limit_kind(self) -> ModelKind:
        if self == TransverseCase.PANCAKE:
            return ModelKind.LIMIT_2D
        return ModelKind.LIMIT_1D


@dataclass(frozen=True, eq=False)
class OscillatorBasis:
    """
    Discrete Hermite functions: eigenvectors of the transverse oscillator
    `-(1/2) d^2/dz^2 + z^2 / 2` with the second derivative taken spectrally on
    a uniform periodic grid.

    Attributes:
        grid (Grid): 1D transverse grid.
        energies (np.ndarray): Ascending eigenvalues, `energies[k] ~ k + 1/2`.
        functions (np.ndarray): Column `k` holds the `k`-th eigenfunction,
            normalized so that `h * sum_j f_k[j]^2 = 1`, positive at the
            center node for even `k` and just right of it for odd `k`.
    """

    grid: Grid
    energies: np.ndarray
    functions: np.ndarray

    @property
    def hamiltonian(self) -> np.ndarray:
        return _oscillator_matrix(self.grid.extents[0], self.grid.points[0])

    def propagator(self, tau: float) -> np.ndarray:
        """Unitary matrix `exp(-i tau H)` acting on nodal values."""
        h = self.grid.spacing[0]
        phases = np.exp(-1j * tau * self.energies)
        return h * (self.functions * phases) @ self.functions.T


@lru_cache(maxsize=8)
def _oscillator_matrix(extent: float, points: int) -> np.ndarray:
    grid = Grid(extents=(extent,), points=(points,))
    k_squared = grid.wavenumbers[0] ** 2
    identity = np.eye(points)
    second = ifftn(-k_squared[:, None] * fftn(identity, axes=(0,)), axes=(0,)).real
    matrix = -0.5 * second + np.diag(0.5 * grid.axes[0] ** 2)
    matrix = 0.5 * (matrix + matrix.T)
    matrix.setflags(write=False)
    return matrix


@lru_cache(maxsize=8)
def oscillator_basis(
    extent: float = TRANSVERSE_EXTENT, points: int = TRANSVERSE_POINTS
) -> OscillatorBasis:
    """
    Diagonalize the discretized transverse oscillator with `numpy.linalg.eigh`.

    Args:
        extent (float): Half extent of the transverse grid.
        points (int): Transverse node count.

    Returns:
        OscillatorBasis: Eigenpairs sorted by energy.
    """
    grid = Grid(extents=(extent,), points=(points,))
    energies, vectors = np.linalg.eigh(_oscillator_matrix(grid.extents[0], points))
    functions = vectors / np.sqrt(grid.spacing[0])
    center = points // 2
    for k in range(points):
        reference = functions[center, k] if k % 2 == 0 else functions[center + 1, k]
        if reference < 0:
            functions[:, k] *= -1.0
    functions.setflags(write=False)
    energies.setflags(write=False)
    return OscillatorBasis(grid=grid, energies=energies, functions=functions)


@dataclass(frozen=True, eq=False)
class TransverseMode:
    """
    Ground mode of the confined directions.

    For a pancake the mode is `w0(z)` with eigenvalue `1/2`; for a cigar it is
    `w0(x) w0(y)` with eigenvalue `1`. Both are taken from the discrete
    oscillator, so they are exact eigenvectors on the transverse grid.

    Attributes:
        case (TransverseCase): Confinement geometry.
        basis (OscillatorBasis): One-axis discrete Hermite basis.
    """

    case: TransverseCase
    basis: OscillatorBasis

    @property
    def grid(self) -> Grid:
        """Transverse grid, 1D for a pancake and 2D for a cigar."""
        axis = self.basis.grid
        count = len(self.case.confined_axes)
        return Grid(extents=axis.extents * count, points=axis.points * count)

    @property
    def eigenvalue(self) -> float:
        return len(self.case.confined_axes) * float(self.basis.energies[0])

    @property
    def mode_function(self) -> np.ndarray:
        w0 = self.basis.functions[:, 0]
        if self.case == TransverseCase.PANCAKE:
            return w0
        return np.outer(w0, w0)

    def excited_function(self, k: int) -> np.ndarray:
        """`w_k` along the (first) confined axis, ground mode on the other."""
        wk = self.basis.functions[:, k]
        if self.case == TransverseCase.PANCAKE:
            return wk
        return np.outer(wk, self.basis.functions[:, 0])

    def norm_error(self) -> float:
        """`|int w0^2 - 1|` by the rectangle rule."""
        mass = np.sum(self.mode_function**2) * self.grid.cell_volume
        return float(abs(mass - 1.0))

    def residual(self) -> float:
        """Max-norm residual of `H_transverse w0 = mu0 w0` on the grid."""
        matrix = self.basis.hamiltonian
        w = self.mode_function
        if self.case == TransverseCase.PANCAKE:
            applied = matrix @ w
        else:
            applied = matrix @ w + w @ matrix.T
        return float(np.max(np.abs(applied - self.eigenvalue * w)))


def transverse_mode(
    case: TransverseCase,
    extent: float = TRANSVERSE_EXTENT,
    points: int = TRANSVERSE_POINTS,
) -> TransverseMode:
    """
    Build the transverse ground mode of one confinement geometry.

    Args:
        case (TransverseCase): `Pancake` or `Cigar`.
        extent (float): Half extent of each transverse axis.
        points (int): Nodes per transverse axis.

    Returns:
        TransverseMode: Mode with its discrete oscillator basis.

    Example:
        ```python
        from gpps.reduction import TransverseCase, transverse_mode

        mode = transverse_mode(TransverseCase.CIGAR)
        mode.eigenvalue
        # 1.0
        ```
    """
    if not isinstance(case, TransverseCase):
        case = TransverseCase(case)
    return TransverseMode(case=case, basis=oscillator_basis(float(extent), int(points)))
