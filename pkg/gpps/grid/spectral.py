from __future__ import annotations

import os
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np
import scipy.fft

from gpps.config import NUM_THREADS_ENV, SPECTRAL_TAIL_FRACTION
from gpps.grid.core import Grid, Wavefunction

FieldLike = Union[Wavefunction, np.ndarray]


def fft_workers() -> Optional[int]:
    """Worker count for `scipy.fft`, read from the `GPPS_NUM_THREADS` variable."""
    value = os.getenv(NUM_THREADS_ENV)
    if value is None or value == "":
        return None
    try:
        workers = int(value)
    except ValueError:
        raise ValueError(
            f"{NUM_THREADS_ENV} must be an integer, {value!r} given."
        ) from None
    if workers == 0:
        raise ValueError(f"{NUM_THREADS_ENV} must be non-zero, {value!r} given.")
    return workers


def fftn(values: np.ndarray, axes: Optional[Tuple[int, ...]] = None) -> np.ndarray:
    return scipy.fft.fftn(values, axes=axes, workers=fft_workers())


def ifftn(values: np.ndarray, axes: Optional[Tuple[int, ...]] = None) -> np.ndarray:
    return scipy.fft.ifftn(values, axes=axes, workers=fft_workers())


def unpack_field(field: FieldLike, grid: Optional[Grid]) -> Tuple[np.ndarray, Grid]:
    if isinstance(field, Wavefunction):
        if grid is not None and grid != field.grid:
            raise ValueError("Wavefunction grid differs from the grid passed.")
        return field.values, field.grid
    if grid is None:
        raise ValueError("A grid is required when passing a bare array.")
    values = np.asarray(field)
    if values.shape != grid.shape:
        raise ValueError(
            f"Field shape {values.shape} does not match grid shape {grid.shape}."
        )
    return values, grid


@dataclass
class SpectralField:
    """
    Fourier coefficients approximating `f^(xi) = int f(x) exp(-i xi.x) dx` at the
    grid wavenumbers, obtained from an `h^d`-weighted DFT with the origin shift
    from `-L` to `0` folded in.

    Attributes:
        grid (Grid): The physical grid.
        coefficients (np.ndarray): Complex array in DFT ordering, `grid.shape`.
    """

    grid: Grid
    coefficients: np.ndarray

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=np.complex128)
        if self.coefficients.shape != self.grid.shape:
            raise ValueError(
                f"Coefficient shape {self.coefficients.shape} does not match "
                f"grid shape {self.grid.shape}."
            )

    def parseval_integral(self) -> float:
        """`(2 pi)^{-d} sum |f^|^2 (dk)^d`, equal to `int |f|^2` on the grid."""
        weight = self.grid.spectral_cell_volume / (2.0 * np.pi) ** self.grid.dim
        return float(np.sum(np.abs(self.coefficients) ** 2) * weight)


def forward_transform(field: FieldLike, grid: Optional[Grid] = None) -> SpectralField:
    """
    Transform a field to its continuous-convention Fourier coefficients.

    Args:
        field (Union[Wavefunction, np.ndarray]): Real or complex samples.
        grid (Optional[Grid]): Required when `field` is a bare array.

    Returns:
        SpectralField: Coefficients `h^d * (-1)^j * DFT(f)`.

    Example:
        ```python
        import numpy as np
        from gpps import make_grid, forward_transform

        grid = make_grid(dim=1, extents=10.0, points=128)
        spectrum = forward_transform(np.exp(-grid.mesh[0] ** 2 / 2), grid)
        # spectrum.coefficients ~ sqrt(2 pi) exp(-k^2 / 2)
        ```
    """
    values, grid = unpack_field(field, grid)
    coefficients = grid.cell_volume * grid.fourier_phase * fftn(values)
    return SpectralField(grid=grid, coefficients=coefficients)


def inverse_transform(spectral: SpectralField) -> np.ndarray:
    """
    Invert `forward_transform`.

    Args:
        spectral (SpectralField): Coefficients to invert.

    Returns:
        np.ndarray: Complex samples on `spectral.grid`.
    """
    grid = spectral.grid
    return ifftn(spectral.coefficients * grid.fourier_phase) / grid.cell_volume


def integrate(field: FieldLike, grid: Optional[Grid] = None) -> Union[float, complex]:
    """
    Rectangle-rule integral `h^d sum f`. Real input gives a float, complex input a
    complex number.

    Args:
        field (Union[Wavefunction, np.ndarray]): Samples to integrate.
        grid (Optional[Grid]): Required when `field` is a bare array.

    Returns:
        Union[float, complex]: The integral.
    """
    values, grid = unpack_field(field, grid)
    total = np.sum(values) * grid.cell_volume
    if np.iscomplexobj(total):
        return complex(total)
    return float(total)


def apply_multiplier(
    values: np.ndarray, multiplier: np.ndarray, real_output: bool = False
) -> np.ndarray:
    """Multiply the DFT of `values` by `multiplier` and transform back."""
    result = ifftn(fftn(values) * multiplier)
    if real_output:
        return result.real
    return result


def gradient_spectral(
    field: FieldLike, grid: Optional[Grid] = None
) -> List[np.ndarray]:
    """
    Spectral gradient with multiplier `i k_a`; the Nyquist mode is dropped so
    real fields stay real.

    Args:
        field (Union[Wavefunction, np.ndarray]): Samples to differentiate.
        grid (Optional[Grid]): Required when `field` is a bare array.

    Returns:
        List[np.ndarray]: One derivative per axis, real when the input is real.
    """
    values, grid = unpack_field(field, grid)
    spectrum = fftn(values)
    derivatives = []
    for axis, k in enumerate(grid.derivative_wavenumbers):
        shape = [1] * grid.dim
        shape[axis] = k.size
        derivative = ifftn(spectrum * (1j * k.reshape(shape)))
        derivatives.append(derivative.real if np.isrealobj(values) else derivative)
    return derivatives


def laplacian(field: FieldLike, grid: Optional[Grid] = None) -> np.ndarray:
    values, grid = unpack_field(field, grid)
    return apply_multiplier(values, -grid.k_squared, real_output=np.isrealobj(values))


def dirichlet_integral(field: FieldLike, grid: Optional[Grid] = None) -> float:
    """`int |grad f|^2` evaluated in Fourier space from the full `|k|^2` table."""
    values, grid = unpack_field(field, grid)
    spectrum = fftn(values)
    return float(
        np.sum(grid.k_squared * np.abs(spectrum) ** 2) * grid.cell_volume / grid.size
    )


def spectral_tail_fraction(
    field: FieldLike,
    grid: Optional[Grid] = None,
    fraction: float = SPECTRAL_TAIL_FRACTION,
) -> float:
    """
    Share of `sum |f^|^2` carried by modes outside `fraction * k_max` on any axis.

    Args:
        field (Union[Wavefunction, np.ndarray]): Samples to inspect.
        grid (Optional[Grid]): Required when `field` is a bare array.
        fraction (float): Cutoff relative to the per-axis Nyquist wavenumber.

    Returns:
        float: Tail share in `[0, 1]`.
    """
    values, grid = unpack_field(field, grid)
    power = np.abs(fftn(values)) ** 2
    total = float(np.sum(power))
    if total == 0.0:
        return 0.0
    outside = np.zeros(grid.shape, dtype=bool)
    for k, L, N in zip(grid.wavenumber_mesh, grid.extents, grid.shape):
        outside |= np.abs(k) > fraction * np.pi * (N // 2) / L
    return float(np.sum(power[outside]) / total)
