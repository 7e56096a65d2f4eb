from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from gpps.config import MIN_GRID_POINTS


def _read_only(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def _signed_indices(count: int) -> np.ndarray:
    return np.concatenate((np.arange(0, count // 2), np.arange(-count // 2, 0)))


def _as_tuple(value: Union[float, Sequence[float]], dim: int, name: str) -> tuple:
    if np.isscalar(value):
        return (value,) * dim
    value = tuple(value)
    if len(value) != dim:
        raise ValueError(
            f"{name} must have one entry per axis ({dim} expected), "
            f"{len(value)} given."
        )
    return value


@dataclass(frozen=True)
class Grid:
    """
    Uniform periodic tensor grid on `[-L_a, L_a)` per axis with the spectral
    tables every other module consumes.

    Node `j` on axis `a` sits at `x_j = -L_a + j * h_a` with `h_a = 2 L_a / N_a`.
    Wavenumbers follow the DFT ordering, `k_j = pi * j / L_a` for
    `j = 0, 1, ..., N_a/2 - 1, -N_a/2, ..., -1`.

    Attributes:
        extents (Tuple[float, ...]): Half extents `L_a > 0`.
        points (Tuple[int, ...]): Even node counts `N_a >= 8`.

    Example:
        ```python
        from gpps import make_grid

        grid = make_grid(dim=2, extents=8.0, points=64)
        grid.shape
        # (64, 64)
        ```
    """

    extents: Tuple[float, ...]
    points: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "extents", tuple(float(L) for L in self.extents))
        object.__setattr__(self, "points", tuple(self.points))
        if len(self.extents) != len(self.points):
            raise ValueError(
                f"extents and points must have the same length, "
                f"{len(self.extents)} and {len(self.points)} given."
            )
        if len(self.points) not in (1, 2, 3):
            raise ValueError(f"Grid dimension must be 1, 2 or 3, {self.dim} given.")
        for extent in self.extents:
            if not np.isfinite(extent) or extent <= 0:
                raise ValueError(f"Grid extents must be positive, {extent} given.")
        for count in self.points:
            if int(count) != count or count < MIN_GRID_POINTS or count % 2:
                raise ValueError(
                    f"Grid points must be even integers >= {MIN_GRID_POINTS}, "
                    f"{count} given."
                )

    @property
    def dim(self) -> int:
        return len(self.points)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(int(n) for n in self.points)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def spacing(self) -> Tuple[float, ...]:
        return tuple(2.0 * L / N for L, N in zip(self.extents, self.points))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def wavenumber_spacing(self) -> Tuple[float, ...]:
        return tuple(np.pi / L for L in self.extents)

    @property
    def spectral_cell_volume(self) -> float:
        return float(np.prod(self.wavenumber_spacing))

    @cached_property
    def axes(self) -> Tuple[np.ndarray, ...]:
        return tuple(
            _read_only(-L + h * np.arange(N))
            for L, h, N in zip(self.extents, self.spacing, self.shape)
        )

    @cached_property
    def mesh(self) -> Tuple[np.ndarray, ...]:
        return tuple(
            _read_only(axis) for axis in np.meshgrid(*self.axes, indexing="ij")
        )

    @cached_property
    def radius_squared(self) -> np.ndarray:
        return _read_only(sum(x**2 for x in self.mesh))

    @cached_property
    def wavenumbers(self) -> Tuple[np.ndarray, ...]:
        return tuple(
            _read_only(2.0 * np.pi * np.fft.fftfreq(N, d=h))
            for N, h in zip(self.shape, self.spacing)
        )

    @cached_property
    def derivative_wavenumbers(self) -> Tuple[np.ndarray, ...]:
        """Wavenumbers with the Nyquist entry zeroed, for odd multipliers."""
        tables = []
        for k, N in zip(self.wavenumbers, self.shape):
            k = k.copy()
            k[N // 2] = 0.0
            tables.append(_read_only(k))
        return tuple(tables)

    @cached_property
    def wavenumber_mesh(self) -> Tuple[np.ndarray, ...]:
        return tuple(
            _read_only(k) for k in np.meshgrid(*self.wavenumbers, indexing="ij")
        )

    @cached_property
    def k_squared(self) -> np.ndarray:
        return _read_only(sum(k**2 for k in self.wavenumber_mesh))

    @cached_property
    def k_norm(self) -> np.ndarray:
        return _read_only(np.sqrt(self.k_squared))

    @cached_property
    def fourier_phase(self) -> np.ndarray:
        # e^{i xi L} = (-1)^j shifts the DFT origin from -L to 0
        signs = [
            np.where(_signed_indices(N) % 2 == 0, 1.0, -1.0) for N in self.shape
        ]
        return _read_only(np.prod(np.meshgrid(*signs, indexing="ij"), axis=0))

    def sub_grid(self, axes: Sequence[int]) -> Grid:
        return Grid(
            extents=tuple(self.extents[a] for a in axes),
            points=tuple(self.points[a] for a in axes),
        )


def make_grid(
    dim: int,
    extents: Union[float, Sequence[float]],
    points: Union[int, Sequence[int]],
) -> Grid:
    """
    Build a uniform periodic grid.

    Args:
        dim (int): Spatial dimension, 1, 2 or 3.
        extents (Union[float, Sequence[float]]): Half extent `L` shared by every
            axis, or one value per axis.
        points (Union[int, Sequence[int]]): Node count shared by every axis, or
            one value per axis. Must be even and at least 8.

    Returns:
        Grid: The validated grid.

    Example:
        ```python
        from gpps import make_grid

        grid = make_grid(dim=1, extents=8.0, points=16)
        grid.spacing
        # (1.0,)
        ```
    """
    if dim not in (1, 2, 3):
        raise ValueError(f"Grid dimension must be 1, 2 or 3, {dim} given.")
    extents = tuple(float(L) for L in _as_tuple(extents, dim, "extents"))
    points = _as_tuple(points, dim, "points")
    for count in points:
        if int(count) != count:
            raise ValueError(f"Grid points must be integers, {count} given.")
    return Grid(extents=extents, points=tuple(int(n) for n in points))


@dataclass
class Wavefunction:
    """
    Complex scalar field sampled on a `Grid`.

    Attributes:
        grid (Grid): The grid the values live on.
        values (np.ndarray): Complex array with `grid.shape`.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"Wavefunction values must have shape {self.grid.shape}, "
                f"{self.values.shape} given."
            )

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    @property
    def mass(self) -> float:
        return float(np.sum(self.density) * self.grid.cell_volume)

    def norm(self, p: float = 2.0) -> float:
        """L^p norm by the rectangle rule; `p = inf` gives the max norm."""
        if np.isinf(p):
            return float(np.max(np.abs(self.values)))
        integral = np.sum(np.abs(self.values) ** p) * self.grid.cell_volume
        return float(integral ** (1.0 / p))

    def normalized(self) -> Wavefunction:
        mass = self.mass
        if not np.isfinite(mass) or mass <= 0:
            raise ValueError(f"Cannot normalize a field with mass {mass}.")
        return Wavefunction(grid=self.grid, values=self.values / np.sqrt(mass))

    def with_values(self, values: np.ndarray) -> Wavefunction:
        return Wavefunction(grid=self.grid, values=values)

    @classmethod
    def from_function(
        cls, grid: Grid, function: Callable[..., np.ndarray], normalize: bool = True
    ) -> Wavefunction:
        """
        Sample `function(*grid.mesh)` on the grid.

        Args:
            grid (Grid): Target grid.
            function (Callable[..., np.ndarray]): Vectorized profile taking one
                coordinate array per axis.
            normalize (bool): Rescale to unit mass.

        Returns:
            Wavefunction: The sampled field.
        """
        field = cls(grid=grid, values=function(*grid.mesh))
        return field.normalized() if normalize else field

    @classmethod
    def gaussian(
        cls,
        grid: Grid,
        width: Union[float, Sequence[float]] = 1.0,
        center: Optional[Sequence[float]] = None,
        momentum: Optional[Sequence[float]] = None,
    ) -> Wavefunction:
        """
        Unit-mass Gaussian `prod_a exp(-(x_a - c_a)^2 / (2 w_a^2) + i p_a x_a)`.

        Args:
            grid (Grid): Target grid.
            width (Union[float, Sequence[float]]): Width per axis.
            center (Optional[Sequence[float]]): Center per axis, origin by default.
            momentum (Optional[Sequence[float]]): Phase gradient per axis.

        Returns:
            Wavefunction: Normalized Gaussian.
        """
        widths = _as_tuple(width, grid.dim, "width")
        centers = _as_tuple(0.0 if center is None else center, grid.dim, "center")
        momenta = _as_tuple(0.0 if momentum is None else momentum, grid.dim, "momentum")
        exponent = np.zeros(grid.shape, dtype=np.complex128)
        for x, w, c, p in zip(grid.mesh, widths, centers, momenta):
            exponent += -((x - c) ** 2) / (2.0 * w**2) + 1j * p * x
        return cls(grid=grid, values=np.exp(exponent)).normalized()
