from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from gpps.grid.core import Grid
from gpps.grid.spectral import gradient_spectral


class PotentialForm(Enum):
    HARMONIC = "harmonic"
    HARMONIC_PLUS_LATTICE = "harmonic_plus_lattice"
    ZERO = "zero"
    TABULATED = "tabulated"

    @classmethod
    def list(cls):
        return list(map(lambda c: c.value, cls))


def _per_axis(value: Union[float, Sequence[float]], dim: int, name: str) -> np.ndarray:
    values = np.atleast_1d(np.asarray(value, dtype=float))
    if values.size == 1:
        return np.full(dim, float(values[0]))
    if values.size < dim:
        raise ValueError(
            f"{name} needs at least {dim} entries for a {dim}D grid, "
            f"{values.size} given."
        )
    return values[:dim]


@dataclass(frozen=True, eq=False)
class PotentialSpec:
    """
    External trap `V >= 0`. Per-axis parameters given as a scalar apply to every
    axis; longer tuples are truncated to the grid dimension so one spec serves
    a 3D problem and its in-plane reduction.

    Attributes:
        form (PotentialForm): Which trap.
        gamma (Tuple[float, ...]): Trap frequencies, `V = sum_a gamma_a^2 x_a^2 / 2`.
        amplitude (float): Lattice depth `A >= 0`.
        wavevector (Tuple[float, ...]): Lattice wavenumbers `q_a`, adding
            `A sum_a sin^2(q_a x_a)`.
        values (Optional[np.ndarray]): Samples of a tabulated potential.
    """

    form: PotentialForm = PotentialForm.ZERO
    gamma: Tuple[float, ...] = (1.0,)
    amplitude: float = 0.0
    wavevector: Tuple[float, ...] = (0.0,)
    values: Optional[np.ndarray] = None

    def __post_init__(self):
        if not isinstance(self.form, PotentialForm):
            if self.form not in PotentialForm.list():
                raise ValueError(
                    f"Potential form must be one of {PotentialForm.list()}, "
                    f"{self.form!r} given."
                )
            object.__setattr__(self, "form", PotentialForm(self.form))
        object.__setattr__(
            self, "gamma", tuple(float(g) for g in np.atleast_1d(self.gamma))
        )
        object.__setattr__(
            self, "wavevector", tuple(float(q) for q in np.atleast_1d(self.wavevector))
        )
        if any(not np.isfinite(g) for g in self.gamma):
            raise ValueError(f"Trap frequencies must be finite, {self.gamma} given.")
        if not np.isfinite(self.amplitude) or self.amplitude < 0:
            raise ValueError(
                f"Lattice amplitude must be non-negative, {self.amplitude} given."
            )
        if self.form == PotentialForm.TABULATED:
            if self.values is None:
                raise ValueError("A tabulated potential needs `values`.")
            values = np.asarray(self.values, dtype=float)
            if not np.all(np.isfinite(values)) or np.any(values < 0):
                raise ValueError("Tabulated potential must be finite and >= 0.")
            object.__setattr__(self, "values", values)

    @classmethod
    def zero(cls) -> PotentialSpec:
        return cls(form=PotentialForm.ZERO)

    @classmethod
    def harmonic(cls, gamma: Union[float, Sequence[float]] = 1.0) -> PotentialSpec:
        return cls(form=PotentialForm.HARMONIC, gamma=gamma)

    @classmethod
    def harmonic_plus_lattice(
        cls,
        gamma: Union[float, Sequence[float]],
        amplitude: float,
        wavevector: Union[float, Sequence[float]],
    ) -> PotentialSpec:
        return cls(
            form=PotentialForm.HARMONIC_PLUS_LATTICE,
            gamma=gamma,
            amplitude=amplitude,
            wavevector=wavevector,
        )

    @classmethod
    def tabulated(cls, values: np.ndarray) -> PotentialSpec:
        return cls(form=PotentialForm.TABULATED, values=values)

    def _tabulated_on(self, grid: Grid) -> np.ndarray:
        if self.values.shape != grid.shape:
            raise ValueError(
                f"Tabulated potential has shape {self.values.shape}, grid needs "
                f"{grid.shape}."
            )
        return self.values

    def evaluate(self, grid: Grid) -> np.ndarray:
        """
        Sample the potential on a grid.

        Args:
            grid (Grid): Target grid.

        Returns:
            np.ndarray: Non-negative real array with `grid.shape`.
        """
        if self.form == PotentialForm.ZERO:
            return np.zeros(grid.shape)
        if self.form == PotentialForm.TABULATED:
            return self._tabulated_on(grid)
        gamma = _per_axis(self.gamma, grid.dim, "gamma")
        potential = 0.5 * sum(g**2 * x**2 for g, x in zip(gamma, grid.mesh))
        if self.form == PotentialForm.HARMONIC_PLUS_LATTICE:
            q = _per_axis(self.wavevector, grid.dim, "wavevector")
            potential = potential + self.amplitude * sum(
                np.sin(qa * x) ** 2 for qa, x in zip(q, grid.mesh)
            )
        return potential

    def virial_term(self, grid: Grid) -> np.ndarray:
        """`x . grad V` on the grid; spectral for tabulated potentials."""
        if self.form == PotentialForm.ZERO:
            return np.zeros(grid.shape)
        if self.form == PotentialForm.TABULATED:
            gradient = gradient_spectral(self._tabulated_on(grid), grid)
            return sum(x * g for x, g in zip(grid.mesh, gradient))
        gamma = _per_axis(self.gamma, grid.dim, "gamma")
        term = sum(g**2 * x**2 for g, x in zip(gamma, grid.mesh))
        if self.form == PotentialForm.HARMONIC_PLUS_LATTICE:
            q = _per_axis(self.wavevector, grid.dim, "wavevector")
            term = term + self.amplitude * sum(
                qa * x * np.sin(2.0 * qa * x) for qa, x in zip(q, grid.mesh)
            )
        return term

    def is_confining(self, grid: Grid) -> bool:
        """
        Growth proxy for `V -> inf`: the minimum over the outermost shell of
        grid nodes must exceed the minimum over the interior.
        """
        potential = self.evaluate(grid)
        shell = np.zeros(grid.shape, dtype=bool)
        for axis, count in enumerate(grid.shape):
            index = [slice(None)] * grid.dim
            index[axis] = [0, count - 1]
            shell[tuple(index)] = True
        return bool(np.min(potential[shell]) > np.min(potential[~shell]))
