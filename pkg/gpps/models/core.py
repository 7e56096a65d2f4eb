from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, Optional

import numpy as np

from gpps.grid.core import Grid, Wavefunction
from gpps.grid.spectral import dirichlet_integral, integrate, laplacian
from gpps.kernels.core import (
    apply_dipolar_3d,
    apply_nonlocal_1d,
    apply_nonlocal_2dI,
    apply_nonlocal_2dII,
    dipolar_projection_multiplier,
    nonlocal_1d_multiplier,
    nonlocal_2dI_multiplier,
    nonlocal_2dII_multiplier,
    spectral_pairing,
)
from gpps.kernels.symbols import DipoleAxis
from gpps.models.coefficients import COEFFICIENTS, Coefficient
from gpps.models.potentials import PotentialSpec
from gpps.utils.internal import warn


class ModelKind(Enum):
    """
    Enum of the supported model equations.

    `GPPS_3D` is the 3D system with the dipolar term written through a Poisson
    potential. `QUASI_2D_I` and `QUASI_2D_II` are the pancake-limit equations
    with the `eps`-dependent kernel and with its fractional-Poisson limit.
    `QUASI_1D` is the cigar-limit equation. `LIMIT_2D` and `LIMIT_1D` are the
    cubic equations reached in the weak-interaction regime.
    """

    GPPS_3D = "Gpps3D"
    QUASI_2D_I = "Quasi2DI"
    QUASI_2D_II = "Quasi2DII"
    QUASI_1D = "Quasi1D"
    LIMIT_2D = "Limit2D"
    LIMIT_1D = "Limit1D"

    @classmethod
    def list(cls):
        return list(map(lambda c: c.value, cls))

    @property
    def dim(self) -> int:
        return _DIMENSIONS[self]

    @property
    def uses_eps(self) -> bool:
        return self in (
            ModelKind.QUASI_2D_I,
            ModelKind.QUASI_2D_II,
            ModelKind.QUASI_1D,
        )

    @property
    def is_nonlocal(self) -> bool:
        return "nonlocal" in COEFFICIENTS[self.value]


_DIMENSIONS = {
    ModelKind.GPPS_3D: 3,
    ModelKind.QUASI_2D_I: 2,
    ModelKind.QUASI_2D_II: 2,
    ModelKind.QUASI_1D: 1,
    ModelKind.LIMIT_2D: 2,
    ModelKind.LIMIT_1D: 1,
}


@dataclass(frozen=True)
class ModelParams:
    """
    Every physical parameter of one model equation.

    Attributes:
        kind (ModelKind): The model equation.
        beta (float): Contact interaction strength.
        lam (float): Dipolar interaction strength.
        eps (Optional[float]): Confinement parameter in `(0, 1]`; required by
            `Quasi2DI`, `Quasi2DII` and `Quasi1D`, ignored with a warning by
            the other kinds.
        axis (DipoleAxis): Dipole orientation.
        potential (PotentialSpec): External trap.

    Example:
        ```python
        from gpps import DipoleAxis, ModelKind, ModelParams, PotentialSpec

        params = ModelParams(
            kind=ModelKind.QUASI_2D_I,
            beta=2.0,
            lam=1.0,
            eps=0.1,
            axis=DipoleAxis(0.0, 0.0, 1.0),
            potential=PotentialSpec.harmonic(1.0),
        )
        params.local_coefficient
        # 15.957...
        ```
    """

    kind: ModelKind
    beta: float
    lam: float
    eps: Optional[float] = None
    axis: DipoleAxis = field(default_factory=lambda: DipoleAxis(0.0, 0.0, 1.0))
    potential: PotentialSpec = field(default_factory=PotentialSpec.zero)

    def __post_init__(self):
        if not isinstance(self.kind, ModelKind):
            if self.kind not in ModelKind.list():
                raise ValueError(
                    f"Model kind must be one of {ModelKind.list()}, "
                    f"{self.kind!r} given."
                )
            object.__setattr__(self, "kind", ModelKind(self.kind))
        for name in ("beta", "lam"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite, {value} given.")
            object.__setattr__(self, name, float(value))
        if self.kind.uses_eps:
            if self.eps is None or not np.isfinite(self.eps) or self.eps <= 0:
                raise ValueError(
                    f"{self.kind.value} needs eps > 0, {self.eps} given."
                )
            if self.eps > 1:
                warn(f"eps = {self.eps} lies outside the modelled range (0, 1].")
        elif self.eps is not None:
            warn(f"{self.kind.value} does not use eps; eps = {self.eps} ignored.")

    @property
    def dim(self) -> int:
        return self.kind.dim

    def _coefficient(self, term: str) -> Optional[Coefficient]:
        return COEFFICIENTS[self.kind.value].get(term)

    @property
    def local_coefficient(self) -> float:
        """Coefficient of `|psi|^2 psi` in the evolution equation."""
        eps = self.eps if self.kind.uses_eps else None
        return self._coefficient("local").value(
            self.beta, self.lam, self.axis.n3_squared, eps
        )

    @property
    def nonlocal_coefficient(self) -> float:
        """Coefficient of the kernel term; 0 for the cubic limit models."""
        coefficient = self._coefficient("nonlocal")
        if coefficient is None:
            return 0.0
        eps = self.eps if self.kind.uses_eps else None
        return coefficient.value(self.beta, self.lam, self.axis.n3_squared, eps)

    def with_kind(self, kind: ModelKind, eps: Optional[float] = None) -> ModelParams:
        return replace(self, kind=kind, eps=eps)


@dataclass(frozen=True)
class EnergyBreakdown:
    """
    Parts of a model energy. The quartic parts carry half of the
    corresponding coefficient of the evolution equation.

    Attributes:
        kinetic (float): `int |grad psi|^2 / 2`.
        potential (float): `int V |psi|^2`.
        contact (float): Local quartic part.
        dipolar (float): Nonlocal quartic part.
    """

    kinetic: float
    potential: float
    contact: float
    dipolar: float

    @property
    def total(self) -> float:
        return self.kinetic + self.potential + self.contact + self.dipolar

    @property
    def interaction(self) -> float:
        return self.contact + self.dipolar

    def as_dict(self) -> Dict[str, float]:
        return {
            "kinetic": self.kinetic,
            "potential": self.potential,
            "contact": self.contact,
            "dipolar": self.dipolar,
            "total": self.total,
        }


def _check_field(params: ModelParams, psi: Wavefunction) -> None:
    if psi.grid.dim != params.dim:
        raise ValueError(
            f"{params.kind.value} needs a {params.dim}D field, "
            f"{psi.grid.dim}D given."
        )
    if not np.all(np.isfinite(psi.values)):
        raise ValueError("Field contains non-finite values.")


def nonlocal_potential(params: ModelParams, rho: np.ndarray, grid: Grid) -> np.ndarray:
    """
    Nonlocal part of the interaction potential on a density, including its
    coefficient. Zero for the cubic limit models.

    Args:
        params (ModelParams): Model parameters.
        rho (np.ndarray): Real density on `grid`.
        grid (Grid): Grid of matching dimension.

    Returns:
        np.ndarray: Real field.
    """
    kind = params.kind
    if kind == ModelKind.GPPS_3D:
        return apply_dipolar_3d(rho, grid, params.axis, params.beta, params.lam) - (
            params.local_coefficient * rho
        )
    if kind == ModelKind.QUASI_2D_I:
        kernel_term = apply_nonlocal_2dI(rho, grid, params.eps, params.axis)
    elif kind == ModelKind.QUASI_2D_II:
        kernel_term = apply_nonlocal_2dII(rho, grid, params.axis)
    elif kind == ModelKind.QUASI_1D:
        kernel_term = apply_nonlocal_1d(rho, grid, params.eps)
    else:
        return np.zeros(grid.shape)
    return params.nonlocal_coefficient * kernel_term


def nonlocal_multiplier(params: ModelParams, grid: Grid) -> Optional[np.ndarray]:
    """Fourier multiplier of `nonlocal_potential`, or `None` for cubic models."""
    kind = params.kind
    if kind == ModelKind.GPPS_3D:
        table = dipolar_projection_multiplier(grid, params.axis)
    elif kind == ModelKind.QUASI_2D_I:
        table = nonlocal_2dI_multiplier(grid, params.eps, params.axis)
    elif kind == ModelKind.QUASI_2D_II:
        table = nonlocal_2dII_multiplier(grid, params.axis)
    elif kind == ModelKind.QUASI_1D:
        table = nonlocal_1d_multiplier(grid, params.eps)
    else:
        return None
    return params.nonlocal_coefficient * table


def effective_potential(params: ModelParams, psi: Wavefunction) -> np.ndarray:
    """
    Interaction potential `W[psi]`, so that the model reads
    `i d_t psi = -Laplacian psi / 2 + V psi + W[psi] psi`.

    Args:
        params (ModelParams): Model parameters.
        psi (Wavefunction): Field on a grid of dimension `params.dim`.

    Returns:
        np.ndarray: Real field with the grid shape.

    Example:
        ```python
        from gpps import ModelKind, ModelParams, Wavefunction, make_grid
        from gpps import effective_potential

        grid = make_grid(dim=1, extents=8.0, points=64)
        params = ModelParams(kind=ModelKind.LIMIT_1D, beta=1.0, lam=0.0)
        psi = Wavefunction.gaussian(grid)
        w = effective_potential(params, psi)
        # w == psi.density / (2 pi)
        ```
    """
    _check_field(params, psi)
    rho = psi.density
    return params.local_coefficient * rho + nonlocal_potential(params, rho, psi.grid)


def interaction_energy(
    params: ModelParams, rho: np.ndarray, grid: Grid
) -> EnergyBreakdown:
    """
    Quartic part of the energy evaluated on a non-negative density. The
    nonlocal term is computed from a single pass over the symbol table.

    Args:
        params (ModelParams): Model parameters.
        rho (np.ndarray): Real density on `grid`.
        grid (Grid): Grid of dimension `params.dim`.

    Returns:
        EnergyBreakdown: Contact and dipolar parts, zero kinetic and potential.
    """
    if grid.dim != params.dim:
        raise ValueError(
            f"{params.kind.value} needs a {params.dim}D grid, {grid.dim}D given."
        )
    rho = np.asarray(rho, dtype=float)
    contact = 0.5 * params.local_coefficient * integrate(rho**2, grid)
    multiplier = nonlocal_multiplier(params, grid)
    dipolar = 0.0
    if multiplier is not None:
        dipolar = 0.5 * spectral_pairing(rho, multiplier, grid)
    return EnergyBreakdown(kinetic=0.0, potential=0.0, contact=contact, dipolar=dipolar)


def energy(params: ModelParams, psi: Wavefunction) -> EnergyBreakdown:
    """
    Energy of a field under one model.

    Args:
        params (ModelParams): Model parameters.
        psi (Wavefunction): Field on a grid of dimension `params.dim`.

    Returns:
        EnergyBreakdown: Kinetic, potential, contact and dipolar parts.

    Example:
        ```python
        import numpy as np
        from gpps import ModelKind, ModelParams, PotentialSpec, Wavefunction
        from gpps import energy, make_grid

        grid = make_grid(dim=2, extents=8.0, points=128)
        params = ModelParams(
            kind=ModelKind.LIMIT_2D, beta=0.0, lam=0.0,
            potential=PotentialSpec.harmonic(1.0),
        )
        energy(params, Wavefunction.gaussian(grid)).total
        # 1.0
        ```
    """
    _check_field(params, psi)
    grid = psi.grid
    quartic = interaction_energy(params, psi.density, grid)
    return EnergyBreakdown(
        kinetic=0.5 * dirichlet_integral(psi.values, grid),
        potential=integrate(params.potential.evaluate(grid) * psi.density, grid),
        contact=quartic.contact,
        dipolar=quartic.dipolar,
    )


def hamiltonian_apply(params: ModelParams, psi: Wavefunction) -> np.ndarray:
    """
    `(-Laplacian / 2 + V + W[psi]) psi`, the L2-gradient of the energy up to a
    factor 2 in the quartic terms.

    Args:
        params (ModelParams): Model parameters.
        psi (Wavefunction): Field on a grid of dimension `params.dim`.

    Returns:
        np.ndarray: Complex field.
    """
    _check_field(params, psi)
    grid = psi.grid
    potential = params.potential.evaluate(grid) + effective_potential(params, psi)
    return -0.5 * laplacian(psi.values, grid) + potential * psi.values


def chemical_potential(params: ModelParams, psi: Wavefunction) -> float:
    """`Re <H psi, psi> / <psi, psi>`."""
    h_psi = hamiltonian_apply(params, psi)
    pairing = integrate(np.conj(psi.values) * h_psi, psi.grid)
    return float(np.real(pairing)) / psi.mass


def energy_summary(params: ModelParams, psi: Wavefunction) -> Dict[str, Any]:
    summary: Dict[str, Any] = energy(params, psi).as_dict()
    summary["mass"] = psi.mass
    summary["chemical_potential"] = chemical_potential(params, psi)
    return summary
