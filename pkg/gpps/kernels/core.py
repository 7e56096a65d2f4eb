from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from gpps.grid.core import Grid
from gpps.grid.spectral import fftn, ifftn
from gpps.kernels.symbols import (
    DipoleAxis,
    symbol_aniso2d,
    symbol_dip3d,
    symbol_u1d,
    symbol_u2d,
    u1d_quadrature,
    u2d_quadrature,
)

_BOUND_RTOL = 1e-12


class KernelKind(Enum):
    """
    Enum of the nonlocal operators with a tabulated Fourier multiplier.
    """

    DIP_3D = "Dip3D"
    U2D_EPS = "U2dEps"
    FRAC_POISSON_2D = "FracPoisson2D"
    U1D_EPS = "U1dEps"
    ANISO_2D = "Aniso2D"
    RIESZ_2D = "Riesz2D"
    T_EPS_ALPHA = "TEpsAlpha"
    RESCALED_DIP_3D = "RescaledDip3D"

    @classmethod
    def list(cls):
        return list(map(lambda c: c.value, cls))


def _require_dim(grid: Grid, dim: int, operation: str) -> None:
    if grid.dim != dim:
        raise ValueError(f"{operation} needs a {dim}D grid, {grid.dim}D given.")


def _require_shape(values: np.ndarray, grid: Grid) -> np.ndarray:
    values = np.asarray(values)
    if values.shape != grid.shape:
        raise ValueError(
            f"Field shape {values.shape} does not match grid shape {grid.shape}."
        )
    return values


def _read_only(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@lru_cache(maxsize=32)
def _u2d_table(grid: Grid, eps: float) -> np.ndarray:
    return _read_only(np.asarray(symbol_u2d(grid.k_norm, eps)))


@lru_cache(maxsize=32)
def _u1d_table(grid: Grid, eps: float) -> np.ndarray:
    return _read_only(np.asarray(symbol_u1d(grid.wavenumber_mesh[0], eps)))


@lru_cache(maxsize=32)
def _aniso_table(grid: Grid, axis: DipoleAxis) -> np.ndarray:
    return _read_only(np.asarray(symbol_aniso2d(grid.wavenumber_mesh, axis)))


@lru_cache(maxsize=32)
def _inverse_norm_table(grid: Grid) -> np.ndarray:
    k = grid.k_norm
    return _read_only(np.where(k > 0, 1.0 / np.where(k > 0, k, 1.0), 0.0))


@lru_cache(maxsize=32)
def _dipolar_projection_table(grid: Grid, axis: DipoleAxis) -> np.ndarray:
    k1, k2, k3 = grid.wavenumber_mesh
    projection = axis.n1 * k1 + axis.n2 * k2 + axis.n3 * k3
    k_squared = grid.k_squared
    nonzero = k_squared > 0
    return _read_only(
        np.where(nonzero, projection**2 / np.where(nonzero, k_squared, 1.0), 0.0)
    )


def _odd_factor(grid: Grid, alpha: int) -> np.ndarray:
    if alpha not in range(grid.dim):
        raise ValueError(f"Axis index must be in [0, {grid.dim}), {alpha} given.")
    shape = [1] * grid.dim
    shape[alpha] = grid.shape[alpha]
    return grid.derivative_wavenumbers[alpha].reshape(shape)


def _apply(values: np.ndarray, multiplier: np.ndarray, odd: bool) -> np.ndarray:
    spectrum = fftn(values) * (1j * multiplier if odd else multiplier)
    result = ifftn(spectrum)
    return result.real if np.isrealobj(values) else result


@dataclass(eq=False)
class KernelSymbol:
    """
    Real Fourier multiplier of one nonlocal operator tabulated on one grid, in
    DFT ordering. Odd kernels (`Riesz2D`, `TEpsAlpha`) store the real factor
    `m` of the multiplier `i m`.

    Attributes:
        grid (Grid): Grid the table belongs to.
        multiplier (np.ndarray): Real table with `grid.shape`.
        kind (KernelKind): Operator identity.
        eps (Optional[float]): Confinement parameter where applicable.
        axis (Optional[DipoleAxis]): Dipole orientation where applicable.
        derivative_axis (Optional[int]): Differentiated axis of odd kernels.

    Example:
        ```python
        from gpps import KernelSymbol, make_grid

        grid = make_grid(dim=2, extents=8.0, points=64)
        kernel = KernelSymbol.u2d(grid, eps=0.5)
        potential = kernel.apply(density)
        ```
    """

    grid: Grid
    multiplier: np.ndarray
    kind: KernelKind
    eps: Optional[float] = None
    axis: Optional[DipoleAxis] = None
    derivative_axis: Optional[int] = None

    def __post_init__(self):
        self.multiplier = np.asarray(self.multiplier, dtype=float)
        if self.multiplier.shape != self.grid.shape:
            raise ValueError(
                f"Multiplier shape {self.multiplier.shape} does not match grid "
                f"shape {self.grid.shape}."
            )
        if not np.all(np.isfinite(self.multiplier)):
            raise ValueError(f"{self.kind.value} multiplier has non-finite entries.")

    @property
    def odd(self) -> bool:
        return self.derivative_axis is not None

    def apply(self, values: np.ndarray) -> np.ndarray:
        values = _require_shape(values, self.grid)
        return _apply(values, self.multiplier, self.odd)

    @classmethod
    def dipolar_3d(cls, grid: Grid, axis: DipoleAxis) -> KernelSymbol:
        _require_dim(grid, 3, "Dip3D symbol")
        return cls(
            grid=grid,
            multiplier=symbol_dip3d(grid.wavenumber_mesh, axis),
            kind=KernelKind.DIP_3D,
            axis=axis,
        )

    @classmethod
    def u2d(cls, grid: Grid, eps: float) -> KernelSymbol:
        _require_dim(grid, 2, "U2dEps symbol")
        return cls(
            grid=grid,
            multiplier=_u2d_table(grid, eps),
            kind=KernelKind.U2D_EPS,
            eps=eps,
        )

    @classmethod
    def fractional_poisson_2d(cls, grid: Grid) -> KernelSymbol:
        _require_dim(grid, 2, "FracPoisson2D symbol")
        return cls(
            grid=grid,
            multiplier=_inverse_norm_table(grid),
            kind=KernelKind.FRAC_POISSON_2D,
        )

    @classmethod
    def u1d(cls, grid: Grid, eps: float) -> KernelSymbol:
        _require_dim(grid, 1, "U1dEps symbol")
        return cls(
            grid=grid,
            multiplier=_u1d_table(grid, eps),
            kind=KernelKind.U1D_EPS,
            eps=eps,
        )

    @classmethod
    def aniso_2d(cls, grid: Grid, axis: DipoleAxis) -> KernelSymbol:
        _require_dim(grid, 2, "Aniso2D symbol")
        return cls(
            grid=grid,
            multiplier=_aniso_table(grid, axis),
            kind=KernelKind.ANISO_2D,
            axis=axis,
        )

    @classmethod
    def riesz_2d(cls, grid: Grid, alpha: int) -> KernelSymbol:
        _require_dim(grid, 2, "Riesz2D symbol")
        return cls(
            grid=grid,
            multiplier=_odd_factor(grid, alpha) * _inverse_norm_table(grid),
            kind=KernelKind.RIESZ_2D,
            derivative_axis=alpha,
        )

    @classmethod
    def t_eps_alpha(cls, grid: Grid, eps: float, alpha: int) -> KernelSymbol:
        _require_dim(grid, 2, "TEpsAlpha symbol")
        return cls(
            grid=grid,
            multiplier=_odd_factor(grid, alpha) * _u2d_table(grid, eps),
            kind=KernelKind.T_EPS_ALPHA,
            eps=eps,
            derivative_axis=alpha,
        )

    @classmethod
    def rescaled_dipolar_3d(
        cls, grid: Grid, axis: DipoleAxis, eps: float, confined_axes: Sequence[int]
    ) -> KernelSymbol:
        """
        Projection symbol `(n.xi_eps)^2 / |xi_eps|^2` of the rescaled 3D problem,
        where `xi_eps` divides the confined components by `eps`.

        The table entries on the frequency cell that contains the confined-axis
        origin are replaced by their exact cell averages (closed form over the
        confined interval for one confined axis, equal-area disk average for
        two). Point values there are off by O(1) for every `eps`, which
        shows up as an `O(1/L)` bias in the effective coupling.

        Args:
            grid (Grid): 3D grid of the rescaled problem.
            axis (DipoleAxis): Dipole orientation.
            eps (float): Confinement parameter.
            confined_axes (Sequence[int]): `(2,)` for a pancake, `(0, 1)` for a
                cigar.

        Returns:
            KernelSymbol: Table with values in `[0, 1]`.
        """
        _require_dim(grid, 3, "RescaledDip3D symbol")
        return cls(
            grid=grid,
            multiplier=rescaled_projection_table(grid, axis, eps, tuple(confined_axes)),
            kind=KernelKind.RESCALED_DIP_3D,
            eps=eps,
            axis=axis,
        )

    def bound_violations(self) -> int:
        """
        Count nodes that violate the node-wise bounds of this kernel: `[-1, 2]`
        for `Dip3D`, `0 < m <= 1/|xi|` and `|xi|^2 m <= sqrt(2)/(sqrt(pi) eps)` for
        `U2dEps`, `xi^2 m <= 2 sqrt(2)/(sqrt(pi) eps)` for `U1dEps`, the
        `n_xi` sandwich for `Aniso2D`, `|m| <= 1` for `Riesz2D`, and `[0, 1]`
        for `RescaledDip3D`.
        """
        m = self.multiplier
        k_squared = self.grid.k_squared
        nonzero = k_squared > 0
        slack = _BOUND_RTOL * (1.0 + np.abs(m))
        if self.kind == KernelKind.DIP_3D:
            bad = (m < -1.0 - slack) | (m > 2.0 + slack)
        elif self.kind == KernelKind.U2D_EPS:
            bound = np.sqrt(2.0) / (np.sqrt(np.pi) * self.eps)
            bad = nonzero & (
                (m <= 0.0)
                | (m * self.grid.k_norm > 1.0 + slack)
                | (m * k_squared > bound * (1.0 + _BOUND_RTOL))
            )
        elif self.kind == KernelKind.U1D_EPS:
            bound = 2.0 * np.sqrt(2.0) / (np.sqrt(np.pi) * self.eps)
            bad = nonzero & (m * k_squared > bound * (1.0 + _BOUND_RTOL))
        elif self.kind == KernelKind.ANISO_2D:
            n3_squared = self.axis.n3_squared
            scale = _BOUND_RTOL * (1.0 + k_squared)
            bad = (m < -n3_squared * k_squared - scale) | (
                m > (1.0 - 2.0 * n3_squared) * k_squared + scale
            )
        elif self.kind == KernelKind.RIESZ_2D:
            bad = np.abs(m) > 1.0 + slack
        elif self.kind == KernelKind.RESCALED_DIP_3D:
            bad = (m < -slack) | (m > 1.0 + slack)
        else:
            bad = np.zeros(m.shape, dtype=bool)
        return int(np.count_nonzero(bad))


@lru_cache(maxsize=16)
def rescaled_projection_table(
    grid: Grid, axis: DipoleAxis, eps: float, confined_axes: Tuple[int, ...]
) -> np.ndarray:
    """
    Squared projection `(n . xi)^2 / |xi|^2` of the rescaled dipolar symbol, with
    the wavenumbers along `confined_axes` divided by `eps`.

    The table is pointwise except on the slice where every confined wavenumber
    is the origin: `table[:, :, 0]` for a pancake (`confined_axes=(2,)`) and
    `table[0, 0, :]` for a cigar (`confined_axes=(0, 1)`). That whole slice,
    not only the `xi = 0` entry, holds the mean of the symbol over the
    confined-axis origin cell, which is where the scaled wavenumbers leave the
    symbol unresolved as `eps` shrinks. The cached table is read-only.

    Args:
        grid (Grid): 3D grid in rescaled coordinates.
        axis (DipoleAxis): Dipole orientation.
        eps (float): Confinement parameter, positive.
        confined_axes (Tuple[int, ...]): `(2,)` or `(0, 1)`.

    Returns:
        np.ndarray: Table shaped like the grid.
    """
    if not np.isfinite(eps) or eps <= 0:
        raise ValueError(f"eps must be positive, {eps} given.")
    if confined_axes not in ((2,), (0, 1)):
        raise ValueError(
            f"confined_axes must be (2,) or (0, 1), {confined_axes} given."
        )
    n = axis.vector
    scaled = [
        k / eps if a in confined_axes else k for a, k in enumerate(grid.wavenumber_mesh)
    ]
    projection = sum(n[a] * scaled[a] for a in range(3))
    norm_squared = sum(s**2 for s in scaled)
    nonzero = norm_squared > 0
    table = np.where(
        nonzero, projection**2 / np.where(nonzero, norm_squared, 1.0), 0.0
    )
    if confined_axes == (2,):
        table[:, :, 0] = _pancake_cell_average(grid, axis, eps)
    else:
        table[0, 0, :] = _cigar_cell_average(grid, axis, eps)
    return _read_only(table)


def _pancake_cell_average(grid: Grid, axis: DipoleAxis, eps: float) -> np.ndarray:
    # mean over s = xi3 / eps in [-S, S] of (a + n3 s)^2 / (k^2 + s^2)
    k1, k2 = np.meshgrid(grid.wavenumbers[0], grid.wavenumbers[1], indexing="ij")
    a = axis.n1 * k1 + axis.n2 * k2
    k = np.sqrt(k1**2 + k2**2)
    half_width = 0.5 * grid.wavenumber_spacing[2] / eps
    n3_squared = axis.n3_squared
    positive = k > 0
    safe_k = np.where(positive, k, 1.0)
    correction = (
        (a**2 - n3_squared * safe_k**2)
        * np.arctan(half_width / safe_k)
        / (safe_k * half_width)
    )
    return n3_squared + np.where(positive, correction, 0.0)


def _cigar_cell_average(grid: Grid, axis: DipoleAxis, eps: float) -> np.ndarray:
    # mean over the disk |s| <= S, s = xi_perp / eps, of
    # (n_perp.s + n3 xi3)^2 / (|s|^2 + xi3^2)
    xi3 = grid.wavenumbers[2]
    radius_squared = (
        grid.wavenumber_spacing[0] * grid.wavenumber_spacing[1] / (np.pi * eps**2)
    )
    perp_squared = axis.n1**2 + axis.n2**2
    xi3_squared = xi3**2
    nonzero = xi3_squared > 0
    safe = np.where(nonzero, xi3_squared, 1.0)
    log_term = np.where(nonzero, safe * np.log1p(radius_squared / safe), 0.0)
    return (
        0.5 * perp_squared * (radius_squared - log_term)
        + axis.n3_squared * log_term
    ) / radius_squared


def nonlocal_2dI_multiplier(grid: Grid, eps: float, axis: DipoleAxis) -> np.ndarray:
    """`-n_xi U_eps^{2D}(|xi|)` on a 2D grid."""
    _require_dim(grid, 2, "nonlocal_2dI_multiplier")
    return -_aniso_table(grid, axis) * _u2d_table(grid, eps)


def nonlocal_2dII_multiplier(grid: Grid, axis: DipoleAxis) -> np.ndarray:
    _require_dim(grid, 2, "nonlocal_2dII_multiplier")
    return -_aniso_table(grid, axis) * _inverse_norm_table(grid)


def nonlocal_1d_multiplier(grid: Grid, eps: float) -> np.ndarray:
    _require_dim(grid, 1, "nonlocal_1d_multiplier")
    return -grid.k_squared * _u1d_table(grid, eps)


def spectral_pairing(rho: np.ndarray, multiplier: np.ndarray, grid: Grid) -> float:
    """
    `int rho (m(D) rho)` for real `rho`, evaluated from the DFT as
    `h^d / N sum m |DFT(rho)|^2`.
    """
    rho = _require_shape(rho, grid)
    power = np.abs(fftn(rho)) ** 2
    return float(np.sum(multiplier * power) * grid.cell_volume / grid.size)


def apply_nonlocal_2dI(
    rho: np.ndarray, grid: Grid, eps: float, axis: DipoleAxis
) -> np.ndarray:
    """
    `(d_{n_perp n_perp} - n3^2 Laplacian)(U_eps^{2D} * rho)`, multiplier
    `-n_xi U_eps^{2D}(|xi|)`.

    Args:
        rho (np.ndarray): Real density on a 2D grid.
        grid (Grid): The 2D grid.
        eps (float): Confinement parameter.
        axis (DipoleAxis): Dipole orientation.

    Returns:
        np.ndarray: Real field.
    """
    _require_dim(grid, 2, "apply_nonlocal_2dI")
    rho = _require_shape(rho, grid)
    multiplier = nonlocal_2dI_multiplier(grid, eps, axis)
    return _apply(rho, multiplier, odd=False)


def apply_nonlocal_2dII(rho: np.ndarray, grid: Grid, axis: DipoleAxis) -> np.ndarray:
    """
    `(d_{n_perp n_perp} - n3^2 Laplacian)(-Laplacian)^{-1/2} rho`, multiplier
    `-n_xi / |xi|` with zero mode 0.
    """
    _require_dim(grid, 2, "apply_nonlocal_2dII")
    rho = _require_shape(rho, grid)
    multiplier = nonlocal_2dII_multiplier(grid, axis)
    return _apply(rho, multiplier, odd=False)


def apply_nonlocal_1d(rho: np.ndarray, grid: Grid, eps: float) -> np.ndarray:
    """`d_zz (U_eps^{1D} * rho)`, multiplier `-xi^2 U_eps^{1D}(xi)`."""
    _require_dim(grid, 1, "apply_nonlocal_1d")
    rho = _require_shape(rho, grid)
    multiplier = nonlocal_1d_multiplier(grid, eps)
    return _apply(rho, multiplier, odd=False)


def dipolar_projection_multiplier(grid: Grid, axis: DipoleAxis) -> np.ndarray:
    """`(n.xi)^2 / |xi|^2`, zero at the origin; symbol of `-d_nn (-Laplacian)^{-1}`."""
    _require_dim(grid, 3, "dipolar_projection_multiplier")
    return _dipolar_projection_table(grid, axis)


def dipolar_3d_multiplier(
    grid: Grid, axis: DipoleAxis, beta: float, lam: float
) -> np.ndarray:
    """`(beta - lam) + 3 lam (n.xi)^2 / |xi|^2`; the Poisson part vanishes at 0."""
    _require_dim(grid, 3, "dipolar_3d_multiplier")
    return (beta - lam) + 3.0 * lam * dipolar_projection_multiplier(grid, axis)


def apply_dipolar_3d(
    rho: np.ndarray, grid: Grid, axis: DipoleAxis, beta: float, lam: float
) -> np.ndarray:
    """
    Contact plus dipolar potential of the 3D system,
    `(beta - lam) rho - 3 lam d_nn phi` with `-Laplacian phi = rho`.

    Args:
        rho (np.ndarray): Real density on a 3D grid.
        grid (Grid): The 3D grid.
        axis (DipoleAxis): Dipole orientation.
        beta (float): Contact strength.
        lam (float): Dipolar strength.

    Returns:
        np.ndarray: Real field.
    """
    _require_dim(grid, 3, "apply_dipolar_3d")
    rho = _require_shape(rho, grid)
    return _apply(rho, dipolar_3d_multiplier(grid, axis, beta, lam), odd=False)


def t_eps_alpha(f: np.ndarray, grid: Grid, eps: float, alpha: int) -> np.ndarray:
    """`d_alpha (U_eps^{2D} * f)`, multiplier `i xi_alpha U_eps^{2D}(|xi|)`."""
    f = _require_shape(f, grid)
    return KernelSymbol.t_eps_alpha(grid, eps, alpha).apply(f)


def riesz_alpha(f: np.ndarray, grid: Grid, alpha: int) -> np.ndarray:
    """Riesz transform `d_alpha (-Laplacian)^{-1/2} f`, multiplier `i xi_alpha/|xi|`."""
    f = _require_shape(f, grid)
    return KernelSymbol.riesz_2d(grid, alpha).apply(f)


def kernel_check_table(
    abs_xi: Sequence[float], eps_values: Sequence[float]
) -> List[Dict[str, Any]]:
    """
    Audit rows comparing closed-form symbols with adaptive quadrature of their
    defining integrals on a `(|xi|, eps)` lattice.

    Args:
        abs_xi (Sequence[float]): Positive `|xi|` samples.
        eps_values (Sequence[float]): Positive `eps` samples.

    Returns:
        List[Dict[str, Any]]: One row per kernel and lattice point with keys
            `kind, abs_xi, eps, closed_form, quadrature, rel_err`.
    """
    rows = []
    evaluators = (
        (KernelKind.U2D_EPS, symbol_u2d, u2d_quadrature),
        (KernelKind.U1D_EPS, symbol_u1d, u1d_quadrature),
    )
    for kind, closed, oracle in evaluators:
        for eps in eps_values:
            for r in abs_xi:
                closed_value = float(closed(r, eps))
                oracle_value = float(oracle(r, eps))
                rows.append(
                    {
                        "kind": kind.value,
                        "abs_xi": float(r),
                        "eps": float(eps),
                        "closed_form": closed_value,
                        "quadrature": oracle_value,
                        "rel_err": abs(closed_value - oracle_value)
                        / abs(oracle_value),
                    }
                )
    return rows
