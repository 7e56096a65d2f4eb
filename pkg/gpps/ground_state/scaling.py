from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from gpps.config import SCALING_LEAKAGE_TOLERANCE
from gpps.grid.core import Grid, Wavefunction
from gpps.grid.spectral import fftn
from gpps.models.core import EnergyBreakdown, ModelParams, energy
from gpps.utils.internal import ResolutionAlarm

Profile = Union[Wavefunction, Callable[..., np.ndarray]]

_RESAMPLE_CHUNK = 4096


@dataclass
class ScalingProbeResult:
    """
    Energies of a dilation family of one profile.

    Attributes:
        scales (np.ndarray): Dilation parameter per member (`delta` or
            `eps1`), in the order supplied.
        energies (np.ndarray): Total energy per member.
        mass_leakage (np.ndarray): `|mass(member) - mass(profile)|` before the
            member is renormalized.
        parts (List[EnergyBreakdown]): Full breakdown per member.
    """

    scales: np.ndarray
    energies: np.ndarray
    mass_leakage: np.ndarray
    parts: List[EnergyBreakdown] = field(default_factory=list)

    def _by_shrinking_scale(self) -> Tuple[np.ndarray, np.ndarray]:
        order = np.argsort(-self.scales)
        return self.scales[order], self.energies[order]

    def is_strictly_decreasing(self) -> bool:
        """True when the energy drops at every step towards smaller scales."""
        _, energies = self._by_shrinking_scale()
        return bool(np.all(np.diff(energies) < 0))

    def fit_inverse_square(self) -> Tuple[float, float, float]:
        """Least-squares `(A, B, C)` of `E = A s^-2 + B + C s^2`."""
        if self.scales.size < 3:
            raise ValueError(
                f"The fit needs at least 3 scales, {self.scales.size} given."
            )
        design = np.stack(
            [self.scales**-2, np.ones_like(self.scales), self.scales**2], axis=1
        )
        coefficients, *_ = np.linalg.lstsq(design, self.energies, rcond=None)
        return tuple(float(c) for c in coefficients)

    def divergence_exponent(self, points: int = 3) -> float:
        """
        Slope of `log|E|` against `log(1/s)` over the `points` smallest scales.
        """
        if points < 2 or points > self.scales.size:
            raise ValueError(
                f"points must lie in [2, {self.scales.size}], {points} given."
            )
        scales, energies = self._by_shrinking_scale()
        scales, energies = scales[-points:], energies[-points:]
        if np.any(energies == 0):
            raise ValueError("Energies must be non-zero for a log-log fit.")
        slope, _ = np.polyfit(np.log(1.0 / scales), np.log(np.abs(energies)), 1)
        return float(slope)


def _interpolation_matrix(
    targets: np.ndarray, extent: float, wavenumbers: np.ndarray
) -> np.ndarray:
    count = wavenumbers.size
    offset = targets + extent
    matrix = np.exp(1j * np.outer(offset, wavenumbers))
    matrix[:, count // 2] = np.cos(wavenumbers[count // 2] * offset)
    outside = (targets < -extent) | (targets >= extent)
    matrix[outside, :] = 0.0
    return matrix / count


def _resample(profile: Wavefunction, grid: Grid, scales: Sequence[float]) -> np.ndarray:
    # trigonometric interpolation of the profile at x_a / s_a, zero off its domain
    source = profile.grid
    values = fftn(profile.values)
    for axis in range(grid.dim):
        matrix = _interpolation_matrix(
            grid.axes[axis] / scales[axis],
            source.extents[axis],
            source.wavenumbers[axis],
        )
        values = np.moveaxis(np.tensordot(matrix, values, axes=([1], [axis])), 0, axis)
    if not np.any(profile.values.imag):
        values = values.real
    return values


def _resample_at(
    profile: Wavefunction, coordinates: Sequence[np.ndarray]
) -> np.ndarray:
    # same interpolant at scattered points, in chunks of _RESAMPLE_CHUNK points
    source = profile.grid
    spectrum = fftn(profile.values)
    first, second = (np.ravel(c) for c in coordinates)
    values = np.empty(first.size, dtype=complex)
    for start in range(0, first.size, _RESAMPLE_CHUNK):
        chunk = slice(start, start + _RESAMPLE_CHUNK)
        rows = _interpolation_matrix(
            first[chunk], source.extents[0], source.wavenumbers[0]
        )
        columns = _interpolation_matrix(
            second[chunk], source.extents[1], source.wavenumbers[1]
        )
        values[chunk] = np.sum((rows @ spectrum) * columns, axis=1)
    values = values.reshape(np.shape(coordinates[0]))
    if not np.any(profile.values.imag):
        values = values.real
    return values


def _dilate(
    profile: Profile, grid: Grid, scales: Sequence[float], theta: float = 0.0
) -> np.ndarray:
    amplitude = 1.0 / np.sqrt(np.prod(scales))
    if theta == 0.0:
        if isinstance(profile, Wavefunction):
            return amplitude * _resample(profile, grid, scales)
        coordinates = [x / s for x, s in zip(grid.mesh, scales)]
        return amplitude * np.asarray(profile(*coordinates))
    x, y = grid.mesh
    cos, sin = np.cos(theta), np.sin(theta)
    coordinates = [(x * cos + y * sin) / scales[0], (y * cos - x * sin) / scales[1]]
    if isinstance(profile, Wavefunction):
        return amplitude * _resample_at(profile, coordinates)
    return amplitude * np.asarray(profile(*coordinates))


def _probe(
    params: ModelParams,
    profile: Profile,
    grid: Optional[Grid],
    members: Sequence[Tuple[float, Tuple[float, float]]],
    theta: float = 0.0,
) -> ScalingProbeResult:
    if params.dim != 2:
        raise ValueError(
            f"Scaling probes act on 2D models, {params.kind.value} given."
        )
    if grid is None:
        if not isinstance(profile, Wavefunction):
            raise ValueError("A grid is required when the profile is a callable.")
        grid = profile.grid
    if grid.dim != 2:
        raise ValueError(f"Scaling probes need a 2D grid, {grid.dim}D given.")
    reference = profile.mass if isinstance(profile, Wavefunction) else 1.0

    scales, energies, leakages, parts = [], [], [], []
    for scale, axis_scales in members:
        if not scale > 0:
            raise ValueError(f"Scales must be positive, {scale} given.")
        values = _dilate(profile, grid, axis_scales, theta)
        member = Wavefunction(grid=grid, values=values)
        leakage = abs(member.mass - reference)
        if leakage > SCALING_LEAKAGE_TOLERANCE:
            raise ResolutionAlarm(
                f"Scale {scale} leaks mass {leakage:.3e} on the grid; refine or "
                "widen the grid."
            )
        breakdown = energy(params, member.normalized())
        scales.append(scale)
        energies.append(breakdown.total)
        leakages.append(leakage)
        parts.append(breakdown)
    return ScalingProbeResult(
        scales=np.array(scales, dtype=float),
        energies=np.array(energies),
        mass_leakage=np.array(leakages),
        parts=parts,
    )


def scaling_probe_2dI(
    params: ModelParams,
    profile: Profile,
    deltas: Sequence[float],
    grid: Optional[Grid] = None,
) -> ScalingProbeResult:
    """
    Energies of the isotropic dilations `Phi_delta(x) = Phi(x / delta) / delta`.

    When `beta + lam (1 - 3 n3^2) / 2 < -sqrt(2 pi) C_b eps` the energies drop
    without bound as `delta -> 0` for a suitable profile.

    Args:
        params (ModelParams): A 2D model, typically `Quasi2DI`.
        profile (Union[Wavefunction, Callable]): Unit-mass profile, either
            sampled on a grid or as a vectorized `f(x, y)`.
        deltas (Sequence[float]): Dilation ladder.
        grid (Optional[Grid]): Grid the family is evaluated on; defaults to
            the profile's grid.

    Returns:
        ScalingProbeResult: Energies per `delta`.

    Raises:
        ResolutionAlarm: When a member's mass on the grid differs from the
            profile's by more than `1e-8`.

    Example:
        ```python
        import numpy as np
        from gpps import ModelKind, ModelParams, PotentialSpec, make_grid
        from gpps.ground_state import scaling_probe_2dI

        params = ModelParams(
            kind=ModelKind.QUASI_2D_I, beta=-30.0, lam=0.0, eps=0.5,
            potential=PotentialSpec.harmonic(1.0),
        )
        grid = make_grid(dim=2, extents=8.0, points=256)
        gaussian = lambda x, y: np.exp(-(x**2 + y**2) / 2) / np.sqrt(np.pi)
        result = scaling_probe_2dI(params, gaussian, [1, 0.5, 0.25], grid)
        result.is_strictly_decreasing()
        # True
        ```
    """
    members = [(float(delta), (float(delta), float(delta))) for delta in deltas]
    return _probe(params, profile, grid, members)


def scaling_probe_2dII(
    params: ModelParams,
    profile: Profile,
    eps1_list: Sequence[float],
    kappa: float,
    grid: Optional[Grid] = None,
    theta: Optional[float] = None,
) -> ScalingProbeResult:
    """
    Energies of the rotated anisotropic dilations
    `Phi(u / eps1, v / eps2) / sqrt(eps1 eps2)` with `eps2 = kappa * eps1`,
    `u = x cos(theta) + y sin(theta)` and `v = -x sin(theta) + y cos(theta)`.

    By default `theta` is the angle of the in-plane dipole component
    `(n1, n2)`, so `eps1` measures the width along it; `theta = 0` when the
    dipoles are perpendicular to the plane. With `kappa > 1` and
    `lam < 0 < 1 - 2 n3^2` the dipolar energy falls like `-eps1^-3`; with
    `kappa < 1` and `lam > 0` the `-n3^2` part of the symbol dominates.

    Args:
        params (ModelParams): A 2D model, typically `Quasi2DII`.
        profile (Union[Wavefunction, Callable]): Unit-mass profile.
        eps1_list (Sequence[float]): Ladder of `eps1`.
        kappa (float): Aspect ratio `eps2 / eps1`.
        grid (Optional[Grid]): Grid the family is evaluated on.
        theta (Optional[float]): Rotation angle in radians; `None` aligns the
            first axis with `(n1, n2)`.

    Returns:
        ScalingProbeResult: Energies per `eps1`.

    Raises:
        ResolutionAlarm: As `scaling_probe_2dI`.
    """
    if not kappa > 0:
        raise ValueError(f"kappa must be positive, {kappa} given.")
    if theta is None:
        n1, n2 = params.axis.n1, params.axis.n2
        theta = float(np.arctan2(n2, n1)) if n1 != 0 or n2 != 0 else 0.0
    if not np.isfinite(theta):
        raise ValueError(f"theta must be finite, {theta} given.")
    members = [(float(e), (float(e), float(kappa * e))) for e in eps1_list]
    return _probe(params, profile, grid, members, float(theta))
