"""
Fourier symbols of the nonlocal interaction kernels, evaluated pointwise.

Closed forms are the production evaluators. The `*_quadrature` functions integrate
the defining integrals adaptively and serve as oracles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy import integrate, special

from gpps.config import AXIS_RENORMALIZE_TOLERANCE, UNIT_AXIS_TOLERANCE
from gpps.utils.internal import warn

ArrayLike = Union[float, np.ndarray]

# symbols that diverge or are direction dependent at xi = 0 take this value there
ZERO_MODE_VALUE = 0.0

_SCALED_EXP1_SWITCH = 50.0
_SCALED_EXP1_TERMS = 20


@dataclass(frozen=True)
class DipoleAxis:
    """
    Unit dipole orientation `n = (n1, n2, n3)`.

    Attributes:
        n1 (float): First component.
        n2 (float): Second component.
        n3 (float): Third component, along the strongly confined axis of the
            pancake reduction.
    """

    n1: float
    n2: float
    n3: float

    def __post_init__(self):
        norm = float(np.sqrt(self.n1**2 + self.n2**2 + self.n3**2))
        if abs(norm - 1.0) > UNIT_AXIS_TOLERANCE:
            raise ValueError(
                f"Dipole axis must be a unit vector, |n| = {norm!r} given for "
                f"({self.n1}, {self.n2}, {self.n3})."
            )

    @classmethod
    def from_vector(
        cls,
        vector: Sequence[float],
        tolerance: float = AXIS_RENORMALIZE_TOLERANCE,
    ) -> DipoleAxis:
        """
        Build an axis from three components, renormalizing near-unit input.

        Args:
            vector (Sequence[float]): Three components.
            tolerance (float): Largest accepted `| |n| - 1 |`; within it the
                vector is rescaled to unit length with a warning.

        Returns:
            DipoleAxis: The unit axis.

        Example:
            ```python
            from gpps import DipoleAxis

            DipoleAxis.from_vector([0.6, 0.0, 0.8])
            # DipoleAxis(n1=0.6, n2=0.0, n3=0.8)
            ```
        """
        values = np.asarray(vector, dtype=float)
        if values.shape != (3,) or not np.all(np.isfinite(values)):
            raise ValueError(
                f"Dipole axis needs three finite components, {vector!r} given."
            )
        norm = float(np.linalg.norm(values))
        deviation = abs(norm - 1.0)
        if deviation > tolerance:
            raise ValueError(
                f"Dipole axis must have unit norm, |n| = {norm:.6g} given for "
                f"{list(values)}."
            )
        if deviation > UNIT_AXIS_TOLERANCE:
            warn(f"Dipole axis {list(values)} has |n| = {norm!r}; renormalized.")
            values = values / norm
        return cls(*(float(v) for v in values))

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.n1, self.n2, self.n3])

    @property
    def n3_squared(self) -> float:
        return self.n3**2


def _finalize(value: np.ndarray) -> ArrayLike:
    if value.ndim == 0:
        return float(value)
    return value


def _check_eps(eps: float) -> None:
    if not np.isfinite(eps) or eps <= 0:
        raise ValueError(f"eps must be positive, {eps} given.")


def symbol_dip3d(xi: Sequence[ArrayLike], axis: DipoleAxis) -> ArrayLike:
    """
    Fourier symbol of the dipolar kernel, `-1 + 3 (n.xi)^2 / |xi|^2`, with value
    0 at `xi = 0`.

    Args:
        xi (Sequence[ArrayLike]): Three wavevector components (scalars or
            broadcastable arrays).
        axis (DipoleAxis): Dipole orientation.

    Returns:
        ArrayLike: Symbol values in `[-1, 2]`.
    """
    xi1, xi2, xi3 = (np.asarray(component, dtype=float) for component in xi)
    norm_squared = xi1**2 + xi2**2 + xi3**2
    projection = axis.n1 * xi1 + axis.n2 * xi2 + axis.n3 * xi3
    nonzero = norm_squared > 0
    safe = np.where(nonzero, norm_squared, 1.0)
    value = np.where(nonzero, -1.0 + 3.0 * projection**2 / safe, ZERO_MODE_VALUE)
    return _finalize(value)


def symbol_u2d(r: ArrayLike, eps: float) -> ArrayLike:
    """
    Fourier symbol of the quasi-2D kernel,
    `(1/pi) int_R exp(-eps^2 s^2 / 2) / (r^2 + s^2) ds`, evaluated as
    `erfcx(eps r / sqrt(2)) / r`. The integral diverges at `r = 0`, where the
    zero-mode value is returned.

    Args:
        r (ArrayLike): `|xi| >= 0`.
        eps (float): Confinement parameter, positive.

    Returns:
        ArrayLike: Symbol values, `0 < value <= 1/r` away from the origin.

    Example:
        ```python
        from gpps.kernels.symbols import symbol_u2d

        symbol_u2d(1.0, eps=1.0)
        # 0.5231...
        ```
    """
    _check_eps(eps)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("symbol_u2d expects |xi| >= 0.")
    positive = r > 0
    safe = np.where(positive, r, 1.0)
    value = np.where(
        positive, special.erfcx(eps * safe / np.sqrt(2.0)) / safe, ZERO_MODE_VALUE
    )
    return _finalize(value)


def u2d_quadrature(r: float, eps: float) -> float:
    """
    Adaptive quadrature of the defining integral of `symbol_u2d`, after the
    substitution `s = r tan(theta)` which maps it to a bounded integrand on
    `[0, pi/2]`.
    """
    _check_eps(eps)
    if r <= 0:
        raise ValueError(f"u2d_quadrature needs r > 0, {r} given.")
    scale = eps * r

    def integrand(theta: float) -> float:
        return np.exp(-0.5 * (scale * np.tan(theta)) ** 2)

    breaks = [0.0]
    for t in (1.0, 3.0, 6.0):
        breaks.append(float(np.arctan(np.sqrt(2.0) * t / scale)))
    breaks.append(0.5 * np.pi)
    total = 0.0
    for lower, upper in zip(breaks[:-1], breaks[1:]):
        value, _ = integrate.quad(
            integrand, lower, upper, epsabs=0.0, epsrel=1e-12, limit=200
        )
        total += value
    return 2.0 * total / (np.pi * r)


def scaled_exp1(a: ArrayLike) -> ArrayLike:
    """
    `exp(a) * E1(a)` for `a > 0` without overflow; the asymptotic series takes
    over for large arguments.
    """
    a = np.asarray(a, dtype=float)
    shape = a.shape
    a = np.atleast_1d(a).ravel()
    if np.any(a <= 0):
        raise ValueError("scaled_exp1 expects positive arguments.")
    small = a <= _SCALED_EXP1_SWITCH
    result = np.empty_like(a)
    a_small = a[small]
    result[small] = np.exp(a_small) * special.exp1(a_small)
    a_large = a[~small]
    if a_large.size:
        term = 1.0 / a_large
        series = term.copy()
        for k in range(1, _SCALED_EXP1_TERMS):
            term = -term * k / a_large
            series += term
        result[~small] = series
    return _finalize(result.reshape(shape))


def symbol_u1d(xi: ArrayLike, eps: float) -> ArrayLike:
    """
    Fourier symbol of the quasi-1D kernel,
    `(sqrt(2) eps / sqrt(pi)) int_0^inf exp(-eps^2 s / 2) / (xi^2 + s) ds`,
    evaluated as `(sqrt(2) eps / sqrt(pi)) exp(a) E1(a)` with
    `a = eps^2 xi^2 / 2`. The value at `xi = 0` is the zero-mode value; the
    symbol is only ever used under `d_zz`.

    Args:
        xi (ArrayLike): Wavenumbers.
        eps (float): Confinement parameter, positive.

    Returns:
        ArrayLike: Symbol values.
    """
    _check_eps(eps)
    xi = np.asarray(xi, dtype=float)
    a = np.atleast_1d(0.5 * (eps * xi) ** 2)
    nonzero = a > 0
    value = np.full(a.shape, ZERO_MODE_VALUE)
    if np.any(nonzero):
        value[nonzero] = (
            np.sqrt(2.0) * eps / np.sqrt(np.pi) * np.asarray(scaled_exp1(a[nonzero]))
        )
    return _finalize(value.reshape(xi.shape))


def u1d_quadrature(xi: float, eps: float) -> float:
    """
    Adaptive quadrature of the defining integral of `symbol_u1d`, written as
    `int_0^inf exp(-a (e^v - 1)) dv` after `s = xi^2 (e^v - 1)`.
    """
    _check_eps(eps)
    if xi == 0:
        raise ValueError("u1d_quadrature needs xi != 0.")
    a = 0.5 * (eps * xi) ** 2

    def integrand(v: float) -> float:
        return np.exp(-a * np.expm1(v))

    breaks = [0.0] + [float(np.log1p(t / a)) for t in (1.0, 10.0, 40.0, 745.0)]
    total = 0.0
    for lower, upper in zip(breaks[:-1], breaks[1:]):
        value, _ = integrate.quad(
            integrand, lower, upper, epsabs=0.0, epsrel=1e-12, limit=200
        )
        total += value
    return np.sqrt(2.0) * eps / np.sqrt(np.pi) * total


def symbol_aniso2d(xi: Sequence[ArrayLike], axis: DipoleAxis) -> ArrayLike:
    """
    `n_xi = (n1 xi1 + n2 xi2)^2 - n3^2 |xi|^2`, bounded by
    `-n3^2 |xi|^2 <= n_xi <= (1 - 2 n3^2) |xi|^2`.
    """
    xi1, xi2 = (np.asarray(component, dtype=float) for component in xi)
    value = (axis.n1 * xi1 + axis.n2 * xi2) ** 2 - axis.n3_squared * (xi1**2 + xi2**2)
    return _finalize(np.asarray(value))


def kernel_u1d_real_space(z: ArrayLike, eps: float) -> ArrayLike:
    """
    Real-space quasi-1D kernel
    `U(z) = sqrt(2)/(sqrt(pi) eps) exp(z^2/(2 eps^2))
    int_|z|^inf exp(-s^2/(2 eps^2)) ds`,
    which equals `erfcx(|z| / (sqrt(2) eps))`.
    """
    _check_eps(eps)
    z = np.asarray(z, dtype=float)
    return _finalize(special.erfcx(np.abs(z) / (np.sqrt(2.0) * eps)))


def kernel_u2d_real_space(r: float, eps: float) -> float:
    """
    Real-space quasi-2D kernel
    `U(x) = 1/(2 sqrt(2) pi^{3/2}) int_R exp(-s^2/2) / sqrt(|x|^2 + eps^2 s^2) ds`
    by adaptive quadrature, for `|x| > 0`.
    """
    _check_eps(eps)
    if r <= 0:
        raise ValueError(f"kernel_u2d_real_space needs r > 0, {r} given.")
    value, _ = integrate.quad(
        lambda s: np.exp(-0.5 * s**2) / np.sqrt(r**2 + (eps * s) ** 2),
        0.0,
        np.inf,
        epsabs=0.0,
        epsrel=1e-12,
        limit=200,
    )
    return 2.0 * value / (2.0 * np.sqrt(2.0) * np.pi**1.5)


def symbol_virial_weight(r: ArrayLike, eps: float) -> ArrayLike:
    """
    `(1/pi) int_R s^2 exp(-eps^2 s^2 / 2) / (r^2 + s^2)^2 ds`, the radial weight of
    the dipolar correction in the quasi-2D variance identity, in closed form
    `U(r)/2 + (eps^2 r / 2) erfcx(eps r / sqrt(2)) - eps / sqrt(2 pi)`. The
    leading terms cancel for large `eps r`, where an asymptotic series is used.
    Returns 0 at `r = 0`.
    """
    _check_eps(eps)
    r = np.asarray(r, dtype=float)
    shape = r.shape
    r = np.atleast_1d(r).ravel()
    value = np.zeros_like(r)
    x = eps * r / np.sqrt(2.0)
    direct = (r > 0) & (x <= 20.0)
    if np.any(direct):
        rd, xd = r[direct], x[direct]
        value[direct] = (
            0.5 * special.erfcx(xd) / rd
            + 0.5 * eps**2 * rd * special.erfcx(xd)
            - eps / np.sqrt(2.0 * np.pi)
        )
    series = x > 20.0
    if np.any(series):
        u = 1.0 / (2.0 * x[series] ** 2)
        coefficients = (2.0, -12.0, 90.0, -840.0, 9450.0)
        total = np.zeros_like(u)
        for power, coefficient in enumerate(coefficients, start=2):
            total += coefficient * u**power
        value[series] = eps / np.sqrt(2.0 * np.pi) * total
    return _finalize(value.reshape(shape))


def virial_weight_gauss_legendre(
    r: ArrayLike, eps: float, nodes: int = 64, cutoff: float = 8.0
) -> ArrayLike:
    """
    Gauss-Legendre evaluation of the integral in `symbol_virial_weight` on
    `s in [0, cutoff / eps]`. Inaccurate once `r` drops well below the node
    spacing.
    """
    _check_eps(eps)
    r = np.asarray(r, dtype=float)
    abscissae, weights = np.polynomial.legendre.leggauss(nodes)
    upper = cutoff / eps
    s = 0.5 * upper * (abscissae + 1.0)
    w = 0.5 * upper * weights
    r_squared = r[..., None] ** 2
    integrand = s**2 * np.exp(-0.5 * (eps * s) ** 2) / (r_squared + s**2) ** 2
    value = 2.0 / np.pi * np.sum(w * integrand, axis=-1)
    value = np.where(r > 0, value, 0.0)
    return _finalize(np.asarray(value))


def symbol_u1d_virial(xi: ArrayLike, eps: float) -> ArrayLike:
    """
    `-(xi^2 U + xi^3 U')` for the quasi-1D symbol `U = symbol_u1d`, the radial
    weight of the nonlocal term in the quasi-1D variance identity. With
    `t = xi^2` and `a = eps^2 / 2` it equals
    `(sqrt(2) eps / sqrt(pi)) t (2 - (1 + 2 a t) exp(a t) E1(a t))`; the
    asymptotic series `sum_j (-1)^(j+1) (j-1)! (2j-1) / (a t)^j` takes over
    for large `a t`. Returns 0 at `xi = 0`.
    """
    _check_eps(eps)
    xi = np.asarray(xi, dtype=float)
    shape = xi.shape
    t = np.atleast_1d(xi**2).ravel()
    x = 0.5 * eps**2 * t
    value = np.zeros_like(t)
    direct = (x > 0) & (x <= _SCALED_EXP1_SWITCH)
    if np.any(direct):
        xd = x[direct]
        bracket = 2.0 - (1.0 + 2.0 * xd) * np.asarray(scaled_exp1(xd))
        value[direct] = t[direct] * bracket
    series = x > _SCALED_EXP1_SWITCH
    if np.any(series):
        xs = x[series]
        total = np.zeros_like(xs)
        factorial = 1.0
        for j in range(1, _SCALED_EXP1_TERMS + 1):
            total += (-1.0) ** (j + 1) * factorial * (2 * j - 1) / xs**j
            factorial *= j
        value[series] = t[series] * total
    value *= np.sqrt(2.0) * eps / np.sqrt(np.pi)
    return _finalize(value.reshape(shape))
