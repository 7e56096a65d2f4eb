from __future__ import annotations

from typing import TYPE_CHECKING, List, Optional, Tuple

import numpy as np

from gpps.config import (
    CADENCE_TOLERANCE,
    I_QUADRATURE_CUTOFF,
    I_QUADRATURE_NODES,
)
from gpps.grid.core import Grid, Wavefunction
from gpps.grid.spectral import gradient_spectral, integrate
from gpps.kernels.core import (
    dipolar_projection_multiplier,
    nonlocal_2dII_multiplier,
    spectral_pairing,
)
from gpps.kernels.symbols import (
    symbol_aniso2d,
    symbol_u1d_virial,
    symbol_virial_weight,
    virial_weight_gauss_legendre,
)
from gpps.models.core import ModelKind, ModelParams, energy

if TYPE_CHECKING:
    from gpps.dynamics.core import ObservableSeries

VIRIAL_METHODS = ("closed_form", "quadrature")


def variance(psi: Wavefunction) -> float:
    """`sigma_V = int |x|^2 |psi|^2`."""
    return float(integrate(psi.grid.radius_squared * psi.density, psi.grid))


def variance_rate(psi: Wavefunction) -> float:
    """`d sigma_V / dt = 2 Im int conj(psi) (x . grad psi)`."""
    gradient = gradient_spectral(psi.values, psi.grid)
    dilation = sum(x * g for x, g in zip(psi.grid.mesh, gradient))
    return 2.0 * float(np.imag(integrate(np.conj(psi.values) * dilation, psi.grid)))


def _virial_weight(grid: Grid, eps: float, method: str) -> np.ndarray:
    if method == "closed_form":
        return np.asarray(symbol_virial_weight(grid.k_norm, eps))
    if method == "quadrature":
        return np.asarray(
            virial_weight_gauss_legendre(
                grid.k_norm, eps, nodes=I_QUADRATURE_NODES, cutoff=I_QUADRATURE_CUTOFF
            )
        )
    raise ValueError(f"method must be one of {VIRIAL_METHODS}, {method!r} given.")


def _check_state(params: ModelParams, psi: Wavefunction) -> None:
    if psi.grid.dim != params.dim:
        raise ValueError(
            f"{params.kind.value} needs a {params.dim}D field, "
            f"{psi.grid.dim}D given."
        )


def dipolar_virial_integral(
    params: ModelParams, psi: Wavefunction, method: str = "closed_form"
) -> float:
    """
    Dipolar correction `I` of the quasi-2D I variance identity,
    `(2 pi)^-2 int n_xi w(|xi|) |rho^(xi)|^2 dxi` with
    `w(r) = (1/pi) int_R s^2 exp(-eps^2 s^2 / 2) / (r^2 + s^2)^2 ds`.

    Args:
        params (ModelParams): `Quasi2DI` parameters.
        psi (Wavefunction): State on a 2D grid.
        method (str): `"closed_form"` (erfcx based) or `"quadrature"`
            (Gauss-Legendre in `s`).

    Returns:
        float: `I` for the density of `psi`.
    """
    if params.kind != ModelKind.QUASI_2D_I:
        raise ValueError(
            f"The dipolar virial integral is defined for Quasi2DI, "
            f"{params.kind.value} given."
        )
    _check_state(params, psi)
    grid = psi.grid
    table = symbol_aniso2d(grid.wavenumber_mesh, params.axis) * _virial_weight(
        grid, params.eps, method
    )
    return spectral_pairing(psi.density, table, grid)


def dipolar_virial_bounds(
    params: ModelParams, psi: Wavefunction
) -> Tuple[float, float]:
    """
    Bounds `-(sqrt(2) n3^2 / (sqrt(pi) eps)) |psi|_4^4 <= I <=
    (sqrt(2) max(1 - 2 n3^2, 0) / (sqrt(pi) eps)) |psi|_4^4`.
    """
    if params.kind != ModelKind.QUASI_2D_I:
        raise ValueError(
            f"The dipolar virial bounds are defined for Quasi2DI, "
            f"{params.kind.value} given."
        )
    quartic = psi.norm(4.0) ** 4
    scale = np.sqrt(2.0) / (np.sqrt(np.pi) * params.eps) * quartic
    n3_squared = params.axis.n3_squared
    return -n3_squared * scale, max(1.0 - 2.0 * n3_squared, 0.0) * scale


def virial_multiplier(
    params: ModelParams, grid: Grid, method: str = "closed_form"
) -> Optional[np.ndarray]:
    """
    `(d - 2) m + xi . grad m` for the nonlocal multiplier `m` of the model,
    coefficient included; `None` for the cubic models.
    """
    kind = params.kind
    coefficient = params.nonlocal_coefficient
    if kind == ModelKind.GPPS_3D:
        # degree 0 in xi
        return coefficient * dipolar_projection_multiplier(grid, params.axis)
    if kind == ModelKind.QUASI_2D_I:
        aniso = symbol_aniso2d(grid.wavenumber_mesh, params.axis)
        return -2.0 * coefficient * aniso * _virial_weight(grid, params.eps, method)
    if kind == ModelKind.QUASI_2D_II:
        # degree 1 in xi
        return coefficient * nonlocal_2dII_multiplier(grid, params.axis)
    if kind == ModelKind.QUASI_1D:
        return coefficient * np.asarray(
            symbol_u1d_virial(grid.wavenumber_mesh[0], params.eps)
        )
    return None


def virial_rhs(
    params: ModelParams, psi: Wavefunction, method: str = "closed_form"
) -> float:
    """
    Analytic second time derivative of the variance,
    `4 E - 2 int (2 V + x . grad V) rho + (d - 2) g |rho|_2^2
    + (2 pi)^-d int ((d - 2) m + xi . grad m) |rho^|^2`,
    where `g` is the local coefficient and `m` the nonlocal multiplier. For
    `Quasi2DI` the last term is `3 lam I`.

    Args:
        params (ModelParams): Model parameters.
        psi (Wavefunction): State on a grid of dimension `params.dim`.
        method (str): Evaluation of the quasi-2D I weight, see
            `dipolar_virial_integral`.

    Returns:
        float: `d^2 sigma_V / dt^2` at `psi`.

    Example:
        ```python
        from gpps import ModelKind, ModelParams, PotentialSpec, Wavefunction
        from gpps import make_grid
        from gpps.dynamics import virial_rhs

        grid = make_grid(dim=2, extents=8.0, points=64)
        params = ModelParams(
            kind=ModelKind.LIMIT_2D, beta=0.0, lam=0.0,
            potential=PotentialSpec.harmonic(1.0),
        )
        virial_rhs(params, Wavefunction.gaussian(grid))
        # 0.0 for the stationary ground state
        ```
    """
    _check_state(params, psi)
    grid = psi.grid
    rho = psi.density
    parts = energy(params, psi)
    trap = params.potential.evaluate(grid)
    trap_term = integrate(
        (2.0 * trap + params.potential.virial_term(grid)) * rho, grid
    )
    total = 4.0 * parts.total - 2.0 * trap_term
    total += 2.0 * (grid.dim - 2) * parts.contact
    multiplier = virial_multiplier(params, grid, method)
    if multiplier is not None:
        total += spectral_pairing(rho, multiplier, grid)
    return float(total)


def _uniform_step(times: np.ndarray) -> float:
    steps = np.diff(times)
    if np.any(steps <= 0):
        raise ValueError("Time stamps must be strictly increasing.")
    step = float(np.mean(steps))
    if np.max(np.abs(steps - step)) > 1e-9 * step:
        raise ValueError("Variance diagnostics need a uniform recording cadence.")
    return step


def variance_diagnostics(
    params: ModelParams,
    series: ObservableSeries,
    states: Optional[List[Wavefunction]] = None,
    method: str = "closed_form",
) -> np.ndarray:
    """
    Compare the centered second difference of the recorded variance with the
    analytic right-hand side of the variance identity.

    The residual at interior sample `i` is
    `|(s[i+1] - 2 s[i] + s[i-1]) / dt^2 - rhs[i]| / max|rhs|`; the two end
    samples are `nan`. The right-hand side is recomputed from `states` when
    they are given and read from `series.virial_rhs` otherwise.

    Args:
        params (ModelParams): Model parameters of the recorded run.
        series (ObservableSeries): Samples with a uniform cadence.
        states (Optional[List[Wavefunction]]): States at the sample times.
        method (str): Evaluation of the quasi-2D I weight.

    Returns:
        np.ndarray: Relative residual per sample.

    Raises:
        ValueError: When there are fewer than 5 samples, the cadence is not
            uniform, or the estimated truncation or round-off error of the
            second differences exceeds `CADENCE_TOLERANCE` of the signal.
    """
    times = np.asarray(series.t, dtype=float)
    sigma = np.asarray(series.sigma_v, dtype=float)
    if times.size < 5 or sigma.size != times.size:
        raise ValueError(
            f"Variance diagnostics need at least 5 samples, {times.size} given."
        )
    if states is not None:
        if len(states) != times.size:
            raise ValueError(
                f"Expected {times.size} states, {len(states)} given."
            )
        rhs = np.array([virial_rhs(params, psi, method) for psi in states])
    else:
        rhs = np.asarray(series.virial_rhs, dtype=float)
    step = _uniform_step(times)

    second = (sigma[2:] - 2.0 * sigma[1:-1] + sigma[:-2]) / step**2
    scale = max(float(np.max(np.abs(rhs))), np.finfo(float).tiny)
    truncation = np.max(np.abs(second[2:] - 2.0 * second[1:-1] + second[:-2])) / 12.0
    noise = 4.0 * np.finfo(float).eps * float(np.max(np.abs(sigma))) / step**2
    if max(truncation, noise) > CADENCE_TOLERANCE * scale:
        raise ValueError(
            f"Recording cadence {step:.3e} cannot resolve the second derivative "
            f"of the variance (error estimate {max(truncation, noise):.3e})."
        )

    residual = np.full(times.size, np.nan)
    residual[1:-1] = np.abs(second - rhs[1:-1]) / scale
    return residual
