from contextlib import ExitStack as DoesNotRaise

import numpy as np
import pytest
import scipy.fft
from scipy import integrate as quadrature

from gpps.grid.core import make_grid
from gpps.grid.spectral import integrate
from gpps.kernels.core import (
    KernelKind,
    KernelSymbol,
    apply_dipolar_3d,
    apply_nonlocal_1d,
    apply_nonlocal_2dI,
    apply_nonlocal_2dII,
    dipolar_3d_multiplier,
    kernel_check_table,
    rescaled_projection_table,
    riesz_alpha,
    t_eps_alpha,
)
from gpps.kernels.symbols import (
    DipoleAxis,
    kernel_u1d_real_space,
    symbol_dip3d,
    u2d_quadrature,
)
from test.test_utils import random_band_limited

VERTICAL = DipoleAxis(0.0, 0.0, 1.0)
TILTED = DipoleAxis.from_vector([0.6, 0.0, 0.8])


def l2(values: np.ndarray, grid) -> float:
    return float(np.sqrt(integrate(np.abs(values) ** 2, grid)))


def test_kernel_kind_list() -> None:
    assert KernelKind.list() == [
        "Dip3D",
        "U2dEps",
        "FracPoisson2D",
        "U1dEps",
        "Aniso2D",
        "Riesz2D",
        "TEpsAlpha",
        "RescaledDip3D",
    ]


def test_constructed_tables_respect_bounds() -> None:
    grid_1d = make_grid(dim=1, extents=8.0, points=256)
    grid_2d = make_grid(dim=2, extents=8.0, points=64)
    grid_3d = make_grid(dim=3, extents=(4.0, 4.0, 6.0), points=16)
    symbols = [
        KernelSymbol.dipolar_3d(grid_3d, TILTED),
        KernelSymbol.fractional_poisson_2d(grid_2d),
        KernelSymbol.aniso_2d(grid_2d, TILTED),
        KernelSymbol.riesz_2d(grid_2d, 0),
        KernelSymbol.riesz_2d(grid_2d, 1),
        KernelSymbol.t_eps_alpha(grid_2d, 0.5, 1),
        KernelSymbol.rescaled_dipolar_3d(grid_3d, TILTED, 0.25, (2,)),
        KernelSymbol.rescaled_dipolar_3d(grid_3d, TILTED, 0.25, (0, 1)),
    ]
    for eps in (0.01, 0.1, 0.5, 2.0):
        symbols.append(KernelSymbol.u2d(grid_2d, eps))
        symbols.append(KernelSymbol.u1d(grid_1d, eps))
    for symbol in symbols:
        assert np.all(np.isfinite(symbol.multiplier))
        assert symbol.bound_violations() == 0, symbol.kind


def test_kernel_symbol_checks_grid_dimension() -> None:
    grid = make_grid(dim=2, extents=4.0, points=16)
    with pytest.raises(ValueError):
        KernelSymbol.u1d(grid, 0.5)
    with pytest.raises(ValueError):
        KernelSymbol(grid=grid, multiplier=np.ones(16), kind=KernelKind.U2D_EPS)
    with pytest.raises(ValueError):
        KernelSymbol(
            grid=grid, multiplier=np.full(grid.shape, np.inf), kind=KernelKind.U2D_EPS
        )


@pytest.mark.parametrize(
    "dim, exception",
    [
        (2, DoesNotRaise()),
        (1, pytest.raises(ValueError)),
        (3, pytest.raises(ValueError)),
    ],
)
def test_apply_nonlocal_2dI_dimension(dim: int, exception: Exception) -> None:
    grid = make_grid(dim=dim, extents=4.0, points=16)
    with exception:
        apply_nonlocal_2dI(np.zeros(grid.shape), grid, 0.5, VERTICAL)


def test_apply_nonlocal_2dI_of_zero() -> None:
    grid = make_grid(dim=2, extents=4.0, points=32)
    result = apply_nonlocal_2dI(np.zeros(grid.shape), grid, 0.3, TILTED)
    assert np.all(result == 0.0)


@pytest.mark.parametrize("eps", [0.05, 0.5, 2.0])
def test_apply_nonlocal_2dI_norm_bounds(eps: float) -> None:
    grid = make_grid(dim=2, extents=6.0, points=64)
    rho = random_band_limited(grid, seed=int(eps * 100), fraction=0.5)
    result = apply_nonlocal_2dI(rho, grid, eps, TILTED)
    gradient_norm = np.sqrt(
        np.sum(grid.k_squared * np.abs(scipy.fft.fftn(rho)) ** 2)
        * grid.cell_volume
        / grid.size
    )
    bound = min(np.sqrt(2.0) / (np.sqrt(np.pi) * eps) * l2(rho, grid), gradient_norm)
    assert l2(result, grid) <= bound * (1.0 + 1e-12)


def test_apply_nonlocal_2dI_against_quadrature_symbol() -> None:
    grid = make_grid(dim=2, extents=6.0, points=32)
    eps = 0.7
    rho = np.exp(-grid.radius_squared) / np.pi
    norms = np.round(grid.k_norm, 12).ravel()
    radii, inverse = np.unique(norms, return_inverse=True)
    table = np.array([0.0 if r == 0 else u2d_quadrature(r, eps) for r in radii])
    symbol = table[inverse.reshape(grid.shape)]
    # vertical dipoles: -n_xi = |xi|^2
    expected = scipy.fft.ifftn(scipy.fft.fftn(rho) * (grid.k_squared * symbol)).real
    result = apply_nonlocal_2dI(rho, grid, eps, VERTICAL)
    np.testing.assert_allclose(result, expected, rtol=0, atol=1e-8)
    assert np.isrealobj(result)


def test_apply_nonlocal_2dII_vertical_is_half_laplacian() -> None:
    grid = make_grid(dim=2, extents=6.0, points=64)
    rho = np.exp(-grid.radius_squared) / np.pi
    expected = scipy.fft.ifftn(scipy.fft.fftn(rho) * grid.k_norm).real
    np.testing.assert_allclose(
        apply_nonlocal_2dII(rho, grid, VERTICAL), expected, rtol=0, atol=1e-12
    )


def test_apply_nonlocal_2dII_of_constant() -> None:
    grid = make_grid(dim=2, extents=4.0, points=16)
    result = apply_nonlocal_2dII(np.full(grid.shape, 3.0), grid, TILTED)
    assert np.max(np.abs(result)) < 1e-13


def test_quasi_2d_kernels_converge_as_eps_vanishes() -> None:
    grid = make_grid(dim=2, extents=8.0, points=64)
    rho = np.exp(-grid.radius_squared) / np.pi
    limit = apply_nonlocal_2dII(rho, grid, TILTED)
    coarse = l2(apply_nonlocal_2dI(rho, grid, 1e-2, TILTED) - limit, grid)
    fine = l2(apply_nonlocal_2dI(rho, grid, 1e-3, TILTED) - limit, grid)
    assert fine < 1e-2 * l2(limit, grid)
    assert fine / coarse == pytest.approx(0.1, abs=0.02)


def test_apply_nonlocal_1d_of_constant() -> None:
    grid = make_grid(dim=1, extents=8.0, points=64)
    result = apply_nonlocal_1d(np.ones(grid.shape), grid, 0.5)
    assert np.max(np.abs(result)) < 1e-14


@pytest.mark.parametrize("eps", [0.1, 1.0])
def test_apply_nonlocal_1d_norm_bound(eps: float) -> None:
    grid = make_grid(dim=1, extents=8.0, points=256)
    rho = random_band_limited(grid, seed=4, fraction=0.8)
    result = apply_nonlocal_1d(rho, grid, eps)
    bound = 2.0 * np.sqrt(2.0) / (np.sqrt(np.pi) * eps) * l2(rho, grid)
    assert l2(result, grid) <= bound


def _real_space_convolution(z: float, eps: float) -> float:
    # (U * rho)'' = int U(s) rho''(z - s) ds for rho = exp(-z^2) / sqrt(pi)
    def integrand(s: float) -> float:
        u = z - s
        return (
            kernel_u1d_real_space(s, eps)
            * (4.0 * u**2 - 2.0)
            * np.exp(-(u**2))
            / np.sqrt(np.pi)
        )

    points = [0.0] if z - 12.0 < 0.0 < z + 12.0 else None
    value, _ = quadrature.quad(
        integrand, z - 12.0, z + 12.0, points=points, epsabs=1e-13, limit=200
    )
    return value


def test_apply_nonlocal_1d_matches_real_space_convolution() -> None:
    eps = 1.0
    samples = (0.0, 0.5, 1.25, 2.0)
    oracle = np.array([_real_space_convolution(z, eps) for z in samples])
    errors = []
    for extent, points in ((16.0, 256), (32.0, 512)):
        grid = make_grid(dim=1, extents=extent, points=points)
        x = grid.mesh[0]
        result = apply_nonlocal_1d(np.exp(-(x**2)) / np.sqrt(np.pi), grid, eps)
        indices = [int(np.argmin(np.abs(x - z))) for z in samples]
        errors.append(np.max(np.abs(result[indices] - oracle)))
    assert errors[1] < 1e-4
    assert errors[1] < errors[0]


def test_apply_dipolar_3d_without_dipoles() -> None:
    grid = make_grid(dim=3, extents=4.0, points=16)
    rho = np.exp(-grid.radius_squared)
    np.testing.assert_allclose(
        apply_dipolar_3d(rho, grid, TILTED, 2.5, 0.0), 2.5 * rho, atol=1e-13
    )
    with pytest.raises(ValueError):
        apply_dipolar_3d(rho[0], grid.sub_grid((0, 1)), TILTED, 2.5, 0.0)


def test_dipolar_3d_decomposition_identity() -> None:
    grid = make_grid(dim=3, extents=(3.0, 4.0, 5.0), points=16)
    rng = np.random.default_rng(11)
    nonzero = grid.k_squared > 0
    for _ in range(10):
        beta, lam = rng.uniform(-3.0, 3.0, size=2)
        vector = rng.normal(size=3)
        axis = DipoleAxis.from_vector(vector / np.linalg.norm(vector))
        multiplier = dipolar_3d_multiplier(grid, axis, beta, lam)
        expected = beta + lam * symbol_dip3d(grid.wavenumber_mesh, axis)
        np.testing.assert_allclose(
            multiplier[nonzero], expected[nonzero], rtol=0, atol=1e-12
        )


def test_dipolar_3d_multiplier_along_axis() -> None:
    grid = make_grid(dim=3, extents=np.pi, points=8)
    multiplier = dipolar_3d_multiplier(grid, VERTICAL, 1.0, 1.0)
    assert grid.wavenumbers[2][1] == pytest.approx(1.0)
    assert multiplier[0, 0, 1] == pytest.approx(3.0, abs=1e-14)
    assert multiplier[0, 0, 0] == pytest.approx(0.0, abs=1e-14)


def test_odd_kernels_of_real_field_are_real() -> None:
    grid = make_grid(dim=2, extents=6.0, points=64)
    f = random_band_limited(grid, seed=21, fraction=1.0)
    for symbol in (
        KernelSymbol.riesz_2d(grid, 0),
        KernelSymbol.t_eps_alpha(grid, 0.3, 1),
    ):
        raw = scipy.fft.ifftn(scipy.fft.fftn(f) * 1j * symbol.multiplier)
        assert np.max(np.abs(raw.imag)) <= 1e-12 * np.max(np.abs(raw.real))


def test_riesz_is_contractive() -> None:
    grid = make_grid(dim=2, extents=6.0, points=64)
    f = random_band_limited(grid, seed=22)
    for alpha in (0, 1):
        assert l2(riesz_alpha(f, grid, alpha), grid) <= l2(f, grid)


def test_odd_kernels_of_constant_vanish() -> None:
    grid = make_grid(dim=2, extents=4.0, points=16)
    constant = np.full(grid.shape, 1.5)
    assert np.max(np.abs(riesz_alpha(constant, grid, 0))) < 1e-14
    assert np.max(np.abs(t_eps_alpha(constant, grid, 0.5, 1))) < 1e-14
    with pytest.raises(ValueError):
        riesz_alpha(constant, grid, 2)


def test_t_eps_alpha_converges_to_riesz() -> None:
    grid = make_grid(dim=2, extents=16.0, points=128)
    f = np.exp(-grid.radius_squared / 8.0)
    errors = [
        l2(t_eps_alpha(f, grid, eps, 0) - riesz_alpha(f, grid, 0), grid)
        for eps in (1.0, 0.5, 0.25, 0.125)
    ]
    assert np.all(np.diff(errors) < 0)
    assert errors[-1] < 0.25 * errors[0]


def test_rescaled_projection_cell_averages() -> None:
    grid = make_grid(dim=3, extents=(4.0, 4.0, 3.0), points=(16, 16, 16))
    eps = 0.25
    pancake = rescaled_projection_table(grid, TILTED, eps, (2,))
    cigar = rescaled_projection_table(grid, TILTED, eps, (0, 1))
    assert pancake[0, 0, 0] == pytest.approx(TILTED.n3_squared, abs=1e-15)
    assert cigar[0, 0, 0] == pytest.approx(
        0.5 * (TILTED.n1**2 + TILTED.n2**2), abs=1e-15
    )

    # direct midpoint average over the confined frequency cell
    half_width = 0.5 * grid.wavenumber_spacing[2] / eps
    s = np.linspace(-half_width, half_width, 200_001)
    k1, k2 = grid.wavenumbers[0][3], grid.wavenumbers[1][-2]
    values = (TILTED.n1 * k1 + TILTED.n2 * k2 + TILTED.n3 * s) ** 2 / (
        k1**2 + k2**2 + s**2
    )
    average = quadrature.simpson(values, x=s) / (2.0 * half_width)
    assert pancake[3, -2, 0] == pytest.approx(average, rel=1e-8)


def test_rescaled_projection_vertical_axis_column() -> None:
    grid = make_grid(dim=3, extents=(4.0, 4.0, 3.0), points=16)
    for eps in (0.5, 0.125):
        table = rescaled_projection_table(grid, VERTICAL, eps, (2,))
        np.testing.assert_allclose(table[0, 0, 1:], 1.0, rtol=0, atol=1e-15)


@pytest.mark.parametrize(
    "axis, confined_axes",
    [
        (TILTED, (2,)),
        (TILTED, (0, 1)),
        (VERTICAL, (2,)),
        (VERTICAL, (0, 1)),
    ],
)
def test_rescaled_projection_pointwise_off_origin_slice(axis, confined_axes) -> None:
    grid = make_grid(dim=3, extents=(4.0, 4.0, 3.0), points=16)
    eps = 0.25
    table = rescaled_projection_table(grid, axis, eps, confined_axes)

    scaled = [
        k / eps if a in confined_axes else k
        for a, k in enumerate(grid.wavenumber_mesh)
    ]
    projection = sum(axis.vector[a] * scaled[a] for a in range(3))
    norm_squared = sum(s**2 for s in scaled)
    off_slice = np.ones(grid.shape, dtype=bool)
    if confined_axes == (2,):
        off_slice[:, :, 0] = False
    else:
        off_slice[0, 0, :] = False
    pointwise = projection[off_slice] ** 2 / norm_squared[off_slice]
    np.testing.assert_allclose(table[off_slice], pointwise, rtol=1e-14, atol=0)


def test_rescaled_projection_averages_whole_pancake_slice() -> None:
    grid = make_grid(dim=3, extents=(4.0, 4.0, 3.0), points=16)
    table = rescaled_projection_table(grid, VERTICAL, 0.25, (2,))
    # the pointwise symbol vanishes on xi3 = 0 for a vertical axis
    assert np.all(table[1:, :, 0] > 0.0)
    assert np.all(table[:, 1:, 0] > 0.0)
    assert np.all(table[:, :, 0] <= 1.0)


@pytest.mark.parametrize(
    "confined_axes, eps, exception",
    [
        ((2,), 0.5, DoesNotRaise()),
        ((0, 1), 0.5, DoesNotRaise()),
        ((1,), 0.5, pytest.raises(ValueError)),
        ((2,), 0.0, pytest.raises(ValueError)),
    ],
)
def test_rescaled_projection_validation(confined_axes, eps, exception) -> None:
    grid = make_grid(dim=3, extents=3.0, points=8)
    with exception:
        rescaled_projection_table(grid, VERTICAL, eps, confined_axes)


def test_kernel_check_table() -> None:
    rows = kernel_check_table(abs_xi=[0.1, 1.0, 10.0], eps_values=[0.5, 2.0])
    assert len(rows) == 12
    assert {row["kind"] for row in rows} == {"U2dEps", "U1dEps"}
    assert max(row["rel_err"] for row in rows) < 1e-9
