from contextlib import ExitStack as DoesNotRaise
from typing import Optional

import numpy as np
import pytest

from gpps.dynamics.blowup import BlowupCase, BlowupVerdict, blowup_criterion
from gpps.dynamics.core import evolve
from gpps.grid.core import Grid, Wavefunction, make_grid
from gpps.models.core import ModelKind, energy
from gpps.utils.internal import BlowupSuspected, ResolutionAlarm
from test.test_utils import mock_params

CB = 5.8504
X_AXIS = (1.0, 0.0, 0.0)


def _chirped_gaussian(grid: Grid, chirp: float) -> Wavefunction:
    psi = Wavefunction.gaussian(grid)
    return psi.with_values(np.exp(-0.5j * chirp * grid.radius_squared) * psi.values)


def _beta_for_local(coupling: float, eps: float = 1.0) -> float:
    # Quasi2DI with lam = 0 has local coefficient beta / (sqrt(2 pi) eps)
    return np.sqrt(2.0 * np.pi) * eps * coupling


def test_blowup_criterion_negative_energy() -> None:
    grid = make_grid(dim=2, extents=8.0, points=128)
    params = mock_params(
        ModelKind.QUASI_2D_I, beta=_beta_for_local(-3.0 * CB), lam=0.0, eps=1.0
    )
    psi0 = Wavefunction.gaussian(grid)
    result = blowup_criterion(params, psi0, CB)

    total = 1.0 - 3.0 * CB / (4.0 * np.pi)
    assert result.verdict == BlowupCase.GUARANTEED_I
    assert result.guaranteed
    assert result.assumption is None
    assert result.a == pytest.approx(2.0 * total, rel=1e-10)
    assert result.b == pytest.approx(0.0, abs=1e-12)
    assert result.c == pytest.approx(1.0, rel=1e-10)
    assert result.time_bound == pytest.approx(1.0 / np.sqrt(-2.0 * total), rel=1e-8)


@pytest.mark.parametrize(
    "chirp, shift, verdict",
    [
        (0.0, 0.0, BlowupCase.INCONCLUSIVE),  # E = 0 without inward flow
        (0.5, 0.0, BlowupCase.GUARANTEED_II),
        (1.0, 0.1, BlowupCase.GUARANTEED_III),
        (0.2, 0.1, BlowupCase.INCONCLUSIVE),  # inward flow too weak
        (-1.0, 0.1, BlowupCase.INCONCLUSIVE),  # outward flow
    ],
)
def test_blowup_criterion_energy_and_rate_cases(
    chirp: float, shift: float, verdict: BlowupCase
) -> None:
    grid = make_grid(dim=2, extents=8.0, points=128)
    # E = 1 + chirp^2 / 2 + g / (4 pi) for the chirped unit Gaussian
    coupling = -4.0 * np.pi * (1.0 + 0.5 * chirp**2) + 4.0 * np.pi * shift
    params = mock_params(
        ModelKind.QUASI_2D_I, beta=_beta_for_local(coupling), lam=0.0, eps=1.0
    )
    psi0 = _chirped_gaussian(grid, chirp)
    result = blowup_criterion(params, psi0, CB)

    assert energy(params, psi0).total == pytest.approx(shift, abs=1e-11)
    assert result.verdict == verdict
    assert result.b == pytest.approx(-2.0 * chirp, abs=1e-10)
    if verdict == BlowupCase.INCONCLUSIVE:
        assert result.reason is not None
        assert result.time_bound is None or result.a == 0.0
    else:
        assert result.time_bound is not None


def test_blowup_criterion_quasi_2d_ii_assumption_a() -> None:
    grid = make_grid(dim=2, extents=8.0, points=128)
    params = mock_params(
        ModelKind.QUASI_2D_II, beta=-20.0, lam=-20.0, eps=1.0, axis=X_AXIS
    )
    psi0 = Wavefunction.gaussian(grid)
    result = blowup_criterion(params, psi0, CB)

    total = energy(params, psi0).total
    assert total < 0
    assert result.verdict == BlowupCase.GUARANTEED_I
    assert result.assumption == "A"
    assert result.a == pytest.approx(3.0 * total, rel=1e-12)


def test_blowup_criterion_quasi_2d_ii_assumption_b() -> None:
    grid = make_grid(dim=2, extents=8.0, points=128)
    # assumption A fails: local coefficient below -C_b
    params = mock_params(
        ModelKind.QUASI_2D_II, beta=_beta_for_local(-3.0 * CB), lam=0.0, eps=1.0
    )
    result = blowup_criterion(params, Wavefunction.gaussian(grid), CB)
    assert result.verdict == BlowupCase.GUARANTEED_I
    assert result.assumption == "B"


@pytest.mark.parametrize(
    "kind, beta, lam, axis, gamma, reason",
    [
        (ModelKind.QUASI_2D_I, 0.5, 0.0, (0.0, 0.0, 1.0), 1.0, "existence"),
        (ModelKind.QUASI_2D_I, -40.0, 1.0, X_AXIS, 1.0, None),
        (ModelKind.GPPS_3D, -40.0, 0.0, (0.0, 0.0, 1.0), 1.0, "criterion"),
        (ModelKind.QUASI_1D, -40.0, 0.0, (0.0, 0.0, 1.0), 1.0, "criterion"),
    ],
)
def test_blowup_criterion_inconclusive(
    kind: ModelKind,
    beta: float,
    lam: float,
    axis,
    gamma: Optional[float],
    reason: Optional[str],
) -> None:
    eps = 1.0 if kind.uses_eps else None
    params = mock_params(kind, beta=beta, lam=lam, eps=eps, axis=axis, gamma=gamma)
    grid = make_grid(dim=kind.dim, extents=6.0, points=32)
    result = blowup_criterion(params, Wavefunction.gaussian(grid), CB)

    assert result.verdict == BlowupCase.INCONCLUSIVE
    assert not result.guaranteed
    if reason is not None:
        assert reason in result.reason


def test_blowup_criterion_limit_2d() -> None:
    grid = make_grid(dim=2, extents=8.0, points=64)
    params = mock_params(ModelKind.LIMIT_2D, beta=-3.0 * CB * np.sqrt(2.0 * np.pi))
    result = blowup_criterion(params, Wavefunction.gaussian(grid), CB)
    assert result.verdict == BlowupCase.GUARANTEED_I


@pytest.mark.parametrize(
    "dim, corrupt, c_b, exception",
    [
        (2, False, CB, DoesNotRaise()),
        (1, False, CB, pytest.raises(ValueError)),
        (2, True, CB, pytest.raises(ValueError)),
        (2, False, 0.0, pytest.raises(ValueError)),
    ],
)
def test_blowup_criterion_validation(
    dim: int, corrupt: bool, c_b: float, exception: Exception
) -> None:
    grid = make_grid(dim=dim, extents=8.0, points=32)
    psi0 = Wavefunction.gaussian(grid)
    if corrupt:
        values = psi0.values.copy()
        values[0, 0] = np.nan
        psi0 = Wavefunction(grid=grid, values=values)
    params = mock_params(
        ModelKind.QUASI_2D_I, beta=_beta_for_local(-3.0 * CB), lam=0.0, eps=1.0
    )
    with exception:
        blowup_criterion(params, psi0, c_b)


def test_blowup_verdict_bound() -> None:
    verdict = BlowupVerdict(verdict=BlowupCase.GUARANTEED_III, a=0.2, b=-2.0, c=1.0)
    assert verdict.coefficients == (0.2, -2.0, 1.0)
    np.testing.assert_allclose(verdict.bound([0.0, 1.0]), [1.0, -0.8])
    assert verdict.time_bound == pytest.approx((2.0 - np.sqrt(3.2)) / 0.4)

    growing = BlowupVerdict(verdict=BlowupCase.INCONCLUSIVE, a=1.0, b=1.0, c=1.0)
    assert growing.time_bound is None


def test_blowup_case_list() -> None:
    assert BlowupCase.list() == [
        "Guaranteed(i)",
        "Guaranteed(ii)",
        "Guaranteed(iii)",
        "Inconclusive",
    ]


def test_collapsing_run_stays_below_the_variance_bound() -> None:
    grid = make_grid(dim=2, extents=6.0, points=192)
    params = mock_params(
        ModelKind.QUASI_2D_I, beta=_beta_for_local(-3.0 * CB), lam=0.0, eps=1.0
    )
    psi0 = Wavefunction.gaussian(grid)
    verdict = blowup_criterion(params, psi0, CB)
    assert verdict.verdict == BlowupCase.GUARANTEED_I

    result = evolve(params, psi0, T=1.2, dt=1e-3, record_every=5)

    assert isinstance(result.alarm, (ResolutionAlarm, BlowupSuspected))
    assert result.time < verdict.time_bound
    t = np.array(result.series.t[:-1])
    sigma = np.array(result.series.sigma_v[:-1])
    assert np.all(sigma <= verdict.bound(t) + 1e-8)
    peaks = result.series.peak_density
    assert peaks[-1] >= 5.0 * peaks[0]
