from contextlib import ExitStack as DoesNotRaise

import numpy as np
import pytest

from gpps.grid.core import Wavefunction, make_grid
from gpps.models.core import ModelKind
from gpps.reduction.rate import RateFit, fit_rate, reduction_study
from gpps.reduction.transverse import TransverseCase
from test.test_utils import assert_almost_equal, mock_params

EPS_LADDER = [0.25, 0.125, 0.0625]
RATE_LADDER = [0.125, 0.0625, 0.03125]


@pytest.mark.parametrize("power", [1.0, 2.0, 0.5])
def test_fit_rate_recovers_power_law(power) -> None:
    eps = np.array(EPS_LADDER)
    slope, residual = fit_rate(eps, 0.3 * eps**power)
    assert_almost_equal(slope, power, tolerance=1e-12)
    assert residual < 1e-12


def test_fit_rate_residual_of_noisy_data() -> None:
    eps = np.array([0.4, 0.2, 0.1, 0.05])
    errors = eps * np.array([1.0, 1.2, 1.0, 1.2])
    slope, residual = fit_rate(eps, errors)
    assert 0.8 < slope < 1.2
    assert residual > 0.01


@pytest.mark.parametrize(
    "eps, errors, exception",
    [
        (EPS_LADDER, [0.1, 0.05, 0.025], DoesNotRaise()),
        ([0.25, 0.125], [0.1, 0.05], pytest.raises(ValueError)),
        ([0.25, 0.125, 0.1], [0.1, 0.05, 0.04], pytest.raises(ValueError)),
        ([0.25, 0.25, 0.0625], [0.1, 0.1, 0.025], pytest.raises(ValueError)),
        ([0.25, -0.125, 0.0625], [0.1, 0.05, 0.025], pytest.raises(ValueError)),
        (EPS_LADDER, [0.1, 0.0, 0.025], pytest.raises(ValueError)),
        (EPS_LADDER, [0.1, np.nan, 0.025], pytest.raises(ValueError)),
        (EPS_LADDER, [0.1, 0.05], pytest.raises(ValueError)),
    ],
)
def test_fit_rate_validation(eps, errors, exception) -> None:
    with exception:
        fit_rate(eps, errors)


def test_rate_fit_from_errors() -> None:
    eps = np.array(EPS_LADDER)
    times = [0.5, 1.0]
    errors = np.stack([eps, eps**2], axis=1)
    fit = RateFit.from_errors(eps, times, errors)
    assert np.allclose(fit.slopes, [1.0, 2.0], rtol=0.0, atol=1e-12)
    assert np.all(fit.residuals < 1e-12)
    payload = fit.as_dict()
    assert payload["times"] == times
    assert np.allclose(payload["slopes"], [1.0, 2.0])
    with pytest.raises(ValueError):
        RateFit.from_errors(eps, times, errors.T)


def test_reduction_study_validation() -> None:
    params = mock_params(ModelKind.LIMIT_2D, beta=1.0, lam=1.0)
    phi = Wavefunction.gaussian(make_grid(dim=2, extents=6.0, points=32))
    with pytest.raises(ValueError):
        reduction_study(params, phi, [0.25, 0.125], 0.25, 1e-3)
    with pytest.raises(ValueError):
        reduction_study(params, phi, EPS_LADDER, 0.25, 1e-3, thread_workers=0)
    with pytest.raises(ValueError):
        reduction_study(params, phi, EPS_LADDER, 0.25, 1e-3, sample_times=[0.0])


def test_pancake_reduction_rate_is_first_order() -> None:
    # a wide trapped profile keeps the O(eps^2) correction small on this ladder
    params = mock_params(ModelKind.LIMIT_2D, beta=1.0, lam=0.5, gamma=0.25)
    phi = Wavefunction.gaussian(make_grid(dim=2, extents=10.0, points=32), width=2.0)
    study = reduction_study(params, phi, RATE_LADDER, 1.0, 1e-3, thread_workers=3)

    assert study.case == TransverseCase.PANCAKE
    assert list(study.errors.keys()) == RATE_LADDER
    assert study.limit.times == [0.25, 0.5, 1.0]
    assert np.allclose(study.fit.times, [0.25, 0.5, 1.0])

    total = study.fit.errors
    ratios = total[:-1] / total[1:]
    assert np.all((study.fit.slopes >= 0.8) & (study.fit.slopes <= 1.2))
    assert np.all((ratios >= 1.6) & (ratios <= 2.4))

    coarse, fine = study.errors[RATE_LADDER[0]], study.errors[RATE_LADDER[-1]]
    assert fine.transverse[-1] < coarse.transverse[-1]
    gradient = np.array([study.errors[eps].gradient_norm for eps in RATE_LADDER])
    assert np.all(gradient.max(axis=0) < 1.2 * gradient.min(axis=0))
    for errors in study.errors.values():
        assert np.all(errors.total <= errors.transverse + errors.projected + 1e-10)


def test_cigar_reduction_rate_is_at_least_first_order() -> None:
    # the finite-eps correction of a cigar is O(eps^2 log eps), so the observed
    # order lies above one and the transverse leakage oscillates in time
    params = mock_params(ModelKind.LIMIT_1D, beta=1.0, lam=0.5, gamma=0.25)
    phi = Wavefunction.gaussian(make_grid(dim=1, extents=10.0, points=32), width=2.0)
    study = reduction_study(params, phi, RATE_LADDER, 1.0, 2.5e-4, thread_workers=3)

    assert study.case == TransverseCase.CIGAR
    assert np.allclose(study.fit.times, [0.25, 0.5, 1.0])
    total = study.fit.errors
    assert np.all(np.diff(total, axis=0) < 0)
    assert np.all(study.fit.slopes >= 0.8)
    assert np.all(total[0] / total[-1] >= 1.6**2)
    assert study.transverse_fit is not None
