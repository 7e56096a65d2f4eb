from gpps.reduction.core import (
    ReductionErrors,
    RescaledStepper,
    Trajectory,
    limit_gpe,
    project_ground_mode,
    reduction_error,
    rescaled_grid,
    solve_rescaled_3d,
)
from gpps.reduction.rate import RateFit, ReductionStudy, fit_rate, reduction_study
from gpps.reduction.transverse import (
    OscillatorBasis,
    TransverseCase,
    TransverseMode,
    oscillator_basis,
    transverse_mode,
)
