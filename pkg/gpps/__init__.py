import importlib.metadata as importlib_metadata

try:
    # This will read version from pyproject.toml
    __version__ = importlib_metadata.version(__package__ or __name__)
except importlib_metadata.PackageNotFoundError:
    __version__ = "development"

from gpps.dynamics.blowup import BlowupCase, BlowupVerdict, blowup_criterion
from gpps.dynamics.core import EvolutionResult, ObservableSeries, evolve, step_strang
from gpps.dynamics.virial import (
    dipolar_virial_integral,
    variance,
    variance_diagnostics,
    virial_rhs,
)
from gpps.grid.core import Grid, Wavefunction, make_grid
from gpps.grid.spectral import (
    SpectralField,
    forward_transform,
    gradient_spectral,
    integrate,
    inverse_transform,
    laplacian,
)
from gpps.ground_state.gagliardo_nirenberg import GNConstant, default_cb, estimate_cb
from gpps.ground_state.gradient_flow import (
    FlowOutcome,
    GroundStateResult,
    minimize_gradient_flow,
)
from gpps.ground_state.regime import RegimeVerdict, Verdict, classify_regime
from gpps.ground_state.scaling import (
    ScalingProbeResult,
    scaling_probe_2dI,
    scaling_probe_2dII,
)
from gpps.kernels.core import KernelKind, KernelSymbol, kernel_check_table
from gpps.kernels.symbols import DipoleAxis
from gpps.models.coefficients import coefficient_audit_table
from gpps.models.core import (
    EnergyBreakdown,
    ModelKind,
    ModelParams,
    chemical_potential,
    energy,
    hamiltonian_apply,
    interaction_energy,
)
from gpps.models.potentials import PotentialForm, PotentialSpec
from gpps.reduction.core import (
    ReductionErrors,
    Trajectory,
    limit_gpe,
    project_ground_mode,
    reduction_error,
    solve_rescaled_3d,
)
from gpps.reduction.rate import RateFit, ReductionStudy, fit_rate, reduction_study
from gpps.reduction.transverse import TransverseCase, TransverseMode, transverse_mode
from gpps.run_config import RunConfig, Task, parse_config
from gpps.runner import RunManifest, run
from gpps.tools.csv_sink import CSVSink
from gpps.tools.json_sink import JSONSink
from gpps.tools.snapshot import read_snapshot, write_snapshot
from gpps.utils.internal import (
    BlowupSuspected,
    ConvergenceError,
    GPPSWarnings,
    NumericalAlarm,
    ResolutionAlarm,
)
