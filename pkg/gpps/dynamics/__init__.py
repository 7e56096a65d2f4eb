from gpps.dynamics.blowup import BlowupCase, BlowupVerdict, blowup_criterion
from gpps.dynamics.core import (
    EvolutionResult,
    ObservableSeries,
    StrangStepper,
    evolve,
    step_strang,
)
from gpps.dynamics.virial import (
    dipolar_virial_bounds,
    dipolar_virial_integral,
    variance,
    variance_diagnostics,
    variance_rate,
    virial_multiplier,
    virial_rhs,
)
