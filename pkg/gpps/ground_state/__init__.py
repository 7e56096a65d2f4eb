from gpps.ground_state.gagliardo_nirenberg import (
    GNConstant,
    default_cb,
    estimate_cb,
    gn_quotient,
    quotient_descent,
    radial_ground_state,
    shooting_estimate,
)
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
