"""Linear ADRC as transfer functions: design, discretization, runtime, analysis."""

from .design import (
    ContinuousAdrcTf,
    ContinuousTuning,
    GainSet,
    PlantSpec,
    bandwidth_gains,
    build_system_matrices,
    continuous_tf_bandwidth,
    continuous_tf_general,
    continuous_tf_terms,
    controller_gains,
    observer_gains_ct,
)
from .discrete import (
    DiscreteAdrcTf,
    DiscreteTuning,
    discrete_bandwidth_gains,
    discrete_observer,
    discrete_tf_bandwidth,
    discrete_tf_general,
    discrete_tf_terms,
    factor_accumulator,
    observer_gains_dt,
    unfactor_accumulator,
    zoh_integrator_chain,
)
from .errors import AdrcError, AnalysisError, ConfigError, DesignError
from .freq import (
    GangOfSix,
    PoleZeroSet,
    RationalTf,
    adrc_ct_to_rational,
    adrc_dt_to_rational,
    bode,
    estimate_b0_crossover,
    eval_response,
    fb_poles_zeros,
    gang_of_six,
)
from .runtime import SsController, TfController, reset, ss_step, tf_step
from .sim import LtiPlant, Scenario, SimTrace, metrics, plant_from_tf, run_closed_loop, zoh_discretize_plant

__version__ = "0.1.0"
