"""Energy-efficiency model and optimizer for a cognitive radio that mixes
ambient backscatter with harvest-then-transmit under imperfect sensing."""

from .exceptions import (
    ConfigError,
    DegenerateSensingError,
    DomainError,
    InfeasibleError,
    ResourceError,
)
from .gradients import (
    GradientBundle,
    dee_dalpha,
    dpd_deps,
    dpf_deps,
    dpf_dtau,
    gradient_bundle,
    threshold_monotonicity_condition,
)
from .model import (
    EEBreakdown,
    FriisParams,
    NetworkParams,
    ScenarioRow,
    SensingParams,
    TimeSplit,
    alpha_dagger,
    avg_energy,
    avg_throughput,
    energy_efficiency,
    friis_harvested_power,
    prob_detection,
    prob_false_alarm,
    scenario_table,
    transmit_power,
)
from .optimizer import (
    BbWindow,
    OptimalPoint,
    bb_window,
    check_pf_constraint,
    maximize_ee,
    optimal_alpha,
    optimal_mu,
    optimal_tau,
    optimal_threshold,
    optimize_mode,
)
from .special import q_function, q_inverse

__version__ = "0.1.0"
