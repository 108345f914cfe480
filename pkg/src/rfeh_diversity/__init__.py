"""Diversity combining (SC, EGC, MRC) for RF energy harvesting receivers."""

__version__ = "0.1.0"

from .channel import (
    ChannelConfig,
    ChannelRealization,
    Distribution,
    SignalModel,
    UnsupportedDistributionError,
    mean_channel_statistics,
    sample_channel,
    sample_channels,
)
from .combining import (
    CombinerKind,
    P2ConvergenceError,
    P2Problem,
    WeightVector,
    combined_signal_power,
    solve_p2,
    weights_egc,
    weights_for,
    weights_mrc,
    weights_sc,
)
from .power import (
    ConsumptionProfile,
    HarvesterConfig,
    PowerReport,
    consumption_total,
    harvested_energy,
    harvested_power_branch,
    harvested_power_total,
    max_harvestable_power,
    net_power,
    received_power_branch,
    reference_profiles,
)
from .simulation import (
    CrossoverQuery,
    ExperimentSpec,
    Mode,
    NoSignChangeError,
    SweepResult,
    analytic_mean_powers,
    find_crossover,
    find_no_harvesting_boundary,
    run_sweep,
)
