"""Temporally and spatially dependent random partition models."""

from .partition import (
    Partition,
    ResourceLimitError,
    adjusted_rand_index,
    canonicalize,
    enumerate_partitions,
    is_compatible,
    restrict,
)
from .eppf import EppfSpec, crp_log_prob, niw_log_marginal, seating_log_weights, sppm_log_weight
from .prior import TrpmParams, exact_conditional_table, lagged_ari_summary, sample_joint_prior
from .gibbs import ChainOutput, Dataset, McmcState, ModelConfig, NumericalError, initial_state, run_chain
from .selection import (
    EstimateReport,
    credible_interval,
    estimate_report,
    lpml,
    point_estimate_partition,
    waic,
)
from .synth import SynthConfig, generate

__version__ = "0.1.0"
