"""Decentralized vector multiple access channel simulator.

Transmitters arrive one after another and water-fill their power over the
channels they may access, either on disjoint channel sets (spectral
partition) or on shared channels decoded with successive interference
cancellation.  The package simulates both regimes, evaluates their
large-system limits and sweeps bandwidth limiting policies.
"""

__version__ = "0.1.0"

from .errors import (
    EmptyCandidateSet,
    MCVarianceTooHigh,
    NonConvergence,
    NonpositiveBudget,
)
from .channel import NetworkConfig, SeedSpec, derive_trial_seed, gain_cdf, gain_pdf, sample_gains
from .waterfill import WaterfillProblem, WaterfillSolution, effective_noise, water_fill
from .simulator import (
    BLPolicy,
    ScenarioOutcome,
    TransmitterResult,
    run_partition,
    run_sharing,
    run_scenario,
)

__all__ = [
    "__version__",
    "BLPolicy",
    "EmptyCandidateSet",
    "MCVarianceTooHigh",
    "NetworkConfig",
    "NonConvergence",
    "NonpositiveBudget",
    "ScenarioOutcome",
    "SeedSpec",
    "TransmitterResult",
    "WaterfillProblem",
    "WaterfillSolution",
    "derive_trial_seed",
    "effective_noise",
    "gain_cdf",
    "gain_pdf",
    "run_partition",
    "run_scenario",
    "run_sharing",
    "sample_gains",
    "water_fill",
]
