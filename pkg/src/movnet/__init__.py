"""Consensus of random-walking agents over directed moving-neighborhood networks."""

__version__ = "0.1.0"

from .analysis import (  # noqa: E402
    CampaignSummary,
    DriftReport,
    contraction_coefficient,
    empirical_drift,
    empirical_vs_ergodic,
    run_campaign,
)
from .config import ExperimentConfig, fixture  # noqa: E402
from .consensus import (  # noqa: E402
    ConsensusTrace,
    ProtocolParams,
    decompose,
    disagreement,
    run_trial,
    step_protocol,
)
from .digraph import (  # noqa: E402
    WeightedDigraph,
    cycle_gcd,
    is_strongly_connected,
    out_degrees,
    transition_matrix,
)
from .estimators import ConsensusSimulator, RandomWalkAnalyzer  # noqa: E402
from .markov import MixingProfile, StationaryDistribution, mixing_curve, slem, stationary_distribution  # noqa: E402
from .neighborhood import (  # noqa: E402
    LinkageSpec,
    NeighborhoodSnapshot,
    ergodic_adjacency,
    ergodic_laplacian,
    expected_adjacency,
    is_balanced,
    sample_neighborhood,
    schur_product,
    step_walks,
)
