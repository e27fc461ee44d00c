"""Photon-counting statistics for parametric down-conversion sources.

Source models, lossy detection, pulse-by-pulse simulation and local
nonclassicality tests (Klyshko, Gamma, combined, Lee, Mandel Q).
"""

__version__ = "0.1.0"

from .distributions import (  # noqa: E402
    CountHistogram,
    JointCountHistogram,
    JointPhotonDistribution,
    PhotonNumberDistribution,
    conditional,
    joint_from_product,
    marginal,
    moments,
    pnd_degenerate_squeezed,
    pnd_pair_count_multimode,
    pnd_poisson,
    pnd_thermal,
    pnd_two_mode_squeezed,
    total_variation,
)
from .detection import (  # noqa: E402
    LossChannel,
    apply_binomial_loss,
    apply_dark_counts,
    detected_joint,
    pairs_to_photons_collinear,
)
from .criteria import (  # noqa: E402
    GAMMA_CLASSICAL,
    Criterion,
    CriterionResult,
    Status,
    combined,
    combined_threshold,
    gamma_wdsby,
    klyshko_k,
    lee_r_conditional,
    lee_r_joint,
    mandel_q,
    significance_table,
)
from .simulator import ExperimentConfig, simulate, simulate_collinear, simulate_twin_beam  # noqa: E402
from .errors import (  # noqa: E402
    ConfigError,
    DomainError,
    HistogramParseError,
    HistogramValidationError,
    InsufficientStatisticsError,
    UnreliableMomentError,
)
