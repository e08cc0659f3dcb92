"""Gaussian entanglement swapping over lossy channels.

Covariance matrices use vacuum variance 1 and mode ordering
``(q1, p1, q2, p2)``.
"""

__version__ = "0.1.0"

from .channels import (  # noqa: E402
    ChannelSpec,
    EffectiveDecomposition,
    direct_state,
    effective_decomposition,
    effective_params_after_swap,
    lossy_tmss,
    swap_lossy,
    total_effective_transmittivity,
)
from .errors import (  # noqa: E402
    ConfigError,
    CVSwapError,
    DegenerateInvariants,
    DegenerateState,
    InsufficientSamples,
    NonPhysicalState,
    NotEntangled,
    OptimizerDidNotConverge,
    SingularConditioning,
    VerificationFailed,
)
from .gaussian import (  # noqa: E402
    SimpleFormParams,
    StandardFormParams,
    TwoModeState,
    is_physical,
    is_separable,
    ptranspose_eigenvalues,
    symplectic_eigenvalues,
    to_standard_form,
)
from .measures import EprResult, eof, epr_opt, gaussian_eof, log_negativity, purity  # noqa: E402
from .oracle import OracleConfig, sample_conditional, sample_ensemble  # noqa: E402
from .swap import (  # noqa: E402
    BellOutcome,
    GainSetting,
    conditional_cm,
    conditional_mean,
    critical_gain_path,
    ensemble_cm,
    optimal_gains,
    optimal_gains_general,
    swap_optimal,
)
