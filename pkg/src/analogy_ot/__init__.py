"""Wasserstein distances, bootstrap parameter estimates and runtime checks
for deciding whether knowledge transfer between two data domains is
admissible."""

from .analogy import (
    AnalogyParameters,
    AnalogyVerdict,
    ThresholdPredicate,
    audit_regularity,
    barycenter,
    check_analogy,
    check_fol_statements,
)
from .estimation import (
    BootstrapSummary,
    LabeledSample,
    bootstrap_wasserstein,
    class_geometry,
    convergence_rate,
    empirical_quantile,
    estimate_delta,
    estimate_epsilon,
    estimate_eta,
    estimate_gamma,
    estimate_xi,
    normal_quantile,
)
from .hoare import (
    check_c1,
    check_c2,
    check_u2_nondet,
    check_u4,
    check_u5,
    check_u6,
    default_pairs,
    effective_region,
)
from .metric import (
    MetricConfig,
    SolverCapExceeded,
    TransportPlan,
    ground_distance,
    point_to_sample_distance,
    sliced_wasserstein,
    wasserstein_1d,
    wasserstein_exact,
)
from .streams import SeededStream
from .transformers import StateTransformer

__version__ = "0.1.0"
