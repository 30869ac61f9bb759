"""Self-similar couplings and Wasserstein distances for two-map IFS measures on [0, 1]."""

from .closed_forms import (
    GeneralIfsSpec,
    MomentFormulaInput,
    general_lower_bound,
    kr_functional,
    measure_mean,
    phi1,
    phi1_curve,
    phi1_derivative,
    phi1_pole,
    phi1_root,
    phi2,
    phi2_curve,
    phi2_root,
    phi2_squared_slope,
    two_map_distinct_ratio_bound,
    w1_exact,
    w2_bounds,
)
from .errors import (
    DegenerateInput,
    DegenerateSystem,
    DomainError,
    NotNormalized,
    OutOfRange,
    OutOfRegion,
    PoleEvaluation,
    ResourceLimit,
    SelfSimilarError,
)
from .ifs import (
    CouplingParam,
    DiscreteCoupling,
    DiscreteMeasure,
    IfsSystem,
    SelfSimilarMeasure,
    coupling_region,
    discretize_coupling,
    discretize_measure,
    validate_system,
)
from .oracle import (
    TransportPlan,
    coupling_moment,
    monotone_transport,
    random_feasible_coupling_cost,
    signed_moment,
    techlem_residual,
)

__version__ = "0.1.0"
