"""Rate regions for two-user interference channels with generalized or
intermittent feedback: inner bounds, the linear-deterministic capacity
polytope, region comparison, and Monte Carlo validation of the coding steps.
"""

from .bounds import (
    DetIfInputDistribution,
    GfInputDistribution,
    SearchConfig,
    Theorem1Constants,
    Theorem2Constants,
    inner_region_det_if,
    inner_region_gf,
    schemeV_system,
    search_union_det,
    search_union_gf,
    theorem1_constants,
    theorem1_system,
    theorem2_constants,
    theorem2_system,
)
from .channels import (
    FeedbackStateSpec,
    IcGfChannel,
    InjectiveDetIc,
    LdicParams,
    det_to_icgf,
    injectivity_check,
    ldic_build,
    load_channel_config,
)
from .ldic import capacity_region, capacity_sweep
from .regions import (
    LinearRateSystem,
    RateRegion,
    eliminate_all_but,
    fm_eliminate,
    is_subset,
    project_to_rate_plane,
    vertex_deviation,
)
from .simulator import (
    CoveringFamily,
    SchemeConfig,
    covering_success_rate,
    sample_states,
    simulate_scheme,
)

__version__ = "0.1.0"

__all__ = [
    "CoveringFamily",
    "DetIfInputDistribution",
    "FeedbackStateSpec",
    "GfInputDistribution",
    "IcGfChannel",
    "InjectiveDetIc",
    "LdicParams",
    "LinearRateSystem",
    "RateRegion",
    "SchemeConfig",
    "SearchConfig",
    "Theorem1Constants",
    "Theorem2Constants",
    "capacity_region",
    "capacity_sweep",
    "covering_success_rate",
    "det_to_icgf",
    "eliminate_all_but",
    "fm_eliminate",
    "injectivity_check",
    "inner_region_det_if",
    "inner_region_gf",
    "is_subset",
    "ldic_build",
    "load_channel_config",
    "project_to_rate_plane",
    "sample_states",
    "schemeV_system",
    "search_union_det",
    "search_union_gf",
    "simulate_scheme",
    "theorem1_constants",
    "theorem1_system",
    "theorem2_constants",
    "theorem2_system",
    "vertex_deviation",
]
