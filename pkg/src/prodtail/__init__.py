"""prodtail: samplers, exact lower tails, bounds, and tree centrality for
the clipped partial-sum product X = prod_i min(E_1 + ... + E_i, 1)."""

from .config import DEFAULT_SEED, RunConfig
from .sampling import (
    SimParams,
    XBatch,
    XSample,
    moment_exact,
    sample_x_beta,
    sample_x_beta_batch,
    sample_x_compound,
    sample_x_compound_batch,
    sample_x_direct,
    sample_x_direct_batch,
)
from .streams import substream
from .tails import (
    BoundReport,
    InconsistentBoundsError,
    PoissonPair,
    PoissonTailBounds,
    PoissonTailQuery,
    StirlingRatioBounds,
    TailQuery,
    TailValue,
    asymptotic_lower,
    asymptotic_upper,
    build_bound_report,
    optimal_alpha,
    poisson_ge_bound,
    poisson_ge_exact,
    poisson_tail_bounds,
    stirling_ratio_bounds,
    tail_bound_legacy,
    tail_bound_moment,
    tail_bound_optimal,
    tail_exact,
)
from .trees import (
    CentralityTable,
    GrowingTree,
    TrialResult,
    grow_uniform_attachment,
    log_phi_all,
    log_phi_direct,
    root_finding_trial,
    top_k_central,
)
from .verify import (
    CheckRecord,
    VerificationReport,
    ks_two_sample_critical,
    run_verify_suite,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_SEED",
    "RunConfig",
    "SimParams",
    "XSample",
    "XBatch",
    "sample_x_direct",
    "sample_x_compound",
    "sample_x_beta",
    "sample_x_direct_batch",
    "sample_x_compound_batch",
    "sample_x_beta_batch",
    "moment_exact",
    "substream",
    "TailValue",
    "TailQuery",
    "PoissonPair",
    "PoissonTailQuery",
    "PoissonTailBounds",
    "StirlingRatioBounds",
    "BoundReport",
    "InconsistentBoundsError",
    "tail_exact",
    "tail_bound_moment",
    "optimal_alpha",
    "tail_bound_optimal",
    "tail_bound_legacy",
    "poisson_ge_exact",
    "poisson_ge_bound",
    "asymptotic_lower",
    "asymptotic_upper",
    "poisson_tail_bounds",
    "stirling_ratio_bounds",
    "build_bound_report",
    "GrowingTree",
    "CentralityTable",
    "TrialResult",
    "grow_uniform_attachment",
    "log_phi_direct",
    "log_phi_all",
    "top_k_central",
    "root_finding_trial",
    "CheckRecord",
    "VerificationReport",
    "run_verify_suite",
    "ks_two_sample_critical",
]
