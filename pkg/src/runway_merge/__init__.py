"""Monte Carlo runway capacity for merging straight-in and downwind arrival streams."""

__version__ = "0.1.0"

from runway_merge.arrivals import (  # noqa: E402
    ArrivalStreams,
    InfeasibleRateError,
    SeparationSpec,
    StreamParams,
    beta_of,
    generate_stream,
    generate_streams,
    lambda_of_beta,
)
from runway_merge.commlink import (  # noqa: E402
    CommLinkParams,
    CommTrace,
    LatencySpec,
    availability_of,
    continuity_of,
    generate_trace,
    is_continuously_available,
    params_from_availability,
)
from runway_merge.merge_sim import (  # noqa: E402
    DownwindRecord,
    LandingQueue,
    SeparationViolation,
    SimParams,
    SimResult,
    UncertaintyConfig,
    find_gap,
    run_simulation,
)
from runway_merge.metrics import ExpFit, MetricsReport, aggregate, compute_metrics, fit_exponential  # noqa: E402
from runway_merge.oracle import (  # noqa: E402
    OracleInput,
    beta_max,
    expected_gap_capacity,
    gap_capacity,
    oracle_grid,
    theoretical_throughput,
)
from runway_merge.sweep import ContourGrid, SweepSpec, replicate, run_replication, run_sweep, smooth_contours  # noqa: E402
from runway_merge.uncertainty import (  # noqa: E402
    GammaParams,
    LogUniformRange,
    RngStream,
    ShiftedExpParams,
    TruncNormalParams,
    sample_gamma,
    sample_log_uniform,
    sample_shifted_exp,
    sample_trunc_normal,
)
