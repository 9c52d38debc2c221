"""Truncated variation, two-sided Skorokhod reflection and Brownian local times."""

from .errors import (
    CensoringError,
    ConfigurationError,
    DomainError,
    ShapeError,
    SizeError,
    TvlabError,
)
from .harness import (
    EnsembleJob,
    MonteCarloReport,
    SummaryStats,
    ks_two_sample,
    run_ensemble,
    summarize,
)
from .localtime import (
    LatticeLocalTimes,
    XYProcesses,
    build_xy,
    discretized_ito_integral,
    lattice_local_times,
    sawtooth,
    sawtooth_left_derivative,
    tanaka_residual,
)
from .paths import (
    Crossing,
    SampledPath,
    SimConfig,
    first_drawdown_time,
    first_drawup_time,
    first_passage,
    generate_bm,
    read_path_csv,
    running_extrema,
    write_path_csv,
)
from .skorokhod import Anchor, TubeSolution, reflect, select_anchor, solve
from .subordinator import (
    InverseSample,
    empirical_exponent,
    excursion_terms,
    inverse_process,
    levy_exponent,
    representation_test,
    scale_w,
    scale_z,
    small_c_drift_check,
    tail_check_tau,
)
from .truncvar import TruncVarResult, ttv_oracle, ttv_stream, variational_residual
