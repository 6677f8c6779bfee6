"""Exact permanents of oblong matrices and ergodic limit experiments."""

from .errors import (
    CapExceededError,
    DimensionError,
    DomainError,
    InputError,
    InvalidSpecError,
    NoClosedFormError,
    PermflowError,
)
from .perm_core import (
    Caps,
    OblongMatrix,
    SetPartition,
    SubsetSums,
    enumerate_partitions,
    falling_power,
    log_falling_power,
    permanent,
    permanent_binet_minc,
    permanent_binet_minc_normalized,
    permanent_naive,
    permanent_ryser_oblong,
    subset_sums,
    subset_sums_append,
)
from .sym_means import (
    elementary_from_power_sums,
    elementary_symmetric,
    symmetric_mean,
    symmetric_mean_profile,
)
from .ergodic_proc import ProcessSpec, expected_product, init, log_integral, materialize, next_column
from .experiment import (
    ConvergenceRecord,
    checkpoint_schedule,
    loglog_slope,
    median_final,
    record_at,
    run_aaronson_ratio,
    run_experiment,
    run_max_ratio,
    run_permanent_convergence,
    run_seeds,
    run_subset_ratio,
    run_symmetric_mean_high,
    run_symmetric_mean_low,
)

__version__ = "0.1.0"
