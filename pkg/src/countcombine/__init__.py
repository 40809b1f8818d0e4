"""Global-null testing on count data: p-value combiners, copula-correlated
negative binomial data generation, and Monte Carlo calibration experiments."""

__version__ = "0.1.0"

from .combiners import (
    CombinedResult,
    Method,
    PValueVector,
    combine_cct,
    combine_fisher,
    combine_minp,
)
from .copulas import CopulaFamily, CopulaSpec, copula_cdf, copula_sample
from .datagen import (
    CountMatrix,
    DatasetSpec,
    column_means,
    dump_counts,
    generate_dataset,
)
from .distributions import (
    NegBinParams,
    NormalApprox,
    chisq_sf,
    negbin_pmf,
    negbin_quantile,
    normal_cdf,
    sample_gamma,
    sample_positive_stable,
)
from .harness import (
    ExperimentConfig,
    GridCellResult,
    RateEntry,
    RejectionReport,
    REPORT_COLUMNS,
    replication_rng,
    run_grid,
    run_power,
    run_type1,
    run_uniform_null,
)
from .ztest import NullSpec, two_sided_pvalues, z_statistics

__all__ = [
    "__version__",
    "CombinedResult",
    "Method",
    "PValueVector",
    "combine_cct",
    "combine_fisher",
    "combine_minp",
    "CopulaFamily",
    "CopulaSpec",
    "copula_cdf",
    "copula_sample",
    "CountMatrix",
    "DatasetSpec",
    "column_means",
    "dump_counts",
    "generate_dataset",
    "NegBinParams",
    "NormalApprox",
    "chisq_sf",
    "negbin_pmf",
    "negbin_quantile",
    "normal_cdf",
    "sample_gamma",
    "sample_positive_stable",
    "ExperimentConfig",
    "GridCellResult",
    "RateEntry",
    "RejectionReport",
    "REPORT_COLUMNS",
    "replication_rng",
    "run_grid",
    "run_power",
    "run_type1",
    "run_uniform_null",
    "NullSpec",
    "two_sided_pvalues",
    "z_statistics",
]
