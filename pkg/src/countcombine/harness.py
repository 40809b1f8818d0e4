"""Monte Carlo drivers for the type-1-error and power protocols.

Each replication generates one dataset, computes per-variable Z statistics
and two-sided p-values, feeds them to every requested combiner, and records
rejections against each significance level. Replication ``rep`` always uses
the RNG stream ``PCG64(seed).jumped(rep)``, so results depend only on
(seed, config) and never on scheduling or worker count: aggregation is a
sum of integer rejection counts.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .combiners import COMBINERS, Method, PValueVector
from .copulas import CopulaFamily
from .datagen import DatasetSpec, generate_dataset
from .ztest import NullSpec, two_sided_pvalues, z_statistics

__all__ = [
    "ExperimentConfig",
    "RateEntry",
    "RejectionReport",
    "GridCellResult",
    "REPORT_COLUMNS",
    "run_type1",
    "run_power",
    "run_grid",
    "run_uniform_null",
    "replication_rng",
]

ALL_METHODS = (Method.CCT, Method.FISHER, Method.MINP)

# Stable row schema for emitted reports (CSV columns, JSON keys).
REPORT_COLUMNS = (
    "experiment_id",
    "method",
    "alpha",
    "m",
    "r",
    "p",
    "n",
    "copula_family",
    "theta",
    "M",
    "rate",
    "se",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """One simulation cell: data model, null, and Monte Carlo settings."""

    dataset: DatasetSpec
    null: NullSpec
    replications: int
    alpha_levels: tuple[float, ...]
    seed: int
    methods: tuple[Method, ...] = ALL_METHODS
    experiment_id: str = ""

    def __post_init__(self) -> None:
        if not (isinstance(self.replications, (int, np.integer)) and self.replications >= 100):
            raise ValueError(f"replications must be an integer >= 100, got {self.replications!r}")
        object.__setattr__(self, "replications", int(self.replications))
        alphas = tuple(float(a) for a in self.alpha_levels)
        if not alphas or any(not 0.0 < a < 1.0 for a in alphas):
            raise ValueError("alpha levels must be a nonempty subset of (0, 1)")
        object.__setattr__(self, "alpha_levels", alphas)
        if not (isinstance(self.seed, (int, np.integer)) and 0 <= self.seed < 2**64):
            raise ValueError(f"seed must be an integer in [0, 2^64), got {self.seed!r}")
        object.__setattr__(self, "seed", int(self.seed))
        methods = tuple(Method(mth) for mth in self.methods)
        if not methods or len(set(methods)) != len(methods):
            raise ValueError("methods must be a nonempty set of distinct combiners")
        object.__setattr__(self, "methods", methods)
        if self.null.m != self.dataset.m:
            raise ValueError(
                f"null spec has {self.null.m} entries for {self.dataset.m} variables"
            )


@dataclass(frozen=True)
class RateEntry:
    """Rejection count for one (method, alpha) pair."""

    method: Method
    alpha: float
    rejections: int
    replications: int

    @property
    def rejection_rate(self) -> float:
        return self.rejections / self.replications

    @property
    def standard_error(self) -> float:
        rate = self.rejection_rate
        return math.sqrt(rate * (1.0 - rate) / self.replications)


@dataclass(frozen=True)
class RejectionReport:
    """Per-(method, alpha) rejection rates for one experiment cell."""

    config: ExperimentConfig
    entries: tuple[RateEntry, ...]

    def entry(self, method: Method, alpha: float) -> RateEntry:
        for e in self.entries:
            if e.method is Method(method) and math.isclose(e.alpha, alpha):
                return e
        raise KeyError(f"no entry for ({method}, {alpha})")

    def rate(self, method: Method, alpha: float) -> float:
        return self.entry(method, alpha).rejection_rate

    def to_rows(self) -> list[dict]:
        """Flatten to the stable REPORT_COLUMNS schema, one row per entry.

        ``r`` and ``p`` report the first marginal (the grids use homogeneous
        nulls; the power alternative deviates only in the last variable).
        """
        ds = self.config.dataset
        copula = ds.copula
        family = copula.family.value if copula is not None else CopulaFamily.INDEPENDENCE.value
        theta = copula.theta if copula is not None else 0.0
        rows = []
        for e in self.entries:
            rows.append(
                {
                    "experiment_id": self.config.experiment_id,
                    "method": e.method.value,
                    "alpha": e.alpha,
                    "m": ds.m,
                    "r": ds.marginals[0].r,
                    "p": ds.marginals[0].p,
                    "n": ds.n,
                    "copula_family": family,
                    "theta": theta,
                    "M": e.replications,
                    "rate": e.rejection_rate,
                    "se": e.standard_error,
                }
            )
        return rows


@dataclass(frozen=True)
class GridCellResult:
    """Outcome of one grid cell: a report, or the error that stopped it."""

    config: ExperimentConfig
    report: RejectionReport | None = None
    error: str | None = None


def replication_rng(seed: int, replication_index: int) -> np.random.Generator:
    """The dedicated RNG stream of one replication: PCG64(seed) jumped."""
    return np.random.Generator(np.random.PCG64(seed).jumped(replication_index))


def _count_block(config: ExperimentConfig, start: int, stop: int) -> np.ndarray:
    """Rejection counts over replications [start, stop), shape (methods, alphas)."""
    alphas = np.asarray(config.alpha_levels)
    counts = np.zeros((len(config.methods), alphas.size), dtype=np.int64)
    base = np.random.PCG64(config.seed)
    combiners = [COMBINERS[mth] for mth in config.methods]
    for rep in range(start, stop):
        rng = np.random.Generator(base.jumped(rep))
        data = generate_dataset(config.dataset, rng)
        pv = two_sided_pvalues(z_statistics(data, config.null))
        for i, combine in enumerate(combiners):
            counts[i] += combine(pv).pvalue < alphas
    return counts


def _run_counts(config: ExperimentConfig, parallelism: int) -> np.ndarray:
    M = config.replications
    if parallelism <= 1:
        return _count_block(config, 0, M)
    # Chunk bounds vary with the worker count, but the per-replication
    # streams do not, and integer summation is order-insensitive.
    n_chunks = min(M, parallelism * 4)
    bounds = np.linspace(0, M, n_chunks + 1).astype(int)
    total = np.zeros((len(config.methods), len(config.alpha_levels)), dtype=np.int64)
    with ProcessPoolExecutor(max_workers=parallelism) as pool:
        futures = [
            pool.submit(_count_block, config, int(a), int(b))
            for a, b in zip(bounds[:-1], bounds[1:])
            if b > a
        ]
        for fut in futures:
            total += fut.result()
    return total


def _build_report(config: ExperimentConfig, counts: np.ndarray) -> RejectionReport:
    entries = tuple(
        RateEntry(
            method=mth,
            alpha=alpha,
            rejections=int(counts[i, j]),
            replications=config.replications,
        )
        for i, mth in enumerate(config.methods)
        for j, alpha in enumerate(config.alpha_levels)
    )
    return RejectionReport(config=config, entries=entries)


def _marginal_means(config: ExperimentConfig) -> np.ndarray:
    return np.array([mp.mean() for mp in config.dataset.marginals])


def _is_global_null(config: ExperimentConfig) -> bool:
    return bool(np.allclose(_marginal_means(config), config.null.mu0, rtol=0.0, atol=1e-12))


def run_type1(
    config: ExperimentConfig,
    parallelism: int = 1,
    allow_mismatch: bool = False,
) -> RejectionReport:
    """Estimate type-1-error rates: data simulated under the global null.

    Raises unless every marginal mean equals its null mean; pass
    ``allow_mismatch=True`` for intentional misspecification studies.
    """
    if not allow_mismatch and not _is_global_null(config):
        raise ValueError(
            "type-1 protocol requires marginal means equal to the null means "
            "(pass allow_mismatch=True to override)"
        )
    return _build_report(config, _run_counts(config, parallelism))


def run_power(
    config: ExperimentConfig,
    parallelism: int = 1,
    allow_mismatch: bool = False,
) -> RejectionReport:
    """Estimate power: at least one marginal mean must differ from its null."""
    if not allow_mismatch and _is_global_null(config):
        raise ValueError(
            "power protocol requires at least one marginal mean different "
            "from its null mean (pass allow_mismatch=True to override)"
        )
    return _build_report(config, _run_counts(config, parallelism))


def run_grid(
    configs,
    parallelism: int = 1,
) -> list[GridCellResult]:
    """Run every cell, preserving input order; cell failures do not abort.

    Cells whose marginal means match their null means run the type-1
    protocol, the others the power protocol.
    """
    configs = list(configs)
    if not configs:
        raise ValueError("config grid must be nonempty")
    results: list[GridCellResult] = []
    for config in configs:
        try:
            driver = run_type1 if _is_global_null(config) else run_power
            report = driver(config, parallelism=parallelism)
            results.append(GridCellResult(config=config, report=report))
        except Exception as exc:  # noqa: BLE001 - reported per cell
            results.append(GridCellResult(config=config, error=str(exc)))
    return results


def run_uniform_null(
    m: int,
    replications: int,
    alpha_levels,
    seed: int,
    methods: tuple[Method, ...] = ALL_METHODS,
) -> tuple[RateEntry, ...]:
    """Bypass mode: feed iid Uniform(0,1) p-values straight to the combiners.

    Sanity cross-check of the rejection-rate machinery; with exact uniform
    inputs Fisher and MinP have exact null distributions.
    """
    alphas = np.asarray([float(a) for a in alpha_levels])
    counts = np.zeros((len(methods), alphas.size), dtype=np.int64)
    base = np.random.PCG64(seed)
    combiners = [COMBINERS[Method(mth)] for mth in methods]
    for rep in range(replications):
        rng = np.random.Generator(base.jumped(rep))
        pv = PValueVector(rng.random(m))
        for i, combine in enumerate(combiners):
            counts[i] += combine(pv).pvalue < alphas
    return tuple(
        RateEntry(
            method=Method(mth),
            alpha=float(alpha),
            rejections=int(counts[i, j]),
            replications=replications,
        )
        for i, mth in enumerate(methods)
        for j, alpha in enumerate(alphas)
    )
