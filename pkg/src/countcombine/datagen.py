"""Generation of independent or copula-correlated negative binomial counts.

Rows are iid: each row is one copula draw (or m iid uniforms) pushed through
the negative binomial quantile, so column j is marginally NB(marginals[j])
whatever the dependence. With discrete marginals the joint law does not pin
down a unique copula, so only marginals and monotone dependence transfer are
contractual.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .copulas import CopulaFamily, CopulaSpec
from .copulas import copula_sample
from .distributions import NegBinParams, negbin_quantile

__all__ = ["DatasetSpec", "CountMatrix", "generate_dataset", "column_means", "dump_counts"]


@dataclass(frozen=True)
class DatasetSpec:
    """n rows of m negative binomial counts with optional copula dependence.

    ``copula=None`` means independent columns; a CopulaSpec (including the
    explicit independence family) must match the number of marginals.
    """

    marginals: tuple[NegBinParams, ...]
    copula: CopulaSpec | None = None
    n: int = 30

    def __post_init__(self) -> None:
        marginals = tuple(self.marginals)
        if not marginals:
            raise ValueError("at least one marginal is required")
        if not all(isinstance(mp, NegBinParams) for mp in marginals):
            raise ValueError("marginals must be NegBinParams instances")
        object.__setattr__(self, "marginals", marginals)
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 2):
            raise ValueError(f"n must be an integer >= 2, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if self.copula is not None and self.copula.dim != len(marginals):
            raise ValueError(
                f"copula dimension {self.copula.dim} does not match "
                f"{len(marginals)} marginals"
            )

    @property
    def m(self) -> int:
        return len(self.marginals)


@dataclass(frozen=True, eq=False)
class CountMatrix:
    """An n x m matrix of nonnegative counts plus the spec that produced it."""

    values: np.ndarray
    spec: DatasetSpec


def _column_groups(spec: DatasetSpec):
    """Column indices grouped by distinct marginal parameters, cached per spec."""
    groups = spec.__dict__.get("_groups")
    if groups is None:
        by_params: dict[NegBinParams, list[int]] = {}
        for j, params in enumerate(spec.marginals):
            by_params.setdefault(params, []).append(j)
        groups = tuple((params, np.asarray(cols)) for params, cols in by_params.items())
        object.__setattr__(spec, "_groups", groups)
    return groups


def generate_dataset(spec: DatasetSpec, rng: np.random.Generator) -> CountMatrix:
    """Draw one dataset: uniforms row by row, then quantile transformation."""
    if spec.copula is None or spec.copula.family is CopulaFamily.INDEPENDENCE:
        u = rng.random((spec.n, spec.m))
    else:
        u = copula_sample(spec.copula, rng, size=spec.n)
    groups = _column_groups(spec)
    if len(groups) == 1:
        counts = negbin_quantile(u, groups[0][0])
    else:
        counts = np.empty((spec.n, spec.m), dtype=np.int64)
        for params, cols in groups:
            counts[:, cols] = negbin_quantile(u[:, cols], params)
    return CountMatrix(values=counts, spec=spec)


def column_means(data: CountMatrix) -> np.ndarray:
    """Arithmetic mean of each column."""
    if data.values.size == 0:
        raise ValueError("empty count matrix")
    return data.values.mean(axis=0)


def dump_counts(data: CountMatrix, path) -> None:
    """Write the matrix as text: one row per line, tab-separated integers."""
    np.savetxt(path, data.values, fmt="%d", delimiter="\t")
