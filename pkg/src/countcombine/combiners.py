"""Global-null p-value combination tests: Cauchy, Fisher, and MinP.

Each combiner maps m individual p-values to a single statistic and a
combined p-value for the global null (all individual nulls true).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .distributions import chisq_sf

__all__ = [
    "P_CLAMP",
    "Method",
    "PValueVector",
    "CombinedResult",
    "combine_cct",
    "combine_fisher",
    "combine_minp",
    "COMBINERS",
]

# Incoming p-values are clamped into [P_CLAMP, 1 - P_CLAMP]: the Cauchy
# transform tan((0.5 - p) * pi) overflows at exact 0 or 1.
P_CLAMP = 1e-15


class Method(str, Enum):
    """Combination test identifiers."""

    CCT = "CCT"
    FISHER = "Fisher"
    MINP = "MinP"


@dataclass(frozen=True, eq=False)
class PValueVector:
    """An ordered vector of p-values with optional normalized weights.

    Parameters
    ----------
    pvalues : array_like
        m >= 1 values in [0, 1]; exact 0/1 are clamped to
        [P_CLAMP, 1 - P_CLAMP].
    weights : array_like, optional
        m positive weights summing to 1 (within 1e-12). When omitted,
        combiners that use weights fall back to 1/m each.
    """

    pvalues: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self) -> None:
        p = np.atleast_1d(np.asarray(self.pvalues, dtype=float))
        if p.ndim != 1 or p.size == 0:
            raise ValueError("at least one p-value is required")
        if not np.all(np.isfinite(p)) or np.any(p < 0.0) or np.any(p > 1.0):
            raise ValueError("p-values must be finite and lie in [0, 1]")
        object.__setattr__(self, "pvalues", np.clip(p, P_CLAMP, 1.0 - P_CLAMP))
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != p.shape:
                raise ValueError(
                    f"weights length {w.size} does not match {p.size} p-values"
                )
            if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
                raise ValueError("weights must be finite and strictly positive")
            if abs(float(w.sum()) - 1.0) > 1e-12:
                raise ValueError("weights must sum to 1 (within 1e-12)")
            object.__setattr__(self, "weights", w)

    @property
    def m(self) -> int:
        return self.pvalues.size

    def effective_weights(self) -> np.ndarray:
        if self.weights is not None:
            return self.weights
        return np.full(self.m, 1.0 / self.m)


@dataclass(frozen=True)
class CombinedResult:
    """Statistic and combined p-value of one combination test."""

    statistic: float
    pvalue: float
    method: Method


def _as_pvalue_vector(pv) -> PValueVector:
    if isinstance(pv, PValueVector):
        return pv
    return PValueVector(pv)


def combine_cct(pv) -> CombinedResult:
    """Cauchy combination test.

    statistic = sum_i w_i * tan((0.5 - p_i) * pi); under the global null its
    tail is approximately standard Cauchy, so

        pvalue = 0.5 - arctan(statistic) / pi.

    Weights default to 1/m. The p-value is strictly decreasing in the
    statistic and, for m = 1, reproduces the input p-value exactly.
    """
    pv = _as_pvalue_vector(pv)
    w = pv.effective_weights()
    statistic = float(np.sum(w * np.tan((0.5 - pv.pvalues) * np.pi)))
    pvalue = 0.5 - math.atan(statistic) / math.pi
    return CombinedResult(statistic=statistic, pvalue=pvalue, method=Method.CCT)


def combine_fisher(pv) -> CombinedResult:
    """Fisher's combination test (unweighted).

    statistic = sum_i -2 log(p_i), chi-square with 2m degrees of freedom
    under the global null with independent uniform p-values.
    """
    pv = _as_pvalue_vector(pv)
    statistic = float(-2.0 * np.sum(np.log(pv.pvalues)))
    pvalue = chisq_sf(statistic, 2 * pv.m)
    return CombinedResult(statistic=statistic, pvalue=pvalue, method=Method.FISHER)


def combine_minp(pv) -> CombinedResult:
    """Minimum p-value test (unweighted).

    statistic = min_i p_i, Beta(1, m) under the global null with independent
    uniform p-values, so pvalue = 1 - (1 - statistic)^m. Evaluated through
    expm1/log1p so tiny minima keep full precision.
    """
    pv = _as_pvalue_vector(pv)
    statistic = float(np.min(pv.pvalues))
    pvalue = float(-np.expm1(pv.m * math.log1p(-statistic)))
    return CombinedResult(statistic=statistic, pvalue=pvalue, method=Method.MINP)


COMBINERS = {
    Method.CCT: combine_cct,
    Method.FISHER: combine_fisher,
    Method.MINP: combine_minp,
}
