"""Independence, Clayton, and Gumbel-Hougaard copulas: CDF and sampling.

Sampling uses the Marshall-Olkin frailty construction, which is exact and
O(m) per draw: a shared positive factor V induces the dependence, and each
coordinate is the generator applied to E_i / V with E_i iid Exp(1).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .distributions import sample_gamma, sample_positive_stable

__all__ = ["CopulaFamily", "CopulaSpec", "copula_cdf", "copula_sample"]

# Keep samples strictly inside (0, 1) even if a frailty draw degenerates.
_U_LO = 1e-300
_U_HI = 1.0 - 1e-16


class CopulaFamily(str, Enum):
    INDEPENDENCE = "independence"
    CLAYTON = "clayton"
    GUMBEL_HOUGAARD = "gumbel-hougaard"


@dataclass(frozen=True)
class CopulaSpec:
    """An m-dimensional copula: family, dependence parameter, dimension.

    Clayton requires theta > 0 and Gumbel-Hougaard theta >= 1 (their
    respective parameter domains); the independence family ignores theta.
    """

    family: CopulaFamily
    theta: float = 0.0
    dim: int = 2

    def __post_init__(self) -> None:
        family = CopulaFamily(self.family)
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "theta", float(self.theta))
        if not (isinstance(self.dim, (int, np.integer)) and self.dim >= 2):
            raise ValueError(f"dim must be an integer >= 2, got {self.dim!r}")
        object.__setattr__(self, "dim", int(self.dim))
        if family is CopulaFamily.CLAYTON and not self.theta > 0.0:
            raise ValueError(
                f"Clayton copula requires theta > 0, got {self.theta!r}"
            )
        if family is CopulaFamily.GUMBEL_HOUGAARD and not self.theta >= 1.0:
            raise ValueError(
                f"Gumbel-Hougaard copula requires theta >= 1, got {self.theta!r}"
            )


def copula_cdf(spec: CopulaSpec, u) -> float:
    """Evaluate C(u) at one point of the unit hypercube.

    Clayton:          (1 - m + sum u_i^-theta)^(-1/theta)
    Gumbel-Hougaard:  exp(-[sum (-log u_i)^theta]^(1/theta))
    Independence:     prod u_i

    Any u_i = 0 returns 0 (the copula is grounded).
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (spec.dim,):
        raise ValueError(f"u must have shape ({spec.dim},), got {u.shape}")
    if np.any(u < 0.0) or np.any(u > 1.0):
        raise ValueError("u components must lie in [0, 1]")
    if np.any(u == 0.0):
        return 0.0
    if spec.family is CopulaFamily.CLAYTON:
        return float(
            (1.0 - spec.dim + np.sum(u ** -spec.theta)) ** (-1.0 / spec.theta)
        )
    if spec.family is CopulaFamily.GUMBEL_HOUGAARD:
        return float(
            np.exp(-np.sum((-np.log(u)) ** spec.theta) ** (1.0 / spec.theta))
        )
    return float(np.prod(u))


def copula_sample(spec: CopulaSpec, rng: np.random.Generator, size: int | None = None):
    """Draw from the copula; coordinates are marginally Uniform(0, 1).

    Clayton uses a Gamma(1/theta) frailty, Gumbel-Hougaard a positive
    stable(1/theta) frailty, independence plain iid uniforms.

    Parameters
    ----------
    spec : CopulaSpec
    rng : numpy.random.Generator
    size : int, optional
        None returns a single draw of shape (dim,); an int n returns n
        independent draws stacked as (n, dim).
    """
    n = 1 if size is None else int(size)
    m = spec.dim
    if spec.family is CopulaFamily.INDEPENDENCE:
        u = rng.random((n, m))
    elif spec.family is CopulaFamily.CLAYTON:
        v = sample_gamma(1.0 / spec.theta, rng, size=n)
        e = rng.standard_exponential((n, m))
        u = (1.0 + e / v[:, None]) ** (-1.0 / spec.theta)
    else:
        v = sample_positive_stable(1.0 / spec.theta, rng, size=n)
        e = rng.standard_exponential((n, m))
        u = np.exp(-((e / np.asarray(v)[:, None]) ** (1.0 / spec.theta)))
    u = np.clip(u, _U_LO, _U_HI)
    return u[0] if size is None else u
