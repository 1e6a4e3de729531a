"""Global-degree distributions D, their PGFs, size-biased companions and samplers.

Infinite-support families are represented on a truncated support
``0..K`` with ``K <= tail_cap``.  For Poisson and geometric laws ``K`` is
chosen so the dropped tail is below 1e-16; the power-law families are
*defined* as the law truncated at ``tail_cap`` (normalised by direct
summation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import ClassVar

import numpy as np
from scipy import stats

from hh_net_epi.errors import DegenerateDistributionError

DEFAULT_TAIL_CAP = 100_000
_TAIL_EPS = 1e-17
# x**k below this is dropped when summing a series at x < 1
_SERIES_EPS_LOG = math.log(1e-20)


def _check_unit(s: float) -> None:
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"PGF argument must lie in [0, 1], got {s!r}")


class DegreeDistribution:
    """Common services for all degree families.

    Subclasses provide ``_weights()`` (unnormalised masses on ``0..K``) and may
    override the closed forms for the PGF, moments and sampling.
    """

    family: ClassVar[str] = ""
    tail_cap: int

    def _weights(self) -> np.ndarray:
        raise NotImplementedError

    @property
    def params(self) -> dict:
        """Family parameters, excluding the truncation bound."""
        raise NotImplementedError

    # -- mass function --------------------------------------------------

    @cached_property
    def probs(self) -> np.ndarray:
        """Mass function on the (truncated) support, indexed by degree."""
        w = np.asarray(self._weights(), dtype=float)
        return w / w.sum()

    @cached_property
    def _ks(self) -> np.ndarray:
        return np.arange(len(self.probs), dtype=float)

    @cached_property
    def _cdf(self) -> np.ndarray:
        c = np.cumsum(self.probs)
        c[-1] = 1.0
        return c

    @property
    def max_degree(self) -> int:
        return len(self.probs) - 1

    def pmf(self, k: int) -> float:
        if k < 0:
            raise ValueError("degree must be non-negative")
        return float(self.probs[k]) if k < len(self.probs) else 0.0

    # -- moments --------------------------------------------------------

    @cached_property
    def _moments(self) -> tuple[float, float]:
        p, k = self.probs, self._ks
        mean = float(np.dot(p, k))
        var = float(np.dot(p, (k - mean) ** 2))
        return mean, var

    def moments(self) -> tuple[float, float]:
        """Return ``(mean, variance)``."""
        return self._moments

    @property
    def mean(self) -> float:
        return self.moments()[0]

    @property
    def variance(self) -> float:
        return self.moments()[1]

    # -- generating function -------------------------------------------

    def _series_len(self, x: float) -> int:
        if x >= 1.0:
            return len(self.probs)
        if x <= 0.0:
            return min(2, len(self.probs))
        return min(len(self.probs), int(_SERIES_EPS_LOG / math.log(x)) + 2)

    def _pgf(self, x: float) -> float:
        K = self._series_len(x)
        return float(np.dot(self.probs[:K], np.power(x, self._ks[:K])))

    def _pgf_prime(self, x: float) -> float:
        K = self._series_len(x)
        if K < 2:
            return 0.0
        k = self._ks[1:K]
        return float(np.dot(k * self.probs[1:K], np.power(x, k - 1)))

    def pgf(self, s):
        """f_D(s) = E[s^D] for s in [0, 1] (scalar or array)."""
        if np.ndim(s):
            return np.array([self.pgf(float(v)) for v in np.ravel(s)]).reshape(np.shape(s))
        _check_unit(s)
        return self._pgf(float(s))

    def pgf_prime(self, s):
        """Derivative f_D'(s)."""
        if np.ndim(s):
            return np.array([self.pgf_prime(float(v)) for v in np.ravel(s)]).reshape(np.shape(s))
        _check_unit(s)
        return self._pgf_prime(float(s))

    def excess_pgf(self, s):
        """PGF of D~ - 1 (neighbours left after following an edge): f_D'(s)/mu_D."""
        mu = self._require_positive_mean()
        return self.pgf_prime(s) / mu

    # -- size biasing ---------------------------------------------------

    def _require_positive_mean(self) -> float:
        mu = self.mean
        if mu <= 0.0:
            raise DegenerateDistributionError(f"{self!r} has zero mean degree")
        return mu

    @cached_property
    def size_biased_probs(self) -> np.ndarray:
        mu = self._require_positive_mean()
        return self._ks * self.probs / mu

    @cached_property
    def _sb_cdf(self) -> np.ndarray:
        c = np.cumsum(self.size_biased_probs)
        c[-1] = 1.0
        return c

    def size_biased_pmf(self, k: int) -> float:
        """P(D~ = k) = k p_k / mu_D."""
        mu = self._require_positive_mean()
        return k * self.pmf(k) / mu

    # -- sampling -------------------------------------------------------

    def sample(self, rng: np.random.Generator, size=None):
        """Draw degrees from D."""
        u = rng.random(size)
        return np.searchsorted(self._cdf, u, side="right")

    def sample_size_biased(self, rng: np.random.Generator, size=None):
        """Draw from D~ (degree of the vertex at the end of a uniform edge)."""
        self._require_positive_mean()
        u = rng.random(size)
        return np.searchsorted(self._sb_cdf, u, side="right")

    def describe(self) -> str:
        body = ", ".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.family}({body})"


@dataclass(frozen=True)
class Poisson(DegreeDistribution):
    mean_degree: float
    tail_cap: int = DEFAULT_TAIL_CAP
    family: ClassVar[str] = "poisson"

    def __post_init__(self):
        if not self.mean_degree > 0:
            raise ValueError("Poisson mean must be positive")

    @property
    def params(self) -> dict:
        return {"mean": self.mean_degree}

    def _weights(self):
        # the tail beyond mean + 12 sd + 40 is far below _TAIL_EPS
        K = int(self.mean_degree + 12.0 * math.sqrt(self.mean_degree) + 40)
        return stats.poisson.pmf(np.arange(min(K, self.tail_cap) + 1), self.mean_degree)

    def pmf(self, k: int) -> float:
        if k < 0:
            raise ValueError("degree must be non-negative")
        return float(stats.poisson.pmf(k, self.mean_degree))

    def moments(self):
        return float(self.mean_degree), float(self.mean_degree)

    def _pgf(self, x):
        return math.exp(self.mean_degree * (x - 1.0))

    def _pgf_prime(self, x):
        return self.mean_degree * math.exp(self.mean_degree * (x - 1.0))

    def sample(self, rng, size=None):
        return rng.poisson(self.mean_degree, size)

    def sample_size_biased(self, rng, size=None):
        return rng.poisson(self.mean_degree, size) + 1


@dataclass(frozen=True)
class Geometric(DegreeDistribution):
    """P(D = k) = p (1 - p)^k, k = 0, 1, ..."""

    p: float
    tail_cap: int = DEFAULT_TAIL_CAP
    family: ClassVar[str] = "geometric"

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError("geometric success probability must lie in (0, 1)")

    @classmethod
    def from_mean(cls, mean: float, tail_cap: int = DEFAULT_TAIL_CAP) -> "Geometric":
        return cls(1.0 / (1.0 + mean), tail_cap)

    @property
    def params(self) -> dict:
        return {"p": self.p}

    def _weights(self):
        K = int(math.ceil(math.log(_TAIL_EPS) / math.log1p(-self.p)))
        k = np.arange(min(K, self.tail_cap) + 1)
        return self.p * np.power(1.0 - self.p, k)

    def pmf(self, k):
        if k < 0:
            raise ValueError("degree must be non-negative")
        return self.p * (1.0 - self.p) ** k

    def moments(self):
        q = 1.0 - self.p
        return q / self.p, q / self.p**2

    def _pgf(self, x):
        return self.p / (1.0 - (1.0 - self.p) * x)

    def _pgf_prime(self, x):
        q = 1.0 - self.p
        return self.p * q / (1.0 - q * x) ** 2

    def sample(self, rng, size=None):
        return rng.geometric(self.p, size) - 1

    def sample_size_biased(self, rng, size=None):
        # k p (1-p)^k / mu  ==  1 + NegBin(2, p)
        return rng.negative_binomial(2, self.p, size) + 1


@dataclass(frozen=True)
class Constant(DegreeDistribution):
    d: int
    tail_cap: int = DEFAULT_TAIL_CAP
    family: ClassVar[str] = "constant"

    def __post_init__(self):
        if self.d < 0:
            raise ValueError("constant degree must be non-negative")

    @property
    def params(self) -> dict:
        return {"d": self.d}

    def _weights(self):
        w = np.zeros(self.d + 1)
        w[self.d] = 1.0
        return w

    def moments(self):
        return float(self.d), 0.0

    def _pgf(self, x):
        return x**self.d

    def _pgf_prime(self, x):
        return self.d * x ** (self.d - 1) if self.d else 0.0

    def sample(self, rng, size=None):
        return np.full(size, self.d, dtype=np.int64) if size is not None else self.d

    def sample_size_biased(self, rng, size=None):
        self._require_positive_mean()
        return self.sample(rng, size)


@dataclass(frozen=True)
class PowerLaw(DegreeDistribution):
    """Flat mass up to ``k_star`` followed by a k^-a tail.

    ``p_k`` is proportional to ``k_star**-a`` for ``support_start <= k <= k_star`` and to
    ``k**-a`` beyond.  ``support_start`` defaults to 0, which reproduces the
    moments quoted for Pow(10, 7/2) (mean ~8.04, variance ~96); use 1 to drop
    the isolated vertices.
    """

    k_star: int
    a: float
    tail_cap: int = DEFAULT_TAIL_CAP
    support_start: int = 0
    family: ClassVar[str] = "powerlaw"

    def __post_init__(self):
        if self.k_star < 1:
            raise ValueError("k_star must be >= 1")
        if not self.a > 2.0:
            raise ValueError("power-law exponent must exceed 2 (finite variance)")
        if self.support_start not in (0, 1):
            raise ValueError("support_start must be 0 or 1")
        if self.tail_cap < self.k_star:
            raise ValueError("tail_cap must be at least k_star")

    @property
    def params(self) -> dict:
        return {"k_star": self.k_star, "a": self.a}

    def _weights(self):
        k = np.arange(self.tail_cap + 1, dtype=float)
        w = np.where(k <= self.k_star, float(self.k_star) ** -self.a, np.maximum(k, 1.0) ** -self.a)
        w[: self.support_start] = 0.0
        return w


@dataclass(frozen=True)
class PowerLawCutoff(DegreeDistribution):
    """p_k proportional to k^-a exp(-k / kappa), k >= 1."""

    kappa: float
    a: float
    tail_cap: int = DEFAULT_TAIL_CAP
    family: ClassVar[str] = "powerlaw_cutoff"

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError("cutoff scale kappa must be positive")
        if not self.a > 0:
            raise ValueError("exponent a must be positive")

    @property
    def params(self) -> dict:
        return {"kappa": self.kappa, "a": self.a}

    def _weights(self):
        # log-space keeps exp(-k/kappa) from underflowing before the cap
        K = min(self.tail_cap, int(self.kappa * 60) + 10)
        k = np.arange(1, K + 1, dtype=float)
        w = np.exp(-self.a * np.log(k) - k / self.kappa)
        return np.concatenate([[0.0], w])
