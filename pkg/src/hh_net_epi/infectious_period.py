"""Infectious-period laws I, given by their Laplace transform phi and a sampler.

An infinite period is ``math.inf``.  Use :func:`contact_prob` rather than
``1 - exp(-rate * I)`` directly: it maps a zero rate to probability 0 even
when ``I`` is infinite, and a positive rate with ``I = inf`` to exactly 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar

import numpy as np

INF = math.inf


def contact_prob(rate: float, periods):
    """Probability 1 - exp(-rate * I) of at least one contact with a given partner."""
    periods = np.asarray(periods, dtype=float)
    if rate == 0.0:
        return np.zeros_like(periods)
    return -np.expm1(-rate * periods)


def _check_theta(theta):
    if np.any(np.asarray(theta) < 0):
        raise ValueError("Laplace transform argument must be non-negative")


class InfectiousPeriod:
    kind: ClassVar[str] = ""

    def laplace(self, theta):
        """phi(theta) = E[exp(-theta I)]."""
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError

    @property
    def params(self) -> dict:
        raise NotImplementedError

    @property
    def prob_zero(self) -> float:
        """P(I = 0), the limit of phi at infinity."""
        return 0.0

    def describe(self) -> str:
        body = ", ".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.kind}({body})"


@dataclass(frozen=True)
class Fixed(InfectiousPeriod):
    """I = c almost surely."""

    c: float
    kind: ClassVar[str] = "fixed"

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("fixed infectious period must be positive")

    @property
    def params(self):
        return {"c": self.c}

    def laplace(self, theta):
        _check_theta(theta)
        return np.exp(-np.asarray(theta, dtype=float) * self.c) if np.ndim(theta) else math.exp(-theta * self.c)

    def sample(self, rng, size=None):
        return np.full(size, float(self.c)) if size is not None else float(self.c)


@dataclass(frozen=True)
class ZeroOrInfinite(InfectiousPeriod):
    """P(I = inf) = p, P(I = 0) = 1 - p."""

    p: float
    kind: ClassVar[str] = "zero_or_infinite"

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")

    @property
    def params(self):
        return {"p": self.p}

    @property
    def prob_zero(self):
        return 1.0 - self.p

    def laplace(self, theta):
        _check_theta(theta)
        if np.ndim(theta):
            return np.where(np.asarray(theta) == 0, 1.0, 1.0 - self.p)
        return 1.0 if theta == 0 else 1.0 - self.p

    def sample(self, rng, size=None):
        u = rng.random(size)
        return np.where(u < self.p, INF, 0.0) if size is not None else (INF if u < self.p else 0.0)


@dataclass(frozen=True)
class Exponential(InfectiousPeriod):
    mean: float
    kind: ClassVar[str] = "exponential"

    def __post_init__(self):
        if not self.mean > 0:
            raise ValueError("exponential mean must be positive")

    @property
    def params(self):
        return {"mean": self.mean}

    def laplace(self, theta):
        _check_theta(theta)
        return 1.0 / (1.0 + np.asarray(theta, dtype=float) * self.mean) if np.ndim(theta) else 1.0 / (1.0 + theta * self.mean)

    def sample(self, rng, size=None):
        return rng.exponential(self.mean, size)
