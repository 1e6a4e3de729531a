"""Large-population (m -> infinity) quantities of the households model.

The epidemic among households is approximated by a branching process whose
offspring are the households infected globally by one household; the
susceptibility set of a typical individual grows like a second ("backward")
branching process.  This module computes

* ``r_star``           -- mean offspring of a non-initial household,
* ``forward_pgfs``     -- PGFs of the initial / subsequent offspring C, C~,
* ``backward_pgfs``    -- PGFs of the susceptibility-set offspring B, B~,
* ``major_outbreak_prob``           -- 1 - f_C(sigma),
* ``expected_relative_final_size``  -- 1 - f_B(xi),
* ``critical_lambda_g`` -- the global rate at which r_star crosses 1.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.optimize import brentq

from hh_net_epi.degree_dist import DegreeDistribution
from hh_net_epi.errors import DegenerateDistributionError, NoRootError, NonConvergenceError
from hh_net_epi.household import local_final_size_dist, mean_local_final_size, sample_phi_batch, susceptibility_set_dist
from hh_net_epi.infectious_period import Fixed, InfectiousPeriod, ZeroOrInfinite

log = logging.getLogger(__name__)

CLOSED_FORM_FIXED = "ClosedFormFixed"
CLOSED_FORM_ZERO_INF = "ClosedFormZeroInf"
CLOSED_FORM_GENERAL = "ClosedFormGeneral"
MONTE_CARLO = "MonteCarloEmpirical"

DEFAULT_MC_DRAWS = 1_000_000
FIXED_POINT_TOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """Household size, per-pair rates, degree law, infectious period, initial case.

    ``initial_degree=None`` means the initial infective is chosen uniformly at
    random; an integer fixes the degree of a specific initial infective.
    """

    n: int
    lambda_L: float
    lambda_G: float
    degree: DegreeDistribution
    period: InfectiousPeriod
    initial_degree: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("household size must be >= 1")
        if self.lambda_L < 0 or self.lambda_G < 0:
            raise ValueError("contact rates must be non-negative")
        if self.initial_degree is not None and self.initial_degree < 0:
            raise ValueError("initial degree must be non-negative")

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class PgfPair:
    """Initial- and subsequent-generation offspring PGFs."""

    initial: Callable[[float], float]
    subsequent: Callable[[float], float]
    method_tag: str
    # Monte Carlo bookkeeping (empty for closed forms)
    draws: int = 0
    subsequent_mean: float = float("nan")
    subsequent_mean_se: float = float("nan")
    masses: tuple = field(default=(), repr=False)


def global_contact_prob(params: ModelParams) -> float:
    """p_G = 1 - phi(lambda_G): chance an infective contacts a given global neighbour."""
    return 1.0 - params.period.laplace(params.lambda_G)


def r_star(params: ModelParams) -> float:
    mu, var = params.degree.moments()
    if mu <= 0:
        raise DegenerateDistributionError("r_star needs a positive mean degree")
    mu_t = mean_local_final_size(params.n, params.lambda_L, params.period)
    return (mu * (mu_t + 1.0) + var / mu - 1.0) * global_contact_prob(params)


# ---------------------------------------------------------------------------
# PGFs
# ---------------------------------------------------------------------------


def _thin(s: float, p: float) -> float:
    return min(1.0, 1.0 - p + s * p)


def _initial_degree_pgf(params: ModelParams) -> Callable[[float], float]:
    if params.initial_degree is None:
        return params.degree.pgf
    d = params.initial_degree
    return lambda x: x**d


def _random_sum_pgfs(params: ModelParams, local_mass: np.ndarray, initial_k0, method: str) -> PgfPair:
    """f(s) = f_K0(x) f_L(f_D(x)) with x = 1 - p_G + s p_G, for K0 of each generation."""
    p_g = global_contact_prob(params)
    f_d = params.degree.pgf
    excess = params.degree.excess_pgf

    def make(f_k0):
        def f(s: float) -> float:
            x = _thin(s, p_g)
            return float(f_k0(x) * npoly.polyval(f_d(x), local_mass))
        return f

    return PgfPair(initial=make(initial_k0), subsequent=make(excess), method_tag=method)


def _zero_inf_forward(params: ModelParams) -> PgfPair:
    p = params.period.p
    g = 1.0 if params.lambda_G > 0 else 0.0
    k_locals = params.n - 1 if params.lambda_L > 0 else 0
    f_d = params.degree.pgf

    def make(f_k0):
        def f(s: float) -> float:
            y = _thin(s, g)
            return float(1.0 - p + p * f_k0(y) * (1.0 - p + p * f_d(y)) ** k_locals)
        return f

    return PgfPair(
        initial=make(_initial_degree_pgf(params)),
        subsequent=make(params.degree.excess_pgf),
        method_tag=CLOSED_FORM_ZERO_INF,
    )


@lru_cache(maxsize=64)
def _mc_offspring_masses(params: ModelParams, draws: int, seed: int):
    rng_init, rng_sub = (np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(2))
    deg = params.degree
    n = params.n

    degrees = np.asarray(deg.sample(rng_init, (draws, n)), dtype=np.int64)
    if params.initial_degree is not None:
        degrees[:, 0] = params.initial_degree
    c0 = sample_phi_batch(degrees, 0, params.lambda_L, params.lambda_G, params.period, rng_init, root=True)

    degrees = np.asarray(deg.sample(rng_sub, (draws, n)), dtype=np.int64)
    degrees[:, 0] = deg.sample_size_biased(rng_sub, draws)
    c1 = sample_phi_batch(degrees, 0, params.lambda_L, params.lambda_G, params.period, rng_sub, root=False)

    mean = float(c1.mean())
    se = float(c1.std(ddof=1) / np.sqrt(draws))
    return np.bincount(c0) / draws, np.bincount(c1) / draws, mean, se


def _monte_carlo_forward(params: ModelParams, draws: int, seed: int) -> PgfPair:
    m0, m1, mean, se = _mc_offspring_masses(params, draws, seed)
    return PgfPair(
        initial=lambda s: float(npoly.polyval(s, m0)),
        subsequent=lambda s: float(npoly.polyval(s, m1)),
        method_tag=MONTE_CARLO,
        draws=draws,
        subsequent_mean=mean,
        subsequent_mean_se=se,
        masses=(m0, m1),
    )


def forward_pgfs(params: ModelParams, draws: int = DEFAULT_MC_DRAWS, seed: int = 0) -> PgfPair:
    """PGFs of C (initial household) and C~ (globally infected household).

    Closed forms exist for fixed and zero-or-infinite infectious periods; any
    other period falls back to empirical PGFs from ``draws`` simulated
    households (cached per ``(params, draws, seed)``).
    """
    if params.degree.mean <= 0:
        raise DegenerateDistributionError("offspring PGFs need a positive mean degree")
    period = params.period
    if isinstance(period, Fixed):
        f_t = local_final_size_dist(params.n, params.lambda_L, period)
        return _random_sum_pgfs(params, f_t, _initial_degree_pgf(params), CLOSED_FORM_FIXED)
    if isinstance(period, ZeroOrInfinite):
        return _zero_inf_forward(params)
    return _monte_carlo_forward(params, draws, seed)


def backward_pgfs(params: ModelParams) -> PgfPair:
    """PGFs of B and B~ for the susceptibility set of a uniformly chosen individual."""
    if params.degree.mean <= 0:
        raise DegenerateDistributionError("offspring PGFs need a positive mean degree")
    f_m = susceptibility_set_dist(params.n, params.lambda_L, params.period)
    tag = {Fixed: CLOSED_FORM_FIXED, ZeroOrInfinite: CLOSED_FORM_ZERO_INF}.get(type(params.period), CLOSED_FORM_GENERAL)
    return _random_sum_pgfs(params, f_m, params.degree.pgf, tag)


# ---------------------------------------------------------------------------
# Fixed points and headline quantities
# ---------------------------------------------------------------------------


def _bracket_and_bisect(g, lo: float, step: float, tol: float) -> float | None:
    """Given g(lo) >= 0, look for hi in (lo, 1] with g(hi) < 0 and bisect."""
    delta = max(abs(step) * 10.0, tol)
    hi = lo
    while hi < 1.0:
        hi = min(1.0, lo + delta)
        if g(hi) < 0:
            break
        delta *= 2.0
    else:
        return None
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) >= 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def smallest_fixed_point(pgf: Callable[[float], float], tol: float = FIXED_POINT_TOL,
                         max_iter: int = 1_000_000, polish_every: int = 1000) -> float:
    """Smallest s in [0, 1] with pgf(s) = s.

    Iterates s <- pgf(s) from 0, which increases monotonically to the smallest
    root.  Slow (near-critical) runs are finished by bisection on pgf(s) - s
    once a sign change above the current iterate is found.
    """
    def g(x):
        return pgf(x) - x

    s = 0.0
    step = 1.0
    for it in range(1, max_iter + 1):
        nxt = pgf(s)
        step = nxt - s
        s = min(nxt, 1.0)
        if abs(step) < tol:
            # linear convergence: the remaining error can exceed the step
            if s >= 1.0 or g(s) < 0:
                return s
            root = _bracket_and_bisect(g, s, step, tol)
            return s if root is None else root
        if it % polish_every == 0:
            root = _bracket_and_bisect(g, s, step, tol)
            if root is not None:
                return root
    root = _bracket_and_bisect(g, s, step, tol)
    if root is None:
        if abs(g(s)) < 1e-9:
            return s
        raise NonConvergenceError(f"fixed-point iteration did not converge (last s={s!r})")
    return root


def _has_global_edges(params: ModelParams) -> bool:
    return params.degree.mean > 0


def extinction_prob(params: ModelParams, draws: int = DEFAULT_MC_DRAWS, seed: int = 0) -> float:
    """sigma: extinction probability of the forward process from one non-initial household."""
    if not _has_global_edges(params) or r_star(params) <= 1.0:
        return 1.0
    return smallest_fixed_point(forward_pgfs(params, draws, seed).subsequent)


def susceptibility_extinction_prob(params: ModelParams) -> float:
    """xi: extinction probability of the backward (susceptibility-set) process."""
    if not _has_global_edges(params) or r_star(params) <= 1.0:
        return 1.0
    return smallest_fixed_point(backward_pgfs(params).subsequent)


def major_outbreak_prob(params: ModelParams, draws: int = DEFAULT_MC_DRAWS, seed: int = 0) -> float:
    if not _has_global_edges(params) or r_star(params) <= 1.0:
        return 0.0
    pair = forward_pgfs(params, draws, seed)
    sigma = smallest_fixed_point(pair.subsequent)
    if sigma == 0.0 and pair.subsequent(0.0) == 0.0:
        log.warning("offspring law puts no mass at zero; extinction from a single household is impossible")
    return max(0.0, 1.0 - pair.initial(sigma))


def expected_relative_final_size(params: ModelParams) -> float:
    """Expected fraction of individuals infected by a major outbreak."""
    if params.initial_degree is not None:
        raise ValueError("relative final size is defined for a uniformly chosen initial infective")
    if not _has_global_edges(params) or r_star(params) <= 1.0:
        return 0.0
    pair = backward_pgfs(params)
    xi = smallest_fixed_point(pair.subsequent)
    return max(0.0, 1.0 - pair.initial(xi))


def critical_lambda_g(params: ModelParams, xtol: float = 1e-13) -> float:
    """Global per-pair rate at which r_star = 1 (``params.lambda_G`` is ignored).

    r_star is proportional to 1 - phi(lambda_G), which increases to
    1 - P(I = 0); if even that limit leaves r_star <= 1 there is no root.
    """
    mu, var = params.degree.moments()
    if mu <= 0:
        raise NoRootError("no global edges: the epidemic is never supercritical")
    mu_t = mean_local_final_size(params.n, params.lambda_L, params.period)
    amplitude = mu * (mu_t + 1.0) + var / mu - 1.0
    if amplitude * (1.0 - params.period.prob_zero) <= 1.0:
        raise NoRootError("r_star stays <= 1 for every lambda_G")
    if isinstance(params.period, ZeroOrInfinite):
        # 1 - phi jumps from 0 to p at lambda_G = 0: any positive rate is supercritical
        return 0.0

    def excess(lam):
        return amplitude * (1.0 - params.period.laplace(lam)) - 1.0

    hi = 1.0
    while excess(hi) <= 0:
        hi *= 2.0
        if hi > 1e15:
            raise NoRootError("could not bracket the critical lambda_G")
    return brentq(excess, 0.0, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=500)


def summarize(params: ModelParams, draws: int = DEFAULT_MC_DRAWS, seed: int = 0) -> dict:
    """Headline record: r_star, sigma, xi, p_major, z_final, method_tag.

    ``z_final`` refers to a uniformly chosen individual and does not depend on
    how the initial infective is picked.
    """
    uniform = params.with_(initial_degree=None)
    if not _has_global_edges(params):
        return {"r_star": 0.0, "sigma": 1.0, "xi": 1.0, "p_major": 0.0, "z_final": 0.0,
                "method_tag": _method_tag(params)}
    pair = forward_pgfs(params, draws, seed)
    rs = r_star(params)
    if rs <= 1.0:
        sigma = xi = 1.0
    else:
        sigma = smallest_fixed_point(pair.subsequent)
        xi = smallest_fixed_point(backward_pgfs(uniform).subsequent)
    return {
        "r_star": rs,
        "sigma": sigma,
        "xi": xi,
        "p_major": major_outbreak_prob(params, draws, seed),
        "z_final": expected_relative_final_size(uniform),
        "method_tag": pair.method_tag,
    }


def _method_tag(params: ModelParams) -> str:
    return {Fixed: CLOSED_FORM_FIXED, ZeroOrInfinite: CLOSED_FORM_ZERO_INF}.get(type(params.period), MONTE_CARLO)
