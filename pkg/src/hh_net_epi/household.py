"""Within-household (local) epidemic computations.

* ``local_final_size_dist`` -- law of T, the number of household members
  infected by a single primary case (primary not counted).
* ``susceptibility_set_dist`` -- law of M, the size of a member's local
  susceptibility set (the member itself not counted).
* Samplers for the household offspring variables used by the branching
  approximations, and brute-force oracles for T and M.

Mass functions are plain float arrays indexed ``0..n-1``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from hh_net_epi.errors import ConditioningError
from hh_net_epi.infectious_period import Fixed, InfectiousPeriod, ZeroOrInfinite, contact_prob

EXHAUSTIVE_MAX_N = 4
_INTERMEDIATE_TOL = 1e-6
_CLAMP_TOL = 1e-12


def _finish(probs: list[float], what: str) -> np.ndarray:
    p = np.array(probs, dtype=float)
    if np.any(p < -_CLAMP_TOL):
        raise ConditioningError(f"{what}: negative mass {p.min():.3e} after triangular solve")
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def _check_intermediate(value: float, what: str, l: int) -> None:
    if not -_INTERMEDIATE_TOL <= value <= 1.0 + _INTERMEDIATE_TOL:
        raise ConditioningError(f"{what}: entry {l} = {value:.6g} is outside [0, 1]; system is ill-conditioned")


def local_final_size_dist(n: int, lambda_L: float, period: InfectiousPeriod) -> np.ndarray:
    """Mass function of T for one primary case among ``n - 1`` susceptibles.

    Solves, forward in l, the triangular system

        sum_{k<=l} C(N-k, l-k) P(T=k) / phi(lambda_L (N-l))^(k+1) = C(N, l)

    with ``N = n - 1``.  Each row is multiplied through by
    ``phi(lambda_L (N-l))^(l+1)`` so no division by a vanishing transform occurs.
    """
    if n < 1:
        raise ValueError("household size must be >= 1")
    N = n - 1
    P: list[float] = []
    for l in range(N + 1):
        q = period.laplace(lambda_L * (N - l))
        val = comb(N, l) * q ** (l + 1)
        for k in range(l):
            val -= comb(N - k, l - k) * P[k] * q ** (l - k)
        _check_intermediate(val, "final-size system", l)
        P.append(val)
    return _finish(P, "final-size system")


def mean_local_final_size(n: int, lambda_L: float, period: InfectiousPeriod) -> float:
    p = local_final_size_dist(n, lambda_L, period)
    return float(np.dot(np.arange(n), p))


def susceptibility_set_dist(n: int, lambda_L: float, period: InfectiousPeriod) -> np.ndarray:
    """Mass function of M, the local susceptibility-set size.

    ``alpha_k`` is the probability that, within a set of k members, every
    member reaches the focal one.  It satisfies

        sum_{j=1}^{k} C(k-1, j-1) alpha_j phi(j lambda_L)^(k-j) = 1,

    and P(M = k-1) = C(n-1, k-1) alpha_k phi(k lambda_L)^(n-k).
    """
    if n < 1:
        raise ValueError("household size must be >= 1")
    alpha = [0.0]  # 1-based
    for k in range(1, n + 1):
        val = 1.0
        for j in range(1, k):
            val -= comb(k - 1, j - 1) * alpha[j] * period.laplace(j * lambda_L) ** (k - j)
        _check_intermediate(val, "susceptibility system", k)
        alpha.append(val)
    P = [comb(n - 1, k - 1) * alpha[k] * period.laplace(k * lambda_L) ** (n - k) for k in range(1, n + 1)]
    for i, v in enumerate(P):
        _check_intermediate(v, "susceptibility system", i)
    return _finish(P, "susceptibility system")


# ---------------------------------------------------------------------------
# Local digraphs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LocalDigraph:
    """A sampled household contact digraph; ``arcs[i, j]`` means i would infect j."""

    n: int
    arcs: np.ndarray
    periods: np.ndarray

    def reachable_from(self, j: int) -> np.ndarray:
        return reach_from(self.arcs[None], j)[0]

    def reaching(self, j: int) -> np.ndarray:
        return reach_to(self.arcs[None], j)[0]


def reach_from(arcs: np.ndarray, j: int) -> np.ndarray:
    """Vertices reachable from ``j`` (j included), batched over the leading axis."""
    N, n, _ = arcs.shape
    r = np.zeros((N, n), dtype=bool)
    r[:, j] = True
    for _ in range(n - 1):
        r = r | (r[:, :, None] & arcs).any(axis=1)
    return r


def reach_to(arcs: np.ndarray, j: int) -> np.ndarray:
    """Vertices with a path to ``j`` (j included), batched over the leading axis."""
    N, n, _ = arcs.shape
    r = np.zeros((N, n), dtype=bool)
    r[:, j] = True
    for _ in range(n - 1):
        r = r | (arcs & r[:, None, :]).any(axis=2)
    return r


def sample_local_arcs(n: int, lambda_L: float, period: InfectiousPeriod, rng: np.random.Generator, size: int):
    """Draw ``size`` independent household digraphs.

    Returns ``(periods, arcs)`` with shapes ``(size, n)`` and ``(size, n, n)``.
    Arcs out of i are conditionally independent given I_i.
    """
    periods = np.asarray(period.sample(rng, (size, n)), dtype=float)
    p = contact_prob(lambda_L, periods)
    arcs = rng.random((size, n, n)) < p[:, :, None]
    idx = np.arange(n)
    arcs[:, idx, idx] = False
    return periods, arcs


def sample_local_digraph(n: int, lambda_L: float, period: InfectiousPeriod, rng: np.random.Generator) -> LocalDigraph:
    periods, arcs = sample_local_arcs(n, lambda_L, period, rng, 1)
    return LocalDigraph(n=n, arcs=arcs[0], periods=periods[0])


# ---------------------------------------------------------------------------
# Household offspring samplers
# ---------------------------------------------------------------------------


def _effective_degrees(degrees: np.ndarray, j: int, root: bool) -> np.ndarray:
    d = np.array(degrees, dtype=np.int64, copy=True)
    if d.ndim != 2:
        raise ValueError("degrees must be a (draws, n) array")
    if not 0 <= j < d.shape[1]:
        raise IndexError(f"primary index {j} out of range for household size {d.shape[1]}")
    if not root:
        if np.any(d[:, j] < 1):
            raise ValueError("a globally infected primary needs degree >= 1")
        d[:, j] -= 1
    return d


def sample_phi_batch(degrees, j: int, lambda_L: float, lambda_G: float, period: InfectiousPeriod,
                     rng: np.random.Generator, root: bool = False) -> np.ndarray:
    """Global infectious contacts made by a household, one draw per row of ``degrees``.

    Member ``j`` is the primary case.  With ``root=False`` it was infected along
    a global edge, so one of its edges is spent (d_j' = d_j - 1).  Each locally
    infected member i contacts Bin(d_i', 1 - exp(-lambda_G I_i)) neighbours, using
    the same I_i that drove the household digraph.
    """
    d = _effective_degrees(degrees, j, root)
    periods, arcs = sample_local_arcs(d.shape[1], lambda_L, period, rng, d.shape[0])
    infected = reach_from(arcs, j)
    contacts = rng.binomial(d, contact_prob(lambda_G, periods))
    return np.where(infected, contacts, 0).sum(axis=1)


def sample_psi_batch(degrees, j: int, lambda_L: float, lambda_G: float, period: InfectiousPeriod,
                     rng: np.random.Generator, root: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Global neighbours of j's local susceptibility set that do / do not contact it.

    Returns ``(psi, psi_a)`` arrays; ``psi + psi_a`` is the total effective degree
    of the susceptibility set.
    """
    d = _effective_degrees(degrees, j, root)
    _, arcs = sample_local_arcs(d.shape[1], lambda_L, period, rng, d.shape[0])
    members = reach_to(arcs, j)
    p_g = 1.0 - period.laplace(lambda_G)
    b = rng.binomial(d, p_g)
    psi = np.where(members, b, 0).sum(axis=1)
    psi_a = np.where(members, d - b, 0).sum(axis=1)
    return psi, psi_a


def sample_phi(degrees, j, lambda_L, lambda_G, period, rng, root=False) -> int:
    return int(sample_phi_batch(np.asarray(degrees)[None], j, lambda_L, lambda_G, period, rng, root)[0])


def sample_psi(degrees, j, lambda_L, lambda_G, period, rng, root=False) -> tuple[int, int]:
    psi, psi_a = sample_psi_batch(np.asarray(degrees)[None], j, lambda_L, lambda_G, period, rng, root)
    return int(psi[0]), int(psi_a[0])


# ---------------------------------------------------------------------------
# Brute-force oracles
# ---------------------------------------------------------------------------


def _exhaustive_fixed(n, lambda_L, period: Fixed):
    q = float(contact_prob(lambda_L, period.c))
    pairs = [(i, k) for i in range(n) for k in range(n) if i != k]
    bits = np.array(list(itertools.product((False, True), repeat=len(pairs))), dtype=bool).reshape(2 ** len(pairs), len(pairs))
    arcs = np.zeros((len(bits), n, n), dtype=bool)
    for col, (i, k) in enumerate(pairs):
        arcs[:, i, k] = bits[:, col]
    present = bits.sum(axis=1)
    weights = q**present * (1.0 - q) ** (len(pairs) - present)
    return arcs, weights


def _exhaustive_zero_inf(n, lambda_L, period: ZeroOrInfinite):
    outcomes = np.array(list(itertools.product((False, True), repeat=n)), dtype=bool).reshape(2**n, n)
    arcs = np.repeat(outcomes[:, :, None], n, axis=2) & (lambda_L > 0)
    idx = np.arange(n)
    arcs[:, idx, idx] = False
    k = outcomes.sum(axis=1)
    weights = period.p**k * (1.0 - period.p) ** (n - k)
    return arcs, weights


def _oracle(n, lambda_L, period, rng, draws, backward):
    if n < 1:
        raise ValueError("household size must be >= 1")
    if isinstance(period, (Fixed, ZeroOrInfinite)):
        if n > EXHAUSTIVE_MAX_N:
            raise ValueError(f"exhaustive enumeration supports n <= {EXHAUSTIVE_MAX_N}")
        enum = _exhaustive_fixed if isinstance(period, Fixed) else _exhaustive_zero_inf
        arcs, weights = enum(n, lambda_L, period)
    else:
        if rng is None:
            rng = np.random.default_rng()
        _, arcs = sample_local_arcs(n, lambda_L, period, rng, draws)
        weights = np.full(draws, 1.0 / draws)
    sizes = (reach_to(arcs, 0) if backward else reach_from(arcs, 0)).sum(axis=1) - 1
    return np.bincount(sizes, weights=weights, minlength=n)


def brute_force_final_size_dist(n, lambda_L, period, rng=None, draws=1_000_000) -> np.ndarray:
    """Law of |reachable from 0| - 1 by enumeration (fixed / zero-or-infinite) or Monte Carlo."""
    return _oracle(n, lambda_L, period, rng, draws, backward=False)


def brute_force_susceptibility_dist(n, lambda_L, period, rng=None, draws=1_000_000) -> np.ndarray:
    """Law of |vertices reaching 0| - 1, same measure as the forward oracle."""
    return _oracle(n, lambda_L, period, rng, draws, backward=True)
