"""Final-outcome SIR simulation on a household network.

An epidemic is sampled through its "who would infect whom" digraph: every
individual draws an infectious period I_i, then

* an arc to each household-mate with probability 1 - exp(-lambda_L I_i), and
* a mark along each incident global edge end with probability 1 - exp(-lambda_G I_i).

The final epidemic is the set reachable from the initial infective.  Random
numbers are consumed in a fixed order (initial case, periods, local uniforms,
global uniforms) that does not depend on the rates, so two runs from the same
generator state are coupled: raising a rate can only enlarge the epidemic.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order

from hh_net_epi.analytics import ModelParams
from hh_net_epi.infectious_period import contact_prob
from hh_net_epi.network import Network, build_network

DEFAULT_CUTOFF = 0.15


@dataclass(frozen=True)
class EpidemicOutcome:
    individuals_infected: int
    households_infected: int
    initial_individual: int
    infected: np.ndarray | None = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class BatchSummary:
    m: int
    n: int
    replicates: int
    cutoff_fraction: float
    n_major: int
    p_hat: float
    p_se: float
    z_hat: float | None  # None when no replicate was a major outbreak
    z_se: float | None

    def to_dict(self) -> dict:
        return asdict(self)


@lru_cache(maxsize=32)
def _household_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    a, b = np.nonzero(~np.eye(n, dtype=bool))
    return a, b


def _local_arc_endpoints(m: int, n: int):
    a, b = _household_pairs(n)
    base = (np.arange(m) * n)[:, None]
    return (base + a).ravel(), (base + b).ravel()


def _pick_initial(net: Network, params: ModelParams, rng: np.random.Generator) -> int:
    if params.initial_degree is None:
        return int(rng.integers(net.size))
    candidates = np.flatnonzero(net.degrees == params.initial_degree)
    if len(candidates) == 0:
        raise ValueError(f"no individual of degree {params.initial_degree} in this network")
    return int(candidates[rng.integers(len(candidates))])


def run_epidemic(net: Network, params: ModelParams, rng: np.random.Generator) -> EpidemicOutcome:
    if params.n != net.n:
        raise ValueError(f"household size mismatch: params n={params.n}, network n={net.n}")
    N = net.size
    start = _pick_initial(net, params, rng)
    periods = np.asarray(params.period.sample(rng, N), dtype=float)

    src_l, dst_l = _local_arc_endpoints(net.m, net.n)
    keep_l = rng.random(len(src_l)) < contact_prob(params.lambda_L, periods[src_l])

    u, v = net.edges[:, 0], net.edges[:, 1]
    marks = rng.random((len(u), 2))
    fwd = marks[:, 0] < contact_prob(params.lambda_G, periods[u])
    bwd = marks[:, 1] < contact_prob(params.lambda_G, periods[v])

    src = np.concatenate([src_l[keep_l], u[fwd], v[bwd]])
    dst = np.concatenate([dst_l[keep_l], v[fwd], u[bwd]])
    graph = csr_matrix((np.ones(len(src), dtype=np.int8), (src, dst)), shape=(N, N))
    reached = breadth_first_order(graph, start, directed=True, return_predecessors=False)
    households = np.unique(reached // net.n)
    return EpidemicOutcome(
        individuals_infected=int(len(reached)),
        households_infected=int(len(households)),
        initial_individual=start,
        infected=np.sort(reached),
    )


def classify_major(outcome: EpidemicOutcome, net_or_size, cutoff_fraction: float = DEFAULT_CUTOFF) -> bool:
    """Major outbreak iff at least ``cutoff_fraction`` of the population is infected (inclusive)."""
    size = net_or_size.size if isinstance(net_or_size, Network) else int(net_or_size)
    return outcome.individuals_infected >= cutoff_fraction * size - 1e-9


def replicate_rng(seed: int, r: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1, r)))


def _network_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))


def _run_chunk(params: ModelParams, m: int, seed: int, indices, fixed_network: bool):
    shared = build_network(m, params.n, params.degree, _network_rng(seed)) if fixed_network else None
    out = []
    for r in indices:
        rng = replicate_rng(seed, r)
        net = shared if shared is not None else build_network(m, params.n, params.degree, rng)
        o = run_epidemic(net, params, rng)
        out.append(EpidemicOutcome(o.individuals_infected, o.households_infected, o.initial_individual))
    return out


def simulate(params: ModelParams, m: int, replicates: int, seed: int = 0,
             fixed_network: bool = False, workers: int = 1) -> list[EpidemicOutcome]:
    """Run ``replicates`` independent epidemics; replicate r is seeded by (seed, r).

    By default every replicate builds a fresh network.  Results do not depend
    on ``workers``.
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    if workers <= 1:
        return _run_chunk(params, m, seed, range(replicates), fixed_network)
    chunks = [range(i, replicates, workers) for i in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_run_chunk, [params] * workers, [m] * workers, [seed] * workers,
                              chunks, [fixed_network] * workers))
    out: list[EpidemicOutcome | None] = [None] * replicates
    for chunk, part in zip(chunks, parts):
        for r, o in zip(chunk, part):
            out[r] = o
    return out


def summarize_outcomes(outcomes, m: int, n: int, cutoff_fraction: float = DEFAULT_CUTOFF) -> BatchSummary:
    size = m * n
    sizes = np.array([o.individuals_infected for o in outcomes], dtype=float)
    major = sizes >= cutoff_fraction * size - 1e-9
    reps = len(sizes)
    n_major = int(major.sum())
    p_hat = n_major / reps
    p_se = math.sqrt(p_hat * (1.0 - p_hat) / reps)
    z_hat = z_se = None
    if n_major:
        z = sizes[major] / size
        z_hat = float(z.mean())
        z_se = float(z.std(ddof=1) / math.sqrt(n_major)) if n_major > 1 else float("nan")
    return BatchSummary(m=m, n=n, replicates=reps, cutoff_fraction=cutoff_fraction, n_major=n_major,
                        p_hat=p_hat, p_se=p_se, z_hat=z_hat, z_se=z_se)


def run_batch(params: ModelParams, m: int, replicates: int, cutoff_fraction: float = DEFAULT_CUTOFF,
              seed: int = 0, fixed_network: bool = False, workers: int = 1) -> BatchSummary:
    outcomes = simulate(params, m, replicates, seed, fixed_network, workers)
    return summarize_outcomes(outcomes, m, params.n, cutoff_fraction)


def write_outcomes_csv(outcomes, m: int, n: int, path, cutoff_fraction: float = DEFAULT_CUTOFF) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["replicate", "final_size", "households_infected", "is_major"])
        for r, o in enumerate(outcomes):
            w.writerow([r, o.individuals_infected, o.households_infected,
                        int(classify_major(o, m * n, cutoff_fraction))])
