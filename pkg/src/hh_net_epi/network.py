"""Households plus a configuration-model multigraph of global contacts.

Individuals are numbered ``0..m*n-1``; individual ``i`` lives in household
``i // n``.  Half-edges are paired by one uniform permutation followed by
adjacent pairing.  When the half-edge total is odd, one uniformly chosen
half-edge is discarded first.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from hh_net_epi.degree_dist import DegreeDistribution


@dataclass(frozen=True)
class Network:
    m: int
    n: int
    degrees: np.ndarray
    edges: np.ndarray  # (E, 2) individual indices; loops and repeats allowed

    @property
    def size(self) -> int:
        return self.m * self.n

    def household_of(self, i):
        return np.asarray(i) // self.n


@dataclass(frozen=True)
class ImperfectionStats:
    self_loops: int
    parallel_edges: int
    household_self_loops: int
    household_parallel_edges: int


def pair_half_edges(owners: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Uniform random matching of half-edges.

    ``owners[h]`` is the individual holding half-edge ``h``.  Returns an
    ``(E, 2)`` array of owner pairs.
    """
    owners = np.asarray(owners)
    if len(owners) % 2:
        owners = np.delete(owners, rng.integers(len(owners)))
    shuffled = owners[rng.permutation(len(owners))]
    return shuffled.reshape(-1, 2)


def build_network(m: int, n: int, degree: DegreeDistribution, rng: np.random.Generator,
                  reject_imperfect: bool = False, max_tries: int = 10_000) -> Network:
    """Draw i.i.d. degrees and pair half-edges uniformly.

    With ``reject_imperfect`` the pairing (degrees included) is redrawn until
    the individual-level graph has no self-loops or parallel edges.
    """
    if m < 1 or n < 1:
        raise ValueError("need m >= 1 and n >= 1")
    for _ in range(max_tries):
        degrees = np.asarray(degree.sample(rng, m * n), dtype=np.int64)
        edges = pair_half_edges(np.repeat(np.arange(m * n), degrees), rng)
        net = Network(m=m, n=n, degrees=degrees, edges=edges)
        if not reject_imperfect:
            return net
        st = imperfection_stats(net)
        if st.self_loops == 0 and st.parallel_edges == 0:
            return net
    raise RuntimeError(f"no simple graph after {max_tries} attempts")


def _loops_and_repeats(pairs: np.ndarray) -> tuple[int, int]:
    if len(pairs) == 0:
        return 0, 0
    loops = pairs[:, 0] == pairs[:, 1]
    proper = np.sort(pairs[~loops], axis=1).astype(np.int64)
    # one integer key per unordered pair; much faster than unique rows
    keys = proper[:, 0] * (int(pairs.max()) + 1) + proper[:, 1]
    return int(loops.sum()), int(len(keys) - len(np.unique(keys)))


def imperfection_stats(net: Network) -> ImperfectionStats:
    """Count self-loops and surplus parallel edges, for individuals and for households.

    A pair joined by k edges contributes k - 1 parallel edges.  Loops are not
    counted as parallel edges.  The household counts treat each household as a
    single vertex.
    """
    loops, repeats = _loops_and_repeats(net.edges)
    h_loops, h_repeats = _loops_and_repeats(net.edges // net.n)
    return ImperfectionStats(loops, repeats, h_loops, h_repeats)


def write_network_csv(net: Network, directory) -> tuple[Path, Path]:
    """Debug dump: ``edges.csv`` (src,dst) and ``degrees.csv`` (individual,household,degree)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    edges_path, degrees_path = directory / "edges.csv", directory / "degrees.csv"
    with open(edges_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["src", "dst"])
        w.writerows(net.edges.tolist())
    with open(degrees_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["individual", "household", "degree"])
        for i, d in enumerate(net.degrees.tolist()):
            w.writerow([i, i // net.n, d])
    return edges_path, degrees_path
