"""The Ranking algorithm: single runs, exhaustive enumeration and Monte Carlo."""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .graph import BipartiteGraph, GraphError, IntegralMatching, Permutation, make_monotone_graph
from .rng import uniform_block

ENUMERATION_MAX_N = 10
MC_BLOCK = 8192
ONE_MINUS_INV_E = 1.0 - math.exp(-1.0)
INV_E = math.exp(-1.0)


class EnumerationTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class RankingRun:
    graph: BipartiteGraph
    permutation: Permutation
    matching: IntegralMatching
    matched_ranks: tuple[bool, ...]

    @property
    def size(self) -> int:
        return self.matching.size

    def greedy_certificate(self) -> bool:
        """Replay check: every unmatched arrival saw only matched neighbors,
        and every matched arrival took its best-ranked exposed neighbor."""
        partner = self.matching.offline_partner()
        for j in range(1, self.graph.n + 1):
            exposed = [i for i in self.graph.neighbors(j) if partner.get(i, self.graph.n + 1) >= j]
            if j in self.matching.pairs:
                chosen = self.matching.pairs[j]
                if chosen not in exposed:
                    return False
                if min(exposed, key=self.permutation.rank) != chosen:
                    return False
            elif exposed:
                return False
        return True


def run_ranking(g: BipartiteGraph, pi: Permutation) -> RankingRun:
    """Match each arrival to its lowest-ranked exposed neighbor."""
    if len(pi) != g.n:
        raise GraphError(f"permutation has length {len(pi)}, graph has n={g.n}")
    taken = [False] * (g.n + 1)
    pairs = {}
    for j, nbrs in enumerate(g.adjacency, start=1):
        best = None
        for i in nbrs:
            if not taken[i] and (best is None or pi.ranks[i - 1] < pi.ranks[best - 1]):
                best = i
        if best is not None:
            taken[best] = True
            pairs[j] = best
    matched_ranks = tuple(taken[pi.item(r)] for r in range(1, g.n + 1))
    return RankingRun(g, pi, IntegralMatching(pairs), matched_ranks)


def ranking_batch(g: BipartiteGraph, ranks: np.ndarray) -> np.ndarray:
    """Vectorised Ranking over many permutations at once.

    ``ranks`` has shape ``(T, n)`` with ``ranks[t, i-1]`` the rank of offline
    vertex ``i`` in trial ``t``. Returns ``(T, n)`` with the offline partner of
    each online vertex, 0 when unmatched.
    """
    ranks = np.asarray(ranks)
    trials, n = ranks.shape
    if n != g.n:
        raise GraphError(f"rank matrix has {n} columns, graph has n={g.n}")
    big = n + 1
    exposed = np.ones((trials, n), dtype=bool)
    match = np.zeros((trials, g.n), dtype=np.int32)
    rows = np.arange(trials)
    for j, nbrs in enumerate(g.adjacency):
        if not nbrs:
            continue
        cols = np.asarray(nbrs, dtype=np.intp) - 1
        sub = np.where(exposed[:, cols], ranks[:, cols], big)
        k = sub.argmin(axis=1)
        ok = sub[rows, k] < big
        chosen = cols[k]
        match[:, j] = np.where(ok, chosen + 1, 0)
        exposed[rows[ok], chosen[ok]] = False
    return match


def ranks_from_weights(weights: np.ndarray) -> np.ndarray:
    """Lowest weight gets rank 1; equal weights go to the lower index."""
    order = np.argsort(weights, axis=1, kind="stable")
    ranks = np.empty_like(order)
    np.put_along_axis(ranks, order, np.arange(1, weights.shape[1] + 1)[None, :], axis=1)
    return ranks


def _check_cap(n: int) -> None:
    if n < 1:
        raise GraphError(f"graph size must be positive, got {n}")
    if n > ENUMERATION_MAX_N:
        raise EnumerationTooLarge(
            f"exhaustive enumeration is capped at n={ENUMERATION_MAX_N} ({n}! permutations requested); "
            "use `ranking mc` for larger instances"
        )


def _enumerate_block(n: int, first: int) -> tuple[int, list[int]]:
    """Sum of sizes and per-rank matched counts over permutations starting with ``first``."""
    g = make_monotone_graph(n)
    rest = np.array([i for i in range(1, n + 1) if i != first], dtype=np.int16)
    if n > 1:
        base = np.array(list(itertools.permutations(range(n - 1))), dtype=np.intp)
        items = np.concatenate([np.full((len(base), 1), first, dtype=np.int16), rest[base]], axis=1)
    else:
        items = np.array([[first]], dtype=np.int16)
    ranks = np.argsort(items, axis=1, kind="stable") + 1
    match = ranking_batch(g, ranks)
    total = int((match > 0).sum())
    matched_offline = np.zeros((len(items), n + 1), dtype=bool)
    np.put_along_axis(matched_offline, match.astype(np.intp), True, axis=1)
    by_rank = np.take_along_axis(matched_offline, items.astype(np.intp), axis=1)
    return total, [int(c) for c in by_rank.sum(axis=0)]


def default_threads() -> int:
    env = os.environ.get("MATCHLAB_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _enumerate(n: int, threads: Optional[int]) -> list[tuple[int, list[int]]]:
    _check_cap(n)
    threads = default_threads() if threads is None else threads
    firsts = list(range(1, n + 1))
    if threads <= 1 or n < 8:
        return [_enumerate_block(n, f) for f in firsts]
    with ProcessPoolExecutor(max_workers=min(threads, n)) as pool:
        # map preserves block order, so the reduction is deterministic
        return list(pool.map(_enumerate_block, [n] * n, firsts))


def enumerate_ranking_exact(n: int, threads: Optional[int] = None) -> tuple[int, Fraction]:
    """a(n) by running Ranking on MonotoneG(n) under all n! permutations."""
    blocks = _enumerate(n, threads)
    total = sum(b[0] for b in blocks)
    return total, Fraction(total, math.factorial(n))


def matched_at_rank_counts(n: int, threads: Optional[int] = None) -> list[int]:
    """a(n, 1..n): for each rank, how many permutations match the item holding it."""
    blocks = _enumerate(n, threads)
    counts = [0] * n
    for _, per_rank in blocks:
        counts = [a + b for a, b in zip(counts, per_rank)]
    return counts


@dataclass(frozen=True)
class EstimateReport:
    n: int
    trials: int
    mean: float
    stderr: float
    lower_bound_theory: float
    upper_bound_theory: Optional[float]
    seed: int

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "trials": self.trials,
            "mean": self.mean,
            "stderr": self.stderr,
            "lower_bound_theory": self.lower_bound_theory,
            "upper_bound_theory": self.upper_bound_theory,
            "seed": self.seed,
        }


def is_monotone(g: BipartiteGraph) -> bool:
    return all(s == tuple(range(j, g.n + 1)) for j, s in enumerate(g.adjacency, start=1))


def mean_and_stderr(total: int, total_sq: int, trials: int) -> tuple[float, float]:
    """Exact integer moments to float mean and standard error of the mean."""
    mean = Fraction(total, trials)
    var = (Fraction(total_sq) - Fraction(total * total, trials)) / (trials - 1)
    return float(mean), math.sqrt(float(var) / trials)


def ranking_sizes(g: BipartiteGraph, trials: int, seed: int, start: int = 0) -> np.ndarray:
    """Matching sizes for trials ``start..start+trials-1``; trial t uses stream (seed, t)."""
    out = np.empty(trials, dtype=np.int64)
    for lo in range(0, trials, MC_BLOCK):
        hi = min(trials, lo + MC_BLOCK)
        w = uniform_block(seed, start + lo, start + hi, g.n)
        out[lo:hi] = (ranking_batch(g, ranks_from_weights(w)) > 0).sum(axis=1)
    return out


def ranking_monte_carlo(g: BipartiteGraph, trials: int, seed: int) -> EstimateReport:
    if trials < 2:
        raise ValueError("Monte Carlo needs at least 2 trials")
    sizes = ranking_sizes(g, trials, seed)
    total = int(sizes.sum())
    total_sq = int((sizes * sizes).sum())
    mean, stderr = mean_and_stderr(total, total_sq, trials)
    upper = ONE_MINUS_INV_E * g.n + INV_E if is_monotone(g) else None
    return EstimateReport(g.n, trials, mean, stderr, ONE_MINUS_INV_E * g.n, upper, seed)
