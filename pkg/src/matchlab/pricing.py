"""Ranking seen as a posted-price market.

Each item v_i draws a weight w_i ~ U[0, 1] and is priced p_i = exp(w_i - 1);
buyers arrive in order and buy their cheapest exposed desired item. A sale at
price p splits into revenue p and buyer utility 1 - p.

Prices are rounded to multiples of 2**-53 ("ticks"). Every price in [1/e, 1]
then has an exact binary64 value, 1 - p is exact too, and all totals can be
kept as integers, so revenue + utility == size holds with no rounding at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .graph import BipartiteGraph, GraphError, IntegralMatching, Permutation, make_monotone_graph
from .ranking import INV_E, MC_BLOCK, ONE_MINUS_INV_E, is_monotone, mean_and_stderr, ranking_batch, run_ranking
from .rng import uniform_block

TICKS = 1 << 53


def price_ticks(weights) -> np.ndarray:
    """Integer prices in units of 2**-53."""
    w = np.asarray(weights, dtype=np.float64)
    return np.rint(np.exp(w - 1.0) * TICKS).astype(np.int64)


def ranks_from_ticks(ticks: np.ndarray) -> np.ndarray:
    """Cheapest item first; equal prices go to the lower index."""
    ticks = np.atleast_2d(ticks)
    order = np.argsort(ticks, axis=1, kind="stable")
    ranks = np.empty_like(order)
    np.put_along_axis(ranks, order, np.arange(1, ticks.shape[1] + 1)[None, :], axis=1)
    return ranks


def _check_weights(weights, n: int) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    if w.shape[-1] != n:
        raise GraphError(f"expected {n} weights per run, got {w.shape[-1]}")
    if np.any(w < 0) or np.any(w > 1) or np.any(np.isnan(w)):
        raise ValueError("weights must lie in [0, 1]")
    return w


@dataclass(frozen=True)
class PricedRun:
    weights: tuple[float, ...]
    prices: tuple[float, ...]
    permutation: Permutation
    matching: IntegralMatching
    revenue: dict  # offline i -> price paid for v_i
    utility: dict  # online j -> 1 - price paid by u_j (0 when unmatched)

    @property
    def total_revenue(self) -> Fraction:
        return sum((Fraction(p) for p in self.revenue.values()), Fraction(0))

    @property
    def total_utility(self) -> Fraction:
        return sum((Fraction(y) for y in self.utility.values()), Fraction(0))

    def utility_of(self, j: int) -> Fraction:
        return Fraction(self.utility.get(j, 0.0))


def run_priced_ranking(g: BipartiteGraph, weights: Sequence[float]) -> PricedRun:
    w = _check_weights(weights, g.n)
    ticks = price_ticks(w)
    pi = Permutation(tuple(int(r) for r in ranks_from_ticks(ticks)[0]))
    run = run_ranking(g, pi)
    prices = tuple(float(t) / TICKS for t in ticks)
    revenue = {i: prices[i - 1] for i in run.matching.pairs.values()}
    utility = {j: 1.0 - prices[i - 1] for j, i in run.matching.pairs.items()}
    return PricedRun(tuple(float(x) for x in w), prices, pi, run.matching, revenue, utility)


def priced_batch(g: BipartiteGraph, weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``(match, ticks)`` for a ``(T, n)`` block of weight vectors."""
    w = _check_weights(weights, g.n)
    ticks = price_ticks(w)
    return ranking_batch(g, ranks_from_ticks(ticks)), ticks


def _paid_ticks(match: np.ndarray, ticks: np.ndarray) -> np.ndarray:
    """Price (in ticks) paid by each buyer, 0 where unmatched."""
    padded = np.concatenate([np.zeros((len(ticks), 1), dtype=np.int64), ticks], axis=1)
    return np.take_along_axis(padded, match.astype(np.intp), axis=1)


def revenue_utility_identity(g: BipartiteGraph, trials: int, seed: int) -> dict:
    """Count priced runs where total revenue + total utility == matching size exactly."""
    holds = 0
    for lo in range(0, trials, MC_BLOCK):
        hi = min(trials, lo + MC_BLOCK)
        match, ticks = priced_batch(g, uniform_block(seed, lo, hi, g.n))
        matched = match > 0
        paid = _paid_ticks(match, ticks)
        revenue = paid.sum(axis=1)
        utility = np.where(matched, TICKS - paid, 0).sum(axis=1)
        holds += int(np.count_nonzero(revenue + utility == matched.sum(axis=1) * TICKS))
    return {"trials": trials, "holds": holds}


def mean_price_mc(trials: int, seed: int) -> tuple[float, float]:
    """Sample mean and standard error of one item's price over ``trials`` draws."""
    total = 0
    total_sq = 0
    for lo in range(0, trials, MC_BLOCK * 8):
        hi = min(trials, lo + MC_BLOCK * 8)
        t = [int(x) for x in price_ticks(uniform_block(seed, lo, hi, 1)[:, 0])]
        total += sum(t)
        total_sq += sum(x * x for x in t)
    mean, stderr = mean_and_stderr(total, total_sq, trials)
    return mean / TICKS, stderr / TICKS


@dataclass(frozen=True)
class PerEdgeReport:
    n: int
    trials: int
    seed: int
    edges: tuple[tuple[int, int], ...]  # (online, offline) pairs of the perfect matching
    means: tuple[float, ...]  # per offline vertex i: E[r(v_i) + y(M(v_i))]
    stderrs: tuple[float, ...]
    flagged: tuple[int, ...]  # offline vertices with mean + 4 stderr < 1 - 1/e
    size_mean: float  # mean matching size over the same trials

    @property
    def total(self) -> float:
        return math.fsum(self.means)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "trials": self.trials,
            "seed": self.seed,
            "edges": [list(e) for e in self.edges],
            "means": list(self.means),
            "stderrs": list(self.stderrs),
            "flagged": list(self.flagged),
            "size_mean": self.size_mean,
            "bound": ONE_MINUS_INV_E,
        }


def per_edge_bound_mc(g: BipartiteGraph, perfect: IntegralMatching, trials: int, seed: int) -> PerEdgeReport:
    """Estimate E[r(v_i) + y(M(v_i))] for every edge of the perfect matching M."""
    if trials < 2:
        raise ValueError("Monte Carlo needs at least 2 trials")
    if perfect.size != g.n or not perfect.check_edges(g):
        raise GraphError("per-edge analysis needs a perfect matching of the graph")
    buyer_of = np.zeros(g.n, dtype=np.intp)  # offline i-1 -> online j-1 under M
    for j, i in perfect.pairs.items():
        buyer_of[i - 1] = j - 1
    sums = [0] * g.n
    sums_sq = [0] * g.n
    size_total = 0
    size_sq = 0
    for lo in range(0, trials, MC_BLOCK):
        hi = min(trials, lo + MC_BLOCK)
        match, ticks = priced_batch(g, uniform_block(seed, lo, hi, g.n))
        matched = match > 0
        paid = _paid_ticks(match, ticks)
        utility = np.where(matched, TICKS - paid, 0)
        sold = np.zeros((hi - lo, g.n + 1), dtype=bool)
        np.put_along_axis(sold, match.astype(np.intp), True, axis=1)
        revenue = np.where(sold[:, 1:], ticks, 0)
        per_edge = revenue + utility[:, buyer_of]
        for i in range(g.n):
            col = [int(x) for x in per_edge[:, i]]
            sums[i] += sum(col)
            sums_sq[i] += sum(x * x for x in col)
        sizes = matched.sum(axis=1)
        size_total += int(sizes.sum())
        size_sq += int((sizes * sizes).sum())
    means, errs = [], []
    for i in range(g.n):
        m, s = mean_and_stderr(sums[i], sums_sq[i], trials)
        means.append(m / TICKS)
        errs.append(s / TICKS)
    flagged = tuple(i + 1 for i in range(g.n) if means[i] + 4 * errs[i] < ONE_MINUS_INV_E)
    edges = tuple(sorted((j, i) for j, i in perfect.pairs.items()))
    return PerEdgeReport(g.n, trials, seed, edges, tuple(means), tuple(errs), flagged, size_total / trials)


@dataclass(frozen=True)
class SlacknessRecord:
    per_buyer: tuple[Fraction, ...]  # s(u_j) = y(u_j) - y_{-v_n}(u_j)
    bound: Fraction  # 1 - p_n

    @property
    def total(self) -> Fraction:
        return sum(self.per_buyer, Fraction(0))

    @property
    def holds(self) -> bool:
        return self.total <= self.bound


def slackness_realization(n: int, weights: Sequence[float]) -> SlacknessRecord:
    """Compare buyer utilities on MonotoneG(n) with and without v_n, same prices."""
    if isinstance(n, BipartiteGraph):
        if not is_monotone(n):
            raise GraphError("slackness accounting is defined on MonotoneG only")
        n = n.n
    g = make_monotone_graph(n)
    full = run_priced_ranking(g, weights)
    cut = run_priced_ranking(g.without_offline(n), weights)
    per_buyer = tuple(full.utility_of(j) - cut.utility_of(j) for j in range(1, n + 1))
    return SlacknessRecord(per_buyer, 1 - Fraction(full.prices[n - 1]))


def slackness_mc(n: int, trials: int, seed: int) -> dict:
    """Per-realization check of sum_u s(u) <= 1 - p_n, plus the mean of sum_u s(u)."""
    if trials < 2:
        raise ValueError("Monte Carlo needs at least 2 trials")
    g = make_monotone_graph(n)
    cut = g.without_offline(n)
    holds = 0
    total = 0
    total_sq = 0
    for lo in range(0, trials, MC_BLOCK):
        hi = min(trials, lo + MC_BLOCK)
        w = uniform_block(seed, lo, hi, n)
        m_full, ticks = priced_batch(g, w)
        m_cut, _ = priced_batch(cut, w)
        y_full = np.where(m_full > 0, TICKS - _paid_ticks(m_full, ticks), 0).sum(axis=1)
        y_cut = np.where(m_cut > 0, TICKS - _paid_ticks(m_cut, ticks), 0).sum(axis=1)
        s = y_full - y_cut
        holds += int(np.count_nonzero(s <= TICKS - ticks[:, n - 1]))
        col = [int(x) for x in s]
        total += sum(col)
        total_sq += sum(x * x for x in col)
    mean, stderr = mean_and_stderr(total, total_sq, trials)
    return {
        "n": n,
        "trials": trials,
        "seed": seed,
        "holds": holds,
        "mean_slackness": mean / TICKS,
        "stderr": stderr / TICKS,
        "bound": INV_E,
    }


@dataclass(frozen=True)
class RemovalSymmetryEstimate:
    n: int
    j: int
    trials: int
    without_vj: float  # E[y_{-v_j}(u_j)]
    without_vn: float  # E[y_{-v_n}(u_j)]
    difference: float
    stderr: float


def removal_symmetry_check(n: int, j: int, trials: int, seed: int) -> RemovalSymmetryEstimate:
    """u_j's expected utility with v_j removed versus with v_n removed, on common weights."""
    if not 1 <= j <= n:
        raise ValueError(f"j must be in 1..{n}")
    if trials < 2:
        raise ValueError("Monte Carlo needs at least 2 trials")
    g = make_monotone_graph(n)
    g_j, g_n = g.without_offline(j), g.without_offline(n)
    sum_a = sum_b = sum_d = sum_d2 = 0
    for lo in range(0, trials, MC_BLOCK):
        hi = min(trials, lo + MC_BLOCK)
        w = uniform_block(seed, lo, hi, n)
        ys = []
        for h in (g_j, g_n):
            m, ticks = priced_batch(h, w)
            col = m[:, j - 1]
            ys.append(np.where(col > 0, TICKS - _paid_ticks(m, ticks)[:, j - 1], 0))
        d = ys[0] - ys[1]
        # tick totals overflow int64 past ~1000 trials; accumulate in Python ints
        sum_a += sum(int(x) for x in ys[0])
        sum_b += sum(int(x) for x in ys[1])
        dl = [int(x) for x in d]
        sum_d += sum(dl)
        sum_d2 += sum(x * x for x in dl)
    diff, err = mean_and_stderr(sum_d, sum_d2, trials)
    return RemovalSymmetryEstimate(n, j, trials, sum_a / trials / TICKS, sum_b / trials / TICKS, diff / TICKS, err / TICKS)


def utility_never_drops(g: BipartiteGraph, weights: Sequence[float], removed: int) -> bool:
    """Adding item ``removed`` back never lowers any buyer's utility."""
    full = run_priced_ranking(g, weights)
    cut = run_priced_ranking(g.without_offline(removed), weights)
    return all(full.utility_of(j) >= cut.utility_of(j) for j in range(1, g.n + 1))


def first_claim_converse(n: int, weights: Sequence[float]) -> bool:
    """On MonotoneG: v_i is matched iff p_i < p, where p is what u_i pays once v_i is removed."""
    g = make_monotone_graph(n)
    full = run_priced_ranking(g, weights)
    sold = set(full.matching.pairs.values())
    for i in range(1, n + 1):
        cut = run_priced_ranking(g.without_offline(i), weights)
        partner = cut.matching.pairs.get(i)
        p = cut.prices[partner - 1] if partner is not None else 1.0
        if (i in sold) != (full.prices[i - 1] < p):
            return False
    return True
