"""Balance: the water-filling fractional algorithm, its closed form on
MonotoneG, backward-edge stripping and the averaging process."""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .graph import (
    EXACT_MAX_N,
    BipartiteGraph,
    FractionalMatching,
    GraphError,
    Number,
)


@dataclass(frozen=True)
class WaterFillStep:
    j: int
    budget: Number
    threshold: Optional[Number]  # None when every neighbor was already full
    raised: tuple[tuple[int, Number], ...]


def _use_exact(n: int, exact: Optional[bool]) -> bool:
    return n <= EXACT_MAX_N if exact is None else exact


def water_fill(loads: list, nbrs, budget, exact: bool):
    """Threshold t with sum over {v : load(v) < t} of (t - load(v)) == budget.

    Returns ``(t, [(i, added), ...])``. Loads are indexed by offline label.
    """
    order = sorted(nbrs, key=lambda i: (loads[i], i))
    prefix = 0 if not exact else Fraction(0)
    t = None
    for k, i in enumerate(order, start=1):
        prefix += loads[i]
        t = (budget + prefix) / k
        if k == len(order) or t <= loads[order[k]]:
            break
    if not exact and t > 1.0:
        t = 1.0
    raised = tuple((i, t - loads[i]) for i in order if loads[i] < t)
    return t, raised


def run_balance(g: BipartiteGraph, exact: Optional[bool] = None) -> tuple[FractionalMatching, list[WaterFillStep]]:
    """Process arrivals in order, spending min(1, free capacity of N(u)) per arrival
    so that the raised neighbors end at a common load."""
    exact = _use_exact(g.n, exact)
    one = Fraction(1) if exact else 1.0
    zero = Fraction(0) if exact else 0.0
    loads = [zero] * (g.n + 1)
    weights = {}
    steps = []
    for j, nbrs in enumerate(g.adjacency, start=1):
        free = sum((one - loads[i] for i in nbrs), zero)
        budget = min(one, free)
        if budget <= 0 or (not exact and budget <= 1e-15):
            steps.append(WaterFillStep(j, max(budget, zero), None, ()))
            continue
        t, raised = water_fill(loads, nbrs, budget, exact)
        for i, added in raised:
            loads[i] = t
            weights[(j, i)] = added
        steps.append(WaterFillStep(j, budget, t, raised))
    return FractionalMatching.from_weights(g.n, weights, exact), steps


def _harmonic_tail(n: int):
    """Yield (k, sum_{i<=k} 1/(n-i+1)) exactly for k = 1..n."""
    total = Fraction(0)
    for k in range(1, n + 1):
        total += Fraction(1, n - k + 1)
        yield k, total


def balance_monotone_closed_form(n: int, exact: Optional[bool] = None) -> tuple[int, Number]:
    """k = largest k with H_n - H_{n-k} <= 1; size = k + (n-k)(1 - (H_n - H_{n-k}))."""
    if n < 1:
        raise GraphError(f"graph size must be positive, got {n}")
    exact = _use_exact(n, exact)
    k, h = 0, (Fraction(0) if exact else 0.0)
    if exact:
        for kk, hh in _harmonic_tail(n):
            if hh > 1:
                break
            k, h = kk, hh
    else:
        terms = [1.0 / (n - kk + 1) for kk in range(1, n + 1)]
        k = bisect.bisect_right(list(itertools.accumulate(terms)), 1.0)
        # plain prefix sums drift; settle the boundary with correctly rounded sums
        while k < n and math.fsum(terms[:k + 1]) <= 1.0:
            k += 1
        while k > 0 and math.fsum(terms[:k]) > 1.0:
            k -= 1
        h = math.fsum(terms[:k])
    return k, k + (n - k) * (1 - h)


def strip_backward_edges(g: BipartiteGraph) -> BipartiteGraph:
    """Remove every edge (u_j, v_i) with i < j; the diagonal must be present."""
    for j in range(1, g.n + 1):
        if j not in g.neighbors(j):
            raise GraphError(f"diagonal edge (u_{j}, v_{j}) missing; relabel first")
    return BipartiteGraph(g.n, tuple(tuple(i for i in s if i >= j) for j, s in enumerate(g.adjacency, start=1)),
                          certified_perfect=True)


@dataclass(frozen=True)
class AveragingTrace:
    n: int
    credited: tuple  # m'_i(i) for rounds 1..n (1 from the stop round on)
    slackness: tuple  # s(i) for rounds 1..stop_round (or 1..n)
    stop_round: Optional[int]  # t', None if the credit never reached 1
    total: Number  # m' = sum of credited values
    total_from_arrivals: Number  # t' - 1 + sum_j m(t', j)
    balance_size: Number  # m


def averaging_process(g: BipartiteGraph, exact: Optional[bool] = None) -> AveragingTrace:
    """Replay Balance's weights, crediting each round the average load of the
    still-active offline vertices plus evenly spread earlier slackness."""
    n = g.n
    for j, s in enumerate(g.adjacency, start=1):
        if j not in s:
            raise GraphError(f"diagonal edge (u_{j}, v_{j}) missing; relabel first")
        if s and s[0] < j:
            raise GraphError(f"u_{j} has backward edges; strip them first")
    exact = _use_exact(n, exact)
    f, _ = run_balance(g, exact)
    zero = Fraction(0) if exact else 0.0
    loads = [zero] * (n + 1)
    by_round: dict[int, list] = {}
    for (j, i), w in f.weights.items():
        by_round.setdefault(j, []).append((i, w))

    credited = []
    slackness = []
    spread = zero  # sum over l < i of s(l) / (n - l)
    stop = None
    for i in range(1, n + 1):
        for v, w in by_round.get(i, ()):
            loads[v] += w
        active = loads[i:]
        avg = sum(active, zero) / (n - i + 1)
        s = max(active) - avg
        credit = avg + spread
        slackness.append(s)
        if credit >= 1:
            stop = i
            credited.extend([Fraction(1) if exact else 1.0] * (n - i + 1))
            break
        credited.append(credit)
        if i < n:
            spread += s / (n - i)

    total = sum(credited, zero)
    if stop is None:
        from_arrivals = sum(f.loads_online, zero)
    else:
        from_arrivals = (stop - 1) + sum((w for v, w in by_round.get(stop, ())), zero)
    return AveragingTrace(n, tuple(credited), tuple(slackness), stop, total, from_arrivals, f.size)


def monotone_round_credit(n: int, i: int, exact: bool = True) -> Number:
    """sum_{k<=i} 1/(n-k+1), the per-round credit on MonotoneG before the stop round."""
    if exact:
        return sum((Fraction(1, n - k + 1) for k in range(1, i + 1)), Fraction(0))
    return math.fsum(1.0 / (n - k + 1) for k in range(1, i + 1))


def meets_round_assumptions(g: BipartiteGraph, trace: Optional[AveragingTrace] = None) -> bool:
    """True when every round before the stop round fully matches its arrival and
    leaves v_i holding the largest load among v_i..v_n.

    These are the conditions under which the per-round credit equals
    sum_{k<=i} 1/(n-k+1); arbitrary stripped graphs need not satisfy them.
    """
    trace = averaging_process(g) if trace is None else trace
    f, _ = run_balance(g)
    n = g.n
    last = n if trace.stop_round is None else trace.stop_round - 1
    loads = [0] * (n + 1)
    for i in range(1, last + 1):
        for (j, v), w in f.weights.items():
            if j == i:
                loads[v] += w
        if f.loads_online[i - 1] != 1 or loads[i] != max(loads[i:]):
            return False
    return True
