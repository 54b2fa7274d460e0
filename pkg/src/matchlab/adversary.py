"""Adaptive adversary that holds any deterministic greedy online algorithm to n/2.

The first n/2 arrivals see every offline vertex. The remaining n/2 arrivals
see only the set S of offline vertices the algorithm used during the first
half, which are all taken by then.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Protocol

from .graph import BipartiteGraph, GraphError, IntegralMatching, Permutation, fisher_yates, max_matching_size
from .rng import ScalarStream

History = tuple  # of (revealed neighbor tuple, decision or None)


class OnlineAlgorithm(Protocol):
    def __call__(self, history: History, neighbors: tuple[int, ...], exposed: frozenset) -> Optional[int]:
        """Return an exposed neighbor to match, or None to leave the arrival exposed."""


def lowest_index(history, neighbors, exposed):
    free = [i for i in neighbors if i in exposed]
    return min(free) if free else None


def highest_index(history, neighbors, exposed):
    free = [i for i in neighbors if i in exposed]
    return max(free) if free else None


def lowest_degree_seen(history, neighbors, exposed):
    """Pick the exposed neighbor that has appeared in the fewest revealed sets so far."""
    free = [i for i in neighbors if i in exposed]
    if not free:
        return None
    seen = {i: 0 for i in free}
    for revealed, _ in history:
        for i in revealed:
            if i in seen:
                seen[i] += 1
    return min(free, key=lambda i: (seen[i], i))


def ranking_fixed(pi: Permutation) -> OnlineAlgorithm:
    """Ranking with a fixed permutation, i.e. a deterministic greedy algorithm."""

    def decide(history, neighbors, exposed):
        free = [i for i in neighbors if i in exposed]
        return min(free, key=pi.rank) if free else None

    return decide


def skip_first(history, neighbors, exposed):
    """Deliberately non-greedy: leaves the first arrival exposed."""
    if not history:
        return None
    return lowest_index(history, neighbors, exposed)


def builtin_algorithms(n: int, seed: int = 0) -> dict[str, OnlineAlgorithm]:
    return {
        "lowest": lowest_index,
        "highest": highest_index,
        "lowest-degree-seen": lowest_degree_seen,
        "ranking-fixed-pi": ranking_fixed(Permutation.from_items(fisher_yates(n, ScalarStream(seed)))),
    }


@dataclass(frozen=True)
class AdversaryTranscript:
    n: int
    graph: BipartiteGraph
    revealed: tuple[tuple[int, ...], ...]
    decisions: tuple[Optional[int], ...]
    matching: IntegralMatching
    certificate: IntegralMatching  # the perfect matching the adversary exhibits
    max_matching: int
    non_greedy_steps: tuple[int, ...]

    @property
    def size(self) -> int:
        return self.matching.size

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "graph": self.graph.to_json(),
            "decisions": [d for d in self.decisions],
            "matching_size": self.size,
            "max_matching_size": self.max_matching,
            "certificate": [[j, i] for j, i in sorted(self.certificate.pairs.items())],
            "non_greedy_steps": list(self.non_greedy_steps),
        }


def run_adaptive_adversary(alg: OnlineAlgorithm, n: int) -> AdversaryTranscript:
    if n < 2 or n % 2:
        raise GraphError(f"the adversary needs an even positive n, got {n}")
    half = n // 2
    everything = tuple(range(1, n + 1))
    exposed = set(everything)
    history: list = []
    pairs = {}
    non_greedy = []
    revealed_sets = []
    s_set: Optional[tuple[int, ...]] = None
    for j in range(1, n + 1):
        if j <= half:
            nbrs = everything
        else:
            if s_set is None:
                used = sorted(pairs.values())
                pad = [i for i in everything if i not in used][: half - len(used)]
                s_set = tuple(sorted(used + pad))
            nbrs = s_set
        choice = alg(tuple(history), nbrs, frozenset(exposed))
        if choice is not None:
            if choice not in nbrs or choice not in exposed:
                raise GraphError(f"algorithm chose v_{choice} for u_{j}, which is not an exposed neighbor")
            exposed.discard(choice)
            pairs[j] = choice
        elif any(i in exposed for i in nbrs):
            non_greedy.append(j)
        history.append((nbrs, choice))
        revealed_sets.append(nbrs)

    graph = BipartiteGraph(n, tuple(revealed_sets))
    rest = [i for i in everything if i not in s_set]
    cert = {j: rest[j - 1] for j in range(1, half + 1)}
    cert.update({j: s_set[j - half - 1] for j in range(half + 1, n + 1)})
    certificate = IntegralMatching(cert)
    if certificate.size != n or not certificate.check_edges(graph):
        raise AssertionError("adversary certificate is not a perfect matching")
    return AdversaryTranscript(
        n, graph, tuple(revealed_sets), tuple(d for _, d in history), IntegralMatching(pairs),
        certificate, max_matching_size(graph), tuple(non_greedy),
    )


def replay_matches(transcript: AdversaryTranscript, alg: Callable) -> bool:
    """Feed the recorded history back to ``alg`` and confirm every decision repeats."""
    exposed = set(range(1, transcript.n + 1))
    history: list = []
    for nbrs, decision in zip(transcript.revealed, transcript.decisions):
        if alg(tuple(history), nbrs, frozenset(exposed)) != decision:
            return False
        if decision is not None:
            exposed.discard(decision)
        history.append((nbrs, decision))
    return True
