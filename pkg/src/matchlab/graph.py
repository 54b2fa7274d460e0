"""Bipartite graph model, instance generators and the offline matching oracle.

Online vertices ``u_1..u_n`` arrive in index order; offline vertices are the
integers ``1..n``. All public indices are 1-based.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence, Union

from .rng import ScalarStream

Number = Union[Fraction, float]

EXACT_MAX_N = 64
FLOAT_TOL = 1e-9


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class BipartiteGraph:
    n: int
    adjacency: tuple[tuple[int, ...], ...]
    certified_perfect: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise GraphError(f"graph size must be positive, got {self.n}")
        if len(self.adjacency) != self.n:
            raise GraphError(f"expected {self.n} neighbor sets, got {len(self.adjacency)}")
        cleaned = []
        for j, nbrs in enumerate(self.adjacency, start=1):
            s = tuple(sorted(set(int(i) for i in nbrs)))
            if s and (s[0] < 1 or s[-1] > self.n):
                raise GraphError(f"u_{j} has a neighbor outside 1..{self.n}: {s}")
            cleaned.append(s)
        object.__setattr__(self, "adjacency", tuple(cleaned))
        if self.certified_perfect and max_matching_size(self) != self.n:
            raise GraphError("graph flagged perfect has no perfect matching")

    @classmethod
    def from_sets(cls, sets: Iterable[Iterable[int]], certify: bool = False) -> "BipartiteGraph":
        adj = tuple(tuple(s) for s in sets)
        g = cls(len(adj), adj)
        if certify:
            return g.certify()
        return g

    def neighbors(self, j: int) -> tuple[int, ...]:
        return self.adjacency[j - 1]

    def has_edge(self, j: int, i: int) -> bool:
        nbrs = self.adjacency[j - 1]
        # binary search would do; desk-scale degrees keep this cheap
        return i in nbrs

    @property
    def num_edges(self) -> int:
        return sum(len(s) for s in self.adjacency)

    def certify(self) -> "BipartiteGraph":
        """Return a copy flagged perfect after the oracle confirms it."""
        return BipartiteGraph(self.n, self.adjacency, certified_perfect=True)

    def without_offline(self, removed: int) -> "BipartiteGraph":
        """Drop offline vertex ``removed`` from every neighbor set, keeping labels.

        The result is no longer a graph in the strict |U| = |V| sense, so it is
        returned with the original ``n`` and the removed label simply unused.
        """
        return BipartiteGraph(self.n, tuple(tuple(i for i in s if i != removed) for s in self.adjacency))

    def to_json(self) -> dict:
        return {"n": self.n, "adjacency": [list(s) for s in self.adjacency]}

    @classmethod
    def from_json(cls, data: dict) -> "BipartiteGraph":
        try:
            n = int(data["n"])
            adj = data["adjacency"]
        except (KeyError, TypeError) as exc:
            raise GraphError(f"malformed graph JSON: {exc}") from exc
        if len(adj) != n:
            raise GraphError(f"adjacency has {len(adj)} rows for n={n}")
        return cls(n, tuple(tuple(int(i) for i in row) for row in adj))


def load_graph(path: Union[str, Path]) -> BipartiteGraph:
    with open(path) as fh:
        return BipartiteGraph.from_json(json.load(fh))


def save_graph(g: BipartiteGraph, path: Union[str, Path]) -> None:
    with open(path, "w") as fh:
        json.dump(g.to_json(), fh)


@dataclass(frozen=True)
class Permutation:
    """A ranking of offline vertices.

    ``ranks[i-1]`` is the rank of offline vertex ``i``; ``items[r-1]`` is the
    offline vertex holding rank ``r``.
    """

    ranks: tuple[int, ...]
    items: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        ranks = tuple(int(r) for r in self.ranks)
        n = len(ranks)
        if sorted(ranks) != list(range(1, n + 1)):
            raise GraphError(f"not a permutation of 1..{n}: {ranks}")
        items = [0] * n
        for i, r in enumerate(ranks, start=1):
            items[r - 1] = i
        object.__setattr__(self, "ranks", ranks)
        object.__setattr__(self, "items", tuple(items))

    @classmethod
    def from_items(cls, items: Sequence[int]) -> "Permutation":
        n = len(items)
        ranks = [0] * n
        for r, i in enumerate(items, start=1):
            if not 1 <= i <= n:
                raise GraphError(f"item {i} outside 1..{n}")
            ranks[i - 1] = r
        return cls(tuple(ranks))

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    def __len__(self) -> int:
        return len(self.ranks)

    def rank(self, i: int) -> int:
        return self.ranks[i - 1]

    def item(self, r: int) -> int:
        return self.items[r - 1]

    def inverse(self) -> "Permutation":
        return Permutation(self.items)


@dataclass(frozen=True)
class IntegralMatching:
    pairs: dict  # online index -> offline index

    def __post_init__(self):
        offline = list(self.pairs.values())
        if len(set(offline)) != len(offline):
            raise GraphError("offline vertex matched twice")

    @property
    def size(self) -> int:
        return len(self.pairs)

    def offline_partner(self) -> dict:
        return {i: j for j, i in self.pairs.items()}

    def check_edges(self, g: BipartiteGraph) -> bool:
        return all(g.has_edge(j, i) for j, i in self.pairs.items())


@dataclass(frozen=True)
class FractionalMatching:
    n: int
    weights: dict  # (online j, offline i) -> weight
    loads_offline: tuple
    loads_online: tuple

    @classmethod
    def from_weights(cls, n: int, weights: dict, exact: bool) -> "FractionalMatching":
        zero = Fraction(0) if exact else 0.0
        off = [zero] * n
        on = [zero] * n
        for (j, i), w in weights.items():
            on[j - 1] += w
            off[i - 1] += w
        return cls(n, dict(weights), tuple(off), tuple(on))

    @property
    def exact(self) -> bool:
        return all(isinstance(w, Fraction) for w in self.weights.values())

    @property
    def size(self) -> Number:
        return sum(self.loads_offline, Fraction(0) if self.exact else 0.0)


def make_monotone_graph(n: int) -> BipartiteGraph:
    """MonotoneG: u_j is adjacent to v_j, ..., v_n; identity is the perfect matching."""
    if n < 1:
        raise GraphError(f"graph size must be positive, got {n}")
    return BipartiteGraph(n, tuple(tuple(range(j, n + 1)) for j in range(1, n + 1)), certified_perfect=True)


def make_complete_graph(n: int) -> BipartiteGraph:
    if n < 1:
        raise GraphError(f"graph size must be positive, got {n}")
    full = tuple(range(1, n + 1))
    return BipartiteGraph(n, (full,) * n, certified_perfect=True)


def fisher_yates(n: int, stream: ScalarStream) -> list[int]:
    items = list(range(1, n + 1))
    for k in range(n - 1, 0, -1):
        m = stream.below(k + 1)
        items[k], items[m] = items[m], items[k]
    return items


def dn_graph(tau: Permutation) -> BipartiteGraph:
    """The D_n support graph for hidden permutation ``tau``: N(u_j) = {tau(j), ..., tau(n)}."""
    n = len(tau)
    taus = tau.ranks
    return BipartiteGraph(n, tuple(tuple(taus[j - 1:]) for j in range(1, n + 1)), certified_perfect=True)


def sample_dn(n: int, seed: int) -> tuple[BipartiteGraph, Permutation]:
    if n < 1:
        raise GraphError(f"graph size must be positive, got {n}")
    tau = Permutation(tuple(fisher_yates(n, ScalarStream(seed))))
    return dn_graph(tau), tau


def random_forward_graph(n: int, stream: ScalarStream, density: float | None = None) -> BipartiteGraph:
    """Diagonal plus random forward edges (u_j, v_i), i > j; no backward edges."""
    p = stream.random() if density is None else density
    sets = []
    for j in range(1, n + 1):
        sets.append((j,) + tuple(i for i in range(j + 1, n + 1) if stream.random() < p))
    return BipartiteGraph(n, tuple(sets), certified_perfect=True)


def random_diagonal_graph(n: int, stream: ScalarStream, density: float | None = None) -> BipartiteGraph:
    """Diagonal plus random edges in both directions."""
    p = stream.random() if density is None else density
    sets = []
    for j in range(1, n + 1):
        sets.append((j,) + tuple(i for i in range(1, n + 1) if i != j and stream.random() < p))
    return BipartiteGraph(n, tuple(sets), certified_perfect=True)


def maximum_matching(g: BipartiteGraph) -> IntegralMatching:
    """Kuhn's augmenting-path search, O(V E)."""
    owner: dict[int, int] = {}  # offline -> online

    def augment(j: int, seen: set) -> bool:
        for i in g.adjacency[j - 1]:
            if i in seen:
                continue
            seen.add(i)
            if i not in owner or augment(owner[i], seen):
                owner[i] = j
                return True
        return False

    for j in range(1, g.n + 1):
        augment(j, set())
    return IntegralMatching({j: i for i, j in sorted(owner.items(), key=lambda kv: kv[1])})


def max_matching_size(g: BipartiteGraph) -> int:
    return maximum_matching(g).size


def relabel_to_diagonal(g: BipartiteGraph) -> tuple[BipartiteGraph, Permutation]:
    """Rename offline vertices so that (u_j, v_j) is a perfect matching.

    Returns the relabelled graph and the map as a permutation whose
    ``ranks[i-1]`` is the new label of old offline vertex ``i``.
    """
    m = maximum_matching(g)
    if m.size != g.n:
        raise GraphError(f"graph has no perfect matching (maximum {m.size} < {g.n})")
    new_label = [0] * g.n
    for j, i in m.pairs.items():
        new_label[i - 1] = j
    relabel = Permutation(tuple(new_label))
    sets = tuple(tuple(relabel.rank(i) for i in s) for s in g.adjacency)
    return BipartiteGraph(g.n, sets, certified_perfect=True), relabel


def _exceeds_one(x: Number) -> bool:
    if isinstance(x, Fraction):
        return x > 1
    return x > 1 + FLOAT_TOL


def _differ(a: Number, b: Number) -> bool:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a != b
    return abs(a - b) > FLOAT_TOL * max(1.0, abs(float(a)))


def validate_fractional(g: BipartiteGraph, f: FractionalMatching) -> list[str]:
    """Violations of the fractional-matching constraints; an empty list means valid."""
    problems = []
    for (j, i), w in sorted(f.weights.items()):
        if w < 0:
            problems.append(f"negative weight on (u_{j}, v_{i})")
        if not (1 <= j <= g.n and 1 <= i <= g.n and g.has_edge(j, i)):
            problems.append(f"weight on non-edge (u_{j}, v_{i})")
    for i, load in enumerate(f.loads_offline, start=1):
        if _exceeds_one(load):
            problems.append(f"offline load exceeds one at v_{i}: {load}")
    for j, load in enumerate(f.loads_online, start=1):
        if _exceeds_one(load):
            problems.append(f"online load exceeds one at u_{j}: {load}")
    exact = f.exact
    zero = Fraction(0) if exact else 0.0
    by_weight = sum(f.weights.values(), zero)
    by_offline = sum(f.loads_offline, zero)
    by_online = sum(f.loads_online, zero)
    if _differ(by_weight, by_offline) or _differ(by_weight, by_online):
        problems.append(f"size mismatch: weights {by_weight}, offline {by_offline}, online {by_online}")
    recomputed = FractionalMatching.from_weights(f.n, f.weights, exact)
    for name, have, want in (("offline", f.loads_offline, recomputed.loads_offline),
                             ("online", f.loads_online, recomputed.loads_online)):
        if any(_differ(a, b) for a, b in zip(have, want)):
            problems.append(f"{name} loads are not the sums of weights")
    return problems
