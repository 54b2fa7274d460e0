"""Exact integer sequences behind Ranking on MonotoneG.

d(n) are derangement numbers; d(n, i) counts permutations of [n] whose fixed
points all lie among the first i items; a(n, i) = d(n, n+1-i) counts the
rankings under which the rank-i item gets matched, and a(n) is their row sum.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath

from .graph import GraphError, Permutation

BRUTEFORCE_MAX_N = 8
WORKING_DPS = 60


@lru_cache(maxsize=None)
def derangements(n: int) -> int:
    """d(0) = 1, d(n) = n d(n-1) + (-1)^n."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    d = 1
    for k in range(1, n + 1):
        d = k * d + (-1) ** k
    return d


@dataclass(frozen=True)
class CountTriangle:
    """rows[n-1][i-1] = d(n, i)."""

    rows: tuple[tuple[int, ...], ...]

    @property
    def n_max(self) -> int:
        return len(self.rows)

    def d(self, n: int, i: int) -> int:
        return self.rows[n - 1][i - 1]

    def a(self, n: int, i: int) -> int:
        return self.rows[n - 1][n - i]

    def row(self, n: int) -> tuple[int, ...]:
        return self.rows[n - 1]

    def a_row(self, n: int) -> tuple[int, ...]:
        return tuple(reversed(self.rows[n - 1]))

    def consistent(self) -> bool:
        for n, row in enumerate(self.rows, start=1):
            if len(row) != n or row[-1] != math.factorial(n):
                return False
            if n > 1:
                prev = self.rows[n - 2]
                if any(row[i + 1] != row[i] + prev[i] for i in range(n - 1)):
                    return False
        return True


def d_triangle(n_max: int) -> CountTriangle:
    """Fill each row from the diagonal d(n, n) = n! leftwards with
    d(n, i) = d(n, i+1) - d(n-1, i)."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    rows: list[tuple[int, ...]] = []
    for n in range(1, n_max + 1):
        row = [0] * n
        row[n - 1] = math.factorial(n)
        for i in range(n - 2, -1, -1):
            row[i] = row[i + 1] - rows[n - 2][i]
        rows.append(tuple(row))
    return CountTriangle(tuple(rows))


def fixpoint_prefix_count_bruteforce(n: int, i: int) -> int:
    """Count permutations of [n] whose fixed points are all among items 1..i."""
    if n > BRUTEFORCE_MAX_N:
        raise ValueError(f"brute force is capped at n={BRUTEFORCE_MAX_N}")
    if not 1 <= i <= n:
        raise ValueError(f"i must be in 1..{n}")
    count = 0
    for p in itertools.permutations(range(1, n + 1)):
        if all(p[k - 1] != k for k in range(i + 1, n + 1)):
            count += 1
    return count


def a_exact(n: int) -> int:
    """a(n) = (n+1)! - d(n+1) - d(n)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return math.factorial(n + 1) - derangements(n + 1) - derangements(n)


def a_row_sums(n_max: int) -> list[int]:
    """a(1..n_max) as row sums of the triangle."""
    t = d_triangle(n_max)
    return [sum(t.row(n)) for n in range(1, n_max + 1)]


def mp_constants(dps: int = WORKING_DPS) -> dict:
    with mpmath.workdps(dps):
        e = mpmath.e
        return {
            "1-1/e": 1 - 1 / e,
            "1-2/e": 1 - 2 / e,
            "1/e": 1 / e,
            "1/2-1/(2e)": mpmath.mpf(1) / 2 - 1 / (2 * e),
        }


@dataclass(frozen=True)
class ExactRho:
    n: int
    a_n: int
    rho: Fraction
    nu: mpmath.mpf

    @property
    def bound(self) -> Fraction:
        return Fraction(1, math.factorial(self.n))

    def within_bound(self) -> bool:
        with mpmath.workdps(WORKING_DPS):
            return abs(self.nu) < mpmath.mpf(1) / math.factorial(self.n)


def rho_ranking_monotone(n: int, dps: int = WORKING_DPS) -> ExactRho:
    """Exact expected Ranking size on MonotoneG(n) and its offset from
    (1 - 1/e) n + 1 - 2/e, evaluated with ``dps`` significant digits."""
    a_n = a_exact(n)
    rho = Fraction(a_n, math.factorial(n))
    with mpmath.workdps(dps):
        c = mp_constants(dps)
        nu = mpmath.mpf(rho.numerator) / rho.denominator - (c["1-1/e"] * n + c["1-2/e"])
    return ExactRho(n, a_n, rho, nu)


def derangement_rounding_gap(n: int, dps: int = WORKING_DPS) -> mpmath.mpf:
    """|d(n) - n!/e|, which stays below 1/2 for n >= 1."""
    with mpmath.workdps(dps):
        return abs(derangements(n) - mpmath.mpf(math.factorial(n)) / mpmath.e)


def bijection_b(pi: Permutation, i: int) -> Permutation:
    """Map (pi in S_n, i in [n+1]) to a permutation of [n+1].

    i = n+1 appends v_{n+1} at the last location; otherwise v_{n+1} takes the
    location held by v_i and v_i moves to location n+1.
    """
    n = len(pi)
    if not 1 <= i <= n + 1:
        raise GraphError(f"i must be in 1..{n + 1}, got {i}")
    items = list(pi.items)
    if i == n + 1:
        items.append(n + 1)
    else:
        items[pi.rank(i) - 1] = n + 1
        items.append(i)
    return Permutation.from_items(items)


def bijection_b_inverse(pi_next: Permutation) -> tuple[Permutation, int]:
    m = len(pi_next)
    if m < 2:
        raise GraphError("inverse needs a permutation over at least 2 items")
    items = list(pi_next.items)
    last = items[-1]
    if last == m:
        return Permutation.from_items(items[:-1]), m
    loc = pi_next.rank(m)
    items[loc - 1] = last
    return Permutation.from_items(items[:-1]), last


def audit_bijection(n: int) -> dict:
    """Exhaustively check B on all (pi, i) for permutations of size n.

    Confirms B is a bijection onto S_{n+1}, that the inverse round-trips, and
    that B(pi, i) leaves its last-ranked item unmatched on MonotoneG(n+1)
    exactly when u_i is matched under pi on MonotoneG(n).
    """
    from .graph import make_monotone_graph
    from .ranking import run_ranking

    g_n, g_next = make_monotone_graph(n), make_monotone_graph(n + 1)
    images = set()
    round_trip = True
    case_analysis = True
    unmatched_last = 0
    for items in itertools.permutations(range(1, n + 1)):
        pi = Permutation.from_items(items)
        matched_online = set(run_ranking(g_n, pi).matching.pairs)
        for i in range(1, n + 2):
            image = bijection_b(pi, i)
            images.add(image.ranks)
            if bijection_b_inverse(image) != (pi, i):
                round_trip = False
            last_unmatched = not run_ranking(g_next, image).matched_ranks[-1]
            unmatched_last += last_unmatched
            if last_unmatched != (i <= n and i in matched_online):
                case_analysis = False
    t = d_triangle(n + 1)
    expected = math.factorial(n + 1) - t.a(n + 1, n + 1)
    return {
        "n": n,
        "bijective": len(images) == math.factorial(n + 1) and round_trip,
        "unmatched_last": unmatched_last,
        "expected_unmatched_last": expected,
        "case_analysis": case_analysis,
    }
