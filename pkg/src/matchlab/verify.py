"""The verification battery behind ``matchlab verify``.

Each check compares a computed quantity with a tabulated or independently
derived value and records the tolerance it was judged at.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Callable, Optional

import mpmath

from . import adversary, balance, combinatorics, constants, graph, pricing, ranking
from .rng import ScalarStream

A_TABLE = (1, 3, 13, 67, 411, 2921, 23633)
D_TABLE = (0, 1, 2, 9, 44, 265, 1854, 14833)
TRIANGLE_ROW6 = (309, 362, 426, 504, 600, 720)


@dataclass
class Check:
    name: str
    anchor: str
    passed: bool
    measured: Any
    expected: Any
    tolerance: Any = "exact"


@dataclass
class VerifyReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def summary_lines(self) -> list[str]:
        lines = [f"{'PASS' if c.passed else 'FAIL'}  {c.name}: measured {c.measured}, expected {c.expected}"
                 for c in self.checks]
        lines.append(f"{sum(c.passed for c in self.checks)}/{len(self.checks)} checks passed")
        return lines

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": [asdict(c) for c in self.checks]}


@dataclass(frozen=True)
class Scale:
    """How much work each check does; ``full`` matches the acceptance criteria."""

    n_max: int = 10
    trials: int = 100_000
    seed: int = 0
    threads: Optional[int] = None

    @property
    def full(self) -> bool:
        return self.n_max >= 10

    @property
    def mc_trials(self) -> int:
        return self.trials if self.full else min(self.trials, 2000)


def _seq_checks(scale: Scale, triangle: Optional[combinatorics.CountTriangle]) -> list[Check]:
    a = tuple(combinatorics.a_exact(n) for n in range(1, 8))
    d = tuple(combinatorics.derangements(n) for n in range(1, 9))
    t = triangle or combinatorics.d_triangle(8)
    checks = [
        Check("a(n) table", "a(n) for n=1..7", a == A_TABLE, list(a), list(A_TABLE)),
        Check("d(n) table", "derangements d(1..8)", d == D_TABLE, list(d), list(D_TABLE)),
        Check("a(6) = 2921", "a(6)", combinatorics.a_exact(6) == 2921, combinatorics.a_exact(6), 2921),
        Check("a(n) row sums", "a(n) = sum_i a(n,i)",
              tuple(combinatorics.a_row_sums(7)) == A_TABLE, combinatorics.a_row_sums(7), list(A_TABLE)),
    ]
    if t.n_max >= 6:
        checks.append(Check("triangle row 6", "d(6,1..6)", t.row(6) == TRIANGLE_ROW6, list(t.row(6)),
                            list(TRIANGLE_ROW6)))
    upto = min(8, scale.n_max, t.n_max)
    bad = []
    for n in range(1, upto + 1):
        for i in range(1, n + 1):
            brute = combinatorics.fixpoint_prefix_count_bruteforce(n, i)
            if t.d(n, i) != brute:
                bad.append([n, i, t.d(n, i), brute])
    checks.append(Check("triangle-vs-bruteforce", f"d(n,i) vs fixpoint enumeration, n<={upto}", not bad,
                        bad or "all equal", "no mismatches"))
    return checks


def _ranking_exact_checks(scale: Scale) -> list[Check]:
    checks = []
    mismatches = []
    for n in range(1, min(10, scale.n_max) + 1):
        total, _ = ranking.enumerate_ranking_exact(n, scale.threads)
        formula = math.factorial(n + 1) - combinatorics.derangements(n + 1) - combinatorics.derangements(n)
        if total != formula:
            mismatches.append([n, total, formula])
    checks.append(Check("enumeration-vs-formula", "sum of Ranking sizes over n! rankings = (n+1)! - d(n+1) - d(n)",
                        not mismatches, mismatches or "all equal", "no mismatches"))
    t = combinatorics.d_triangle(8)
    bad = []
    for n in range(1, min(8, scale.n_max) + 1):
        counts = ranking.matched_at_rank_counts(n, scale.threads)
        want = [t.d(n, n + 1 - i) for i in range(1, n + 1)]
        if counts != want:
            bad.append([n, counts, want])
    checks.append(Check("rank-counts-vs-triangle", "a(n,i) = d(n,n+1-i)", not bad, bad or "all equal",
                        "no mismatches"))
    return checks


def _rho_checks(scale: Scale) -> list[Check]:
    worst = None
    failures = []
    for n in range(1, 21):
        r = combinatorics.rho_ranking_monotone(n)
        ratio = abs(r.nu) * math.factorial(n)
        worst = ratio if worst is None or ratio > worst else worst
        if not r.within_bound():
            failures.append(n)
    return [Check("offset-below-inverse-factorial", "|a(n)/n! - ((1-1/e)n + 1 - 2/e)| < 1/n!, n=1..20, 60 digits",
                  not failures, f"max |nu| n! = {mpmath.nstr(worst, 8)}", "< 1", "strict")]


def _balance_checks(scale: Scale) -> list[Check]:
    checks = []
    top = 64 if scale.full else min(64, max(scale.n_max, 6))
    bad = []
    for n in range(1, top + 1):
        f, _ = balance.run_balance(graph.make_monotone_graph(n), exact=True)
        if f.size != balance.balance_monotone_closed_form(n, exact=True)[1]:
            bad.append(n)
    checks.append(Check("balance-closed-form-exact", f"Balance on MonotoneG(n) = closed form, n<={top}",
                        not bad, bad or "all equal", "no mismatches"))
    if scale.full:
        target = float(constants.HALF_MINUS_HALF_INV_E)
        devs = []
        for n in (10**3, 10**4, 10**5):
            _, size = balance.balance_monotone_closed_form(n)
            devs.append(size - float(constants.ONE_MINUS_INV_E) * n - target)
        ok = all(abs(x) <= 0.02 for x in devs) and abs(devs[0]) > abs(devs[1]) > abs(devs[2])
        checks.append(Check("balance-large-n", "size - (1-1/e)n -> 1/2 - 1/(2e), n=1e3,1e4,1e5",
                            ok, devs, target, 0.02))
        f, _ = balance.run_balance(graph.make_monotone_graph(1000), exact=False)
        gap = abs(f.size - balance.balance_monotone_closed_form(1000)[1])
        checks.append(Check("balance-float-run-1000", "float water-filling vs closed form at n=1000",
                            gap <= 1e-9, gap, 0.0, 1e-9))
    return checks


def averaging_chain(count: int, n: int = 8, seed: int = 2024) -> dict:
    mono = balance.averaging_process(graph.make_monotone_graph(n))
    m_mono = balance.run_balance(graph.make_monotone_graph(n))[0].size
    round_ok = all(mono.credited[i - 1] == balance.monotone_round_credit(n, i)
                   for i in range(1, (mono.stop_round or n + 1)))
    upper_fail = lower_fail = 0
    for s in range(count):
        g = graph.random_forward_graph(n, ScalarStream(seed, s))
        tr = balance.averaging_process(g)
        upper_fail += tr.total > tr.balance_size
        lower_fail += tr.balance_size < m_mono
    return {
        "graphs": count,
        "m_lt_mprime": upper_fail,
        "m_lt_m_monotone": lower_fail,
        "monotone_equal": mono.total == m_mono and all(s == 0 for s in mono.slackness),
        "monotone_rounds_match": round_ok,
    }


def _averaging_checks(scale: Scale) -> list[Check]:
    count = 1000 if scale.full else 50
    r = averaging_chain(count)
    ok = r["m_lt_mprime"] == 0 and r["m_lt_m_monotone"] == 0 and r["monotone_equal"] and r["monotone_rounds_match"]
    return [Check("averaging-chain", f"m(G) >= m'(G), m(G) >= m(MonotoneG), m'(MonotoneG) = m(MonotoneG), {count} graphs",
                  ok, r, "zero violations; monotone equalities hold")]


def _ranking_mc_checks(scale: Scale) -> list[Check]:
    n = 100
    rep = ranking.ranking_monte_carlo(graph.make_monotone_graph(n), scale.mc_trials, scale.seed)
    one_minus = float(constants.ONE_MINUS_INV_E)
    target = one_minus * n + float(constants.ONE_MINUS_TWO_INV_E)
    margin = 4 * rep.stderr
    # the interval is only 1/e wide, so quick runs are too noisy for the full margin
    gap = margin if scale.full else 0.0
    return [
        Check("ranking-mc-target", "MonotoneG(100) mean vs (1-1/e)n + 1 - 2/e", abs(rep.mean - target) <= margin,
              rep.mean, target, f"4*stderr = {margin:.6g}"),
        Check("ranking-mc-sandwich", f"(1-1/e)n < mean < (1-1/e)n + 1/e beyond {'4*stderr' if scale.full else 'zero'} margin",
              rep.mean - gap > one_minus * n and rep.mean + gap < one_minus * n + float(constants.INV_E),
              rep.mean, [one_minus * n, one_minus * n + float(constants.INV_E)], f"margin = {gap:.6g}"),
    ]


def _pricing_checks(scale: Scale) -> list[Check]:
    trials = scale.mc_trials
    g = graph.make_monotone_graph(50)
    ident = pricing.revenue_utility_identity(g, trials, scale.seed)
    diag = graph.IntegralMatching({j: j for j in range(1, 51)})
    edges = pricing.per_edge_bound_mc(g, diag, trials, scale.seed)
    bound = float(constants.ONE_MINUS_INV_E)
    low = [i + 1 for i, (m, s) in enumerate(zip(edges.means, edges.stderrs)) if m < bound - 4 * s]
    price_trials = 10 * trials
    mean, err = pricing.mean_price_mc(price_trials, scale.seed + 1)
    slack = pricing.slackness_mc(6, trials // 10, scale.seed + 2)
    return [
        Check("revenue+utility=size", f"exact in every priced run, MonotoneG(50), {trials} runs",
              ident["holds"] == trials, ident["holds"], trials),
        Check("per-edge-bound", "E[r(v_i) + y(M(v_i))] >= 1 - 1/e - 4*stderr, MonotoneG(50)", not low,
              f"min mean {min(edges.means):.6f}", bound, "4*stderr per edge"),
        Check("expected-price", f"E[p] = 1 - 1/e over {price_trials} draws", abs(mean - bound) <= 4 * err,
              mean, bound, f"4*stderr = {4 * err:.3g}"),
        Check("slackness-realizations", f"sum s(u) <= 1 - p_n in every realization, n=6, {slack['trials']} runs",
              slack["holds"] == slack["trials"], slack["holds"], slack["trials"]),
    ]


def _bijection_checks(scale: Scale) -> list[Check]:
    failures = []
    for n in range(1, min(6, scale.n_max) + 1):
        r = combinatorics.audit_bijection(n)
        if not (r["bijective"] and r["unmatched_last"] == r["expected_unmatched_last"] and r["case_analysis"]):
            failures.append(r)
    return [Check("insertion-bijection", f"B bijective and unmatched-last count = (n+1)! - a(n+1,n+1), n<={min(6, scale.n_max)}",
                  not failures, failures or "all hold", "no failures")]


def _adversary_checks(scale: Scale) -> list[Check]:
    bad = []
    sizes = (2, 4, 6, 10, 100)
    for n in sizes:
        for name in ("lowest", "highest", "lowest-degree-seen"):
            alg = adversary.builtin_algorithms(n)[name]
            tr = adversary.run_adaptive_adversary(alg, n)
            if tr.size != n // 2 or tr.max_matching != n or not adversary.replay_matches(tr, alg):
                bad.append([name, n, tr.size, tr.max_matching])
    return [Check("adversary-half", "greedy size = n/2 and max matching = n, 3 algorithms, n in 2,4,6,10,100",
                  not bad, bad or "all hold", "no failures")]


def _constant_checks(scale: Scale) -> list[Check]:
    problems = constants.self_test()
    return [Check("constants-self-test", "50-digit constants vs fresh evaluation", not problems,
                  problems or "consistent", "consistent")]


SECTIONS: list[Callable[[Scale], list[Check]]] = [
    _constant_checks,
    _ranking_exact_checks,
    _rho_checks,
    _balance_checks,
    _averaging_checks,
    _ranking_mc_checks,
    _pricing_checks,
    _bijection_checks,
    _adversary_checks,
]


def run_verification(scale: Scale = Scale(), triangle: Optional[combinatorics.CountTriangle] = None) -> VerifyReport:
    report = VerifyReport()
    report.checks.extend(_seq_checks(scale, triangle))
    for section in SECTIONS:
        report.checks.extend(section(scale))
    return report


def json_ready(value):
    """Convert Fractions, mpmath numbers and tuples into JSON-friendly values."""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, mpmath.mpf):
        return mpmath.nstr(value, 30)
    if isinstance(value, dict):
        return {str(k): json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_ready(v) for v in value]
    if isinstance(value, bool) or value is None or isinstance(value, (int, float, str)):
        return value
    return str(value)
