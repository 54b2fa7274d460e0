"""Acceptance criteria, one test per criterion.

Each test prints a single ``ACCEPTANCE <id> PASS|FAIL`` line with the measured
values and wall time; a summary table is repeated at the end of the session.
Run directly (``python3 tests/test_acceptance.py``) to get just the table.
"""

import math
import time
from fractions import Fraction

import mpmath
import pytest

from matchlab import balance, combinatorics, graph, pricing, ranking
from matchlab.adversary import builtin_algorithms, run_adaptive_adversary
from matchlab.rng import ScalarStream, uniform_block

RESULTS: list[str] = []

ONE_MINUS_INV_E = 1 - math.exp(-1)
INV_E = math.exp(-1)
HALF_MINUS_HALF_INV_E = 0.5 - 0.5 * math.exp(-1)


def report(cid, ok, detail, elapsed, budget):
    within = elapsed < budget
    line = f"ACCEPTANCE {cid:>2} {'PASS' if ok and within else 'FAIL'}  {detail}  [{elapsed:.2f}s / {budget}s]"
    RESULTS.append(line)
    print(line)
    assert ok, line
    assert within, line


def test_01_exact_sequences():
    t0 = time.perf_counter()
    a = tuple(combinatorics.a_exact(n) for n in range(1, 8))
    d = tuple(combinatorics.derangements(n) for n in range(1, 9))
    ok = a == (1, 3, 13, 67, 411, 2921, 23633) and d == (0, 1, 2, 9, 44, 265, 1854, 14833)
    report(1, ok, f"a(1..7)={a} d(1..8)={d}", time.perf_counter() - t0, 1)


def test_02_triangle():
    t0 = time.perf_counter()
    t = combinatorics.d_triangle(8)
    row_ok = t.row(6) == (309, 362, 426, 504, 600, 720)
    bad = [(n, i) for n in range(1, 9) for i in range(1, n + 1)
           if t.d(n, i) != combinatorics.fixpoint_prefix_count_bruteforce(n, i)]
    report(2, row_ok and not bad, f"row6={t.row(6)} brute-force mismatches={bad}", time.perf_counter() - t0, 10)


def test_03_enumeration_oracle():
    t0 = time.perf_counter()
    bad = []
    for n in range(1, 11):
        total, _ = ranking.enumerate_ranking_exact(n)
        formula = math.factorial(n + 1) - combinatorics.derangements(n + 1) - combinatorics.derangements(n)
        if total != formula:
            bad.append((n, total, formula))
    report(3, not bad, f"n=1..10 enumeration vs (n+1)!-d(n+1)-d(n), mismatches={bad}", time.perf_counter() - t0, 60)


def test_04_rank_counts():
    t0 = time.perf_counter()
    bad = []
    for n in range(1, 9):
        t = combinatorics.d_triangle(n)
        counts = ranking.matched_at_rank_counts(n)
        bad += [(n, i) for i in range(1, n + 1) if counts[i - 1] != t.d(n, n + 1 - i)]
    report(4, not bad, f"a(n,i)=d(n,n+1-i) for n<=8, mismatches={bad}", time.perf_counter() - t0, 60)


def test_05_offset_bound():
    t0 = time.perf_counter()
    worst = 0
    ok = True
    with mpmath.workdps(60):
        for n in range(1, 21):
            r = combinatorics.rho_ranking_monotone(n, dps=60)
            ok &= r.rho == Fraction(combinatorics.a_exact(n), math.factorial(n))
            ok &= abs(r.nu) < mpmath.mpf(1) / math.factorial(n)
            worst = max(worst, float(abs(r.nu) * math.factorial(n)))
    report(5, ok, f"max |nu(n)|*n! over n=1..20 = {worst:.6f} (< 1), 60 digits", time.perf_counter() - t0, 5)


def test_06_balance_closed_form():
    t0 = time.perf_counter()
    bad = [n for n in range(1, 65)
           if balance.run_balance(graph.make_monotone_graph(n), exact=True)[0].size
           != balance.balance_monotone_closed_form(n, exact=True)[1]]
    devs = []
    for n in (10**3, 10**4, 10**5):
        size = balance.balance_monotone_closed_form(n)[1]
        devs.append(size - ONE_MINUS_INV_E * n - HALF_MINUS_HALF_INV_E)
    shrinking = abs(devs[0]) > abs(devs[1]) > abs(devs[2])
    ok = not bad and all(abs(x) <= 0.02 for x in devs) and shrinking
    report(6, ok, f"exact mismatches n<=64: {bad}; deviations at 1e3,1e4,1e5 = {[f'{x:.2e}' for x in devs]}",
           time.perf_counter() - t0, 5)


def test_07_averaging_chain():
    t0 = time.perf_counter()
    n = 8
    mono_g = graph.make_monotone_graph(n)
    mono = balance.averaging_process(mono_g)
    m_mono = balance.run_balance(mono_g)[0].size
    rounds_ok = all(mono.credited[i - 1] == sum(Fraction(1, n - k + 1) for k in range(1, i + 1))
                    for i in range(1, mono.stop_round))
    upper = 0
    for s in range(1000):
        g = graph.random_forward_graph(n, ScalarStream(2024, s))
        assert g.certified_perfect and balance.strip_backward_edges(g) == g
        tr = balance.averaging_process(g)
        upper += tr.total > tr.balance_size
    ok = upper == 0 and mono.total == m_mono and rounds_ok
    report(7, ok, f"m<m' on {upper}/1000 graphs; m'(Mono)=m(Mono)={m_mono}; per-round credits match={rounds_ok}",
           time.perf_counter() - t0, 30)


def test_08_ranking_sandwich():
    t0 = time.perf_counter()
    n = 100
    rep = ranking.ranking_monte_carlo(graph.make_monotone_graph(n), 100_000, 0)
    margin = 4 * rep.stderr
    target = ONE_MINUS_INV_E * n + 1 - 2 * INV_E
    ok = (abs(rep.mean - target) <= margin and rep.mean - margin > ONE_MINUS_INV_E * n
          and rep.mean + margin < ONE_MINUS_INV_E * n + INV_E)
    report(8, ok, f"mean={rep.mean:.5f} stderr={rep.stderr:.5f} target={target:.5f} "
           f"interval=({ONE_MINUS_INV_E * n:.5f}, {ONE_MINUS_INV_E * n + INV_E:.5f})", time.perf_counter() - t0, 30)


def test_09_pricing_identities():
    t0 = time.perf_counter()
    g = graph.make_monotone_graph(50)
    ident = pricing.revenue_utility_identity(g, 100_000, 0)
    diag = graph.IntegralMatching({j: j for j in range(1, 51)})
    edges = pricing.per_edge_bound_mc(g, diag, 100_000, 0)
    low = [i + 1 for i, (m, s) in enumerate(zip(edges.means, edges.stderrs)) if m < ONE_MINUS_INV_E - 4 * s]
    mean, err = pricing.mean_price_mc(10**6, 1)
    slack = pricing.slackness_mc(6, 10_000, 2)
    ok = (ident["holds"] == 100_000 and not low and abs(mean - ONE_MINUS_INV_E) <= 4 * err
          and slack["holds"] == 10_000)
    report(9, ok, f"identity {ident['holds']}/100000; per-edge below bound={low}; "
           f"price={mean:.6f}+-{err:.1e}; slackness {slack['holds']}/10000", time.perf_counter() - t0, 60)


def test_10_bijection():
    t0 = time.perf_counter()
    rows = [combinatorics.audit_bijection(n) for n in range(1, 7)]
    ok = all(r["bijective"] and r["case_analysis"] and r["unmatched_last"] == r["expected_unmatched_last"]
             for r in rows)
    report(10, ok, f"unmatched-last counts n=1..6: {[r['unmatched_last'] for r in rows]}",
           time.perf_counter() - t0, 10)


def test_11_adversary():
    t0 = time.perf_counter()
    bad = []
    for n in (2, 4, 6, 10, 100):
        algs = builtin_algorithms(n)
        for name in ("lowest", "highest", "lowest-degree-seen"):
            t = run_adaptive_adversary(algs[name], n)
            if t.size != n // 2 or t.max_matching != n:
                bad.append((name, n, t.size, t.max_matching))
    report(11, not bad, f"3 algorithms x n in (2,4,6,10,100), failures={bad}", time.perf_counter() - t0, 5)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
