import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

from matchlab.graph import IntegralMatching, make_complete_graph, make_monotone_graph
from matchlab.pricing import (
    TICKS,
    first_claim_converse,
    removal_symmetry_check,
    mean_price_mc,
    per_edge_bound_mc,
    price_ticks,
    revenue_utility_identity,
    run_priced_ranking,
    slackness_mc,
    slackness_realization,
    utility_never_drops,
)
from matchlab.ranking import ranking_monte_carlo
from matchlab.rng import uniform_block

ONE_MINUS_INV_E = 1 - math.exp(-1)


def diagonal(n):
    return IntegralMatching({j: j for j in range(1, n + 1)})


def test_two_item_example():
    run = run_priced_ranking(make_monotone_graph(2), [0.1, 0.9])
    assert run.permutation.items == (1, 2)
    assert run.matching.size == 2
    assert run.total_revenue == pytest.approx(math.exp(-0.9) + math.exp(-0.1), abs=1e-15)
    assert run.total_revenue + run.total_utility == 2


def test_prices_are_exact_ticks():
    w = np.linspace(0, 1, 101)
    t = price_ticks(w)
    assert t.min() >= round(TICKS / math.e) and t.max() == TICKS
    assert np.all(np.abs(t / TICKS - np.exp(w - 1)) < 1e-15)


def test_identity_holds_in_every_run():
    r = revenue_utility_identity(make_monotone_graph(12), 20000, 3)
    assert r == {"trials": 20000, "holds": 20000}
    for s in range(50):
        w = uniform_block(4, s, s + 1, 7)[0]
        run = run_priced_ranking(make_monotone_graph(7), w)
        assert run.total_revenue + run.total_utility == run.matching.size


def test_rejects_bad_weights():
    with pytest.raises(ValueError):
        run_priced_ranking(make_monotone_graph(2), [0.5, 1.5])


def test_mean_price():
    mean, err = mean_price_mc(10**6, 0)
    assert abs(mean - ONE_MINUS_INV_E) <= 4 * err
    exact, _ = integrate.quad(lambda w: math.exp(w - 1), 0, 1)
    assert exact == pytest.approx(ONE_MINUS_INV_E, abs=1e-12)


def test_per_edge_monotone():
    g = make_monotone_graph(8)
    rep = per_edge_bound_mc(g, diagonal(8), 100_000, 0)
    assert rep.flagged == ()
    assert all(m >= ONE_MINUS_INV_E - 4 * s for m, s in zip(rep.means, rep.stderrs))
    # linearity: the per-edge means add up to the expected matching size on the same draws
    assert rep.total == pytest.approx(rep.size_mean, abs=1e-9)
    assert rep.size_mean == pytest.approx(ranking_monte_carlo(g, 100_000, 0).mean, abs=1e-9)


def test_per_edge_complete_graph():
    rep = per_edge_bound_mc(make_complete_graph(3), diagonal(3), 5000, 1)
    assert rep.size_mean == 3
    assert rep.total == pytest.approx(3, abs=1e-9)
    assert all(m >= ONE_MINUS_INV_E for m in rep.means)


def test_slackness_realizations():
    for s in range(1000):
        rec = slackness_realization(6, uniform_block(12, s, s + 1, 6)[0])
        assert rec.holds
    one = slackness_realization(1, [0.3])
    assert one.total == one.bound == 1 - Fraction(float(np.exp(0.3 - 1)))


def test_slackness_mc_mean_below_inv_e():
    r = slackness_mc(6, 100_000, 2)
    assert r["holds"] == r["trials"]
    assert 0 <= r["mean_slackness"] <= math.exp(-1) + 4 * r["stderr"]


def test_removal_symmetry_equality():
    est = removal_symmetry_check(6, 3, 100_000, 0)
    assert abs(est.difference) <= 4 * est.stderr
    same = removal_symmetry_check(6, 6, 1000, 0)
    assert same.difference == 0 and same.stderr == 0


def test_removal_symmetry_two_items_against_quadrature():
    # removing either item leaves u_1 with the other, bought at exp(w - 1)
    def removed_v1(w2, w1):
        return 1 - math.exp(w2 - 1)

    def removed_v2(w2, w1):
        return 1 - math.exp(w1 - 1)

    exact_a, _ = integrate.dblquad(removed_v1, 0, 1, 0, 1)
    exact_b, _ = integrate.dblquad(removed_v2, 0, 1, 0, 1)
    est = removal_symmetry_check(2, 1, 100_000, 7)
    assert abs(est.without_vj - exact_a) < 0.005
    assert abs(est.without_vn - exact_b) < 0.005


def test_full_two_item_utility_against_quadrature():
    # u_1 buys the cheaper item on MonotoneG(2)
    exact, _ = integrate.dblquad(lambda w2, w1: 1 - math.exp(min(w1, w2) - 1), 0, 1, 0, 1)
    w = uniform_block(8, 0, 50_000, 2)
    ys = [run_priced_ranking(make_monotone_graph(2), row).utility_of(1) for row in w[:5000]]
    assert abs(float(sum(ys)) / len(ys) - exact) < 0.01


def test_utility_never_drops_and_converse():
    g = make_monotone_graph(6)
    for s in range(300):
        w = uniform_block(21, s, s + 1, 6)[0]
        assert utility_never_drops(g, w, 1 + s % 6)
        assert first_claim_converse(6, w)
