import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matchlab.balance import (
    averaging_process,
    balance_monotone_closed_form,
    meets_round_assumptions,
    monotone_round_credit,
    run_balance,
    strip_backward_edges,
    water_fill,
)
from matchlab.graph import (
    BipartiteGraph,
    GraphError,
    make_monotone_graph,
    random_diagonal_graph,
    random_forward_graph,
    validate_fractional,
)
from matchlab.rng import ScalarStream

ONE_MINUS_INV_E = 1 - math.exp(-1)
HALF_MINUS_HALF_INV_E = 0.5 - 0.5 * math.exp(-1)


def harmonic(n):
    return sum((Fraction(1, k) for k in range(1, n + 1)), Fraction(0))


def test_two_vertex_monotone():
    f, steps = run_balance(make_monotone_graph(2))
    assert steps[0].raised == ((1, Fraction(1, 2)), (2, Fraction(1, 2)))
    assert steps[1].raised == ((2, Fraction(1, 2)),)
    assert f.loads_offline == (Fraction(1, 2), Fraction(1))
    assert f.size == Fraction(3, 2)


def test_six_vertex_monotone():
    f, _ = run_balance(make_monotone_graph(6))
    assert f.size == Fraction(41, 10)
    assert balance_monotone_closed_form(6) == (4, Fraction(41, 10))
    assert balance_monotone_closed_form(2) == (1, Fraction(3, 2))


def test_single_arrival_splits_evenly():
    t, raised = water_fill([Fraction(0)] * 3, (1, 2), Fraction(1), True)
    assert t == Fraction(1, 2)
    assert raised == ((1, Fraction(1, 2)), (2, Fraction(1, 2)))


def test_full_neighbors_get_nothing():
    g = BipartiteGraph(3, ((1,), (1,), (1, 2)))
    f, steps = run_balance(g)
    assert steps[1].threshold is None and steps[1].budget == 0
    assert f.size == 2


@pytest.mark.parametrize("n", list(range(1, 31)) + [64])
def test_closed_form_matches_exact_run(n):
    f, _ = run_balance(make_monotone_graph(n), exact=True)
    k, size = balance_monotone_closed_form(n, exact=True)
    assert f.size == size
    # k is the largest k with H_n - H_{n-k} <= 1
    assert harmonic(n) - harmonic(n - k) <= 1
    assert k == n or harmonic(n) - harmonic(n - k - 1) > 1


def test_float_mode_agrees():
    for n in (10, 65, 300):
        f, _ = run_balance(make_monotone_graph(n), exact=False)
        assert abs(f.size - balance_monotone_closed_form(n, exact=False)[1]) < 1e-9
    assert abs(balance_monotone_closed_form(40, exact=False)[1] - float(balance_monotone_closed_form(40)[1])) < 1e-12


def test_large_n_offset():
    devs = []
    for n in (10**3, 10**4, 10**5):
        _, size = balance_monotone_closed_form(n)
        devs.append(size - ONE_MINUS_INV_E * n - HALF_MINUS_HALF_INV_E)
    assert 0.30 <= balance_monotone_closed_form(10**4)[1] - ONE_MINUS_INV_E * 10**4 <= 0.33
    assert all(abs(d) < 0.02 for d in devs)
    assert abs(devs[0]) > abs(devs[1]) > abs(devs[2])


def test_output_is_valid():
    g = make_monotone_graph(5)
    f, _ = run_balance(g)
    assert validate_fractional(g, f) == []
    assert sum(f.weights.values()) == sum(f.loads_offline) == sum(f.loads_online) == f.size


@given(st.integers(1, 7).flatmap(lambda n: st.lists(st.sets(st.integers(1, n)), min_size=n, max_size=n)))
@settings(max_examples=200, deadline=None)
def test_water_filling_invariants(sets):
    g = BipartiteGraph(len(sets), tuple(tuple(s) for s in sets))
    f, steps = run_balance(g)
    assert validate_fractional(g, f) == []
    loads = {i: Fraction(0) for i in range(1, g.n + 1)}
    for step, nbrs in zip(steps, g.adjacency):
        free = sum(1 - loads[i] for i in nbrs)
        spent = sum((w for _, w in step.raised), Fraction(0))
        assert spent == min(1, free)
        for i, w in step.raised:
            loads[i] += w
            assert loads[i] == step.threshold
        if step.threshold is not None:
            # untouched neighbors already sat at or above the new level
            assert all(loads[i] >= step.threshold for i in nbrs)


def test_strip_backward_edges():
    g = make_monotone_graph(4)
    assert strip_backward_edges(g) == g
    h = BipartiteGraph(3, ((1, 2, 3), (2, 3), (1, 3)))
    assert strip_backward_edges(h) == make_monotone_graph(3)
    with pytest.raises(GraphError):
        strip_backward_edges(BipartiteGraph(2, ((2,), (1,))))


def test_stripping_never_increases_balance():
    for s in range(1000):
        g = random_diagonal_graph(8, ScalarStream(77, s))
        assert run_balance(strip_backward_edges(g))[0].size <= run_balance(g)[0].size


@pytest.mark.parametrize("n", range(1, 21))
def test_averaging_equals_balance_on_monotone(n):
    tr = averaging_process(make_monotone_graph(n))
    assert all(s == 0 for s in tr.slackness)
    assert tr.total == tr.balance_size == run_balance(make_monotone_graph(n))[0].size


def test_averaging_round_credit_on_monotone():
    n = 5
    tr = averaging_process(make_monotone_graph(n))
    for i in range(1, tr.stop_round):
        assert tr.credited[i - 1] == monotone_round_credit(n, i)
        assert tr.credited[i - 1] == sum(Fraction(1, n - k + 1) for k in range(1, i + 1))


def test_averaging_lower_bounds_balance():
    for s in range(300):
        g = random_forward_graph(8, ScalarStream(5, s))
        tr = averaging_process(g)
        assert tr.total <= tr.balance_size


def test_round_assumptions_give_monotone_credit():
    mono = averaging_process(make_monotone_graph(8))
    seen = 0
    for s in range(300):
        g = random_forward_graph(8, ScalarStream(6, s))
        tr = averaging_process(g)
        if meets_round_assumptions(g, tr):
            seen += 1
            assert tr.total >= mono.total
    assert seen > 0


def test_averaging_rejects_unstripped_graph():
    with pytest.raises(GraphError):
        averaging_process(BipartiteGraph(2, ((1,), (1, 2))))
    with pytest.raises(GraphError):
        averaging_process(BipartiteGraph(2, ((2,), (2,))))
