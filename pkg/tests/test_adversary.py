import pytest

from matchlab.adversary import (
    builtin_algorithms,
    lowest_index,
    replay_matches,
    run_adaptive_adversary,
    skip_first,
)
from matchlab.graph import GraphError, max_matching_size


def test_two_vertex_transcript():
    t = run_adaptive_adversary(lowest_index, 2)
    assert t.revealed == ((1, 2), (1,))
    assert t.matching.pairs == {1: 1}
    assert t.size == 1 and t.max_matching == 2
    assert t.certificate.pairs == {1: 2, 2: 1}


@pytest.mark.parametrize("n", [2, 4, 6, 10, 100])
@pytest.mark.parametrize("name", ["lowest", "highest", "lowest-degree-seen", "ranking-fixed-pi"])
def test_every_greedy_algorithm_is_held_to_half(n, name):
    alg = builtin_algorithms(n, seed=3)[name]
    t = run_adaptive_adversary(alg, n)
    assert t.size == n // 2
    assert t.max_matching == n == max_matching_size(t.graph)
    assert t.non_greedy_steps == ()
    assert replay_matches(t, alg)


def test_non_greedy_algorithm_is_flagged():
    t = run_adaptive_adversary(skip_first, 2)
    assert t.non_greedy_steps == (1,)
    assert t.size <= 1


def test_padding_when_first_half_skips():
    t = run_adaptive_adversary(skip_first, 6)
    assert 1 in t.non_greedy_steps
    assert t.max_matching == 6
    assert t.size <= 3


def test_cheating_algorithm_is_rejected():
    with pytest.raises(GraphError):
        run_adaptive_adversary(lambda history, nbrs, exposed: 99, 2)


def test_replay_detects_a_different_algorithm():
    t = run_adaptive_adversary(lowest_index, 6)
    assert not replay_matches(t, builtin_algorithms(6)["highest"])


@pytest.mark.parametrize("n", [0, 3])
def test_odd_or_empty_rejected(n):
    with pytest.raises(GraphError):
        run_adaptive_adversary(lowest_index, n)


def test_transcript_serialises():
    d = run_adaptive_adversary(lowest_index, 4).to_dict()
    assert d["matching_size"] == 2 and d["max_matching_size"] == 4
    assert d["graph"]["n"] == 4
