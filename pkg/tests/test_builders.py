import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from onlineramsey.builders import (
    BranchAndFillBuilder,
    BranchAndFillConfig,
    BranchingBuilder,
    BranchingConfig,
    CliqueFillBuilder,
    DirectQueryBuilder,
    NestedHalfGraphBuilder,
    TriangleBuilder,
    alpha,
    bnf_turn_exponent,
    branching_f,
    certify_branching_table,
    choose_ab,
)
from onlineramsey.exact import adversarial_check, ramsey_number
from onlineramsey.game import BLUE_CLIQUE, FOUND, RED_CLIQUE, play_online_ramsey, play_subgraph_query, trial_seed
from onlineramsey.graph import SimpleGraph, contains_clique, count_labeled_clique_copies, make_half_graph_split
from onlineramsey.painters import all_blue_painter, random_painter

K3, K4 = SimpleGraph.complete(3), SimpleGraph.complete(4)


def test_branching_config_defaults_and_budget():
    cfg = BranchingConfig(3, 3)
    assert (cfg.m0, cfg.n0) == (2, 1)
    assert cfg.f(3, 3) == 6
    assert cfg.budget() == 6 * 6 + max(branching_f(2, 3) ** 2, branching_f(3, 1) ** 2) == 45
    assert BranchingConfig(4, 9).n0 == 3


@given(st.integers(2, 12), st.integers(2, 12))
def test_pascal_split_is_exact_at_l1(m, n):
    assert branching_f(m - 1, n) + branching_f(m, n - 1) == branching_f(m, n)


def test_invalid_branching_configs():
    with pytest.raises(ValueError):
        BranchingConfig(1, 3)
    with pytest.raises(ValueError):
        BranchingConfig(3, 3, L=0.5)
    with pytest.raises(ValueError):
        BranchingBuilder(BranchingConfig(3, 3, L=2))


def test_savings_table_certification():
    # with L = 2 the base cases need r(m0, n') <= C(m0+n'-2, m0-1)/2, which r(2, n') = n' violates
    cfg = BranchingConfig(4, 4, L=2)
    with pytest.raises(ValueError):
        certify_branching_table(cfg, lambda a, b: ramsey_number(a, b))
    certify_branching_table(BranchingConfig(4, 4), None)


def test_all_blue_pivot_recurses_into_blue_neighbourhood():
    t = play_online_ramsey(BranchingBuilder(BranchingConfig(3, 4)), all_blue_painter(), 3, 4, 200, 0)
    assert t.outcome == BLUE_CLIQUE
    first = {w for _, u, w, _ in t.records if u == 0}
    second_pivot_moves = [(u, w) for _, u, w, _ in t.records if u == 1]
    assert second_pivot_moves and all(w in first for _, w in second_pivot_moves)
    assert t.notes[0].startswith("pivot 0: 0 red")


@pytest.mark.parametrize("m, n", [(3, 3), (3, 4), (4, 3)])
def test_branching_beats_exhaustive_adversary(m, n):
    b = BranchingBuilder(BranchingConfig(m, n))
    merged = adversarial_check(b, m, n, b.budget())
    assert merged.wins and merged.worst_turns <= b.budget()


def test_adversary_merge_agrees_with_plain_search():
    b = BranchingBuilder(BranchingConfig(3, 4))
    plain = adversarial_check(b, 3, 4, b.budget(), merge=False)
    merged = adversarial_check(b, 3, 4, b.budget(), merge=True)
    assert plain.wins and merged.wins
    assert plain.worst_turns == merged.worst_turns
    assert merged.nodes < plain.nodes


def test_adversary_finds_escape_for_short_cap():
    b = BranchingBuilder(BranchingConfig(3, 3))
    rep = adversarial_check(b, 3, 3, 5)
    assert not rep.wins and rep.losing_line is not None


@pytest.mark.parametrize("p", [0.1, 0.5, 0.9])
def test_branching_wins_against_random_painters(p):
    b = BranchingBuilder(BranchingConfig(3, 4))
    for i in range(200):
        t = play_online_ramsey(b, random_painter(p), 3, 4, b.budget(), trial_seed(4, i), keep_records=False)
        assert t.outcome in (RED_CLIQUE, BLUE_CLIQUE)
        assert t.final_state.turn <= b.budget()


@pytest.mark.parametrize(
    "m, ab", [(4, (0, 3)), (5, (1, 3)), (6, (1, 4)), (7, (1, 5)), (8, (2, 5)), (9, (2, 6))]
)
def test_choose_ab(m, ab):
    assert choose_ab(m) == ab
    a, b = ab
    assert a + b + 1 == m and 2 * a + 3 - b >= 0


def test_choose_ab_rejects_small_m():
    with pytest.raises(ValueError):
        choose_ab(3)


@pytest.mark.parametrize("a, b, expected", [(1, 3, Fraction(1)), (0, 3, Fraction(0)), (1, 4, Fraction(2, 3))])
def test_alpha_values(a, b, expected):
    assert alpha(a, b) == expected


@pytest.mark.parametrize("a, b", [(0, 1), (0, 4)])
def test_alpha_preconditions(a, b):
    with pytest.raises(ValueError):
        alpha(a, b)


@pytest.mark.parametrize("a, b, expected", [(1, 3, Fraction(-8, 3)), (0, 3, Fraction(-2)), (1, 4, Fraction(-10, 3))])
def test_turn_exponents(a, b, expected):
    assert bnf_turn_exponent(a, b) == expected


@given(st.integers(4, 40))
def test_alpha_in_unit_interval(m):
    a, b = choose_ab(m)
    assert 0 <= alpha(a, b) <= 1


def test_bnf_config():
    cfg = BranchAndFillConfig(5, c_T=2.0)
    assert (cfg.a, cfg.b) == (1, 3)
    p = 0.3
    assert math.isclose(cfg.T(p), 2.0 * p ** (-8 / 3))
    assert cfg.w_size(p) == math.ceil(p * cfg.T(p))
    assert cfg.rounds(p) == math.ceil(1 / p)
    with pytest.raises(ValueError):
        BranchAndFillConfig(5, a=1, b=2)
    with pytest.raises(ValueError):
        BranchAndFillConfig(5, c_T=0)


def test_bnf_a_zero_uses_fresh_vertices_for_w():
    # with p near 1 every query succeeds: W is five fresh vertices, the first
    # round probes from vertex 0 and the fill closes K4 on its third edge
    cfg = BranchAndFillConfig(4, c_T=4.0)
    assert cfg.w_size(0.999) == 5 and cfg.rounds(0.999) == 1
    t = play_subgraph_query(BranchAndFillBuilder(cfg, 0.999), K4, 0.999, 100, 0)
    assert t.outcome == FOUND
    assert [r[1:3] for r in t.records] == [(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (2, 3)]


@pytest.mark.parametrize("m, p", [(4, 0.4), (5, 0.6), (6, 0.7)])
def test_bnf_finds_real_cliques(m, p):
    h = SimpleGraph.complete(m)
    b = BranchAndFillBuilder(BranchAndFillConfig(m, c_T=2.0, restarts=None), p)
    for i in range(20):
        t = play_subgraph_query(b, h, p, 100_000, trial_seed(8, i))
        assert t.outcome == FOUND
        assert contains_clique(t.final_state.built_graph(), m)


def test_bnf_restarts_are_bounded():
    b = BranchAndFillBuilder(BranchAndFillConfig(4, c_T=0.1, restarts=2), 0.2)
    t = play_subgraph_query(b, K4, 0.2, 100_000, 0)
    fails = [n for n in t.notes if "failed" in n]
    assert len(fails) <= 3
    if t.outcome != FOUND:
        assert len(fails) == 3


def test_bnf_success_rises_with_p():
    N = 60
    rates = []
    for p in (0.2, 0.3, 0.4, 0.5):
        b = BranchAndFillBuilder(BranchAndFillConfig(4, c_T=3.0, restarts=None), p)
        hits = sum(play_subgraph_query(b, K4, p, N, trial_seed(2, i), keep_records=False).outcome == FOUND for i in range(1000))
        rates.append(hits / 1000)
    # allow sampling noise of about three standard errors between neighbours
    assert all(b >= a - 0.05 for a, b in zip(rates, rates[1:]))
    assert rates[-1] > rates[0]


def test_triangle_builder_star_size_and_eager_fill():
    b = TriangleBuilder(0.25, c_T=1.0)
    assert b.star_size == 8
    t = play_subgraph_query(b, K3, 0.999, 10, 0)
    assert [r[1:3] for r in t.records] == [(0, 1), (0, 2), (1, 2)]
    lazy = TriangleBuilder(0.999, c_T=3.0, eager=False)
    t = play_subgraph_query(lazy, K3, 0.999, 100, 0)
    assert lazy.star_size == 4
    assert t.outcome == FOUND and t.records[4][1:3] == (1, 2)


def test_direct_query_builder_finds_k2_first_success():
    t = play_subgraph_query(DirectQueryBuilder(), SimpleGraph.complete(2), 0.5, 100, 3)
    assert t.outcome == FOUND and t.records[-1][3] == "S"


def test_clique_fill_builds_everything():
    t = play_subgraph_query(CliqueFillBuilder(3), K3, 0.999, 3, 0)
    assert t.outcome == FOUND and len(t.records) == 3
    v = math.isqrt(2 * 5000)
    t = play_subgraph_query(CliqueFillBuilder(v), None, 0.5, 5000, 0, stop_at_target=False, keep_records=False)
    assert t.final_state.turn == math.comb(v, 2) <= 5000


def test_clique_fill_mean_triangle_count():
    v, p, trials = 30, 0.5, 150
    counts = []
    for i in range(trials):
        t = play_subgraph_query(CliqueFillBuilder(v), None, p, 1000, trial_seed(1, i), stop_at_target=False, keep_records=False)
        counts.append(count_labeled_clique_copies(3, t.final_state.built_graph()))
    expected = math.comb(v, 3) * 6 * p**3
    se = np.std(counts, ddof=1) / math.sqrt(trials)
    assert abs(np.mean(counts) - expected) <= 3 * se


def test_halfgraph_stages_and_budget():
    N = 2000
    b = NestedHalfGraphBuilder(2, N)
    t = play_subgraph_query(b, None, 0.3, N, 1, stop_at_target=False)
    assert t.final_state.turn <= N
    assert t.notes[0].startswith("stage 1: 1 probes")
    again = play_subgraph_query(b, None, 0.3, N, 1, stop_at_target=False)
    assert again.notes == t.notes


def test_halfgraph_k1_is_a_star():
    N = 100
    t = play_subgraph_query(NestedHalfGraphBuilder(1, N), make_half_graph_split(1).graph, 0.5, N, 0, stop_at_target=False)
    assert all(u == 0 for _, u, _, _ in t.records)
    assert len(t.records) == N - 1


def test_halfgraph_aborts_on_small_sets():
    t = play_subgraph_query(NestedHalfGraphBuilder(3, 400), None, 0.05, 400, 0, stop_at_target=False)
    assert any("aborted" in n for n in t.notes)


def test_budget_accounting():
    for m, n in [(3, 3), (3, 4), (4, 4)]:
        b = BranchingBuilder(BranchingConfig(m, n))
        for i in range(50):
            t = play_online_ramsey(b, random_painter(0.5), m, n, 10**6, trial_seed(5, i), keep_records=False)
            assert t.final_state.turn <= b.budget()
