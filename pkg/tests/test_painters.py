import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from onlineramsey.builders import RandomBuilder, RedGreedyBuilder, SequenceBuilder, TriangleHunter
from onlineramsey.game import play_online_ramsey, trial_seed
from onlineramsey.graph import SimpleGraph, contains_clique
from onlineramsey.painters import (
    AlterationPainter,
    AlterationPainterConfig,
    LabelOverflow,
    TurnLimitExceeded,
    alteration_painter,
    default_label_pool,
    default_red_probability,
    random_painter,
    red_triangle_free,
    sample_hidden_graph,
)

NEAR_ONE = 1 - 1e-12


def play(pairs, painter, cap=None):
    cap = cap or len(pairs)
    return play_online_ramsey(SequenceBuilder(pairs), painter, None, None, cap, 0).final_state


def test_random_painter_near_one_is_all_red():
    pool = 46
    state = play([(u, w) for w in range(pool) for u in range(w)][:1000], random_painter(1 - 1e-9))
    assert sum(r.bit_count() for r in state.red) // 2 == 1000


def test_random_painter_frequency():
    b = RandomBuilder(460)
    t = play_online_ramsey(b, random_painter(0.5), None, None, 100_000, 1, keep_records=False)
    red = sum(r.bit_count() for r in t.final_state.red) // 2
    assert abs(red / 100_000 - 0.5) < 0.01


def test_random_painter_rejects_bad_p():
    for p in (0.0, 1.0, -1):
        with pytest.raises(ValueError):
            random_painter(p)


def test_random_painter_colour_independent_of_pair():
    # same pair order every game; red counts per position should look binomial
    pairs = [(u, w) for w in range(11) for u in range(w)][:50]
    counts = np.zeros(50)
    games = 2000
    for g in range(games):
        t = play_online_ramsey(SequenceBuilder(pairs), random_painter(0.5), None, None, 50, trial_seed(3, g))
        counts += np.array([r[3] == "R" for r in t.records])
    table = np.stack([counts, games - counts])
    assert stats.chi2_contingency(table)[1] > 1e-3


def test_defaults():
    assert default_red_probability(20) == 0.5
    assert math.isclose(default_red_probability(10**6), 20 * math.log(10**6) / 10**6)
    assert default_label_pool(50) == 1
    cfg = AlterationPainterConfig(21)
    assert cfg.activation_threshold == 5 and cfg.r == 1 and 0 < cfg.p < 1
    assert cfg.turn_limit == 20 * 1 // 8


@pytest.mark.parametrize(
    "kw",
    [{"n": 1}, {"n": 10, "p": 1.0}, {"n": 10, "r": 0}, {"n": 10, "activation_threshold": 0.5}, {"n": 10, "formulation": "other"}],
)
def test_config_validation(kw):
    with pytest.raises(ValueError):
        AlterationPainterConfig(**kw)


def test_hidden_graph_shape():
    rows = sample_hidden_graph(30, 0.3, np.random.default_rng(0))
    g = SimpleGraph.from_rows(rows)
    assert g.n == 30 and all(not (rows[v] >> v & 1) for v in range(30))
    big = sample_hidden_graph(2100, 0.001, np.random.default_rng(0))
    assert len(big) == 2100


def test_edge_to_new_vertex_is_blue():
    painter = AlterationPainter(AlterationPainterConfig(20, p=NEAR_ONE, r=10))
    state = play([(0, 1)], painter)
    assert state.color(0, 1) == "B"
    assert painter.last_view.inactive_edges == 1


def test_common_red_neighbour_forces_blue():
    painter = AlterationPainter(AlterationPainterConfig(5, p=NEAR_ONE, r=10, activation_threshold=1))
    state = play([(0, 2), (1, 2), (0, 1)], painter)
    assert state.color(0, 2) == "R" and state.color(1, 2) == "R"
    assert state.color(0, 1) == "B"
    assert painter.last_view.altered_edges == 1


def test_inactive_edge_stays_blue_after_activation():
    painter = AlterationPainter(AlterationPainterConfig(9, p=NEAR_ONE, r=10, activation_threshold=2))
    state = play([(0, 1), (0, 2), (1, 3), (0, 3)], painter)
    view = painter.last_view
    # (0, 1) was built with both endpoints at degree 1
    assert state.color(0, 1) == "B"
    assert {0, 1, 3} <= view.active
    assert state.color(0, 3) == "R"
    assert state.color(0, 1) == "B"


def test_labels_follow_activation_order_with_vertex_tiebreak():
    painter = AlterationPainter(AlterationPainterConfig(5, p=0.5, r=10, activation_threshold=1))
    play([(3, 1), (0, 2)], painter)
    assert painter.last_view.labels == {1: 0, 3: 1, 0: 2, 2: 3}


def test_red_iff_hidden_adjacency():
    cfg = AlterationPainterConfig(5, p=0.5, r=6, activation_threshold=1, hidden_seed=11)
    painter = AlterationPainter(cfg, record_pairs=True)
    pairs = [(2 * i, 2 * i + 1) for i in range(3)]  # a matching: never altered
    state = play(pairs, painter)
    view = painter.last_view
    hidden = view.hidden_graph()
    for u, w in pairs:
        i, j = view.labels[u], view.labels[w]
        assert (state.color(u, w) == "R") == hidden.has_edge(i, j)
    assert len(view.pair_queries) == 3


def test_label_overflow_is_reported():
    painter = AlterationPainter(AlterationPainterConfig(5, p=0.5, r=2, activation_threshold=1, turn_limit=100))
    with pytest.raises(LabelOverflow, match="r=2"):
        play([(0, 1), (2, 3)], painter)


def test_turn_limit_is_enforced():
    painter = AlterationPainter(AlterationPainterConfig(9, p=0.5, r=4))
    assert painter.cfg.turn_limit == 4
    with pytest.raises(TurnLimitExceeded):
        play([(0, i) for i in range(1, 7)], painter)


def test_seeded_hidden_graph_is_shared_across_games():
    cfg = AlterationPainterConfig(5, p=0.5, r=8, activation_threshold=1)
    painter = alteration_painter(cfg, seed=7)
    play([(0, 1)], painter)
    first = painter.last_view.hidden_rows
    play_online_ramsey(SequenceBuilder([(0, 1)]), painter, None, None, 1, 99)
    assert painter.last_view.hidden_rows == first


@given(
    st.integers(0, 2**32),
    st.sampled_from([(20, 5, 8), (20, 40, 16), (50, 40, 24)]),
    st.sampled_from(["random", "hunter", "greedy"]),
    st.sampled_from(["hidden", "lazy"]),
)
def test_red_graph_is_always_triangle_free(seed, shape, kind, form):
    n, r, pool = shape
    builder = {"random": RandomBuilder, "hunter": TriangleHunter, "greedy": RedGreedyBuilder}[kind](pool)
    cfg = AlterationPainterConfig(n, r=r, formulation=form)
    painter = AlterationPainter(cfg)
    t = play_online_ramsey(builder, painter, None, None, cfg.turn_limit, seed, keep_records=False)
    assert red_triangle_free(t.final_state.red)
    assert not contains_clique(t.final_state.red_graph(), 3)


def test_red_triangle_free_detects_triangles():
    assert not red_triangle_free(SimpleGraph.complete(3).rows)
    assert red_triangle_free(SimpleGraph.cycle(5).rows)


def test_hidden_and_lazy_formulations_agree_in_distribution():
    # complete graph on 6 vertices, threshold 1: every pair is active; altered
    # edges depend on earlier colours, so compare per-pair red frequencies
    pairs = [(u, w) for w in range(6) for u in range(w)]
    games = 10_000
    freq = {}
    for form in ("hidden", "lazy"):
        cfg = AlterationPainterConfig(6, p=0.4, r=6, activation_threshold=1, formulation=form, turn_limit=100)
        painter = AlterationPainter(cfg)
        counts = np.zeros(len(pairs))
        for g in range(games):
            t = play_online_ramsey(SequenceBuilder(pairs), painter, None, None, len(pairs), trial_seed(g, 1 if form == "hidden" else 2))
            counts += np.array([r[3] == "R" for r in t.records])
        freq[form] = counts
    table = np.stack([freq["hidden"], freq["lazy"]])
    a, b = table / games
    se = np.sqrt((a * (1 - a) + b * (1 - b)) / games)
    z = np.abs(a - b) / np.where(se > 0, se, 1)
    assert z.max() < 4.5
