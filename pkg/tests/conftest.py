import networkx as nx
from hypothesis import settings, strategies as st

from onlineramsey.graph import SimpleGraph

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@st.composite
def small_graphs(draw, min_n=0, max_n=8):
    n = draw(st.integers(min_n, max_n))
    pairs = [(u, w) for w in range(n) for u in range(w)]
    chosen = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return SimpleGraph(n, [e for e, keep in zip(pairs, chosen) if keep])


def to_nx(g: SimpleGraph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges())
    return h


def exact_builder_probability(builder, h, p, cap):
    """Exact success probability of a deterministic query builder, by enumerating every outcome line."""
    from fractions import Fraction

    from onlineramsey.game import QueryGameState
    from onlineramsey.graph import has_copy_through_edge

    def replay(line):
        state = QueryGameState(h, p, cap)
        gen = builder.start(state, None)
        move = next(gen)
        for ok in line:
            u, w = state._check_move(move, "oracle")
            state._record(u, w, ok)
            move = gen.send(ok)
        return state, state._check_move(move, "oracle")

    def go(line):
        state, (u, w) = replay(line)
        total = Fraction(0)
        state.first[u] |= 1 << w
        state.first[w] |= 1 << u
        if has_copy_through_edge(h, state.first, u, w):
            total += p
        elif len(line) + 1 < cap:
            total += p * go(line + (True,))
        if len(line) + 1 < cap:
            total += (1 - p) * go(line + (False,))
        return total

    return go(())
