"""Small-graph primitives on integer bitsets.

Adjacency rows are Python ints: bit ``w`` of ``rows[v]`` is set iff ``v ~ w``.
Everything here is exact; the exhaustive routines carry explicit size caps.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Iterable, Sequence

import numpy as np

VERTEX_COVER_CAP = 24
JUMBLED_CAP = 20
SUBGRAPH_PATTERN_CAP = 8


def bits(mask: int):
    """Yield the indices of set bits in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class SimpleGraph:
    """Immutable simple undirected graph on vertices ``0..n-1``."""

    __slots__ = ("n", "rows")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        if n < 0:
            raise ValueError("vertex count must be nonnegative")
        rows = [0] * n
        for u, w in edges:
            if u == w:
                raise ValueError(f"self-loop at {u}")
            if not (0 <= u < n and 0 <= w < n):
                raise ValueError(f"edge ({u}, {w}) out of range for n={n}")
            rows[u] |= 1 << w
            rows[w] |= 1 << u
        self.n = n
        self.rows = tuple(rows)

    @classmethod
    def from_rows(cls, rows: Sequence[int]) -> "SimpleGraph":
        g = cls.__new__(cls)
        g.n = len(rows)
        g.rows = tuple(rows)
        for v, r in enumerate(g.rows):
            if r >> v & 1:
                raise ValueError(f"self-loop at {v}")
            if r >> g.n:
                raise ValueError("neighbor index out of range")
            for w in bits(r):
                if not g.rows[w] >> v & 1:
                    raise ValueError("adjacency is not symmetric")
        return g

    @classmethod
    def complete(cls, n: int) -> "SimpleGraph":
        return cls(n, combinations(range(n), 2))

    @classmethod
    def cycle(cls, n: int) -> "SimpleGraph":
        return cls(n, [(i, (i + 1) % n) for i in range(n)])

    @classmethod
    def star(cls, leaves: int) -> "SimpleGraph":
        return cls(leaves + 1, [(0, i) for i in range(1, leaves + 1)])

    @property
    def vertex_count(self) -> int:
        return self.n

    def edges(self) -> list[tuple[int, int]]:
        return [(u, w) for u in range(self.n) for w in bits(self.rows[u] >> (u + 1) << (u + 1))]

    def edge_count(self) -> int:
        return sum(r.bit_count() for r in self.rows) // 2

    def has_edge(self, u: int, w: int) -> bool:
        return bool(self.rows[u] >> w & 1)

    def degree(self, v: int) -> int:
        return self.rows[v].bit_count()

    def induced(self, vertices: Sequence[int]) -> "SimpleGraph":
        index = {v: i for i, v in enumerate(vertices)}
        edges = [(index[u], index[w]) for u, w in combinations(vertices, 2) if self.rows[u] >> w & 1]
        return SimpleGraph(len(vertices), edges)

    def __eq__(self, other):
        return isinstance(other, SimpleGraph) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return f"SimpleGraph(n={self.n}, edges={self.edges()})"


@dataclass(frozen=True)
class HalfGraphSplit:
    """H_k: clique a_1..a_k, independent b_1..b_k, a_i ~ b_j iff i <= j.

    Vertex ``a_i`` is index ``i - 1`` and ``b_j`` is index ``k + j - 1``.
    """

    k: int
    graph: SimpleGraph

    def a(self, i: int) -> int:
        return i - 1

    def b(self, j: int) -> int:
        return self.k + j - 1


@dataclass(frozen=True)
class DegeneracyResult:
    ordering: tuple[int, ...]
    max_back_degree: int
    back_degrees: tuple[int, ...]  # indexed by vertex


def make_half_graph_split(k: int) -> HalfGraphSplit:
    if k < 1:
        raise ValueError("k must be positive")
    edges = list(combinations(range(k), 2))
    edges += [(i, k + j) for i in range(k) for j in range(i, k)]
    return HalfGraphSplit(k, SimpleGraph(2 * k, edges))


def max_matching_size(g: SimpleGraph) -> int:
    """Size of a maximum matching.

    Exact branching on the lowest non-isolated vertex, memoised on the set of
    remaining vertices. Graphs above 40 vertices go to networkx's blossom.
    """
    if g.n > 40:
        import networkx as nx

        return len(nx.max_weight_matching(_to_networkx(g), maxcardinality=True))
    rows = g.rows

    @lru_cache(maxsize=None)
    def best(alive: int) -> int:
        for v in bits(alive):
            nb = rows[v] & alive
            if nb:
                rest = alive & ~(1 << v)
                res = best(rest)
                for w in bits(nb):
                    res = max(res, 1 + best(rest & ~(1 << w)))
                return res
            alive &= ~(1 << v)
        return 0

    return best((1 << g.n) - 1)


def _to_networkx(g: SimpleGraph):
    import networkx as nx

    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges())
    return h


def min_vertex_cover_size(g: SimpleGraph) -> int:
    if g.n > VERTEX_COVER_CAP:
        raise ValueError(f"minimum vertex cover is exhaustive; n={g.n} exceeds cap {VERTEX_COVER_CAP}")
    return cover_size_of_rows(g.rows, (1 << g.n) - 1)


def cover_size_of_rows(rows: Sequence[int], alive: int) -> int:
    """Minimum vertex cover of the subgraph induced on ``alive``."""
    best = [alive.bit_count()]

    def go(alive: int, used: int):
        if used >= best[0]:
            return
        pick, pick_deg = -1, 0
        edges2 = 0
        for v in bits(alive):
            d = (rows[v] & alive).bit_count()
            edges2 += d
            if d > pick_deg:
                pick, pick_deg = v, d
        if pick_deg == 0:
            best[0] = used
            return
        # every cover needs at least edges / max_degree vertices
        if used + -(-edges2 // (2 * pick_deg)) >= best[0]:
            return
        nb = rows[pick] & alive
        go(alive & ~(1 << pick), used + 1)
        go(alive & ~nb & ~(1 << pick), used + nb.bit_count())

    go(alive, 0)
    return best[0]


def _has_clique(rows: Sequence[int], cand: int, k: int) -> bool:
    if k <= 0:
        return True
    if cand.bit_count() < k:
        return False
    if k == 1:
        return True
    while cand:
        if cand.bit_count() < k:
            return False
        low = cand & -cand
        v = low.bit_length() - 1
        cand ^= low
        if _has_clique(rows, cand & rows[v], k - 1):
            return True
    return False


def has_clique_in(rows: Sequence[int], cand: int, k: int) -> bool:
    return _has_clique(rows, cand, k)


def contains_clique(g: SimpleGraph, m: int) -> bool:
    if m < 1:
        raise ValueError("m must be positive")
    return _has_clique(g.rows, (1 << g.n) - 1, m)


def find_clique_in(rows: Sequence[int], cand: int, k: int) -> list[int] | None:
    """Some k-clique inside ``cand`` (lowest-index first), or None."""
    if k == 0:
        return []
    while cand and cand.bit_count() >= k:
        low = cand & -cand
        v = low.bit_length() - 1
        cand ^= low
        rest = find_clique_in(rows, cand & rows[v], k - 1)
        if rest is not None:
            return [v] + rest
    return None


def _count_cliques(rows: Sequence[int], cand: int, k: int) -> int:
    if k == 1:
        return cand.bit_count()
    total = 0
    while cand:
        if cand.bit_count() < k:
            break
        low = cand & -cand
        v = low.bit_length() - 1
        cand ^= low
        total += _count_cliques(rows, cand & rows[v], k - 1)
    return total


def count_cliques_in_rows(rows: Sequence[int], m: int, universe: int | None = None) -> int:
    """Unlabeled m-clique count."""
    if universe is None:
        universe = 0
        for v, r in enumerate(rows):
            if r:
                universe |= 1 << v
    if m == 1:
        return universe.bit_count()
    return _count_cliques(rows, universe, m)


def count_labeled_clique_copies(m: int, g: SimpleGraph) -> int:
    """Injective vertex-ordered embeddings of K_m into g."""
    if m < 2:
        raise ValueError("m must be at least 2")
    return count_cliques_in_rows(g.rows, m, (1 << g.n) - 1) * _factorial(m)


def _factorial(m: int) -> int:
    out = 1
    for i in range(2, m + 1):
        out *= i
    return out


def _embedding_order(h: SimpleGraph) -> list[int]:
    order: list[int] = []
    left = set(range(h.n))
    while left:
        placed = 0
        for v in order:
            placed |= 1 << v
        v = max(left, key=lambda x: ((h.rows[x] & placed).bit_count(), h.degree(x), -x))
        order.append(v)
        left.remove(v)
    return order


def count_labeled_copies_in_rows(h: SimpleGraph, rows: Sequence[int], universe: int) -> int:
    """Injective embeddings of h into the graph given by ``rows`` on ``universe``."""
    if h.n == 0:
        return 1
    order = _embedding_order(h)
    pos = {v: i for i, v in enumerate(order)}
    # for each step: earlier positions that must be adjacent
    back = [[pos[w] for w in bits(h.rows[v]) if pos[w] < i] for i, v in enumerate(order)]
    last = len(order) - 1
    image = [0] * len(order)

    def go(i: int, used: int) -> int:
        cand = universe & ~used
        for j in back[i]:
            cand &= rows[image[j]]
        if i == last:
            return cand.bit_count()
        total = 0
        for x in bits(cand):
            image[i] = x
            total += go(i + 1, used | (1 << x))
        return total

    return go(0, 0)


def count_labeled_subgraph_copies(h: SimpleGraph, g: SimpleGraph) -> int:
    if h.n > SUBGRAPH_PATTERN_CAP:
        raise ValueError(f"pattern has {h.n} vertices; cap is {SUBGRAPH_PATTERN_CAP}")
    return count_labeled_copies_in_rows(h, g.rows, (1 << g.n) - 1)


def has_copy_through_edge(h: SimpleGraph, rows: Sequence[int], u: int, w: int) -> bool:
    """Whether some copy of h in ``rows`` uses the edge (u, w)."""
    n = h.n
    # any such copy maps some edge of h onto (u, w); anchor each edge in turn
    for x, y in h.edges():
        order = _anchored_order(h, x, y)
        pos = {v: i for i, v in enumerate(order)}
        back = [[pos[z] for z in bits(h.rows[v]) if pos[z] < i] for i, v in enumerate(order)]
        for s, t in ((u, w), (w, u)):
            image = [0] * n
            image[0], image[1] = s, t
            if _extend(back, rows, image, 2, (1 << s) | (1 << t), n, len(rows)):
                return True
    return False


def _anchored_order(h: SimpleGraph, x: int, y: int) -> list[int]:
    order = [x, y]
    left = set(range(h.n)) - {x, y}
    while left:
        placed = 0
        for v in order:
            placed |= 1 << v
        v = max(left, key=lambda z: ((h.rows[z] & placed).bit_count(), h.degree(z), -z))
        order.append(v)
        left.remove(v)
    return order


def _extend(back, rows, image, i, used, n, size) -> bool:
    if i == n:
        return True
    if back[i]:
        cand = rows[image[back[i][0]]] & ~used
        for j in back[i][1:]:
            cand &= rows[image[j]]
    else:
        cand = ((1 << size) - 1) & ~used
    for x in bits(cand):
        image[i] = x
        if _extend(back, rows, image, i + 1, used | (1 << x), n, size):
            return True
    return False


def degeneracy_peel(g: SimpleGraph) -> DegeneracyResult:
    """Order vertices by repeatedly deleting a minimum-degree vertex.

    The deleted vertex goes to the back of the ordering, so its back-degree is
    its degree at deletion time.
    """
    alive = (1 << g.n) - 1
    rows = g.rows
    back = [0] * g.n
    removed: list[int] = []
    deg = [r.bit_count() for r in rows]
    for _ in range(g.n):
        v = min(bits(alive), key=lambda x: (deg[x], x))
        back[v] = deg[v]
        removed.append(v)
        alive &= ~(1 << v)
        for w in bits(rows[v] & alive):
            deg[w] -= 1
    ordering = tuple(reversed(removed))
    return DegeneracyResult(ordering, max(back, default=0), tuple(back))


@dataclass(frozen=True)
class JumbledVerdict:
    holds: bool
    authoritative: bool
    subsets_checked: int
    witness: tuple[int, ...] | None = None  # a violating vertex set, if found

    def __bool__(self):
        return self.holds


def is_jumbled(
    g: SimpleGraph,
    p: float,
    M: int,
    eps: float,
    *,
    samples: int | None = None,
    rng: np.random.Generator | None = None,
) -> JumbledVerdict:
    """Check that every induced subgraph on >= M vertices has (1 +/- eps) p C(|U|,2) edges.

    Exhaustive up to ``JUMBLED_CAP`` vertices. Larger graphs need ``samples``;
    the sampled verdict is marked non-authoritative.
    """
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    if M < 1 or eps <= 0:
        raise ValueError("M must be positive and eps positive")
    n = g.n
    if n <= JUMBLED_CAP and samples is None:
        return _jumbled_exhaustive(g, p, M, eps)
    if samples is None:
        raise ValueError(f"exhaustive jumbledness check capped at {JUMBLED_CAP} vertices; pass samples=")
    rng = rng or np.random.default_rng(0)
    if M > n:
        return JumbledVerdict(True, False, 0)
    for _ in range(samples):
        size = int(rng.integers(M, n + 1))
        U = sorted(rng.choice(n, size=size, replace=False).tolist())
        mask = 0
        for v in U:
            mask |= 1 << v
        e = sum((g.rows[v] & mask).bit_count() for v in U) // 2
        target = p * comb(size, 2)
        if abs(e - target) > eps * target + 1e-9:
            return JumbledVerdict(False, False, samples, tuple(U))
    return JumbledVerdict(True, False, samples)


def _jumbled_exhaustive(g: SimpleGraph, p: float, M: int, eps: float) -> JumbledVerdict:
    n = g.n
    if M > n:
        return JumbledVerdict(True, True, 0)
    size = 1 << n
    popcount = np.zeros(size, dtype=np.int64)
    edges = np.zeros(size, dtype=np.int64)
    for i in range(n):
        lo = 1 << i
        block = np.arange(lo)
        popcount[lo : 2 * lo] = popcount[:lo] + 1
        # edges gained by adding vertex i to each subset of {0..i-1}
        gain = popcount[block & (g.rows[i] & (lo - 1))]
        edges[lo : 2 * lo] = edges[:lo] + gain
    sizes = popcount
    keep = sizes >= M
    target = p * sizes * (sizes - 1) / 2.0
    bad = keep & (np.abs(edges - target) > eps * target + 1e-9)
    checked = int(keep.sum())
    if bad.any():
        mask = int(np.flatnonzero(bad)[0])
        return JumbledVerdict(False, True, checked, tuple(bits(mask)))
    return JumbledVerdict(True, True, checked)


def write_edge_list(g: SimpleGraph) -> str:
    lines = [f"v={g.n}"]
    lines += [f"{u} {w}" for u, w in g.edges()]
    return "\n".join(lines) + "\n"


def read_edge_list(text: str) -> SimpleGraph:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("v="):
        raise ValueError("edge list must start with 'v=<n>'")
    n = int(lines[0][2:])
    seen = set()
    edges = []
    for ln in lines[1:]:
        u, w = (int(x) for x in ln.split())
        key = (min(u, w), max(u, w))
        if key in seen:
            raise ValueError(f"duplicate edge {key}")
        seen.add(key)
        edges.append(key)
    return SimpleGraph(n, edges)


def named_graph(name: str) -> SimpleGraph:
    """Parse names like ``K3``, ``C5``, ``H2``."""
    kind, num = name[0].upper(), name[1:]
    if num.isdigit():
        k = int(num)
        if kind == "K":
            return SimpleGraph.complete(k)
        if kind == "C":
            return SimpleGraph.cycle(k)
        if kind == "H":
            return make_half_graph_split(k).graph
    raise ValueError(f"unknown graph name {name!r}")


def clique_size_if_complete(h: SimpleGraph) -> int | None:
    if h.edge_count() == comb(h.n, 2):
        return h.n
    return None
