"""Exact desk-scale values by search over canonicalised game states.

States are coloured graphs on the vertices touched so far; untouched vertices
are interchangeable and only their number matters. Memo keys are canonical
codes from ``canon``, so isomorphic positions are solved once.

Values are exact for the stated vertex budget. Probabilities follow the type of
``p``: pass a ``Fraction`` for exact rational arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product

from .canon import canonical_form
from .game import ColoredGameState
from .graph import SimpleGraph, clique_size_if_complete, has_clique_in, has_copy_through_edge

INF = math.inf

RAMSEY_CAPS = {"m": 4, "n": 4, "vertex_budget": 9}
QUERY_CAPS = {"target_vertices": 4, "vertex_budget": 8, "budget": 14}


class CapExceeded(ValueError):
    """Instance is outside the exhaustive-search limits."""


# ---------------------------------------------------------------------------
# state helpers


def _code_of(k: int, a: tuple, b: tuple) -> tuple:
    """Canonical code of a graph with two edge classes given as bitset rows."""
    col = [[0] * k for _ in range(k)]
    for u in range(k):
        ra, rb = a[u], b[u]
        row = col[u]
        for w in range(k):
            if ra >> w & 1:
                row[w] = 1
            elif rb >> w & 1:
                row[w] = 2
    code, perm = canonical_form(k, col)
    return code


def _decode(k: int, code: tuple) -> tuple[tuple, tuple]:
    a = [0] * k
    b = [0] * k
    pos = k  # skip the marks
    for j in range(1, k):
        for i in range(j):
            c = code[pos]
            pos += 1
            if c == 1:
                a[i] |= 1 << j
                a[j] |= 1 << i
            elif c == 2:
                b[i] |= 1 << j
                b[j] |= 1 << i
    return tuple(a), tuple(b)


def _moves(k: int, a: tuple, b: tuple, budget: int):
    """Legal pairs: inside the touched set, touched-to-fresh, fresh-to-fresh."""
    for j in range(1, k):
        used = a[j] | b[j]
        for i in range(j):
            if not used >> i & 1:
                yield i, j
    if k + 1 <= budget:
        for i in range(k):
            yield i, k
    if k + 2 <= budget:
        yield k, k + 1


def _add(k: int, rows: tuple, other: tuple, i: int, j: int):
    """Add edge (i, j) to ``rows``; returns the new size and both row tuples."""
    size = max(k, j + 1)
    r = list(rows) + [0] * (size - k)
    o = tuple(other) + (0,) * (size - k)
    r[i] |= 1 << j
    r[j] |= 1 << i
    return size, tuple(r), o


def _through(rows, i: int, j: int, t: int) -> bool:
    if t <= 2:
        return True
    return has_clique_in(rows, rows[i] & rows[j], t - 2)


def _check_caps(**kw):
    for name, (value, cap) in kw.items():
        if value > cap:
            raise CapExceeded(f"{name}={value} exceeds cap {cap}")


# ---------------------------------------------------------------------------
# online Ramsey game against an adversarial painter


@dataclass
class SolveStats:
    states: int = 0
    expansions: int = 0
    extra: dict = field(default_factory=dict)


class RamseySolver:
    """Minimax turn count for forcing red K_m or blue K_n on a vertex budget."""

    def __init__(self, m: int, n: int, vertex_budget: int):
        _check_caps(m=(m, RAMSEY_CAPS["m"]), n=(n, RAMSEY_CAPS["n"]), vertex_budget=(vertex_budget, RAMSEY_CAPS["vertex_budget"]))
        if m < 2 or n < 2:
            raise ValueError("m and n must be at least 2")
        self.m, self.n, self.B = m, n, vertex_budget
        self.win_at: dict = {}  # key -> least depth known to win
        self.lose_at: dict = {}  # key -> largest depth known to lose
        self.children: dict = {}
        self.stats = SolveStats()

    def _expand(self, key):
        hit = self.children.get(key)
        if hit is not None:
            return hit
        k, code = key
        a, b = _decode(k, code) if k else ((), ())
        seen = set()
        options = []
        for i, j in _moves(k, a, b, self.B):
            outcome = []
            for red in (True, False):
                if red:
                    size, ra, rb = _add(k, a, b, i, j)
                    done = _through(ra, i, j, self.m)
                else:
                    size, rb, ra = _add(k, b, a, i, j)
                    done = _through(rb, i, j, self.n)
                outcome.append(None if done else (size, _code_of(size, ra, rb)))
            sig = tuple(outcome)
            if sig not in seen:
                seen.add(sig)
                options.append(sig)
        # moves that end the game on one colour first
        options.sort(key=lambda o: (o[0] is not None) + (o[1] is not None))
        self.children[key] = options
        self.stats.expansions += 1
        return options

    def wins_within(self, key, d: int) -> bool:
        if d <= 0:
            return False
        w = self.win_at.get(key)
        if w is not None and w <= d:
            return True
        lo = self.lose_at.get(key, 0)
        if d <= lo:
            return False
        self.stats.states += 1
        for red_child, blue_child in self._expand(key):
            if red_child is not None and not self.wins_within(red_child, d - 1):
                continue
            if blue_child is not None and not self.wins_within(blue_child, d - 1):
                continue
            if w is None or d < w:
                self.win_at[key] = d
            return True
        self.lose_at[key] = max(lo, d)
        return False

    def value(self, turn_cap: int):
        root = (0, ())
        for d in range(1, turn_cap + 1):
            if self.wins_within(root, d):
                return d
        return INF


def exact_online_ramsey(m: int, n: int, vertex_budget: int, turn_cap: int | None = None):
    """Least number of turns that forces red K_m or blue K_n using at most
    ``vertex_budget`` vertices, or ``inf`` when no win exists within ``turn_cap``."""
    if turn_cap is None:
        turn_cap = math.comb(vertex_budget, 2)
    if turn_cap > math.comb(vertex_budget, 2):
        raise CapExceeded("turn_cap exceeds the number of pairs on the vertex budget")
    return RamseySolver(m, n, vertex_budget).value(turn_cap)


# ---------------------------------------------------------------------------
# online Ramsey game against a random painter


class RandomPainterSolver:
    """Best success probability within b turns when each edge is red with probability p."""

    def __init__(self, m: int, n: int, p, vertex_budget: int):
        _check_caps(m=(m, RAMSEY_CAPS["m"]), n=(n, RAMSEY_CAPS["n"]), vertex_budget=(vertex_budget, RAMSEY_CAPS["vertex_budget"]))
        self.m, self.n, self.p, self.B = m, n, p, vertex_budget
        self.q = 1 - p
        self.memo: dict = {}
        self.children: dict = {}

    def _expand(self, key):
        hit = self.children.get(key)
        if hit is not None:
            return hit
        k, code = key
        a, b = _decode(k, code) if k else ((), ())
        seen = set()
        options = []
        for i, j in _moves(k, a, b, self.B):
            size, ra, rb = _add(k, a, b, i, j)
            red = None if _through(ra, i, j, self.m) else (size, _code_of(size, ra, rb))
            size, rb2, ra2 = _add(k, b, a, i, j)
            blue = None if _through(rb2, i, j, self.n) else (size, _code_of(size, ra2, rb2))
            sig = (red, blue)
            if sig not in seen:
                seen.add(sig)
                options.append(sig)
        self.children[key] = options
        return options

    def value(self, key, b: int):
        if b <= 0:
            return 0
        mk = (key, b)
        hit = self.memo.get(mk)
        if hit is not None:
            return hit
        best = 0
        for red, blue in self._expand(key):
            v = self.p * (1 if red is None else self.value(red, b - 1))
            v += self.q * (1 if blue is None else self.value(blue, b - 1))
            if v > best:
                best = v
        self.memo[mk] = best
        return best

    def root_value(self, b: int):
        return self.value((0, ()), b)


def exact_random_ramsey(m: int, n: int, p, vertex_budget: int, max_turns: int = 40):
    """Least b whose optimal success probability against the random painter is >= 1/2.

    Returns (b, probability) or (inf, best probability seen).
    """
    solver = RandomPainterSolver(m, n, p, vertex_budget)
    value = 0
    for b in range(1, max_turns + 1):
        value = solver.root_value(b)
        if value >= Fraction(1, 2):
            return b, value
    return INF, value


# ---------------------------------------------------------------------------
# subgraph query game


class QuerySolver:
    """Optimal probability of building a copy of h within a query budget."""

    def __init__(self, h: SimpleGraph, p, vertex_budget: int):
        _check_caps(target_vertices=(h.n, QUERY_CAPS["target_vertices"]), vertex_budget=(vertex_budget, QUERY_CAPS["vertex_budget"]))
        if not 0 < p < 1 and p != 1:
            raise ValueError("p must lie in (0, 1]")
        if h.edge_count() == 0:
            raise ValueError("target must have an edge")
        self.h, self.p, self.q, self.B = h, p, 1 - p, vertex_budget
        self.clique = clique_size_if_complete(h)
        self.memo: dict = {}
        self.children: dict = {}

    def _found(self, rows, i, j) -> bool:
        if self.clique is not None:
            return _through(rows, i, j, self.clique)
        return has_copy_through_edge(self.h, rows, i, j)

    def _expand(self, key):
        hit = self.children.get(key)
        if hit is not None:
            return hit
        k, code = key
        a, b = _decode(k, code) if k else ((), ())
        seen = set()
        options = []
        for i, j in _moves(k, a, b, self.B):
            size, ra, rb = _add(k, a, b, i, j)
            ok = None if self._found(ra, i, j) else (size, _code_of(size, ra, rb))
            size, rb2, ra2 = _add(k, b, a, i, j)
            fail = (size, _code_of(size, ra2, rb2))
            sig = (ok, fail)
            if sig not in seen:
                seen.add(sig)
                options.append(sig)
        self.children[key] = options
        return options

    def value(self, key, b: int):
        if b <= 0:
            return 0
        mk = (key, b)
        hit = self.memo.get(mk)
        if hit is not None:
            return hit
        best = 0
        for ok, fail in self._expand(key):
            v = self.p * (1 if ok is None else self.value(ok, b - 1)) + self.q * self.value(fail, b - 1)
            if v > best:
                best = v
        self.memo[mk] = best
        return best

    def root_value(self, b: int):
        return self.value((0, ()), b)


def exact_query_value(h: SimpleGraph, p, budget: int, vertex_budget: int):
    """Optimal success probability for finding h within ``budget`` queries."""
    _check_caps(budget=(budget, QUERY_CAPS["budget"]))
    return QuerySolver(h, p, vertex_budget).root_value(budget)


def exact_f(h: SimpleGraph, p, vertex_budget: int, max_budget: int | None = None):
    """Least budget whose optimal success probability is at least 1/2.

    Returns (budget, probability), or (inf, last probability) if no budget up
    to the cap reaches 1/2.
    """
    cap = QUERY_CAPS["budget"] if max_budget is None else min(max_budget, QUERY_CAPS["budget"])
    solver = QuerySolver(h, p, vertex_budget)
    value = 0
    for b in range(1, cap + 1):
        value = solver.root_value(b)
        if value >= Fraction(1, 2):
            return b, value
    return INF, value


def brute_force_query_value(h: SimpleGraph, p, budget: int, vertices: int):
    """Expectimax over raw labelled states on a fixed vertex set; no symmetry reduction."""
    pairs = list(combinations(range(vertices), 2))
    clique = clique_size_if_complete(h)
    memo: dict = {}

    def found(rows, i, j):
        if clique is not None:
            return _through(rows, i, j, clique)
        return has_copy_through_edge(h, rows, i, j)

    def go(built: tuple, tried: int, b: int):
        if b == 0:
            return 0
        key = (built, tried, b)
        if key in memo:
            return memo[key]
        best = 0
        for idx, (i, j) in enumerate(pairs):
            if tried >> idx & 1:
                continue
            rows = list(built)
            rows[i] |= 1 << j
            rows[j] |= 1 << i
            hit = found(rows, i, j)
            v = p * (1 if hit else go(tuple(rows), tried | 1 << idx, b - 1))
            v += (1 - p) * go(built, tried | 1 << idx, b - 1)
            if v > best:
                best = v
        memo[key] = best
        return best

    return go((0,) * vertices, 0, budget)


def brute_force_online_ramsey(m: int, n: int, vertices: int, turn_cap: int):
    """Minimax turns on a fixed labelled vertex set, no symmetry reduction."""
    pairs = list(combinations(range(vertices), 2))
    memo: dict = {}

    def wins(red: tuple, blue: tuple, d: int) -> bool:
        if d == 0:
            return False
        key = (red, blue, d)
        if key in memo:
            return memo[key]
        res = False
        for i, j in pairs:
            if (red[i] | blue[i]) >> j & 1:
                continue
            ok = True
            for colour in (0, 1):
                rows = list(red if colour == 0 else blue)
                rows[i] |= 1 << j
                rows[j] |= 1 << i
                if _through(rows, i, j, m if colour == 0 else n):
                    continue
                nxt = (tuple(rows), blue) if colour == 0 else (red, tuple(rows))
                if not wins(*nxt, d - 1):
                    ok = False
                    break
            if ok:
                res = True
                break
        memo[key] = res
        return res

    zero = (0,) * vertices
    for d in range(1, turn_cap + 1):
        if wins(zero, zero, d):
            return d
    return INF


# ---------------------------------------------------------------------------
# classical Ramsey numbers


def _good_colouring_exists(m: int, n: int, size: int) -> bool:
    """Is there a red/blue colouring of K_size with no red K_m and no blue K_n?"""
    red = [0] * size
    blue = [0] * size

    def extend(v: int) -> bool:
        if v == size:
            return True
        for mask in range(1 << v):
            r = mask
            bl = ((1 << v) - 1) & ~mask
            if m >= 2 and has_clique_in(red, r, m - 1):
                continue
            if n >= 2 and has_clique_in(blue, bl, n - 1):
                continue
            red[v], blue[v] = r, bl
            for u in range(v):
                if r >> u & 1:
                    red[u] |= 1 << v
                else:
                    blue[u] |= 1 << v
            if extend(v + 1):
                return True
            for u in range(v):
                red[u] &= ~(1 << v)
                blue[u] &= ~(1 << v)
        red[v] = blue[v] = 0
        return False

    return extend(0)


def ramsey_number(m: int, n: int, limit: int = 10) -> int:
    """Classical r(m, n) by exhaustive search over colourings, up to ``limit`` vertices."""
    if m < 1 or n < 1:
        raise ValueError("m and n must be positive")
    for size in range(1, limit + 1):
        if not _good_colouring_exists(m, n, size):
            return size
    raise CapExceeded(f"r({m},{n}) exceeds search limit {limit}")


def every_colouring_has_clique(m: int, n: int, size: int) -> bool:
    """Raw check over all 2^C(size,2) colourings of K_size."""
    pairs = list(combinations(range(size), 2))
    red_m = [set(c) for c in combinations(range(size), m)]
    for bits_ in product((0, 1), repeat=len(pairs)):
        colour = dict(zip(pairs, bits_))
        red_hit = any(all(colour[e] == 1 for e in combinations(sorted(s), 2)) for s in red_m)
        if red_hit:
            continue
        blue_hit = any(all(colour[e] == 0 for e in combinations(s, 2)) for s in combinations(range(size), n))
        if not blue_hit:
            return False
    return True


# ---------------------------------------------------------------------------
# random Ramsey number versus query-game values


@dataclass
class SandwichReport:
    m: int
    n: int
    p: object
    vertex_budget: int
    random_ramsey: object  # least b with success >= 1/2 against the random painter
    random_ramsey_probability: object
    f_red: object  # f(K_m, p); when unresolved, a strict lower bound
    f_blue: object  # f(K_n, 1 - p); when unresolved, a strict lower bound
    f_red_exact: bool
    f_blue_exact: bool
    min_f: object
    lower_ok: bool
    upper_ok: bool
    red_side_ok: bool

    @property
    def passed(self) -> bool:
        return self.lower_ok and self.upper_ok and self.red_side_ok

    def as_dict(self) -> dict:
        def num(x):
            if isinstance(x, Fraction):
                return float(x)
            return x

        return {k: num(v) for k, v in self.__dict__.items()} | {"passed": self.passed}


def sandwich_check(m: int, n: int, p, vertex_budget: int) -> SandwichReport:
    """Compare the random-painter turn count r with min{f(K_m, p), f(K_n, 1-p)}.

    Checks r <= min f <= 3r and r <= f(K_m, p). Both query values are scanned
    in lockstep by budget and the scan stops once one of them reaches 1/2 and
    the budget has reached r; an unresolved value is then known to exceed the
    budget, which settles every comparison.
    """
    if max(m, n) > 3:
        raise CapExceeded("the sandwich check is limited to tiny targets")
    r, r_prob = exact_random_ramsey(m, n, p, vertex_budget)
    if r == INF:
        raise CapExceeded("random-painter value not reached within the turn cap")
    qv = min(vertex_budget, QUERY_CAPS["vertex_budget"])
    red = QuerySolver(SimpleGraph.complete(m), p, qv)
    blue = QuerySolver(SimpleGraph.complete(n), 1 - p, qv)
    half = Fraction(1, 2)
    f_red = f_blue = None
    b = 0
    while b < QUERY_CAPS["budget"]:
        b += 1
        if f_red is None and red.root_value(b) >= half:
            f_red = b
        if f_blue is None and blue.root_value(b) >= half:
            f_blue = b
        if (f_red is not None or f_blue is not None) and b >= r:
            break
    if f_red is None and f_blue is None:
        raise CapExceeded("neither query value reached 1/2 within the budget cap")
    # an unresolved value exceeds the last scanned budget
    f_red_v = f_red if f_red is not None else b + 1
    f_blue_v = f_blue if f_blue is not None else b + 1
    min_f = min(f_red_v, f_blue_v)
    return SandwichReport(
        m,
        n,
        p,
        vertex_budget,
        r,
        r_prob,
        f_red_v,
        f_blue_v,
        f_red is not None,
        f_blue is not None,
        min_f,
        lower_ok=r <= min_f,
        upper_ok=min_f <= 3 * r,
        red_side_ok=r <= f_red_v,
    )


# ---------------------------------------------------------------------------
# exhaustive adversary against a concrete Ramsey builder


@dataclass
class AdversaryReport:
    builder: str
    m: int
    n: int
    turn_cap: int
    wins: bool
    worst_turns: float  # exact when merge is off; with merge, the worst over explored representatives
    nodes: int
    merged_hits: int
    merge: bool
    losing_line: tuple | None = None  # colours of a painter line that escapes, if any

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def adversarial_check(builder, m: int, n: int, turn_cap: int, merge: bool = True, node_cap: int = 2_000_000) -> AdversaryReport:
    """Search every painter response sequence against a deterministic builder.

    The builder is replayed from scratch at each node. When ``merge`` is on and
    the builder publishes ``state.symkey``, positions with equal keys are solved
    once; the win verdict stays exact, while the reported worst turn count then
    comes from one representative per class.
    """
    memo: dict = {}
    stats = {"nodes": 0, "hits": 0}

    def replay(line):
        state = ColoredGameState(m, n, turn_cap)
        state.want_symkey = merge
        state.symkey = None
        gen = builder.start(state, None)
        try:
            move = next(gen)
            for red in line:
                u, w = state._check_move(move, builder.ident)
                state._record(u, w, red)
                move = gen.send(red)
        except StopIteration:
            return state, None
        return state, move

    def explore(line: tuple):
        """Worst total turns from here, or inf if the painter can escape."""
        stats["nodes"] += 1
        if stats["nodes"] > node_cap:
            raise CapExceeded(f"adversary search exceeded {node_cap} nodes")
        state, move = replay(line)
        if move is None or state.turn >= turn_cap:
            return INF, line
        key = state.symkey if merge else None
        if key is not None and key in memo:
            stats["hits"] += 1
            rem, bad = memo[key]
            return (state.turn + rem if rem != INF else INF), (line if bad else None)
        u, w = state._check_move(move, builder.ident)
        worst, escape = 0, None
        for red in (True, False):
            rows = state.first if red else state.second
            rows[u] |= 1 << w
            rows[w] |= 1 << u
            done = _through(rows, u, w, m if red else n)
            rows[u] &= ~(1 << w)
            rows[w] &= ~(1 << u)
            if done:
                total = state.turn + 1
            else:
                total, esc = explore(line + (red,))
                if total == INF and escape is None:
                    escape = esc if esc is not None else line + (red,)
            worst = max(worst, total)
            if worst == INF:
                break
        if key is not None:
            memo[key] = ((worst - state.turn) if worst != INF else INF, escape is not None)
        return worst, escape

    worst, escape = explore(())
    return AdversaryReport(
        builder.ident, m, n, turn_cap, worst != INF, worst, stats["nodes"], stats["hits"], merge, escape
    )
