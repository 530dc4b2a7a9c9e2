"""Builder policies for both games.

Every builder is a small object with an ``ident`` and a ``start(state, rng)``
generator (see ``game``). Builders allocate fresh vertices from a counter, so
vertex choice is always the lowest unused index.

A builder marked ``budget_oblivious`` never looks at the turn cap, so a game
with cap N is a prefix of the same game with a larger cap. The harness relies
on this to read off success at every N from one run.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import count

from .canon import canonical_code
from .graph import bits, find_clique_in

# ---------------------------------------------------------------------------
# shared helpers


class _Alloc:
    def __init__(self, start: int = 0):
        self.next = start

    def __call__(self) -> int:
        v = self.next
        self.next += 1
        return v

    def many(self, k: int) -> list[int]:
        out = list(range(self.next, self.next + k))
        self.next += k
        return out


def _clique_with_edge(rows, u: int, w: int, k: int, within: int | None = None):
    """A k-clique containing edge (u, w), optionally inside ``within``."""
    if k == 2:
        return [u, w]
    cand = rows[u] & rows[w]
    if within is not None:
        cand &= within
    rest = find_clique_in(rows, cand, k - 2)
    return None if rest is None else [u, w] + rest


def _mask(vs) -> int:
    out = 0
    for v in vs:
        out |= 1 << v
    return out


def _fill(vertices):
    """All pairs of ``vertices`` in colex order."""
    for j in range(1, len(vertices)):
        for i in range(j):
            yield vertices[i], vertices[j]


# ---------------------------------------------------------------------------
# branching builder for the online Ramsey game


@dataclass(frozen=True)
class BranchingConfig:
    m: int
    n: int
    L: float = 1
    m0: int | None = None
    n0: int | None = None

    def __post_init__(self):
        if self.m < 2 or self.n < 2:
            raise ValueError("m and n must be at least 2")
        if self.L < 1:
            raise ValueError("L must be at least 1")
        if self.m0 is None:
            object.__setattr__(self, "m0", self.m // 2 + 1)
        if self.n0 is None:
            object.__setattr__(self, "n0", math.isqrt(self.n))

    def f(self, m: int, n: int) -> int:
        return branching_f(m, n, self.L)

    def budget(self) -> int:
        m, n = self.m, self.n
        return (m + n) * self.f(m, n) + max(self.f(self.m0, n) ** 2, self.f(m, self.n0) ** 2)


def branching_f(m: int, n: int, L: float = 1) -> int:
    value = math.comb(m + n - 2, m - 1)
    if L == 1:
        return value
    return math.ceil(Fraction(value) / Fraction(L))


def certify_branching_table(cfg: BranchingConfig, ramsey_upper) -> None:
    """Check the hypotheses a savings factor L > 1 needs.

    ``ramsey_upper(a, b)`` must return a proven upper bound on r(a, b). Raises
    ValueError when the table does not support the configured L.
    """
    if cfg.L == 1:
        return
    for mi in range(cfg.m0, cfg.m + 1):
        for ni in range(cfg.n0, cfg.n + 1):
            if mi == cfg.m0 or ni == cfg.n0:
                if ramsey_upper(mi, ni) > cfg.f(mi, ni):
                    raise ValueError(f"r({mi},{ni}) bound {ramsey_upper(mi, ni)} exceeds f={cfg.f(mi, ni)} at L={cfg.L}")
            elif cfg.f(mi - 1, ni) + cfg.f(mi, ni - 1) < cfg.f(mi, ni):
                raise ValueError(f"branching split fails at ({mi},{ni}) for L={cfg.L}")


class BranchingBuilder:
    """Pivot-and-recurse builder that forces red K_m or blue K_n.

    Each pivot builds f(m_i, n_i) - 1 edges into the current set, then keeps
    the first f(m_i - 1, n_i) red neighbours or else the first f(m_i, n_i - 1)
    blue ones. Once m_i hits m0 or n_i hits n0 it fills the surviving set.

    When the state carries ``want_symkey = True`` the builder publishes
    ``state.symkey`` before each move: equal keys mean equivalent futures up to
    isomorphism, which lets an exhaustive adversary merge branches.
    """

    budget_oblivious = True

    def __init__(self, cfg: BranchingConfig, ramsey_upper=None):
        if cfg.L != 1:
            if ramsey_upper is None:
                raise ValueError("L > 1 needs a Ramsey upper-bound table")
            certify_branching_table(cfg, ramsey_upper)
        self.cfg = cfg
        self.ident = f"branching(m={cfg.m},n={cfg.n},L={cfg.L},m0={cfg.m0},n0={cfg.n0})"

    def budget(self) -> int:
        return self.cfg.budget()

    def start(self, state, rng):
        return self._run(state)

    def _run(self, state):
        cfg = self.cfg
        keyed = getattr(state, "want_symkey", False)
        mi, ni = cfg.m, cfg.n
        S = list(range(cfg.f(mi, ni)))
        while mi > cfg.m0 and ni > cfg.n0:
            pivot, rest = S[0], S[1 : cfg.f(mi, ni)]
            reds, blues = [], []
            for v in rest:
                if keyed:
                    state.symkey = ("pivot", mi, ni, len(reds), len(blues))
                red = yield (pivot, v)
                (reds if red else blues).append(v)
            need_red = cfg.f(mi - 1, ni)
            if len(reds) >= need_red:
                S, mi = reds[:need_red], mi - 1
            else:
                S, ni = blues[: cfg.f(mi, ni - 1)], ni - 1
            state.note(f"pivot {pivot}: {len(reds)} red, {len(blues)} blue -> targets ({mi},{ni}), |S|={len(S)}")
        state.note(f"fill {len(S)} vertices at targets ({mi},{ni})")
        for j in range(1, len(S)):
            for i in range(j):
                if keyed:
                    state.symkey = ("fill", mi, ni, _prefix_code(state, S[:j])) if i == 0 else None
                yield (S[i], S[j])


def _prefix_code(state, vs):
    k = len(vs)
    red, blue = state.first, state.second
    col = [[0] * k for _ in range(k)]
    for a in range(k):
        for b in range(k):
            if a != b:
                x, y = vs[a], vs[b]
                col[a][b] = 1 if red[x] >> y & 1 else (2 if blue[x] >> y & 1 else 0)
    return (k, canonical_code(k, col))


def branching_builder(cfg: BranchingConfig, ramsey_upper=None) -> BranchingBuilder:
    return BranchingBuilder(cfg, ramsey_upper)


# ---------------------------------------------------------------------------
# subgraph query builders


class TriangleBuilder:
    """Star from a centre with fill among the centre's neighbours.

    The centre queries ``s = ceil(c_T * p^{-3/2})`` fresh vertices. With
    ``eager`` each newly found neighbour is immediately queried against the
    earlier ones; otherwise the neighbours are filled after the star. Then a new
    centre starts, forever.
    """

    budget_oblivious = True

    def __init__(self, p: float, c_T: float = 1.0, eager: bool = True):
        if not 0 < p < 1:
            raise ValueError("p must lie in (0, 1)")
        self.p, self.c_T, self.eager = p, c_T, eager
        self.star_size = max(2, math.ceil(c_T * p**-1.5))
        self.ident = f"triangle(p={p!r},c_T={c_T!r},eager={eager})"

    def start(self, state, rng):
        return self._run(state, _Alloc())

    def _run(self, state, alloc):
        while True:
            tri = yield from self.search_once(alloc)
            if tri is not None:
                return

    def search_once(self, alloc):
        """One star; returns a triangle found by this star, else None."""
        centre = alloc()
        nbrs: list[int] = []
        for _ in range(self.star_size):
            v = alloc()
            if (yield (centre, v)):
                if self.eager:
                    for x in nbrs:
                        if (yield (x, v)):
                            return [centre, x, v]
                nbrs.append(v)
        if not self.eager:
            for x, y in _fill(nbrs):
                if (yield (x, y)):
                    return [centre, x, y]
        return None


def triangle_builder(p: float, c_T: float = 1.0, eager: bool = True) -> TriangleBuilder:
    return TriangleBuilder(p, c_T, eager)


def choose_ab(m: int) -> tuple[int, int]:
    """Split m = a + b + 1 used by Branch-and-Fill."""
    if m < 4:
        raise ValueError("m must be at least 4")
    r = m % 3
    if r == 0:
        return (m - 3) // 3, 2 * m // 3
    if r == 1:
        return (m - 4) // 3, (2 * m + 1) // 3
    return (m - 2) // 3, (2 * m - 1) // 3


def alpha(a: int, b: int) -> Fraction:
    if b < 2:
        raise ValueError("b must be at least 2")
    if 2 * a + 3 - b < 0:
        raise ValueError("need 2a + 3 - b >= 0")
    return min(Fraction(1), Fraction(b * (2 * a + 3 - b), 2 * (b - 1)))


def bnf_turn_exponent(a: int, b: int) -> Fraction:
    """Exponent of p in the Branch-and-Fill turn count."""
    return Fraction(-(2 * a + b + 1), 2) + alpha(a, b) / b


@dataclass(frozen=True)
class BranchAndFillConfig:
    m: int
    a: int | None = None
    b: int | None = None
    c_T: float = 1.0
    restarts: int | None = 3  # None: keep restarting forever

    def __post_init__(self):
        if self.a is None or self.b is None:
            a, b = choose_ab(self.m)
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "b", b)
        if self.a + self.b + 1 != self.m:
            raise ValueError("need a + b + 1 = m")
        if self.a < 0:
            raise ValueError("a must be nonnegative")
        alpha(self.a, self.b)  # validates 2a + 3 - b >= 0
        if self.c_T <= 0:
            raise ValueError("c_T must be positive")
        if self.restarts is not None and self.restarts < 0:
            raise ValueError("restarts must be nonnegative")

    @property
    def alpha(self) -> Fraction:
        return alpha(self.a, self.b)

    def T(self, p: float) -> float:
        return self.c_T * p ** float(bnf_turn_exponent(self.a, self.b))

    def w_size(self, p: float) -> int:
        return math.ceil(p**self.a * self.T(p))

    def rounds(self, p: float) -> int:
        return math.ceil(p ** -float(self.alpha))


class BranchAndFillBuilder:
    """Three-phase clique search for K_m in the query game.

    Phase 1 builds a clique U on a vertices (recursively). Phase 2 grows W, a
    set of common neighbours of U, abandoning a candidate at its first failed
    query. Phase 3 runs rounds: take the first w in W, probe it against the rest
    of W, fill its neighbourhood W_i inside W completely, drop {w} and W_i.
    A failed attempt restarts from scratch, up to ``restarts`` times.
    """

    budget_oblivious = True

    def __init__(self, cfg: BranchAndFillConfig, p: float):
        if not 0 < p < 1:
            raise ValueError("p must lie in (0, 1)")
        self.cfg, self.p = cfg, p
        self.ident = f"bnf(m={cfg.m},a={cfg.a},b={cfg.b},c_T={cfg.c_T!r},restarts={cfg.restarts},p={p!r})"

    def start(self, state, rng):
        return self._run(state, _Alloc())

    def _run(self, state, alloc):
        attempts = count() if self.cfg.restarts is None else range(self.cfg.restarts + 1)
        for attempt in attempts:
            found = yield from self.attempt(state, alloc)
            if found is not None:
                return
            state.note(f"bnf attempt {attempt} failed")

    def attempt(self, state, alloc):
        cfg, p = self.cfg, self.p
        m, a = cfg.m, cfg.a
        if a == 0:
            U: list[int] = []
            W = alloc.many(max(1, math.ceil(cfg.T(p))))
        else:
            U = yield from find_clique(state, a, p, alloc, cfg.c_T)
            W = []
            target = cfg.w_size(p)
            while len(W) < target:
                v = alloc()
                for u in U:
                    if not (yield (u, v)):
                        break
                else:
                    W.append(v)
        rows = state.first
        umask = _mask(U)
        for _ in range(cfg.rounds(p)):
            if not W:
                break
            w, rest = W[0], W[1:]
            Wi = []
            for x in rest:
                if (yield (w, x)):
                    Wi.append(x)
            scope = umask | _mask(Wi) | (1 << w)
            for x, y in _fill(Wi):
                if (yield (x, y)):
                    hit = _clique_with_edge(rows, x, y, m, scope)
                    if hit is not None:
                        return hit
            taken = set(Wi)
            W = [x for x in rest if x not in taken]
        return None


def branch_and_fill_builder(cfg: BranchAndFillConfig, p: float) -> BranchAndFillBuilder:
    return BranchAndFillBuilder(cfg, p)


def find_clique(state, k: int, p: float, alloc: _Alloc, c_T: float = 1.0):
    """Generator that queries until it owns a k-clique; returns its vertices."""
    if k == 1:
        return [alloc()]
    if k == 2:
        u = alloc()
        while True:
            v = alloc()
            if (yield (u, v)):
                return [u, v]
    if k == 3:
        tri = TriangleBuilder(p, c_T)
        while True:
            found = yield from tri.search_once(alloc)
            if found is not None:
                return found
    inner = BranchAndFillBuilder(BranchAndFillConfig(k, c_T=c_T, restarts=None), p)
    while True:
        found = yield from inner.attempt(state, alloc)
        if found is not None:
            return found


class NestedHalfGraphBuilder:
    """Probe nested vertex sets to plant many copies of the half-graph H_k.

    U_1 holds N/k fresh vertices. Stage i takes N_i = N/(k|U_i|) probes (a prefix
    of U_i), queries every probe against the rest of U_i, and keeps the common
    built neighbourhood as U_{i+1}. A stage aborts when |U_i| < sqrt(N).
    """

    budget_oblivious = False

    def __init__(self, k: int, N: int):
        if k < 1:
            raise ValueError("k must be positive")
        if N < k:
            raise ValueError("N must be at least k")
        self.k, self.N = k, N
        self.ident = f"halfgraph(k={k},N={N})"

    def budget(self) -> int:
        return self.N

    def start(self, state, rng):
        return self._run(state)

    def _run(self, state):
        k, N = self.k, self.N
        U = list(range(N // k))
        floor = math.isqrt(N - 1) + 1 if N > 1 else 1  # ceil(sqrt(N))
        rows = state.first
        for i in range(1, k + 1):
            if len(U) < floor:
                state.note(f"stage {i} aborted: |U_{i}|={len(U)} < sqrt(N)")
                return
            Ni = max(1, N // (k * len(U)))
            probes, rest = U[:Ni], U[Ni:]
            for a in probes:
                for v in rest:
                    yield (a, v)
            common = _mask(rest)
            for a in probes:
                common &= rows[a]
            U = list(bits(common))
            state.note(f"stage {i}: {Ni} probes, |U_{i + 1}|={len(U)}")


def nested_halfgraph_builder(k: int, N: int) -> NestedHalfGraphBuilder:
    return NestedHalfGraphBuilder(k, N)


class CliqueFillBuilder:
    """Query every pair among vertices 0..v-1 in colex order."""

    budget_oblivious = True

    def __init__(self, v: int):
        if v < 2:
            raise ValueError("v must be at least 2")
        self.v = v
        self.ident = f"clique_fill(v={v})"

    def budget(self) -> int:
        return math.comb(self.v, 2)

    def start(self, state, rng):
        return _fill(list(range(self.v)))


def clique_fill_builder(v: int) -> CliqueFillBuilder:
    return CliqueFillBuilder(v)


# ---------------------------------------------------------------------------
# baselines and fuzzing builders


class SequenceBuilder:
    """Plays a fixed list of pairs, then stops."""

    budget_oblivious = True

    def __init__(self, pairs, ident: str = "sequence"):
        self.pairs = [tuple(p) for p in pairs]
        self.ident = ident

    def start(self, state, rng):
        return (pair for pair in self.pairs)


def star_builder(leaves: int | None = None) -> SequenceBuilder:
    if leaves is None:
        return _EndlessStar()
    return SequenceBuilder([(0, i) for i in range(1, leaves + 1)], f"star(leaves={leaves})")


class _EndlessStar:
    budget_oblivious = True
    ident = "star"

    def start(self, state, rng):
        return ((0, i) for i in count(1))


class DirectQueryBuilder:
    """Queries fresh disjoint pairs; the natural strategy for a single edge."""

    budget_oblivious = True
    ident = "direct"

    def start(self, state, rng):
        return ((2 * i, 2 * i + 1) for i in count())


class RandomBuilder:
    """Uniformly random unused pair within a fixed vertex pool."""

    budget_oblivious = True

    def __init__(self, pool: int):
        if pool < 2:
            raise ValueError("pool must hold at least two vertices")
        self.pool = pool
        self.ident = f"random_builder(pool={pool})"

    def start(self, state, rng: random.Random):
        return self._run(state, rng)

    def _run(self, state, rng):
        pool = self.pool
        remaining = [(u, w) for w in range(1, pool) for u in range(w)]
        while remaining:
            i = rng.randrange(len(remaining))
            remaining[i], remaining[-1] = remaining[-1], remaining[i]
            yield remaining.pop()


class TriangleHunter:
    """Tries hard to make a painter close a red triangle.

    First plays ``warmup`` random edges inside the pool to raise degrees, then
    always plays an unused pair whose endpoints share a red neighbour when one
    exists, else a random unused pair.
    """

    budget_oblivious = True

    def __init__(self, pool: int, warmup: int | None = None):
        self.pool = pool
        self.warmup = warmup if warmup is not None else pool
        self.ident = f"triangle_hunter(pool={pool},warmup={self.warmup})"

    def start(self, state, rng):
        return self._run(state, rng)

    def _run(self, state, rng: random.Random):
        free = [(u, w) for w in range(1, self.pool) for u in range(w)]
        where = {e: i for i, e in enumerate(free)}
        red = [0] * self.pool
        closing: list = []  # cherry-closing pairs, pruned lazily once used
        played = 0
        while free:
            pick = None
            if played >= self.warmup:
                while closing and pick is None:
                    j = rng.randrange(len(closing))
                    e = closing[j]
                    closing[j] = closing[-1]
                    closing.pop()
                    if e in where:
                        pick = e
            if pick is None:
                pick = free[rng.randrange(len(free))]
            i = where.pop(pick)
            last = free.pop()
            if last != pick:
                free[i] = last
                where[last] = i
            played += 1
            if (yield pick):
                u, w = pick
                for a, b in ((u, w), (w, u)):
                    for x in bits(red[b]):
                        e = (min(a, x), max(a, x))
                        if e in where:
                            closing.append(e)
                red[u] |= 1 << w
                red[w] |= 1 << u


class RedGreedyBuilder:
    """Plays from the vertex of highest red degree to its highest-degree free partner.

    Ties between equal degrees are broken at random each turn.
    """

    budget_oblivious = True

    def __init__(self, pool: int):
        self.pool = pool
        self.ident = f"red_greedy(pool={pool})"

    def start(self, state, rng):
        return self._run(state, rng)

    def _run(self, state, rng: random.Random):
        pool = self.pool
        full = (1 << pool) - 1
        free = [full & ~(1 << v) for v in range(pool)]
        deg = [0] * pool
        while True:
            order = sorted(range(pool), key=lambda v: (-deg[v], rng.random()))
            pick = None
            for u in order:
                if free[u]:
                    w = next(x for x in order if free[u] >> x & 1)
                    pick = (u, w)
                    break
            if pick is None:
                return
            u, w = pick
            free[u] &= ~(1 << w)
            free[w] &= ~(1 << u)
            if (yield pick):
                deg[u] += 1
                deg[w] += 1
