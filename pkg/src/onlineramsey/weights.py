"""Red-clique weights of vertex sets and their audit against random painters.

For a vertex set U at some turn, w(U) is p^(C(|U|,2) - e_red(U)) when every
built edge inside U is red and 0 otherwise; it is the chance that U ends up a
red clique if its remaining pairs are built and painted at random. The audit
sums w over k-sets whose red subgraph has minimum vertex cover at least c.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from itertools import combinations

import numpy as np

from .game import ColoredGameState, play_online_ramsey, trial_seed
from .graph import bits, cover_size_of_rows
from .painters import random_painter

AGGREGATE_CAP = 10**6


def _mask(vs) -> int:
    out = 0
    for v in vs:
        out |= 1 << v
    return out


def _rows(state, v: int, which: str) -> int:
    rows = state.first if which == "red" else state.second
    return rows[v] if v < len(rows) else 0


def red_weight(state: ColoredGameState, U, p: float) -> float:
    U = list(U)
    if len(U) < 2:
        raise ValueError("U needs at least two vertices")
    mask = _mask(U)
    red_edges = 0
    for v in U:
        if _rows(state, v, "blue") & mask:
            return 0.0
        red_edges += (_rows(state, v, "red") & mask).bit_count()
    red_edges //= 2
    return p ** (math.comb(len(U), 2) - red_edges)


def red_cover(state, U) -> int:
    """Minimum vertex cover of the red graph induced on U."""
    mask = _mask(U)
    rows = {v: _rows(state, v, "red") & mask for v in U}
    return cover_size_of_rows(_Dense(rows), mask)


class _Dense:
    """Sparse rows addressable like a list (missing vertices have no edges)."""

    def __init__(self, rows: dict[int, int]):
        self.rows = rows

    def __getitem__(self, v):
        return self.rows.get(v, 0)


def aggregate_weight_bruteforce(state, k: int, c: int, p: float, universe: int | None = None) -> float:
    """Sum of w(U) over all k-subsets with red cover >= c; the test oracle."""
    V = state.vertices_used if universe is None else universe
    if math.comb(V, k) > AGGREGATE_CAP:
        raise ValueError(f"C({V},{k}) exceeds the enumeration cap {AGGREGATE_CAP}")
    total = 0.0
    for U in combinations(range(V), k):
        w = red_weight(state, U, p)
        if w and red_cover(state, U) >= c:
            total += w
    return total


def _red_spanned_sets(red_rows, k: int) -> set[int]:
    """Vertex sets of size <= k whose induced red graph has no isolated vertex."""
    edges = [(u, w) for u, r in enumerate(red_rows) for w in bits(r >> (u + 1) << (u + 1))]
    seen: set[int] = set()
    frontier = []
    for u, w in edges:
        m = 1 << u | 1 << w
        if m not in seen:
            seen.add(m)
            frontier.append(m)
    while frontier:
        nxt = []
        for s in frontier:
            size = s.bit_count()
            if size >= k:
                continue
            for u, w in edges:
                add = (1 << u | 1 << w) & ~s
                if not add or add.bit_count() + size > k:
                    continue
                t = s | add
                if t not in seen:
                    seen.add(t)
                    nxt.append(t)
        frontier = nxt
    out = set()
    for s in seen:
        # a union of edges with every vertex touched is red-spanned; unions
        # built above always are, but keep the check explicit
        if all(red_rows[v] & s for v in bits(s)):
            out.add(s)
    return out


def _count_independent(rows, cand: int, j: int, memo: dict) -> int:
    """Number of j-subsets of ``cand`` independent in ``rows``."""
    if j == 0:
        return 1
    size = cand.bit_count()
    if size < j:
        return 0
    key = (cand, j)
    hit = memo.get(key)
    if hit is not None:
        return hit
    pick = -1
    for v in bits(cand):
        if rows[v] & cand:
            pick = v
            break
    if pick < 0:
        out = math.comb(size, j)
    else:
        rest = cand & ~(1 << pick)
        out = _count_independent(rows, rest, j, memo) + _count_independent(rows, rest & ~rows[pick], j - 1, memo)
    memo[key] = out
    return out


@dataclass
class _Prepared:
    universe: int
    red: list[int]
    built: list[int]
    spanned: set[int]


def _prepare(state, k: int, universe: int) -> _Prepared:
    red = [_rows(state, v, "red") for v in range(universe)]
    blue = [_rows(state, v, "blue") for v in range(universe)]
    built = [r | b for r, b in zip(red, blue)]
    return _Prepared(universe, red, built, _red_spanned_sets(red, k))


def _aggregate(prep: _Prepared, k: int, c: int, p: float, memo: dict) -> float:
    full = (1 << prep.universe) - 1
    red, built = prep.red, prep.built
    total = 0.0
    if c <= 0:
        total += _count_independent(built, full, k, memo) * p ** math.comb(k, 2)
    for X in prep.spanned:
        size = X.bit_count()
        if size > k:
            continue
        blocked = X
        red_edges = 0
        clean = True
        for v in bits(X):
            if (built[v] & ~red[v]) & X:
                clean = False
                break
            red_edges += (red[v] & X).bit_count()
            blocked |= built[v]
        if not clean:
            continue
        if cover_size_of_rows(red, X) < c:
            continue
        ways = _count_independent(built, full & ~blocked, k - size, memo)
        if ways:
            total += ways * p ** (math.comb(k, 2) - red_edges // 2)
    return total


def aggregate_weight(state, k: int, c: int, p: float, universe: int | None = None) -> float:
    """Sum of w(U) over k-sets U of the first ``universe`` vertices with red cover >= c.

    Sets split into the part spanned by red edges inside U and the rest, which
    must be independent in the built graph and unattached to the red part; the
    rest is counted rather than enumerated.
    """
    if k < 2 * c:
        raise ValueError("need k >= 2c")
    V = state.vertices_used if universe is None else universe
    if V < state.vertices_used:
        raise ValueError("universe must include every used vertex")
    if math.comb(V, k) > AGGREGATE_CAP:
        raise ValueError(f"C({V},{k}) exceeds the cap {AGGREGATE_CAP}")
    return _aggregate(_prepare(state, k, V), k, c, p, {})


def c_critical_events(state, new_edge, c: int, k: int, red: bool | None = None, universe: int | None = None):
    """k-sets whose red cover first reached c on the turn that coloured ``new_edge``.

    Call right after the edge is recorded. Only sets containing both endpoints
    can change, and only when the edge is red.
    """
    u, w = new_edge
    if red is None:
        red = bool(_rows(state, u, "red") >> w & 1)
    if not red:
        return []
    V = state.vertices_used if universe is None else universe
    others = [v for v in range(V) if v != u and v != w]
    rows = [_rows(state, v, "red") for v in range(V)]
    before = list(rows)
    before[u] &= ~(1 << w)
    before[w] &= ~(1 << u)
    out = []
    for rest in combinations(others, k - 2):
        U = (u, w) + rest
        mask = _mask(U)
        if cover_size_of_rows(rows, mask) >= c > cover_size_of_rows(before, mask):
            out.append(tuple(sorted(U)))
    return out


def weight_bound(m: int, c: int, p: float, N: int) -> float:
    """Ceiling on the expected final weight of sets with red cover >= c."""
    return math.exp((math.comb(m, 2) - c * (c - 1)) * math.log(p) + (m - c) * math.log(2 * N))


@dataclass
class AuditReport:
    parameters: dict
    trials: int
    mean: float
    stderr: float
    bound: float
    verdict: bool

    def as_dict(self) -> dict:
        return asdict(self)


def audit_final_weights(builder, cells, p: float, N: int, trials: int, seed: int) -> dict:
    """Play ``trials`` N-turn games against a random painter; final w_{m,c} per cell.

    Returns {(m, c): numpy array of per-trial weights}. Every game runs the full
    N turns (or until the builder stops) and is scored on 2N vertices.
    """
    painter = random_painter(p)
    universe = 2 * N
    out = {cell: np.empty(trials) for cell in cells}
    ks = sorted({m for m, _ in cells})
    for i in range(trials):
        t = play_online_ramsey(
            builder, painter, None, None, N, trial_seed(seed, i), stop_at_target=False, keep_records=False
        )
        state = t.final_state
        for k in ks:
            prep = _prepare(state, k, universe)
            memo: dict = {}
            for m, c in cells:
                if m == k:
                    out[(m, c)][i] = _aggregate(prep, k, c, p, memo)
    return out


def audit_run(builder, m: int, c: int, p: float, N: int, trials: int, seed: int) -> AuditReport:
    values = audit_final_weights(builder, [(m, c)], p, N, trials, seed)[(m, c)]
    return summarize_audit(builder, m, c, p, N, seed, values)


def summarize_audit(builder, m, c, p, N, seed, values) -> AuditReport:
    trials = len(values)
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(trials)) if trials > 1 else math.inf
    bound = weight_bound(m, c, p, N)
    return AuditReport(
        parameters={"builder": builder.ident, "m": m, "c": c, "p": p, "N": N, "seed": seed},
        trials=trials,
        mean=mean,
        stderr=stderr,
        bound=bound,
        verdict=mean + 3 * stderr <= bound,
    )
