"""Canonical labelling of small edge-coloured graphs with vertex marks.

A graph is given by ``n`` and a colour matrix ``col[u][w]`` (0 means no edge,
positive ints are edge colours). Vertex marks are arbitrary sortable values.
``canonical_form`` returns a code that is equal for two inputs iff they are
isomorphic by a colour- and mark-preserving bijection.

The method is colour refinement followed by individualisation of the first
non-singleton cell, keeping the lexicographically least code over all leaves.
Cells whose members are pairwise twins are branched on once only.
"""

from __future__ import annotations

from typing import Hashable, Sequence


def _refine(n: int, col: Sequence[Sequence[int]], cells: list[int]) -> list[int]:
    """Equitable refinement; new cell ids are ranks of sorted signatures."""
    count = len(set(cells))
    while True:
        sigs = []
        for v in range(n):
            row = col[v]
            nb = sorted((row[w], cells[w]) for w in range(n) if w != v and row[w])
            sigs.append((cells[v], tuple(nb)))
        order = sorted(set(sigs))
        rank = {s: i for i, s in enumerate(order)}
        cells = [rank[s] for s in sigs]
        if len(order) == count:
            return cells
        count = len(order)


def _encode(n: int, col, marks, perm: list[int]) -> tuple:
    code = [marks[v] for v in perm]
    for j in range(1, n):
        pj = col[perm[j]]
        for i in range(j):
            code.append(pj[perm[i]])
    return tuple(code)


def _twins(col, cell: list[int]) -> bool:
    """All members share colours to outside vertices and to each other."""
    n = len(col)
    first = cell[0]
    inner = {col[a][b] for a in cell for b in cell if a != b}
    if len(inner) > 1:
        return False
    members = set(cell)
    for v in cell[1:]:
        for w in range(n):
            if w not in members and col[v][w] != col[first][w]:
                return False
    return True


def canonical_form(
    n: int, col: Sequence[Sequence[int]], marks: Sequence[Hashable] | None = None
) -> tuple[tuple, list[int]]:
    """Return ``(code, perm)``: ``perm[i]`` is the original vertex placed at position i."""
    if marks is None:
        marks = [0] * n
    if n == 0:
        return (), []
    # seed cells by mark and per-colour degree, ranked so the ids are invariant
    seed = []
    for v in range(n):
        deg: dict[int, int] = {}
        for w in range(n):
            c = col[v][w]
            if c and w != v:
                deg[c] = deg.get(c, 0) + 1
        seed.append((marks[v], tuple(sorted(deg.items()))))
    order = sorted(set(seed))
    rank = {s: i for i, s in enumerate(order)}
    cells = _refine(n, col, [rank[s] for s in seed])

    best: list = [None, None]

    def search(cells: list[int]):
        groups: dict[int, list[int]] = {}
        for v, c in enumerate(cells):
            groups.setdefault(c, []).append(v)
        if len(groups) == n:
            perm = sorted(range(n), key=lambda v: cells[v])
            code = _encode(n, col, marks, perm)
            if best[0] is None or code < best[0]:
                best[0], best[1] = code, perm
            return
        target = min(c for c, vs in groups.items() if len(vs) > 1)
        cell = groups[target]
        choices = cell[:1] if _twins(col, cell) else cell
        for v in choices:
            # split v off in front of its cell: doubling keeps ids ordered
            split = [2 * c + 1 for c in cells]
            split[v] = 2 * target
            search(_refine(n, col, split))

    search(cells)
    return best[0], best[1]


def canonical_code(n: int, col, marks=None) -> tuple:
    return canonical_form(n, col, marks)[0]


def relabel(col, perm: Sequence[int]) -> list[list[int]]:
    n = len(perm)
    return [[col[perm[i]][perm[j]] for j in range(n)] for i in range(n)]


def brute_force_isomorphic(n1, col1, marks1, n2, col2, marks2) -> bool:
    """Exhaustive isomorphism test for test oracles (n <= 8)."""
    from itertools import permutations

    if n1 != n2:
        return False
    n = n1
    marks1 = marks1 or [0] * n
    marks2 = marks2 or [0] * n
    if sorted(marks1) != sorted(marks2):
        return False
    for perm in permutations(range(n)):
        if any(marks1[v] != marks2[perm[v]] for v in range(n)):
            continue
        if all(col1[u][w] == col2[perm[u]][perm[w]] for u in range(n) for w in range(u + 1, n)):
            return True
    return False
