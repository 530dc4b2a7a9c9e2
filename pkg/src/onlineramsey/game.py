"""Turn-by-turn engines for the online Ramsey game and the subgraph query game.

Policies
--------
A builder policy has an ``ident`` string and ``start(state, rng)`` returning a
generator. The generator yields pairs ``(u, w)`` and is sent back ``True`` when
the pair came back red (Ramsey game) or was built (query game), else ``False``.
Returning from the generator ends the game with outcome ``stopped``.

A painter policy has an ``ident`` and ``start(state, rng)`` returning a
callable ``paint(u, w) -> bool`` (True means red). Painters are called before
the edge is recorded, so they see the graph as it was before the move.

Vertices are plain integers allocated lazily; indices must stay below
``2 * turn_cap``.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Protocol

import numpy as np

from .graph import SimpleGraph, bits, clique_size_if_complete, has_clique_in, has_copy_through_edge

ONGOING = "ongoing"
RED_CLIQUE = "red_clique"
BLUE_CLIQUE = "blue_clique"
FOUND = "found"
BUDGET_EXHAUSTED = "budget_exhausted"
STOPPED = "stopped"

SUCCESS_OUTCOMES = {RED_CLIQUE, BLUE_CLIQUE, FOUND}

BUILDER_ROLE, PAINTER_ROLE, CHANCE_ROLE = 0, 1, 2


class ProtocolViolation(RuntimeError):
    """A policy made an illegal move; the message names the policy."""


class BuilderPolicy(Protocol):
    ident: str

    def start(self, state: Any, rng: random.Random) -> Iterator[tuple[int, int]]: ...


class PainterPolicy(Protocol):
    ident: str

    def start(self, state: Any, rng: random.Random) -> Callable[[int, int], bool]: ...


def substream_seed(seed: int, role: int, extra: tuple[int, ...] = ()) -> int:
    """Seed for an independent per-role stream derived from a root seed."""
    ss = np.random.SeedSequence(seed, spawn_key=(role,) + tuple(extra))
    a, b = ss.generate_state(2, dtype=np.uint64)
    return int(a) << 64 | int(b)


def role_rng(seed: int, role: int) -> random.Random:
    return random.Random(substream_seed(seed, role))


def trial_seed(root: int, index: int) -> int:
    """Per-trial seed derived from an experiment's root seed."""
    return int(np.random.SeedSequence(root, spawn_key=(1 << 20, index)).generate_state(1, dtype=np.uint64)[0])


class _Board:
    """Shared bookkeeping: lazily grown bitset rows for two edge classes."""

    def __init__(self, turn_cap: int):
        self.turn_cap = turn_cap
        self.vertex_cap = 2 * turn_cap
        self.turn = 0
        self.outcome = ONGOING
        self.first = [0]  # rows of the first class (red / built)
        self.second = [0]  # rows of the second class (blue / failed)
        self.vertices_used = 0
        self.notes: list[str] = []

    def _grow(self, v: int):
        if v >= len(self.first):
            extra = v + 1 - len(self.first)
            self.first.extend([0] * extra)
            self.second.extend([0] * extra)

    def _check_move(self, move, who: str):
        try:
            u, w = move
            u, w = int(u), int(w)
        except (TypeError, ValueError):
            raise ProtocolViolation(f"builder {who} yielded a malformed move {move!r}") from None
        if u == w:
            raise ProtocolViolation(f"builder {who} proposed a loop at vertex {u} on turn {self.turn + 1}")
        if not (0 <= u < self.vertex_cap and 0 <= w < self.vertex_cap):
            raise ProtocolViolation(
                f"builder {who} used vertex outside [0, {self.vertex_cap}) on turn {self.turn + 1}: ({u}, {w})"
            )
        self._grow(max(u, w))
        if (self.first[u] | self.second[u]) >> w & 1:
            raise ProtocolViolation(f"builder {who} repeated pair ({u}, {w}) on turn {self.turn + 1}")
        return u, w

    def _record(self, u: int, w: int, first: bool):
        rows = self.first if first else self.second
        rows[u] |= 1 << w
        rows[w] |= 1 << u
        self.turn += 1
        top = max(u, w) + 1
        if top > self.vertices_used:
            self.vertices_used = top

    def note(self, message: str):
        self.notes.append(message)

    def is_used(self, u: int, w: int) -> bool:
        if max(u, w) >= len(self.first):
            return False
        return bool((self.first[u] | self.second[u]) >> w & 1)

    def touched(self, v: int) -> int:
        if v >= len(self.first):
            return 0
        return self.first[v] | self.second[v]


class ColoredGameState(_Board):
    """Evolving red/blue graph of an online Ramsey game."""

    def __init__(self, m: int | None, n: int | None, turn_cap: int):
        super().__init__(turn_cap)
        self.m, self.n = m, n

    @property
    def red(self) -> list[int]:
        return self.first

    @property
    def blue(self) -> list[int]:
        return self.second

    @property
    def targets(self):
        return (self.m, self.n)

    def color(self, u: int, w: int) -> str | None:
        if max(u, w) >= len(self.first):
            return None
        if self.first[u] >> w & 1:
            return "R"
        if self.second[u] >> w & 1:
            return "B"
        return None

    @property
    def edge_colors(self) -> dict[tuple[int, int], str]:
        out = {}
        for u in range(len(self.first)):
            for w in bits(self.first[u] >> (u + 1)):
                out[(u, u + 1 + w)] = "R"
            for w in bits(self.second[u] >> (u + 1)):
                out[(u, u + 1 + w)] = "B"
        return out

    def red_graph(self) -> SimpleGraph:
        return SimpleGraph.from_rows(self.first[: self.vertices_used])

    def blue_graph(self) -> SimpleGraph:
        return SimpleGraph.from_rows(self.second[: self.vertices_used])

    def red_degree(self, v: int) -> int:
        return self.first[v].bit_count() if v < len(self.first) else 0

    def degree(self, v: int) -> int:
        return self.touched(v).bit_count()


class QueryGameState(_Board):
    """Evolving built/failed/untried graph of a subgraph query game."""

    def __init__(self, target: SimpleGraph | None, p: float, turn_cap: int):
        super().__init__(turn_cap)
        self.target = target
        self.p = p

    @property
    def built(self) -> list[int]:
        return self.first

    @property
    def failed(self) -> list[int]:
        return self.second

    @property
    def edge_status(self) -> dict[tuple[int, int], str]:
        out = {}
        for u in range(len(self.first)):
            for w in bits(self.first[u] >> (u + 1)):
                out[(u, u + 1 + w)] = "built"
            for w in bits(self.second[u] >> (u + 1)):
                out[(u, u + 1 + w)] = "failed"
        return out

    def built_graph(self) -> SimpleGraph:
        return SimpleGraph.from_rows(self.first[: self.vertices_used])


@dataclass(frozen=True)
class Transcript:
    game: str  # "ramsey" or "query"
    seed: int
    builder: str
    painter: str | None
    params: dict
    records: tuple[tuple[int, int, int, str], ...]
    outcome: str
    notes: tuple[str, ...] = ()
    final_state: Any = field(default=None, compare=False, repr=False)

    def dumps(self) -> str:
        lines = [
            f"# game {self.game}",
            f"# seed {self.seed}",
            f"# builder {self.builder}",
            f"# painter {self.painter if self.painter is not None else '-'}",
            f"# params {json.dumps(self.params, sort_keys=True, separators=(',', ':'))}",
            f"# outcome {self.outcome}",
        ]
        lines += [f"# note {note}" for note in self.notes]
        lines += [f"t {t} {u} {w} {r}" for t, u, w, r in self.records]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Transcript":
        header: dict[str, str] = {}
        notes = []
        records = []
        for line in text.splitlines():
            if not line:
                continue
            if line.startswith("# "):
                key, _, value = line[2:].partition(" ")
                if key == "note":
                    notes.append(value)
                else:
                    header[key] = value
            elif line.startswith("t "):
                _, t, u, w, r = line.split()
                if r not in "RBSF" or len(r) != 1:
                    raise ValueError(f"bad result code {r!r}")
                records.append((int(t), int(u), int(w), r))
            else:
                raise ValueError(f"unrecognised transcript line {line!r}")
        painter = header.get("painter")
        return cls(
            game=header["game"],
            seed=int(header["seed"]),
            builder=header["builder"],
            painter=None if painter in (None, "-") else painter,
            params=json.loads(header["params"]),
            records=tuple(records),
            outcome=header["outcome"],
            notes=tuple(notes),
        )

    @property
    def success(self) -> int:
        return success_indicator(self)

    @property
    def turns(self) -> int:
        return turns_used(self)


def success_indicator(t: Transcript) -> int:
    if t.outcome == ONGOING:
        raise ValueError("transcript is not terminal")
    return int(t.outcome in SUCCESS_OUTCOMES)


def turns_used(t: Transcript) -> int:
    if t.outcome == ONGOING:
        raise ValueError("transcript is not terminal")
    return len(t.records)


def _clique_through(rows: list[int], u: int, w: int, k: int) -> bool:
    """Whether the edge (u, w) lies in a k-clique of ``rows``."""
    if k <= 2:
        return True
    return has_clique_in(rows, rows[u] & rows[w], k - 2)


def play_online_ramsey(
    builder,
    painter,
    m: int | None,
    n: int | None,
    turn_cap: int,
    seed: int,
    *,
    stop_at_target: bool = True,
    observer: Callable[[ColoredGameState, int, int, bool], None] | None = None,
    keep_records: bool = True,
) -> Transcript:
    """Play one online Ramsey game; the Builder wants red K_m or blue K_n.

    With ``stop_at_target=False`` (or a target of None) the game runs until the
    cap or until the builder stops, and the outcome records the first target
    reached, if any. ``observer`` is called after every coloured edge.
    """
    for name, val in (("m", m), ("n", n)):
        if val is not None and val < 2:
            raise ValueError(f"{name} must be at least 2")
    if turn_cap < 1:
        raise ValueError("turn_cap must be positive")
    state = ColoredGameState(m, n, turn_cap)
    gen = builder.start(state, role_rng(seed, BUILDER_ROLE))
    paint = painter.start(state, role_rng(seed, PAINTER_ROLE))
    records: list[tuple[int, int, int, str]] = []
    outcome = ONGOING
    reply = None
    bid, pid = builder.ident, painter.ident
    while state.turn < turn_cap:
        try:
            move = next(gen) if reply is None else gen.send(reply)
        except StopIteration:
            outcome = STOPPED if outcome == ONGOING else outcome
            break
        u, w = state._check_move(move, bid)
        red = paint(u, w)
        if red is not True and red is not False:
            raise ProtocolViolation(f"painter {pid} returned {red!r} instead of a colour for ({u}, {w})")
        state._record(u, w, red)
        if keep_records:
            records.append((state.turn, u, w, "R" if red else "B"))
        if observer is not None:
            observer(state, u, w, red)
        if outcome == ONGOING:
            if red and m is not None and _clique_through(state.first, u, w, m):
                outcome = RED_CLIQUE
            elif not red and n is not None and _clique_through(state.second, u, w, n):
                outcome = BLUE_CLIQUE
            if outcome != ONGOING and stop_at_target:
                break
        reply = red
    if outcome == ONGOING:
        outcome = BUDGET_EXHAUSTED
    state.outcome = outcome
    gen.close()
    return Transcript(
        game="ramsey",
        seed=seed,
        builder=bid,
        painter=pid,
        params={"m": m, "n": n, "turn_cap": turn_cap, "stop_at_target": stop_at_target},
        records=tuple(records),
        outcome=outcome,
        notes=tuple(state.notes),
        final_state=state,
    )


def play_subgraph_query(
    builder,
    target: SimpleGraph | None,
    p: float,
    turn_cap: int,
    seed: int,
    *,
    stop_at_target: bool = True,
    observer: Callable[[QueryGameState, int, int, bool], None] | None = None,
    keep_records: bool = True,
) -> Transcript:
    """Play one subgraph query game: each query succeeds independently with probability p."""
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    if turn_cap < 1:
        raise ValueError("turn_cap must be positive")
    state = QueryGameState(target, p, turn_cap)
    gen = builder.start(state, role_rng(seed, BUILDER_ROLE))
    chance = role_rng(seed, CHANCE_ROLE).random
    clique = clique_size_if_complete(target) if target is not None else None
    records: list[tuple[int, int, int, str]] = []
    outcome = ONGOING
    reply = None
    bid = builder.ident
    while state.turn < turn_cap:
        try:
            move = next(gen) if reply is None else gen.send(reply)
        except StopIteration:
            outcome = STOPPED if outcome == ONGOING else outcome
            break
        u, w = state._check_move(move, bid)
        ok = chance() < p
        state._record(u, w, ok)
        if keep_records:
            records.append((state.turn, u, w, "S" if ok else "F"))
        if observer is not None:
            observer(state, u, w, ok)
        if ok and outcome == ONGOING and target is not None:
            if clique is not None:
                hit = _clique_through(state.first, u, w, clique)
            else:
                hit = has_copy_through_edge(target, state.first, u, w)
            if hit:
                outcome = FOUND
                if stop_at_target:
                    break
        reply = ok
    if outcome == ONGOING:
        outcome = BUDGET_EXHAUSTED
    state.outcome = outcome
    gen.close()
    return Transcript(
        game="query",
        seed=seed,
        builder=bid,
        painter=None,
        params={
            "target": _graph_label(target),
            "p": p,
            "turn_cap": turn_cap,
            "stop_at_target": stop_at_target,
        },
        records=tuple(records),
        outcome=outcome,
        notes=tuple(state.notes),
        final_state=state,
    )


def _graph_label(g: SimpleGraph | None) -> str | None:
    if g is None:
        return None
    return f"v={g.n};" + ",".join(f"{u}-{w}" for u, w in g.edges())
