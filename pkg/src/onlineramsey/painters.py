"""Painter policies: constant, i.i.d. random, and the triangle-avoiding alteration painter."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

import numpy as np

from .graph import SimpleGraph, bits


class LabelOverflow(RuntimeError):
    """More vertices activated than the alteration painter has labels for."""


class TurnLimitExceeded(RuntimeError):
    """The builder played past the turn count the alteration painter is sized for."""


class ConstantPainter:
    def __init__(self, red: bool):
        self.red = red
        self.ident = "all_red" if red else "all_blue"

    def start(self, state, rng):
        red = self.red
        return lambda u, w: red


def all_red_painter() -> ConstantPainter:
    return ConstantPainter(True)


def all_blue_painter() -> ConstantPainter:
    return ConstantPainter(False)


class RandomPainter:
    """Paints every presented edge red with probability p, independently."""

    def __init__(self, p: float):
        if not 0 < p < 1:
            raise ValueError("p must lie in (0, 1)")
        self.p = p
        self.ident = f"random(p={p!r})"

    def start(self, state, rng: random.Random):
        draw = rng.random
        p = self.p
        return lambda u, w: draw() < p


def random_painter(p: float) -> RandomPainter:
    return RandomPainter(p)


def default_red_probability(n: int) -> float:
    # the asymptotic choice exceeds 1 for small n; cap it
    return min(20 * math.log(n) / n, 0.5)


def default_label_pool(n: int) -> int:
    return max(1, math.floor(1e-6 * n * n / math.log(n) ** 2))


@dataclass
class AlterationPainterConfig:
    n: int
    p: float | None = None
    r: int | None = None
    activation_threshold: float | None = None
    formulation: str = "hidden"  # "hidden" samples G(r, p) up front, "lazy" flips per edge
    hidden_seed: int | None = None
    turn_limit: int | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if self.p is None:
            self.p = default_red_probability(self.n)
        if self.r is None:
            self.r = default_label_pool(self.n)
        if self.activation_threshold is None:
            self.activation_threshold = max(1.0, (self.n - 1) / 4)
        if not 0 < self.p < 1:
            raise ValueError("p must lie in (0, 1)")
        if self.r < 1:
            raise ValueError("r must be at least 1")
        if self.activation_threshold < 1:
            raise ValueError("activation threshold must be at least 1")
        if self.formulation not in ("hidden", "lazy"):
            raise ValueError("formulation must be 'hidden' or 'lazy'")
        if self.turn_limit is None:
            self.turn_limit = (self.n - 1) * self.r // 8

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "p": self.p,
            "r": self.r,
            "threshold": self.activation_threshold,
            "formulation": self.formulation,
            "hidden_seed": self.hidden_seed,
            "turn_limit": self.turn_limit,
        }


def sample_hidden_graph(r: int, p: float, rng: np.random.Generator) -> list[int]:
    """Bitset rows of a G(r, p) sample."""
    if r > 2048:
        rows = [0] * r
        for i in range(r - 1):
            for j in (np.flatnonzero(rng.random(r - 1 - i) < p) + (i + 1)).tolist():
                rows[i] |= 1 << j
                rows[j] |= 1 << i
        return rows
    adj = np.triu(rng.random((r, r)) < p, 1)
    adj |= adj.T
    packed = np.packbits(adj, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


@dataclass
class AlterationGameView:
    """Per-game painter internals, kept for audits after the game."""

    labels: dict[int, int] = field(default_factory=dict)
    active: set = field(default_factory=set)
    inactive_edges: int = 0
    altered_edges: int = 0
    hidden_rows: list[int] | None = None
    pair_queries: list[tuple[int, int, bool]] = field(default_factory=list)

    def hidden_graph(self) -> SimpleGraph | None:
        if self.hidden_rows is None:
            return None
        return SimpleGraph.from_rows(self.hidden_rows)


class AlterationPainter:
    """Never creates a red triangle.

    Vertices activate once their degree reaches the threshold and get labels in
    activation order. Edges built while an endpoint is inactive are blue. An
    active edge whose endpoints already share a red neighbour is blue. Any other
    edge is red iff its label pair is adjacent in a hidden G(r, p).
    """

    def __init__(self, cfg: AlterationPainterConfig, record_pairs: bool = False):
        self.cfg = cfg
        self.record_pairs = record_pairs
        self.last_view: AlterationGameView | None = None
        c = cfg
        self.ident = f"alteration(n={c.n},p={c.p!r},r={c.r},threshold={c.activation_threshold!r},{c.formulation})"

    def start(self, state, rng: random.Random):
        cfg = self.cfg
        view = AlterationGameView()
        self.last_view = view
        threshold = cfg.activation_threshold
        labels = view.labels
        p = cfg.p
        limit = cfg.turn_limit
        record = self.record_pairs
        if cfg.formulation == "hidden":
            seed = cfg.hidden_seed if cfg.hidden_seed is not None else rng.getrandbits(64)
            view.hidden_rows = sample_hidden_graph(cfg.r, p, np.random.default_rng(seed))
            hidden = view.hidden_rows
            draw = None
        else:
            hidden = None
            draw = rng.random

        def activate(v: int, degree: int):
            if v not in labels and degree >= threshold:
                if len(labels) >= cfg.r:
                    raise LabelOverflow(
                        f"alteration painter ran out of labels: vertex {v} would be active number {len(labels) + 1} of r={cfg.r}"
                    )
                labels[v] = len(labels)
                view.active.add(v)

        def paint(u: int, w: int) -> bool:
            if state.turn >= limit:
                raise TurnLimitExceeded(f"alteration painter is sized for {limit} turns")
            du = state.touched(u).bit_count() + 1
            dw = state.touched(w).bit_count() + 1
            a, b = (u, w) if u < w else (w, u)
            activate(a, du if a == u else dw)
            activate(b, dw if b == w else du)
            if u not in labels or w not in labels:
                view.inactive_edges += 1
                return False
            red_rows = state.first
            if u < len(red_rows) and w < len(red_rows) and red_rows[u] & red_rows[w]:
                view.altered_edges += 1
                return False
            i, j = labels[u], labels[w]
            if hidden is not None:
                red = bool(hidden[i] >> j & 1)
            else:
                red = draw() < p
            if record:
                view.pair_queries.append((min(i, j), max(i, j), red))
            return red

        return paint


def alteration_painter(cfg: AlterationPainterConfig, seed: int | None = None) -> AlterationPainter:
    """Build the painter; ``seed`` fixes the hidden graph independent of the game seed."""
    if seed is not None:
        cfg = AlterationPainterConfig(**{**cfg.__dict__, "hidden_seed": seed})
    return AlterationPainter(cfg)


def red_triangle_free(red_rows) -> bool:
    for u, row in enumerate(red_rows):
        for w in bits(row >> (u + 1)):
            if row & red_rows[u + 1 + w]:
                return False
    return True
