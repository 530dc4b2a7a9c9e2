"""Closed-form bound evaluators and the lower-bound certificate optimiser.

Everything that can overflow or underflow is computed in natural-log space.
Exact exponents are returned as ``Fraction``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .builders import alpha, bnf_turn_exponent, choose_ab
from .graph import SimpleGraph, max_matching_size

LOG_HALF = math.log(0.5)


def _log_sum(a: float, b: float) -> float:
    if a == -math.inf:
        return b
    if b == -math.inf:
        return a
    hi = max(a, b)
    return hi + math.log1p(math.exp(min(a, b) - hi))


def log_certificate_terms(m: int, n: int, N: int, p: float, c: int, d: int) -> tuple[float, float]:
    red = (math.comb(m, 2) - c * (c - 1)) * math.log(p) + (m - c) * math.log(2 * N)
    blue = (math.comb(n, 2) - d * (d - 1)) * math.log1p(-p) + (n - d) * math.log(2 * N)
    return red, blue


@dataclass(frozen=True)
class BoundCertificate:
    """Witness (m, n, N, p, c, d) for the turn lower bound; valid iff lhs <= 1/2."""

    m: int
    n: int
    N: int
    p: float
    c: int
    d: int

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise ValueError("p must lie in (0, 1)")
        if not 0 <= 2 * self.c <= self.m:
            raise ValueError("need 0 <= c <= m/2")
        if not 0 <= 2 * self.d <= self.n:
            raise ValueError("need 0 <= d <= n/2")
        if self.N < 1:
            raise ValueError("N must be at least 1")
        if self.m < 2 or self.n < 2:
            raise ValueError("m and n must be at least 2")

    @property
    def log_lhs(self) -> float:
        return _log_sum(*log_certificate_terms(self.m, self.n, self.N, self.p, self.c, self.d))

    @property
    def lhs_value(self) -> float:
        return math.exp(self.log_lhs)

    def as_dict(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "N": self.N,
            "p": self.p,
            "c": self.c,
            "d": self.d,
            "log10_lhs": self.log_lhs / math.log(10),
            "holds": certificate_holds(self),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BoundCertificate":
        """Rebuild from ``as_dict`` output; derived fields are recomputed, not trusted."""
        return cls(*(data[k] for k in ("m", "n", "N", "p", "c", "d")))


def certificate_holds(cert: BoundCertificate) -> bool:
    """True iff the certificate inequality holds, so the game needs more than N turns."""
    return cert.log_lhs <= LOG_HALF


def _min_over_k(total: int, size: int, top: int, lp: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Minimum over integers 0 <= k <= top of (total - k(k-1)) lp + (size - k) x, with its argmin.

    With lp < 0 the expression is convex in k with vertex (x/|lp| + 1)/2, so
    only the two integers around the clamped vertex need checking.
    """
    vertex = np.clip((x / -lp + 1) / 2, 0, top)
    best_val = np.full(x.shape, np.inf)
    best_k = np.zeros(x.shape, dtype=int)
    for k in (np.floor(vertex), np.ceil(vertex)):
        val = (total - k * (k - 1)) * lp + (size - k) * x
        better = val < best_val
        best_val = np.where(better, val, best_val)
        best_k = np.where(better, k.astype(int), best_k)
    return best_val, best_k


def _best_N_for_grid(m: int, n: int, ps: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Largest certified N per p (as float, possibly < 1), with the best c and d."""
    lp = np.log(ps)
    lq = np.log1p(-ps)
    red_total, blue_total = math.comb(m, 2), math.comb(n, 2)

    def logf(x):
        # x = log(2N) per grid point
        red, _ = _min_over_k(red_total, m, m // 2, lp, x)
        blue, _ = _min_over_k(blue_total, n, n // 2, lq, x)
        return np.logaddexp(red, blue)

    lo = np.full(len(ps), math.log(2.0))  # N = 1
    hi = np.full(len(ps), 200.0)
    ok_lo = logf(lo) <= LOG_HALF
    for _ in range(80):
        mid = (lo + hi) / 2
        good = logf(mid) <= LOG_HALF
        lo = np.where(good, mid, lo)
        hi = np.where(good, hi, mid)
    Ns = np.where(ok_lo, np.exp(lo) / 2, 0.0)
    _, cbest = _min_over_k(red_total, m, m // 2, lp, lo)
    _, dbest = _min_over_k(blue_total, n, n // 2, lq, lo)
    return Ns, cbest, dbest


def p_grid(per_decade: int = 200, decades: int = 10) -> np.ndarray:
    low = np.logspace(-decades, math.log10(0.5), per_decade * decades + 1)
    high = 1 - low[::-1]
    return np.unique(np.concatenate([low, high[1:]]))


def best_certified_lower_bound(m: int, n: int, per_decade: int = 200) -> tuple[int, BoundCertificate | None]:
    """Largest N with a valid certificate over a p grid and all admissible c, d.

    Returns ``(0, None)`` when nothing certifies.
    """
    if m < 3 or n < 3:
        raise ValueError("m and n must be at least 3")
    decades = max(4, math.ceil(2 * math.log10(max(m, n))) + 4)
    ps = p_grid(per_decade, decades)
    Ns, _, _ = _best_N_for_grid(m, n, ps)
    i = int(np.argmax(Ns))
    lo_p = ps[max(i - 1, 0)]
    hi_p = ps[min(i + 1, len(ps) - 1)]
    fine = np.linspace(lo_p, hi_p, per_decade + 1)
    ps = np.concatenate([ps, fine])
    Ns, cbest, dbest = _best_N_for_grid(m, n, ps)
    order = np.argsort(-Ns, kind="stable")
    best_N, best_cert = 0, None
    for j in order[:20]:
        N = int(math.floor(Ns[j]))
        if N < 1 or N <= best_N:
            continue
        p = float(ps[j])
        # float bisection may be off by one in either direction near the boundary
        for cand in (N + 1, N, N - 1):
            if cand < 1:
                continue
            cert = _best_cert_at(m, n, cand, p)
            if certificate_holds(cert):
                if cand > best_N:
                    best_N, best_cert = cand, cert
                break
    return best_N, best_cert


def _best_cert_at(m: int, n: int, N: int, p: float) -> BoundCertificate:
    x = np.array([math.log(2 * N)])
    _, c = _min_over_k(math.comb(m, 2), m, m // 2, np.array([math.log(p)]), x)
    _, d = _min_over_k(math.comb(n, 2), n, n // 2, np.array([math.log1p(-p)]), x)
    return BoundCertificate(m, n, N, p, int(c[0]), int(d[0]))


def f_lower_exponent(m: int, c: int) -> Fraction:
    if m < 3 or not 0 <= 2 * c <= m:
        raise ValueError("need m >= 3 and 0 <= c <= m/2")
    return Fraction(math.comb(m, 2) - c * (c - 1), m - c)


def f_lower_bound(m: int, c: int, p: float) -> float:
    """Lower bound (1/4) p^{-exponent} on the query-game turn count for K_m."""
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    return 0.25 * math.exp(-float(f_lower_exponent(m, c)) * math.log(p))


def optimal_c(m: int) -> int:
    """Integer c maximising the exponent; ties go to the smaller c."""
    return max(range(m // 2 + 1), key=lambda c: (f_lower_exponent(m, c), -c))


def cm(m: int) -> Fraction:
    if m < 4:
        raise ValueError("m must be at least 4")
    r = m % 3
    if r == 0:
        return Fraction(m, 2 * m - 3)
    if r == 1:
        return Fraction(2, 3)
    return Fraction(2 * m + 8, 6 * m - 3)


def conjectured_exponent(m: int) -> Fraction:
    """Exponent of p in the conjectured turn count for K_m: -(2/3)m + c_m."""
    return Fraction(-2 * m, 3) + cm(m)


def bnf_exponent_for(m: int) -> Fraction:
    a, b = choose_ab(m)
    return bnf_turn_exponent(a, b)


def log_t_upper_bound(h: SimpleGraph, k: int, p: float, N: int, A: float = 3.0) -> float:
    if A <= 1:
        raise ValueError("A must exceed 1")
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    if k < 0 or max_matching_size(h) < k:
        raise ValueError(f"graph has no {k}-matching")
    if p * N < 1:
        raise ValueError("p*N < 1 is outside the regime of this bound")
    e, v = h.edge_count(), h.n
    return e * math.log(A * e) + (e - k * (k - 1)) * math.log(p) + (v - k) * math.log(2 * N)


def t_upper_bound(h: SimpleGraph, k: int, p: float, N: int, A: float = 3.0) -> float:
    """Upper bound (A e)^e p^{e - k(k-1)} (2N)^{v - k} on expected copies of h in N queries."""
    return math.exp(log_t_upper_bound(h, k, p, N, A))


def t_exponents(h: SimpleGraph, k: int) -> tuple[int, int]:
    """(exponent of p, exponent of 2N) in the copy-count bound."""
    e, v = h.edge_count(), h.n
    return e - k * (k - 1), v - k


def e_plus(d: float, p: float, M: float, eps: float) -> float:
    """Edge-count ceiling for a d-vertex subgraph of a jumbled graph."""
    if d < 0:
        raise ValueError("d must be nonnegative")
    if d < M * math.sqrt(p):
        return d * d / 2
    if d < M:
        return (1 + eps) * p * M * M / 2
    return (1 + eps) * p * d * d / 2


def t_star(m: int, p: float, edge_count: float) -> float:
    """p^{C(m,2)} (2N/p)^{m/2} with N the edge count of the host graph."""
    if m < 2 or edge_count < 1:
        raise ValueError("need m >= 2 and edge_count >= 1")
    return math.exp(math.comb(m, 2) * math.log(p) + m / 2 * math.log(2 * edge_count / p))


def opt_p(m: int, n: int, C: float = 1.0, tiny: float = 1e-12) -> float:
    """Red probability of order (m/n) log(n/m) for the off-diagonal random painter."""
    if not 3 <= m < n or C <= 0:
        raise ValueError("need 3 <= m < n and C > 0")
    return min(max(C * m / n * math.log(n / m), tiny), 1 - tiny)


def bound_table(ms, ns, A: float = 3.0) -> list[dict]:
    """Rows (m, n, quantity, exponent, value_log10, parameters) for the closed forms."""
    rows = []
    for m in ms:
        if m >= 3:
            c = optimal_c(m)
            rows.append(
                {
                    "m": m,
                    "n": "",
                    "quantity": "f_lower_exponent",
                    "exponent": str(f_lower_exponent(m, c)),
                    "value_log10": "",
                    "parameters": f"c={c}",
                }
            )
        if m >= 4:
            a, b = choose_ab(m)
            rows.append(
                {
                    "m": m,
                    "n": "",
                    "quantity": "bnf_exponent",
                    "exponent": str(bnf_turn_exponent(a, b)),
                    "value_log10": "",
                    "parameters": f"a={a};b={b};alpha={alpha(a, b)}",
                }
            )
            rows.append(
                {
                    "m": m,
                    "n": "",
                    "quantity": "conjectured_exponent",
                    "exponent": str(conjectured_exponent(m)),
                    "value_log10": "",
                    "parameters": f"c_m={cm(m)}",
                }
            )
        for n in ns:
            if n >= m >= 3:
                N, cert = best_certified_lower_bound(m, n)
                rows.append(
                    {
                        "m": m,
                        "n": n,
                        "quantity": "certified_turn_lower_bound",
                        "exponent": "",
                        "value_log10": math.log10(N) if N > 0 else "",
                        "parameters": "" if cert is None else f"p={cert.p:.12g};c={cert.c};d={cert.d};N={N}",
                    }
                )
            if n > m >= 3:
                rows.append(
                    {
                        "m": m,
                        "n": n,
                        "quantity": "opt_p",
                        "exponent": "",
                        "value_log10": math.log10(opt_p(m, n)),
                        "parameters": "C=1",
                    }
                )
    return rows
