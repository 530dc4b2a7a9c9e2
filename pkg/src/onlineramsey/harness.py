"""Monte Carlo estimation, exponent fits and reproducible run manifests."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .game import play_subgraph_query, trial_seed

SCHEMA_VERSION = 1


class NonConvergence(RuntimeError):
    """Estimated success never reached 1/2 below the hard cap."""


def fmt(x) -> str:
    """Serialise numbers with 12 significant digits; other values via str."""
    if isinstance(x, bool) or x is None:
        return str(x)
    if isinstance(x, (float, np.floating)):
        if math.isinf(x) or math.isnan(x):
            return str(float(x))
        return f"{float(x):.12g}"
    if isinstance(x, np.integer):
        return str(int(x))
    return str(x)


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    if trials <= 0:
        raise ValueError("trials must be positive")
    ci = stats.binomtest(int(successes), int(trials)).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


@dataclass
class EstimateReport:
    estimate: float
    ci_low: float
    ci_high: float
    trials: int
    successes: int
    mean_turns: float  # over all trials
    mean_turns_success: float  # over successful trials; nan if none

    def as_dict(self) -> dict:
        return asdict(self)


def _report(hits: np.ndarray, turns: np.ndarray) -> EstimateReport:
    trials = len(hits)
    k = int(hits.sum())
    lo, hi = wilson_interval(k, trials)
    return EstimateReport(
        estimate=k / trials,
        ci_low=lo,
        ci_high=hi,
        trials=trials,
        successes=k,
        mean_turns=float(turns.mean()),
        mean_turns_success=float(turns[hits].mean()) if k else math.nan,
    )


def estimate_success(builder, target, p: float, N: int, trials: int, seed: int) -> EstimateReport:
    """Fraction of games that find ``target`` within N queries, with a Wilson 95% interval."""
    if trials < 100:
        raise ValueError("use at least 100 trials")
    hits = np.zeros(trials, dtype=bool)
    turns = np.zeros(trials)
    for i in range(trials):
        t = play_subgraph_query(builder, target, p, N, trial_seed(seed, i), keep_records=False)
        hits[i] = t.outcome == "found"
        turns[i] = t.final_state.turn
    return _report(hits, turns)


def hitting_times(builder, target, p: float, trials: int, seed: int, hard_cap: int) -> np.ndarray:
    """Turn at which each trial first finds ``target`` (inf if not by ``hard_cap``)."""
    out = np.full(trials, np.inf)
    for i in range(trials):
        t = play_subgraph_query(builder, target, p, hard_cap, trial_seed(seed, i), keep_records=False)
        if t.outcome == "found":
            out[i] = t.final_state.turn
    return out


@dataclass
class FHatResult:
    f_hat: int
    probes: list = field(default_factory=list)  # (N, successes) pairs evaluated
    trials: int = 0
    report: EstimateReport | None = None


def estimate_f_hat(
    builder, target, p: float, trials: int, seed: int, hard_cap: int = 1 << 20, detail: bool = False
):
    """Least N whose Wilson lower bound on success is at least 1/2.

    Doubling then bisection over N. Every probe uses the same trial seeds. For
    budget-oblivious builders a game with cap N is a prefix of the game with
    the hard cap, so each trial is played once and probes read hitting times.
    """
    if getattr(builder, "budget_oblivious", False):
        hits = hitting_times(builder, target, p, trials, seed, hard_cap)

        def successes(N: int) -> int:
            return int((hits <= N).sum())

    else:

        def successes(N: int) -> int:
            return sum(
                play_subgraph_query(builder, target, p, N, trial_seed(seed, i), keep_records=False).outcome == "found"
                for i in range(trials)
            )

    probes: list = []

    def ok(N: int) -> bool:
        k = successes(N)
        probes.append((N, k))
        return wilson_interval(k, trials)[0] >= 0.5

    hi = 1
    while not ok(hi):
        if hi >= hard_cap:
            raise NonConvergence(f"success stayed below 1/2 up to N={hard_cap}")
        hi = min(2 * hi, hard_cap)
    lo = hi // 2  # known to fail (or 0)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    if not detail:
        return hi
    return FHatResult(hi, probes, trials)


def slope_fit(points) -> tuple[float, float]:
    """Least-squares slope and its standard error for (x, y) points."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 4:
        raise ValueError("need at least 4 points")
    if np.ptp(pts[:, 0]) == 0:
        raise ValueError("abscissae are all equal")
    res = stats.linregress(pts[:, 0], pts[:, 1])
    return float(res.slope), float(res.stderr)


# ---------------------------------------------------------------------------
# manifests


@dataclass
class RunManifest:
    experiment: str
    seed: int
    params: dict
    trials: int | None
    format: str
    outputs: dict = field(default_factory=dict)  # path -> sha256
    created: str = ""
    schema: int = SCHEMA_VERSION

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        data = json.loads(text)
        if data.get("schema") != SCHEMA_VERSION:
            raise ValueError(f"unsupported manifest schema {data.get('schema')}")
        return cls(**data)


def sha256(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def new_manifest(experiment: str, seed: int, params: dict, trials, fmt_: str) -> RunManifest:
    return RunManifest(
        experiment=experiment,
        seed=seed,
        params=params,
        trials=trials,
        format=fmt_,
        created=time.strftime("%Y-%m-%dT%H:%M:%S"),
    )


def render(rows: list[dict], fmt_: str) -> str:
    """CSV (header from the first row) or JSON, floats at 12 significant digits."""
    if fmt_ == "json":
        return json.dumps([{k: _jsonable(v) for k, v in r.items()} for r in rows], indent=2, sort_keys=True) + "\n"
    if fmt_ != "csv":
        raise ValueError(f"unknown format {fmt_!r}")
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({k: fmt(v) for k, v in r.items()})
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v) or math.isnan(v):
            return str(v)
        return float(f"{v:.12g}")
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v
