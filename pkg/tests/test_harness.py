import csv
import io
import json
import math
from fractions import Fraction
from statistics import NormalDist

import numpy as np
import pytest
from hypothesis import given, strategies as st

from onlineramsey.builders import DirectQueryBuilder, triangle_builder
from onlineramsey.exact import exact_f
from onlineramsey.graph import SimpleGraph
from onlineramsey.harness import (
    NonConvergence,
    RunManifest,
    estimate_f_hat,
    estimate_success,
    fmt,
    new_manifest,
    render,
    sha256,
    slope_fit,
    wilson_interval,
)

from conftest import exact_builder_probability

K2, K3 = SimpleGraph.complete(2), SimpleGraph.complete(3)


def wilson_closed_form(k, n, conf=0.95):
    z = NormalDist().inv_cdf(0.5 + conf / 2)
    phat = k / n
    mid = (phat + z * z / (2 * n)) / (1 + z * z / n)
    half = z / (1 + z * z / n) * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n))
    return mid - half, mid + half


@given(st.integers(1, 5000), st.data())
def test_wilson_matches_closed_form(n, data):
    k = data.draw(st.integers(0, n))
    lo, hi = wilson_interval(k, n)
    elo, ehi = wilson_closed_form(k, n)
    assert lo == pytest.approx(elo, abs=1e-9) and hi == pytest.approx(ehi, abs=1e-9)
    assert lo <= k / n <= hi


def test_wilson_rejects_zero_trials():
    with pytest.raises(ValueError):
        wilson_interval(0, 0)


def test_single_query_success_rate():
    rep = estimate_success(DirectQueryBuilder(), K2, 0.5, 1, 10_000, seed=3)
    assert abs(rep.estimate - 0.5) <= 0.015
    assert rep.ci_low <= rep.estimate <= rep.ci_high
    assert rep.mean_turns == 1.0


def test_triangle_builder_interval_covers_exact_probability():
    p = Fraction(1, 2)
    N, _ = exact_f(K3, p, 8)
    exact = exact_builder_probability(triangle_builder(0.5, c_T=2.0), K3, p, N)
    assert exact == Fraction(1, 2)
    rep = estimate_success(triangle_builder(0.5, c_T=2.0), K3, 0.5, N, 10_000, seed=7)
    assert rep.ci_low <= float(exact) <= rep.ci_high


def test_interval_width_scales_with_root_trials():
    small = estimate_success(DirectQueryBuilder(), K2, 0.5, 1, 100, seed=1)
    large = estimate_success(DirectQueryBuilder(), K2, 0.5, 1, 10_000, seed=1)
    ratio = (small.ci_high - small.ci_low) / (large.ci_high - large.ci_low)
    assert 8.5 <= ratio <= 11.5


def test_estimate_needs_100_trials():
    with pytest.raises(ValueError):
        estimate_success(DirectQueryBuilder(), K2, 0.5, 1, 99, seed=0)


def test_f_hat_single_edge():
    assert estimate_f_hat(DirectQueryBuilder(), K2, 0.6, 2000, seed=0) == 1
    # at p = 1/2 one query succeeds with probability exactly 1/2, which the
    # Wilson lower bound cannot certify; the conservative rule answers 2
    assert estimate_f_hat(DirectQueryBuilder(), K2, 0.5, 2000, seed=0) == 2


def test_f_hat_triangle_near_exact_value():
    f_exact, _ = exact_f(K3, Fraction(1, 2), 8)
    f_hat = estimate_f_hat(triangle_builder(0.5, c_T=2.0), K3, 0.5, 2000, seed=4)
    assert abs(f_hat - f_exact) <= 1
    assert f_hat >= f_exact - 1


def test_f_hat_nonincreasing_in_p():
    values = [estimate_f_hat(triangle_builder(p, c_T=2.0), K3, p, 2000, seed=9) for p in (0.2, 0.35, 0.5)]
    assert values[0] >= values[1] >= values[2]


def test_f_hat_probes_share_one_seed_schedule():
    res = estimate_f_hat(triangle_builder(0.3, c_T=2.0), K3, 0.3, 500, seed=2, detail=True)
    probes = sorted(res.probes)
    # with common random numbers success counts are monotone in N
    assert all(a[1] <= b[1] for a, b in zip(probes, probes[1:]))
    assert any(N == res.f_hat for N, _ in probes)


class _Never:
    budget_oblivious = True
    ident = "never"

    def start(self, state, rng):
        return ((0, i) for i in range(1, 10**9))


def test_f_hat_reports_non_convergence():
    with pytest.raises(NonConvergence):
        estimate_f_hat(_Never(), K3, 0.5, 100, seed=0, hard_cap=64)


def test_slope_of_exact_power_law():
    ps = np.array([0.4, 0.3, 0.2, 0.1, 0.05])
    pts = list(zip(np.log(ps), np.log(3.0 * ps**-1.5)))
    slope, se = slope_fit(pts)
    assert slope == pytest.approx(-1.5, abs=1e-12)
    assert se < 1e-10


@pytest.mark.parametrize("seed", range(10))
def test_slope_with_five_percent_noise(seed):
    rng = np.random.default_rng(seed)
    ps = np.array([0.4, 0.3, 0.2, 0.1, 0.05])
    f = 3.0 * ps**-1.5 * (1 + 0.05 * rng.standard_normal(len(ps)))
    slope, _ = slope_fit(list(zip(np.log(ps), np.log(f))))
    assert abs(slope + 1.5) <= 0.1


def test_slope_of_constant_data_and_bad_inputs():
    assert slope_fit([(x, 2.0) for x in range(5)])[0] == 0
    with pytest.raises(ValueError):
        slope_fit([(0, 1), (1, 2), (2, 3)])
    with pytest.raises(ValueError):
        slope_fit([(1, y) for y in range(5)])


def test_fmt_uses_twelve_significant_digits():
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(np.float64(2.0)) == "2"
    assert fmt(np.int64(7)) == "7"
    assert fmt(True) == "True"
    assert fmt(math.inf) == "inf"


def test_render_csv_and_json():
    rows = [{"p": 0.1, "f": 12, "ok": True}, {"p": 1 / 7, "f": 9, "ok": False}]
    text = render(rows, "csv")
    back = list(csv.DictReader(io.StringIO(text)))
    assert back[1] == {"p": "0.142857142857", "f": "9", "ok": "False"}
    data = json.loads(render(rows, "json"))
    assert data[1]["p"] == 0.142857142857
    with pytest.raises(ValueError):
        render(rows, "xml")


def test_manifest_round_trip():
    man = new_manifest("estimate-f", 5, {"ps": [0.5, 0.2]}, 2000, "csv")
    man.outputs = {"out.csv": sha256("x")}
    back = RunManifest.from_json(man.to_json())
    assert back == man
    bad = json.loads(man.to_json())
    bad["schema"] = 99
    with pytest.raises(ValueError):
        RunManifest.from_json(json.dumps(bad))
