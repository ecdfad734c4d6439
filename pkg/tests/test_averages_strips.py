import math
from itertools import combinations

import mpmath
import numpy as np
import pytest

from hrtlab.diophantine import scale_sequence
from hrtlab.exact import RealParam, parse_real
from hrtlab.orbit import averages, strips
from hrtlab.orbit.core import batch_reciprocal_sums
from hrtlab.trigpoly import Coefficients, OrbitPolynomial, zeros

PHI = parse_real("surd:(1+1√5)/2")
ONE = RealParam.rational(1)
SEQ = scale_sequence(PHI, ONE, "1/4", 6, 10 ** 5)
POLY = OrbitPolynomial.two_freq(Coefficients(1, 1, 1), PHI, ONE)


@pytest.mark.parametrize("k", [1, 3, 5])
def test_scale_estimate_measure_within_delta(k):
    e = SEQ.entries[k - 1]
    est = averages.scale_exceptional_set(POLY, e, 0.01, 10000, seed=3)
    assert est.violating_fraction <= 0.01
    # fresh points: the estimated set keeps its measure up to sampling error
    fresh = averages.sample_points(20000, 99)
    frac = float(np.mean(est.member(fresh)))
    assert frac <= 0.01 + 4 * math.sqrt(0.01 / 20000)


def test_scale_estimate_worker_invariance():
    e = SEQ.entries[3]
    a = averages.scale_exceptional_set(POLY, e, 0.01, 3000, seed=5, workers=1)
    b = averages.scale_exceptional_set(POLY, e, 0.01, 3000, seed=5, workers=8)
    assert a.to_json() == b.to_json()


def test_power_form_quantile():
    stat = lambda q: batch_reciprocal_sums(POLY, q, 0, 200) / 200.0
    est = averages.power_exceptional_set(stat, 0.02, 5000, seed=1)
    assert est.violating_fraction <= 0.01
    xs = averages.sample_points(5000, 1)
    assert np.mean(stat(xs) <= est.C) >= 0.99


def test_chebyshev_constants():
    t1, C1, C2 = averages.chebyshev_constants(100, 0.1)
    assert t1 == pytest.approx(5 * math.log(5000) / 0.1)
    assert C1 == pytest.approx(t1 / math.log(100))
    assert C2 == pytest.approx(5000)


def test_generic_sums_measure():
    pts = np.random.default_rng(2).random(200)
    g = averages.generic_reciprocal_sums(pts, 4000, 0.05, seed=3)
    assert g.estimate.violating_fraction <= 0.05
    s1, s2 = averages.reciprocal_sums_at(pts, 0.123)
    d = np.abs(0.123 - pts)
    d = np.minimum(d, 1 - d)
    assert s1 == pytest.approx(np.sum(1 / d) / 200)
    assert s2 == pytest.approx(np.sum(1 / d ** 2) / 200 ** 2)


def _brute_count(theta, xi, R, N):
    with mpmath.workdps(50):
        t = theta.to_mpf(50)
        x = mpmath.mpf(xi)
        return sum(1 for n in range(N) if abs(n * t - x - mpmath.nint(n * t - x)) < R)


@pytest.mark.parametrize("xi,R", [(0.3, 0.01), (0.0, 0.001), (0.77, 0.05), (0.5, 0.5)])
def test_ball_count_against_enumeration(xi, R):
    bc = averages.diophantine_ball_count(xi, R, 3000, PHI, 2.0, 0.1)
    assert bc.count == _brute_count(PHI, xi, R, 3000)
    assert bc.holds and bc.pair_violations == 0


def test_ball_count_rejects_small_exponent():
    with pytest.raises(averages.ParameterError):
        averages.diophantine_ball_count(0.1, 0.01, 100, PHI, 0.5, 0.1)


def test_an_profile_no_triangle_bound():
    r = averages.an_profile(Coefficients(4, 1, 1), PHI, ONE, 0.3, 2000, gamma=1.0)
    assert r.extra["branch"] == "no-triangle" and r.within_bound


def test_an_profile_slope_branch():
    s2 = math.sqrt(2)
    alpha = parse_real("surd:0-1√2")
    r = averages.an_profile(Coefficients(1 + s2, 1, s2), alpha, ONE, 0.3, 1000)
    assert r.extra["branch"] == "alpha+t*beta=0"


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_strip_pairs_exhaustive(k):
    e = SEQ.entries[k - 1]
    z = zeros(Coefficients(1, 1, 1)).zeros[0]
    rep = strips.strip_count(e, PHI, ONE, z)
    u, v = strips.orbit_cloud(PHI, ONE, z, e.P_int)
    j = np.floor((u - float(PHI) * v) / rep.width).astype(int)
    lo, hi = 2.0, e.P_int - 1.0
    bad = [(a, b) for a, b in combinations(range(e.P_int), 2) if j[a] == j[b] and lo < b - a < hi]
    assert bad == []
    assert rep.forbidden_pairs == []
    assert sum(rep.histogram.values()) == e.P_int


def test_strips_integer_frequencies_degenerate():
    e = SEQ.entries[2]
    rep = strips.strip_count(e, RealParam.rational(2), ONE, (0.0, 0.0))
    assert rep.degenerate


def test_strip_csv_format():
    e = SEQ.entries[0]
    rep = strips.strip_count(e, PHI, ONE, (1 / 3, 2 / 3))
    text = strips.strips_csv(rep)
    assert text.splitlines()[0] == "strip_index,count"
