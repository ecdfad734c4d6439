import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hrtlab.exact import RealParam, parse_real
from hrtlab.orbit import core
from hrtlab.trigpoly import ZERO_HIT, Coefficients, OrbitPolynomial

import oracles

PHI = parse_real("surd:(1+1√5)/2")
ONE = RealParam.rational(1)


def test_long_product_matches_mpmath():
    poly = OrbitPolynomial.two_freq(Coefficients(1, 1, 1), PHI, ONE)
    got = core.log_product(poly, 0.1, 10 ** 4)
    want = oracles.log_abs_product(1, 1, 1, "phi", 1, 0.1, 10 ** 4)
    assert abs(got - want) <= 1e-9 * abs(want)


def test_backward_product_matches_mpmath():
    poly = OrbitPolynomial.one_freq(2, 1, PHI)
    got = core.orbit_product(core.Orbit(0.4, 500, "backward", poly)).log_product
    want = math.fsum(math.log(abs(2 + complex(math.cos(t), math.sin(t))))
                     for t in (2 * math.pi * float(PHI) * (0.4 - n) for n in range(1, 501)))
    assert abs(got - want) < 1e-9


def test_zero_hit_sentinel():
    poly = OrbitPolynomial.one_freq(1, 1, RealParam.rational(1, 2))
    r = core.orbit_product(core.Orbit(1.0, 4, "forward", poly))
    assert r.log_product is ZERO_HIT
    assert any(f.startswith("zero-hit") for f in r.flags)


def test_integer_frequencies_periodic():
    poly = OrbitPolynomial.two_freq(Coefficients(1, 1, 1), RealParam.rational(2), RealParam.rational(3))
    a = core.log_product(poly, 0.37, 50)
    b = core.log_product(poly, 0.37, 50, shift=7)
    assert abs(a - b) <= 1e-12


def test_batch_matches_single():
    poly = OrbitPolynomial.two_freq(Coefficients(2, 1, 0.5), PHI, ONE)
    xs = np.linspace(0, 1, 37, endpoint=False)
    batch = core.batch_reciprocal_sums(poly, xs, 0, 300)
    for i in (0, 5, 36):
        terms, _ = core.reciprocal_terms(poly, xs[i], 0, 300)
        assert abs(batch[i] - terms.sum()) <= 1e-10 * batch[i]


@settings(max_examples=10, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2 ** 31))
def test_worker_count_does_not_change_results(w, seed):
    poly = OrbitPolynomial.two_freq(Coefficients(1, 1, 1), PHI, ONE)
    xs = np.random.default_rng(seed).random(700)
    a = core.batch_reciprocal_sums(poly, xs, 0, 50, workers=1)
    b = core.batch_reciprocal_sums(poly, xs, 0, 50, workers=w)
    assert a.tobytes() == b.tobytes()


def test_reciprocal_average_forms():
    poly = OrbitPolynomial.two_freq(Coefficients(3, 1, 1), PHI, ONE)
    r = core.reciprocal_average(poly, 0.2, gamma=1.0, N=1000, C=1.0)
    assert r.within_bound and r.reciprocal_avg <= 1.0
    with pytest.raises(ValueError):
        core.reciprocal_average(poly, 0.2)


def test_threads_keep_mpmath_precision():
    import mpmath
    from hrtlab.diophantine import scale_sequence
    from hrtlab.orbit import pairs
    seq = scale_sequence(PHI, ONE, "1/4", 6, 10 ** 5)
    poly = OrbitPolynomial.two_freq(Coefficients(1, 1, 1), PHI, parse_real("surd:0+1√2"))
    e = seq.entries[-1]
    xs = np.random.default_rng(1).random(64)
    ref = [pairs.pair_compare(poly, e, seq.D_float, float(x)).to_json() for x in xs]
    for _ in range(3):
        got = core.parallel_map(lambda x: pairs.pair_compare(poly, e, seq.D_float, float(x)).to_json(), xs, 8)
        assert got == ref
    assert mpmath.mp.dps == 15
