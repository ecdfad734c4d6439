import math

import pytest
from hypothesis import given, settings, strategies as st

from hrtlab.diophantine import (RationalRatioError, best_approximant_check, continued_fraction,
                                min_weighted_norm, scale_sequence)
from hrtlab.exact import RealParam, parse_real

import oracles

PHI = parse_real("surd:(1+1√5)/2")
SQRT2 = parse_real("surd:0+1√2")


def test_golden_cf_is_all_ones_with_fibonacci():
    cf = continued_fraction(PHI, 20)
    assert cf.partial_quotients == [1] * 20
    fib = [1, 1]
    while len(fib) < 22:
        fib.append(fib[-1] + fib[-2])
    assert cf.convergents == [(fib[i + 1], fib[i]) for i in range(20)]


@pytest.mark.parametrize("lit,ref", [("surd:0+1√2", "sqrt2"), ("surd:(1+1√5)/2", "phi"),
                                     ("surd:(3+2√7)/5", None)])
def test_cf_matches_mpmath(lit, ref):
    x = parse_real(lit)
    ref = ref or float(x)
    if isinstance(ref, float):
        import mpmath
        with mpmath.workdps(60):
            ref = str(x.to_mpf(60))
    want = oracles.cf_quotients(ref, 25)
    assert continued_fraction(x, 25).partial_quotients == want[:25]


def test_rational_cf_terminates():
    cf = continued_fraction(RealParam.rational(355, 113), 10)
    assert cf.terminated
    assert cf.convergents[-1] == (355, 113)


@pytest.mark.parametrize("x,ref", [(PHI, "phi"), (SQRT2, "sqrt2")])
def test_best_approximants_against_enumeration(x, ref):
    qs = oracles.convergent_denominators(ref, 12)
    for k in range(1, 8):
        r = best_approximant_check(x, k)
        assert r.ok
        assert r.q == qs[k]
        arg, _ = oracles.min_n_norm(ref, 1, qs[k + 1] - 1, weighted=False)
        assert arg == qs[k]
        arg, _ = oracles.min_n_norm(ref, qs[k], qs[k + 1] - 1)
        assert arg == qs[k] and r.witness == qs[k]


def test_min_weighted_norm_oracle():
    for w in ("n", "nlogn", ("pow", 2.1)):
        st_ = min_weighted_norm(SQRT2, 2000, w)
        import mpmath
        with mpmath.workdps(50):
            v = oracles.mp("sqrt2")
            lo = 2 if w == "nlogn" else 1
            f = {"n": lambda n: n, "nlogn": lambda n: n * mpmath.log(n)}.get(w, lambda n: mpmath.mpf(n) ** 2.1)
            ref = min(f(n) * oracles.norm(n * v) for n in range(lo, 2001))
        assert abs(st_.minimum - float(ref)) <= 1e-12 * float(ref)


def test_scale_sequence_golden():
    seq = scale_sequence(PHI, RealParam.rational(1), "1/4", 6, 10 ** 5)
    assert len(seq.entries) == 6 and seq.verified
    Ns = [e.N for e in seq.entries]
    assert Ns == sorted(set(Ns))
    for e in seq.entries:
        assert all(e.checks.values())
        assert 0.43 <= float(e.value) <= 0.48


def test_rational_ratio_rejected():
    with pytest.raises(RationalRatioError):
        scale_sequence(RealParam.rational(1, 2), RealParam.rational(1, 3), "1/4", 3, 1000)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 40).filter(lambda d: math.isqrt(d) ** 2 != d), st.integers(1, 3))
def test_convergents_are_best_approximants(d, c):
    x = RealParam.surd(0, 1, d, c)
    cf = continued_fraction(x, 8)
    for p, q in cf.convergents[:6]:
        assert math.gcd(p, q) == 1
    r = best_approximant_check(x, 3, cf=cf)
    assert r.ok
