from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hrtlab.exact import (ParseError, PrecisionError, QuadraticSurd, RealParam, frac_multiples,
                          parse_complex, parse_real)

from oracles import mp


def test_parse_forms():
    assert parse_real("3/4").value == Fraction(3, 4)
    assert parse_real("0.25").value == Fraction(1, 4)
    g = parse_real("surd:(1+1√5)/2")
    assert g.kind == "surd"
    assert abs(float(g) - float(mp("phi"))) < 1e-15
    d = parse_real("1.41421356~digits=8")
    assert d.kind == "decimal" and d.precision_digits == 8
    assert parse_complex("1+2i") == 1 + 2j


@pytest.mark.parametrize("bad", ["1.2.3", "surd:(1+1√4)/2", "1/0", "abc", ""])
def test_parse_rejects(bad):
    with pytest.raises(ParseError):
        parse_real(bad)


def test_decimal_horizon():
    d = parse_real("1.41421356~digits=8")
    with pytest.raises(PrecisionError):
        d.check_horizon(10 ** 6)


def test_golden_ratio_identity():
    g = parse_real("surd:(1+1√5)/2").value
    assert g * g == g + 1
    assert (g * g - g - 1).is_rational


surds = st.builds(lambda a, b, d, c: QuadraticSurd(a, b, d, c),
                  st.integers(-50, 50), st.integers(-20, 20).filter(bool),
                  st.sampled_from([2, 3, 5, 6, 7, 10, 11]), st.integers(1, 30))


@settings(max_examples=150, deadline=None)
@given(surds, st.integers(-10 ** 6, 10 ** 6))
def test_surd_floor_matches_mpmath(s, n):
    with mpmath.workdps(60):
        ref = int(mpmath.floor(n * s.to_mpf(60)))
    assert (s * n).floor() == ref


@settings(max_examples=100, deadline=None)
@given(surds, surds)
def test_surd_field_ops(a, b):
    if a.d != b.d:
        return
    with mpmath.workdps(50):
        assert abs(float((a + b).to_mpf(50) - a.to_mpf(50) - b.to_mpf(50))) < 1e-30
        assert abs(float((a * b).to_mpf(50) - a.to_mpf(50) * b.to_mpf(50))) < 1e-25


@pytest.mark.parametrize("lit,ref", [("surd:(1+1√5)/2", "phi"), ("surd:0+1√2", "sqrt2")])
def test_frac_multiples_against_mpmath(lit, ref):
    x = parse_real(lit)
    got = frac_multiples(x, -500, 10 ** 5)
    with mpmath.workdps(60):
        v = mp(ref)
        for n in list(range(-500, -490)) + [0, 1, 2, 999, 12345, 99999]:
            want = float(n * v - mpmath.floor(n * v))
            assert abs(got[n + 500] - want) < 1e-15


def test_rational_param_arithmetic():
    a, b = RealParam.rational(3, 7), RealParam.rational(2, 5)
    assert (a / b).value == Fraction(15, 14)
    assert a.frac_times(10) == Fraction(2, 7)
    np.testing.assert_array_equal(frac_multiples(RealParam.rational(1, 4), 0, 4), [0, 0.25, 0.5, 0.75])
