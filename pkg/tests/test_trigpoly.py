import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from hrtlab.exact import RealParam, parse_real
from hrtlab.trigpoly import (Coefficients, OrbitPolynomial, SingularityError, cis2pi, zero_distance_bound,
                             lower_bound_certificate, zeros)

PHI = parse_real("surd:(1+1√5)/2")


def _close(a, b, tol=1e-12):
    d = abs(a - b) % 1.0
    return min(d, 1 - d) < tol


def test_cube_roots_of_unity():
    zs = zeros(Coefficients(1, 1, 1))
    got = sorted(zs.zeros)
    assert not zs.degenerate and len(got) == 2
    for (a, b), (c, d) in zip(got, [(1 / 3, 2 / 3), (2 / 3, 1 / 3)]):
        assert _close(a, c) and _close(b, d)


def test_degenerate_and_empty():
    zs = zeros(Coefficients(2, 1, 1))
    assert zs.degenerate and len(zs.zeros) == 1
    assert _close(zs.zeros[0][0], 0.5) and _close(zs.zeros[0][1], 0.5)
    zs = zeros(Coefficients(3, 1, 1))
    assert zs.no_triangle and zs.zeros == []


def test_cis2pi_quarters_exact():
    assert cis2pi(0.5) == -1
    assert cis2pi(0.25) == 1j
    assert cis2pi(1.0) == 1


moduli = st.floats(0.2, 5.0)
phases = st.floats(0.0, 1.0)


@settings(max_examples=120, deadline=None)
@given(moduli, moduli, moduli, phases, phases, phases)
def test_zeros_are_zeros(r0, r1, r2, p0, p1, p2):
    c = Coefficients(r0 * cmath.exp(2j * math.pi * p0), r1 * cmath.exp(2j * math.pi * p1),
                     r2 * cmath.exp(2j * math.pi * p2))
    s = r0 + r1 + r2 - 2 * max(r0, r1, r2)
    assume(abs(s) > 1e-6)
    zs = zeros(c)
    assert zs.no_triangle == (s < 0)
    for x, y in zs.zeros:
        assert abs(c.p(x, y)) <= 1e-12 * (r0 + r1 + r2)
        assert 0 <= x < 1 and 0 <= y < 1


@settings(max_examples=60, deadline=None)
@given(moduli, moduli, moduli, phases)
def test_common_rotation_keeps_zeros(r0, r1, r2, ph):
    assume(r0 + r1 + r2 - 2 * max(r0, r1, r2) > 1e-3)
    c = Coefficients(r0, r1, r2)
    z = cmath.exp(2j * math.pi * ph)
    a, b = sorted(zeros(c).zeros), sorted(zeros(c.scaled(z)).zeros)
    for (x1, y1), (x2, y2) in zip(a, b):
        assert _close(x1, x2, 1e-9) and _close(y1, y2, 1e-9)


@pytest.mark.parametrize("coeffs", [(1, 1, 1), (2, 1, 1), (1, 2, 1), (1, 1, 2), (1, 2, 2.5)])
def test_zero_distance_bound_positive_on_random_points(coeffs):
    c = Coefficients(*coeffs)
    zs = zeros(c)
    rng = np.random.default_rng(4)
    x, y = rng.random(20000), rng.random(20000)
    ratio = np.abs(c.p(x, y)) / zero_distance_bound(x, y, zs)
    assert ratio.min() > 0.05


def test_certificate_grid_refinement_stable():
    c = Coefficients(1, 1.3, 0.8)
    a = lower_bound_certificate(c, 400).c_emp
    b = lower_bound_certificate(c, 800).c_emp
    assert a > 0 and abs(a - b) / a < 0.05


def test_log_abs_matches_mpmath():
    poly = OrbitPolynomial.two_freq(Coefficients(1, 1, 1), PHI, RealParam.rational(1, 3))
    la, hits = poly.log_abs_values(0.2, 0, 2000)
    assert hits == 0
    with mpmath.workdps(40):
        g = (1 + mpmath.sqrt(5)) / 2
        for n in (0, 1, 17, 999, 1999):
            v = 1 + mpmath.expjpi(2 * g * (0.2 + n)) + mpmath.expjpi(2 * (mpmath.mpf(0.2) + n) / 3)
            assert abs(la[n] - float(mpmath.log(abs(v)))) < 1e-11


def test_backward_step_and_shift():
    poly = OrbitPolynomial.one_freq(2, 1, PHI)
    back = poly.values(0.3, 1, 6, step=-1)
    direct = np.array([2 + cmath.exp(2j * math.pi * float(PHI) * (0.3 - n)) for n in range(1, 6)])
    np.testing.assert_allclose(back, direct, atol=1e-13)


def test_ratio_singularity():
    P = OrbitPolynomial.one_freq(1, 1, RealParam.rational(1, 2))
    Q = OrbitPolynomial.one_freq(1, 1, RealParam.rational(1, 2))
    R = OrbitPolynomial.ratio(P, Q)
    with pytest.raises(SingularityError):
        R.log_abs_values(1.0, 0, 4)
