import cmath
import math

import mpmath
import numpy as np
import pytest

from hrtlab.diophantine import ScaleEntry, scale_sequence
from hrtlab.exact import RealParam, parse_real
from hrtlab.orbit import pairs, twotwo
from hrtlab.trigpoly import Coefficients, OrbitPolynomial

import oracles

PHI = parse_real("surd:(1+1√5)/2")
SQRT2 = parse_real("surd:0+1√2")
ONE = RealParam.rational(1)
SEQ = scale_sequence(PHI, ONE, "1/4", 6, 10 ** 5)
POLY = OrbitPolynomial.two_freq(Coefficients(1, 1, 1), PHI, ONE)


def test_pair_compare_matches_direct_products():
    e = SEQ.entries[2]
    c = pairs.pair_compare(POLY, e, SEQ.D_float, 0.137, 3)
    x = 0.137
    n = e.P_int
    lx = oracles.log_abs_product(1, 1, 1, "phi", 1, x, n)
    with mpmath.workdps(50):
        y = mpmath.mpf(x) - e.P_float  # P_k = N_k / beta is an integer here
    ly = oracles.log_abs_product(1, 1, 1, "phi", 1, float(y), n, dps=50)
    assert abs(c.log_x - lx) < 1e-8
    assert abs(c.log_y - ly) < 1e-6
    assert c.log_ratio <= c.chain_bound + 1e-9


def test_integer_control_is_exact():
    poly = OrbitPolynomial.two_freq(Coefficients(1, 1, 1), RealParam.rational(2), RealParam.rational(3))
    e = ScaleEntry.manual(13, ONE)
    c = pairs.pair_compare(poly, e, 1.0, 0.29)
    assert abs(c.log_ratio) <= 1e-12


def test_per_step_bound_every_entry():
    for e in SEQ.entries:
        sa = pairs.almost_period_defect(PHI, e)
        direct = abs(cmath.exp(2j * math.pi * float(PHI.to_mpf(60) * e.P_float % 1)) - 1)
        assert abs(sa - direct) < 1e-9
        assert sa <= 10 * SEQ.D_float / (e.P_float * e.M)


def test_pipeline_single_L_and_csv():
    pp = pairs.pair_pipeline(POLY, SEQ, 40, 7, est_samples=3000)
    assert pp.step_ok and pp.chain_ok
    for comps in pp.levels:
        for c in comps:
            assert c.log_ratio <= pp.fit.L * math.log(c.P) + 1e-12
    assert pp.csv().splitlines()[0] == "k,Pk,log_ratio"


def test_exceptional_point_rejected():
    from hrtlab.orbit.averages import scale_exceptional_set
    e = SEQ.entries[1]
    est = scale_exceptional_set(POLY, e, 0.01, 3000, seed=1)
    xs = np.linspace(0, 1, 20001)
    bad = xs[est.member(xs)]
    assert bad.size
    with pytest.raises(pairs.ExceptionalPointError):
        pairs.pair_compare(POLY, e, SEQ.D_float, float(bad[0]), 2, exceptional=est)
    forced = pairs.pair_compare(POLY, e, SEQ.D_float, float(bad[0]), 2, exceptional=est, force=True)
    assert "forced-exceptional" in forced.flags


def test_ratio_pair_chain():
    P = OrbitPolynomial.one_freq(2, 1, PHI)
    Q = OrbitPolynomial.one_freq(3, 1, ONE)
    r = pairs.ratio_pair_compare(P, Q, SEQ.entries[2], 0.4, 3)
    assert r.log_ratio <= r.chain_bound + 1e-9


def test_decay_probe_integer_frequencies():
    poly = OrbitPolynomial.two_freq(Coefficients(1, 1, 1), RealParam.rational(2), RealParam.rational(3))
    seq = scale_sequence(PHI, ONE, "1/4", 2, 10 ** 4)
    seq.entries = [ScaleEntry.manual(e.N, ONE, e.M) for e in seq.entries]
    for pr in pairs.decay_probe(poly, seq, 500, 0.5, seed=2, est_samples=500):
        assert abs(pr.O_mult - 2 * pr.forward_log) <= 1e-9 * (1 + abs(pr.forward_log))


def test_decay_probe_error_path():
    errors = []
    for seed in range(40):
        try:
            pairs.decay_probe(POLY, SEQ, 1, 0.5, seed=seed, est_samples=500, levels=[6])
        except pairs.NoAdmissibleSample as e:
            errors.append(e)
    assert errors
    assert all(e.budget == 1 and sum(e.rejected.values()) == 1 for e in errors)


@pytest.mark.parametrize("n1", [1, 2, 5])
def test_conjugate_residual(n1):
    s = twotwo.conjugate_select(0.31, 1.5, 0.7 * cmath.exp(2.1j), PHI, n1, 100)
    assert s.residual <= 1e-10 and s.psi_gap <= 1e-8


def test_jensen_seeded():
    rng = np.random.default_rng(0)
    for _ in range(20):
        C, D = complex(*rng.uniform(-2, 2, 2)), complex(*rng.uniform(-2, 2, 2))
        if abs(abs(C) - abs(D)) < 1e-3:
            continue
        v, ref, _ = twotwo.jensen_integral(C, D)
        assert abs(v - ref) <= 1e-6
    v, ref, _ = twotwo.jensen_integral(2, 1)
    assert abs(v - math.log(2)) < 1e-12


def test_riemann_deviation_and_residues():
    qs = [2, 5, 12, 29, 70, 169]
    for q in qs:
        for y in (0.0, 0.3, 0.7):
            r = twotwo.riemann_deviation(2, 1, SQRT2, q, y)
            assert max(r.forward, r.backward) <= r.lipschitz_bound
            assert r.residues_ok
    assert twotwo.residue_coverage(7, 12) and not twotwo.residue_coverage(4, 12)


def test_periodic_block_and_K_oracle():
    beta = RealParam.rational(1, 2)
    r = twotwo.periodic_product_check(2, 1, beta, 0.1, 0.6, 3, 2000)
    assert r.periodicity_error <= 1e-10 and r.N_independent
    a, b = (0.6, 0.1) if r.branch == "T(x)>=T(z)" else (0.1, 0.6)
    with mpmath.workdps(30):
        def q(u):
            return abs(2 + mpmath.expjpi(u))  # beta = 1/2: e(u/2) = exp(i pi u)
        best = max(float(mpmath.fsum(mpmath.log(q(a + n)) for n in range(-N + 3, 0)) -
                         mpmath.fsum(mpmath.log(q(b + n)) for n in range(0, N + 1)))
                   for N in (4, 5, 10, 11, 50, 51))
    assert math.exp(best) <= r.K * (1 + 1e-9)


def test_divergence_inf_below_dense_grid():
    v, _, _ = twotwo.divergence_inf(PHI, 100)
    xs = (np.arange(200000) + 0.5) / 200000
    dense = twotwo.divergence_avg(PHI, 100, xs).min()
    assert v <= dense * (1 + 1e-9)


def test_divergence_rational_flag_and_dominance():
    t = twotwo.divergence_demo(RealParam.rational(1, 3), [100, 1000])
    assert t.flags
    big, total = twotwo.nearest_term_dominance(PHI, 1000, 17)
    assert big >= 0.5 * total
    assert twotwo.dirichlet_denominator(PHI, 1000) == 987
