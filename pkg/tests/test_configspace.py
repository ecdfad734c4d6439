from fractions import Fraction

import pytest
from hypothesis import assume, given, settings, strategies as st

from hrtlab import configspace as cs
from hrtlab.exact import QuadraticSurd, parse_real

F = Fraction
ROT = {90: ((0, -1), (1, 0)), -90: ((0, 1), (-1, 0)), 180: ((-1, 0), (0, -1))}


def cfg(pts):
    return cs.classify(cs.Configuration.from_points(pts))


def replay(log):
    """Rebuild the linear part from the logged primitive steps."""
    A = ((F(1), F(0)), (F(0), F(1)))
    for s in log:
        if s["step"] == "rotation":
            S = ROT[int(s["degrees"])]
        elif s["step"] == "vertical-shear":
            S = ((1, 0), (parse_real(s["u"]).value, 1))
        elif s["step"] == "joint-rescaling":
            lam = parse_real(s["factor"]).value
            S = ((lam, 0), (0, 1 / lam))
        else:
            continue
        A = cs._matmul(S, A)
    return A


@pytest.mark.parametrize("pts,kind", [
    ([(0, 0), (1, 0), (2, 0), (3, 0)], "collinear"),
    ([(0, 0), (1, 0), (1, 1), (1, 3)], "(1,3)"),
    ([(0, 0), (1, 0), (0, 1), (1, 2)], "(2,2)"),
    ([(0, 0), (1, 0), (0, 1), (2, 3)], "other"),
])
def test_classify(pts, kind):
    assert cfg(pts).classification == kind


def test_duplicates_rejected():
    with pytest.raises(cs.ConfigurationError):
        cfg([(0, 0), (0, 0), (1, 0), (0, 1)])


def test_floats_rejected():
    with pytest.raises(cs.ConfigurationError):
        cs.Configuration.from_points([(0.5, 0), (1, 0), (0, 1), (2, 3)])


def test_special_form_is_fixed():
    n = cs.normalize(cfg([(0, 0), (1, 0), (1, 2), (1, 5)]))
    assert (n.alpha, n.beta) == (2, 5)
    assert n.transform.log == []
    assert cs.lattice_test(n.alpha, n.beta) == "lattice"


def test_irrational_two_two():
    c = cfg([("0", "0"), ("1", "0"), ("0", "1"), ("1", "surd:0+1√5")])
    n = cs.normalize(c)
    assert n.form == "special-(2,2)"
    assert cs.lattice_test(n.alpha, n.beta) == "non-lattice"


def test_unsupported():
    with pytest.raises(cs.UnsupportedClassification):
        cs.normalize(cfg([(0, 0), (1, 0), (0, 1), (2, 3)]))


def test_mixed_fields_non_lattice():
    assert cs.lattice_test("surd:0+1√2", "surd:0+1√3") == "non-lattice"
    assert cs.lattice_test("surd:0+1√2", "surd:0+3√2") == "lattice"
    assert cs.lattice_test("1.5~digits=10", "2") == "undetermined"


rat = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@st.composite
def sl2(draw):
    a = draw(rat.filter(bool))
    b, c = draw(rat), draw(rat)
    return ((a, b), (c, (1 + b * c) / a))


@st.composite
def configs(draw):
    kind = draw(st.sampled_from(["(1,3)", "(2,2)"]))
    al = draw(rat.filter(bool))
    be = draw(rat.filter(lambda v: v != 0 and v != al))
    if kind == "(1,3)":
        return kind, [(F(0), F(0)), (F(1), F(0)), (F(1), al), (F(1), be)]
    return kind, [(F(0), F(0)), (F(1), F(0)), (F(0), al), (F(1), be)]


def check(n, pts):
    assert cs.det(n.transform.linear) == 1
    assert replay(n.transform.log) == tuple(tuple(r) for r in n.transform.linear)
    for o, t in zip(n.order, n.target):
        assert n.transform.apply(pts[o]) == t


@settings(max_examples=150, deadline=None)
@given(configs(), sl2(), rat, rat)
def test_normalization_under_random_maps(base, A, t1, t2):
    kind, pts = base
    moved = [cs._matvec(A, p) for p in pts]
    moved = [(p[0] + t1, p[1] + t2) for p in moved]
    c = cfg(moved)
    assert c.classification == kind
    n = cs.normalize(c)
    check(n, c.points)
    ref = cs.normalize(cfg(pts))
    assert cs.lattice_test(n.alpha, n.beta) == cs.lattice_test(ref.alpha, ref.beta)


@settings(max_examples=100, deadline=None)
@given(sl2())
def test_decompose_reproduces(A):
    m = cs.decompose(A)
    assert m.linear == A
    assert cs.det(m.linear) == 1
    assert replay(m.log) == A


@settings(max_examples=40, deadline=None)
@given(sl2(), st.integers(1, 4))
def test_surd_invariance(A, b):
    s = QuadraticSurd(0, b, 2)
    pts = [(F(0), F(0)), (F(1), F(0)), (F(0), F(1)), (F(1), s)]
    moved = [cs._matvec(A, p) for p in pts]
    c = cfg(moved)
    assert c.classification == "(2,2)"
    n = cs.normalize(c)
    check(n, c.points)
    assert cs.lattice_test(n.alpha, n.beta) == "non-lattice"
