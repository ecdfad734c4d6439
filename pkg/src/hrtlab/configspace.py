"""Four-point time-frequency configurations and their reduction to special forms.

All arithmetic is exact (rationals and quadratic surds), so a normalising map
can be checked by applying it and comparing points for equality.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exact import Exact, QuadraticSurd, RealParam, parse_real

Point = tuple[Exact, Exact]
Matrix = tuple[tuple[Exact, Exact], tuple[Exact, Exact]]

IDENTITY: Matrix = ((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1)))
ROT90: Matrix = ((Fraction(0), Fraction(-1)), (Fraction(1), Fraction(0)))
ROT_M90: Matrix = ((Fraction(0), Fraction(1)), (Fraction(-1), Fraction(0)))
ROT180: Matrix = ((Fraction(-1), Fraction(0)), (Fraction(0), Fraction(-1)))


class ConfigurationError(ValueError):
    pass


class UnsupportedClassification(ConfigurationError):
    pass


def as_exact(v) -> Exact:
    if isinstance(v, RealParam):
        if not v.is_exact:
            raise ConfigurationError("configuration points must be exact (rational or surd)")
        return v.value
    if isinstance(v, str):
        return as_exact(parse_real(v))
    if isinstance(v, QuadraticSurd):
        return v.as_fraction() if v.is_rational else v
    if isinstance(v, float):
        raise ConfigurationError("floats are not exact; pass a Fraction or a literal string")
    return Fraction(v)


def _norm(v: Exact) -> Exact:
    if isinstance(v, QuadraticSurd) and v.is_rational:
        return v.as_fraction()
    return v


def _s(v: Exact) -> str:
    return str(_norm(v))


def _matmul(A: Matrix, B: Matrix) -> Matrix:
    return ((A[0][0] * B[0][0] + A[0][1] * B[1][0], A[0][0] * B[0][1] + A[0][1] * B[1][1]),
            (A[1][0] * B[0][0] + A[1][1] * B[1][0], A[1][0] * B[0][1] + A[1][1] * B[1][1]))


def _matvec(A: Matrix, p: Point) -> Point:
    return (A[0][0] * p[0] + A[0][1] * p[1], A[1][0] * p[0] + A[1][1] * p[1])


def det(A: Matrix) -> Exact:
    return A[0][0] * A[1][1] - A[0][1] * A[1][0]


def _cross(u: Point, v: Point) -> Exact:
    return u[0] * v[1] - u[1] * v[0]


def _sub(p: Point, q: Point) -> Point:
    return (p[0] - q[0], p[1] - q[1])


@dataclass
class MetaplecticMap:
    """p -> A p + tau with det A = 1, plus the primitive steps that built it."""

    linear: Matrix = IDENTITY
    translation: Point = (Fraction(0), Fraction(0))
    log: list[dict] = field(default_factory=list)

    def apply(self, p: Point) -> Point:
        q = _matvec(self.linear, p)
        return (q[0] + self.translation[0], q[1] + self.translation[1])

    def then_linear(self, step: str, S: Matrix, **params) -> "MetaplecticMap":
        if det(S) != 1:
            raise ArithmeticError(f"step {step} is not area preserving")
        m = MetaplecticMap(_matmul(S, self.linear), _matvec(S, self.translation),
                           self.log + [{"step": step, **{k: _s(v) for k, v in params.items()}}])
        if det(m.linear) != 1:
            raise ArithmeticError("composition lost det = 1")
        return m

    def then_translate(self, tau: Point) -> "MetaplecticMap":
        if tau[0] == 0 and tau[1] == 0:
            return self
        return MetaplecticMap(self.linear, (self.translation[0] + tau[0], self.translation[1] + tau[1]),
                              self.log + [{"step": "translation", "tau_t": _s(tau[0]), "tau_xi": _s(tau[1])}])

    def inverse(self) -> "MetaplecticMap":
        (a, b), (c, d) = self.linear
        inv = ((d, -b), (-c, a))
        t = _matvec(inv, self.translation)
        return MetaplecticMap(inv, (-t[0], -t[1]), [{"step": "inverse-of", "steps": str(len(self.log))}])

    def to_json(self) -> dict:
        return {"linear": [[_s(v) for v in row] for row in self.linear],
                "translation": [_s(v) for v in self.translation],
                "det": _s(det(self.linear)), "log": list(self.log)}


def vertical_shear(u: Exact) -> Matrix:
    return ((Fraction(1), Fraction(0)), (u, Fraction(1)))


def _append_horizontal_shear(m: MetaplecticMap, u: Exact) -> MetaplecticMap:
    # [[1,u],[0,1]] = R90 . V(-u) . R(-90)
    m = m.then_linear("rotation", ROT_M90, degrees=-90)
    m = m.then_linear("vertical-shear", vertical_shear(-u), u=-u)
    return m.then_linear("rotation", ROT90, degrees=90)


def decompose(A: Matrix, start: MetaplecticMap | None = None) -> MetaplecticMap:
    """Build det-1 matrix A from rotations, joint rescalings and vertical shears."""
    m = start or MetaplecticMap()
    (a, b), (c, d) = A
    if det(A) != 1:
        raise ArithmeticError("matrix is not in SL(2)")
    if a == 0:
        # A = R90 . [[c, d], [0, -b]]
        m = decompose(((c, d), (Fraction(0), -b)), m)
        return m.then_linear("rotation", ROT90, degrees=90)
    if b != 0:
        m = _append_horizontal_shear(m, b / a)
    neg = a < 0
    lam = -a if neg else a
    if lam != 1:
        m = m.then_linear("joint-rescaling", ((lam, Fraction(0)), (Fraction(0), 1 / lam)), factor=lam)
    if neg:
        m = m.then_linear("rotation", ROT180, degrees=180)
    if c != 0:
        m = m.then_linear("vertical-shear", vertical_shear(c / a), u=c / a)
    return m


@dataclass
class Configuration:
    points: list[Point]
    classification: str = "unclassified"
    lattice_flag: str = "undetermined"
    lines: dict = field(default_factory=dict)

    @classmethod
    def from_points(cls, pts: Sequence) -> "Configuration":
        out = []
        for p in pts:
            if isinstance(p, str):
                parts = [s for s in p.split(",")]
                if len(parts) != 2:
                    raise ConfigurationError(f"point {p!r} must be 't,xi'")
                p = parts
            if len(p) != 2:
                raise ConfigurationError(f"point {p!r} must have two coordinates")
            out.append((as_exact(p[0]), as_exact(p[1])))
        return cls(out)

    @classmethod
    def from_json(cls, text: str) -> "Configuration":
        return cls.from_points(json.loads(text))

    def to_json(self) -> dict:
        return {"points": [[_s(a), _s(b)] for a, b in self.points],
                "classification": self.classification, "lattice_flag": self.lattice_flag,
                "lines": self.lines}


def _collinear(p: Point, q: Point, r: Point) -> bool:
    return _cross(_sub(q, p), _sub(r, p)) == 0


def classify(config: Configuration) -> Configuration:
    """Fill in ``classification``: collinear, (1,3), (2,2) or other."""
    pts = config.points
    if len(pts) != 4:
        raise ConfigurationError("exactly 4 points are required")
    for i, j in itertools.combinations(range(4), 2):
        if pts[i][0] == pts[j][0] and pts[i][1] == pts[j][1]:
            raise ConfigurationError(f"duplicate points {i} and {j}")
    if _collinear(pts[0], pts[1], pts[2]) and _collinear(pts[0], pts[1], pts[3]):
        return Configuration(pts, "collinear", config.lattice_flag, {})
    for lone in range(4):
        triple = [i for i in range(4) if i != lone]
        if _collinear(*(pts[i] for i in triple)):
            return Configuration(pts, "(1,3)", config.lattice_flag, {"triple": triple, "lone": lone})
    for (i, j), (k, l) in (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))):
        d1, d2 = _sub(pts[j], pts[i]), _sub(pts[l], pts[k])
        if _cross(d1, d2) == 0 and _cross(d1, _sub(pts[k], pts[i])) != 0:
            return Configuration(pts, "(2,2)", config.lattice_flag, {"pairs": [[i, j], [k, l]]})
    return Configuration(pts, "other", config.lattice_flag, {})


@dataclass
class Normalization:
    transform: MetaplecticMap
    alpha: Exact
    beta: Exact
    form: str
    target: list[Point]
    order: list[int]

    def to_json(self) -> dict:
        return {"map": self.transform.to_json(), "alpha": _s(self.alpha), "beta": _s(self.beta),
                "form": self.form, "target": [[_s(a), _s(b)] for a, b in self.target],
                "order": self.order}


def _frame_matrix(v: Point, w: Point) -> Matrix:
    cr = _cross(v, w)  # r1 = (-v_xi, v_t)/cross(v, w) gives r1.v = 0 and r1.w = 1
    r1 = (-v[1] / cr, v[0] / cr)
    if r1[0] != 0:
        r2 = (Fraction(0), 1 / r1[0])
    else:
        r2 = (-1 / r1[1], Fraction(0))
    A = (r1, r2)
    if det(A) != 1:
        raise ArithmeticError("frame construction failed")
    return A


def normalize(config: Configuration) -> Normalization:
    """Area-preserving affine map to (0,0),(1,0),(1,a),(1,b) or (0,0),(1,0),(0,a),(1,b)."""
    if config.classification == "unclassified":
        config = classify(config)
    pts = config.points
    if config.classification == "(1,3)":
        lone = config.lines["lone"]
        tri = config.lines["triple"]
        v = _sub(pts[tri[1]], pts[tri[0]])
        w = _sub(pts[tri[0]], pts[lone])
        A = _frame_matrix(v, w)
        origin = pts[lone]
        first = _matvec(A, w)
        order = [lone] + tri
        form = "special-(1,3)"
    elif config.classification == "(2,2)":
        (i, j), (k, l) = config.lines["pairs"]
        v = _sub(pts[j], pts[i])
        w = _sub(pts[k], pts[i])
        A = _frame_matrix(v, w)
        origin = pts[i]
        first = _matvec(A, w)
        order = [i, k, j, l]
        form = "special-(2,2)"
    else:
        raise UnsupportedClassification(f"cannot normalise a {config.classification} configuration")
    S = vertical_shear(-first[1])
    L = _matmul(S, A)
    m = decompose(L)
    shifted = _matvec(L, origin)
    m = m.then_translate((-shifted[0], -shifted[1]))
    if any(m.linear[r][c] != L[r][c] for r in range(2) for c in range(2)):
        raise ArithmeticError("decomposition does not reproduce the linear part")
    m = MetaplecticMap(L, m.translation, m.log)
    images = [m.apply(pts[o]) for o in order]
    if form == "special-(1,3)":
        alpha, beta = _norm(images[2][1]), _norm(images[3][1])
        target = [(Fraction(0), Fraction(0)), (Fraction(1), Fraction(0)),
                  (Fraction(1), alpha), (Fraction(1), beta)]
        if alpha == 0 or beta == 0 or alpha == beta:
            raise ArithmeticError("reduction produced a degenerate special configuration")
    else:
        alpha, beta = _norm(images[2][1]), _norm(images[3][1])
        target = [(Fraction(0), Fraction(0)), (Fraction(1), Fraction(0)),
                  (Fraction(0), alpha), (Fraction(1), beta)]
        if alpha == 0 or beta == 0:
            raise ArithmeticError("reduction produced a degenerate special configuration")
    for img, tgt in zip(images, target):
        if img[0] != tgt[0] or img[1] != tgt[1]:
            raise ArithmeticError(f"map image {img} differs from target {tgt}")
    return Normalization(m, alpha, beta, form, target, order)


def _param(v) -> RealParam:
    if isinstance(v, RealParam):
        return v
    if isinstance(v, str):
        return parse_real(v)
    v = _norm(v)
    if isinstance(v, QuadraticSurd):
        return RealParam("surd", v)
    return RealParam.rational(Fraction(v))


def lattice_test(alpha, beta) -> str:
    """'lattice' iff the special form sits on a lattice, i.e. alpha/beta is rational."""
    a, b = _param(alpha), _param(beta)
    if not (a.is_exact and b.is_exact):
        return "undetermined"
    if a.is_rational and b.is_rational:
        return "lattice"
    try:
        r = a / b
    except ValueError:  # different quadratic fields: the ratio cannot be rational
        return "non-lattice"
    return "lattice" if r.is_rational else "non-lattice"
