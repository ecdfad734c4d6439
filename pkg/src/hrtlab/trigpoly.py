"""The three-term polynomial p(x, y) = C0 + C1 e(x) + C2 e(y) and its orbit versions."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .exact import QuadraticSurd, RealParam, frac_multiples, frac_of, workdps

TWO_PI = 2.0 * math.pi
DEG_TOL = 1e-9
RESIDUAL_TOL = 1e-12
# |ln|P|| below this is treated as an exact zero of the evaluation
UNDERFLOW_LOG = -700.0


class SingularityError(ZeroDivisionError):
    """Evaluation hit a zero of the denominator polynomial."""


class _ZeroHit(float):
    """-inf tagged as an evaluation that landed on a zero (or underflowed)."""

    def __new__(cls):
        return super().__new__(cls, -math.inf)

    def __repr__(self):
        return "ZERO_HIT"


ZERO_HIT = _ZeroHit()


def cis2pi(phase):
    """e(phase) = exp(2 pi i phase), exact at multiples of 1/4.

    Reduces to the nearest quarter turn first, so e(1/2) is exactly -1.
    """
    ph = np.asarray(phase, dtype=np.float64)
    r = 4.0 * (ph - np.floor(ph))
    q = np.rint(r)
    f = (r - q) * (0.5 * math.pi)
    c, s = np.cos(f), np.sin(f)
    qi = q.astype(np.int64) % 4
    re = np.where(qi == 0, c, np.where(qi == 1, -s, np.where(qi == 2, -c, s)))
    im = np.where(qi == 0, s, np.where(qi == 1, c, np.where(qi == 2, -s, -c)))
    out = re + 1j * im
    return out if out.ndim else complex(out)


def signed_frac(u):
    """<u> in [-1/2, 1/2)."""
    return u - np.floor(u + 0.5)


def dist_int(u):
    return np.abs(signed_frac(u))


@dataclass(frozen=True)
class Coefficients:
    C0: complex
    C1: complex
    C2: complex | None = None
    rotated: bool = False

    def __post_init__(self):
        for name in ("C0", "C1", "C2"):
            v = getattr(self, name)
            if v is None and name == "C2":
                continue
            object.__setattr__(self, name, complex(v))
            if v == 0:
                raise ValueError(f"{name} must be nonzero")

    @property
    def moduli(self) -> tuple[float, ...]:
        vals = [abs(self.C0), abs(self.C1)]
        if self.C2 is not None:
            vals.append(abs(self.C2))
        return tuple(vals)

    @property
    def scale(self) -> float:
        return float(sum(self.moduli))

    def normalized(self) -> "Coefficients":
        """Rotate all coefficients so that C0 is real positive."""
        u = abs(self.C0) / self.C0
        c2 = None if self.C2 is None else self.C2 * u
        return Coefficients(abs(self.C0), self.C1 * u, c2, rotated=True)

    def scaled(self, z: complex) -> "Coefficients":
        return Coefficients(self.C0 * z, self.C1 * z, None if self.C2 is None else self.C2 * z)

    def p(self, x, y):
        return self.C0 + self.C1 * cis2pi(x) + self.C2 * cis2pi(y)

    def to_json(self) -> dict:
        out = {"C0": _cjson(self.C0), "C1": _cjson(self.C1)}
        if self.C2 is not None:
            out["C2"] = _cjson(self.C2)
        out["rotated"] = self.rotated
        return out


def _cjson(z: complex) -> list[str]:
    return [repr(z.real), repr(z.imag)]


@dataclass
class ZeroSet:
    zeros: list[tuple[float, float]]
    degenerate: bool
    no_triangle: bool
    t: float
    branch: str
    s: float | None = None
    numerically_degenerate: bool = False
    defect: float = 0.0
    residuals: list[float] = field(default_factory=list)
    note: str = ""

    def to_json(self) -> dict:
        return {"zeros": [[repr(a), repr(b)] for a, b in self.zeros], "degenerate": self.degenerate,
                "no_triangle": self.no_triangle, "t": repr(self.t), "branch": self.branch,
                "s": None if self.s is None else repr(self.s),
                "numerically_degenerate": self.numerically_degenerate,
                "defect": repr(self.defect), "residuals": [repr(r) for r in self.residuals],
                "note": self.note}


def _mod1(u: float) -> float:
    v = u - math.floor(u) + 0.0
    return 0.0 if v >= 1.0 else v


def zeros(coeffs: Coefficients) -> ZeroSet:
    """Real zeros of p in [0,1)^2, the degeneracy class and the slope t.

    Zeros come from the triangle with sides |C0|, |C1|, |C2|: the angle of C1 e(x)
    against C0 is fixed by the law of cosines, and y is then forced.
    """
    if coeffs.C2 is None:
        raise ValueError("zeros needs all three coefficients")
    C0, C1, C2 = coeffs.C0, coeffs.C1, coeffs.C2
    r0, r1, r2 = coeffs.moduli
    total = r0 + r1 + r2
    defect = total - 2.0 * max(r0, r1, r2)
    tol = DEG_TOL * total
    exact_tol = 16 * np.finfo(float).eps * total
    if defect < -tol:
        return ZeroSet([], False, True, 1.0, "no-triangle", defect=defect)

    c = (r2 * r2 - r0 * r0 - r1 * r1) / (2.0 * r0 * r1)
    c = min(1.0, max(-1.0, c))
    base = (cmath.phase(C0) - cmath.phase(C1)) / TWO_PI
    w = math.acos(c) / TWO_PI

    def complete(g1: float) -> tuple[float, float]:
        g1 = _mod1(g1)
        g2 = _mod1(cmath.phase(-(C0 + C1 * cis2pi(g1)) / C2) / TWO_PI)
        return g1, g2

    degenerate = bool(abs(defect) <= tol)
    numerically = bool(degenerate and abs(defect) > exact_tol)
    if degenerate and not numerically:
        cands = [complete(base + w)]
    else:
        cands = [complete(base + w), complete(base - w)]
    residuals = [abs(coeffs.p(a, b)) for a, b in cands]
    if not numerically:
        for r in residuals:
            if r > RESIDUAL_TOL * total:
                raise ArithmeticError(f"zero residual {r} exceeds tolerance")
    note = "numerically degenerate: candidates may coincide up to merge" if numerically else ""

    if not degenerate:
        return ZeroSet(cands, False, False, 1.0, "non-degenerate", defect=defect,
                       residuals=residuals)
    g1, g2 = cands[0]
    u0, u1, u2 = C0, C1 * cis2pi(g1), C2 * cis2pi(g2)
    if (u2 / u1).real > 0:
        t, branch, s = (u2 / u1).real, "C2e/C1e", None
    elif (u1 / u0).real > 0:
        s = (u1 / u0).real
        t, branch = -(1.0 + s) / s, "C1e/C0"
    else:
        s = (u2 / u0).real
        t, branch = -s / (1.0 + s), "C2e/C0"
    return ZeroSet(cands, True, False, t, branch, s, numerically, defect, residuals, note)


# ---------------------------------------------------------------------------
# lower bound certificate


def zero_distance_bound(x, y, zs: ZeroSet):
    """min_j (||x - g1 + t<y - g2>|| + ||x - g1||^2 + ||y - g2||^2)."""
    out = None
    for g1, g2 in zs.zeros:
        dx = x - g1
        dy = y - g2
        b = dist_int(dx + zs.t * signed_frac(dy)) + dist_int(dx) ** 2 + dist_int(dy) ** 2
        out = b if out is None else np.minimum(out, b)
    return out


@dataclass
class LowerBoundCertificate:
    coefficients: Coefficients
    grid_n: int
    zero_set: ZeroSet
    c_emp: float
    argmin: tuple[float, float]
    inf_abs_p: float
    annulus_c: float | None
    taylor_linear_c: list[float]
    taylor_quadratic_c: list[float]
    mode: str

    def to_json(self) -> dict:
        return {"coefficients": self.coefficients.to_json(), "zeros": self.zero_set.to_json(),
                "t": repr(self.zero_set.t), "c_emp": repr(self.c_emp),
                "argmin": [repr(self.argmin[0]), repr(self.argmin[1])], "grid_n": self.grid_n,
                "inf_abs_p": repr(self.inf_abs_p), "mode": self.mode,
                "annulus_c": None if self.annulus_c is None else repr(self.annulus_c),
                "taylor_linear_c": [repr(v) for v in self.taylor_linear_c],
                "taylor_quadratic_c": [repr(v) for v in self.taylor_quadratic_c]}


def _taylor_constants(coeffs: Coefficients, zs: ZeroSet, radius: float = 0.05,
                      n_r: int = 60, n_theta: int = 720):
    rs = np.geomspace(1e-4, radius, n_r)
    th = np.linspace(0.0, TWO_PI, n_theta, endpoint=False)
    R, TH = np.meshgrid(rs, th)
    dx, dy = R * np.cos(TH), R * np.sin(TH)
    lin, quad = [], []
    for g1, g2 in zs.zeros:
        pv = np.abs(coeffs.p(g1 + dx, g2 + dy))
        lv = np.abs(dx + zs.t * dy)
        qv = dx * dx + dy * dy
        with np.errstate(divide="ignore"):
            lr = np.where(lv > 0, pv / np.where(lv > 0, lv, 1.0), np.inf)
        lin.append(float(lr.min()))
        quad.append(float((pv / qv).min()))
    return lin, quad


def lower_bound_certificate(coeffs: Coefficients, grid_n: int, chunk: int = 256) -> LowerBoundCertificate:
    """Empirical constant in |p(x,y)| >= c * bound(x,y) over the periodic grid (i/n, j/n).

    Grid points closer than one grid step (sup norm on the torus) to a zero are
    excluded from c_emp; those between one and two steps form the reported annulus.
    """
    zs = zeros(coeffs)
    n = int(grid_n)
    xs = np.arange(n, dtype=np.float64) / n
    cx = coeffs.C0 + coeffs.C1 * cis2pi(xs)
    ey = coeffs.C2 * cis2pi(xs)
    best, arg, inf_p = math.inf, (0.0, 0.0), math.inf
    ann = math.inf
    for j0 in range(0, n, chunk):
        ys = xs[j0:j0 + chunk]
        pv = np.abs(cx[None, :] + ey[j0:j0 + chunk, None])
        inf_p = min(inf_p, float(pv.min()))
        if zs.no_triangle:
            continue
        X, Y = xs[None, :], ys[:, None]
        b = zero_distance_bound(X, Y, zs)
        near = np.full(pv.shape, np.inf)
        for g1, g2 in zs.zeros:
            near = np.minimum(near, np.maximum(dist_int(X - g1), dist_int(Y - g2)))
        step = 1.0 / n
        ok = near >= step * (1 - 1e-9)
        ratio = np.where(ok, pv / np.where(b > 0, b, 1.0), np.inf)
        k = int(np.argmin(ratio))
        if ratio.flat[k] < best:
            best = float(ratio.flat[k])
            arg = (float(xs[k % n]), float(ys[k // n]))
        in_ann = ok & (near < 2 * step)
        if in_ann.any():
            ann = min(ann, float(ratio[in_ann].min()))
    if zs.no_triangle:
        return LowerBoundCertificate(coeffs, n, zs, inf_p, arg, inf_p, None, [], [], "no-triangle")
    lin, quad = _taylor_constants(coeffs, zs)
    return LowerBoundCertificate(coeffs, n, zs, best, arg, inf_p,
                                 None if ann == math.inf else ann, lin, quad, zs.branch)


# ---------------------------------------------------------------------------
# orbit polynomials


@dataclass(frozen=True)
class OrbitPolynomial:
    """P(x) = C0 + C1 e(alpha x) [+ C2 e(beta x)], or the ratio P/Q.

    ``form`` is ``"two-freq"``, ``"one-freq"`` (only C0, C1 and alpha) or
    ``"ratio"`` (numerator/denominator are one-freq polynomials).
    """

    coefficients: Coefficients | None
    alpha: RealParam | None
    beta: RealParam | None = None
    form: str = "two-freq"
    numerator: "OrbitPolynomial | None" = None
    denominator: "OrbitPolynomial | None" = None

    @classmethod
    def two_freq(cls, coeffs: Coefficients, alpha: RealParam, beta: RealParam) -> "OrbitPolynomial":
        return cls(coeffs, alpha, beta, "two-freq")

    @classmethod
    def one_freq(cls, A: complex, B: complex, alpha: RealParam) -> "OrbitPolynomial":
        return cls(Coefficients(A, B), alpha, None, "one-freq")

    @classmethod
    def ratio(cls, P: "OrbitPolynomial", Q: "OrbitPolynomial") -> "OrbitPolynomial":
        return cls(None, None, None, "ratio", P, Q)

    # phases --------------------------------------------------------------

    @staticmethod
    def phases(freq: RealParam, x: float, start: int, stop: int, shift=None) -> np.ndarray:
        """freq * (x + shift + n) mod 1 for start <= n < stop.

        {freq*n} comes from the exact fixed-point table; freq*shift from mpmath
        at high precision, so long orbits keep full double accuracy.
        """
        base = frac_of(float(freq) * x) if x else 0.0
        if shift is not None:
            base += _frac_product(freq, shift)
        ph = base + frac_multiples(freq, start, stop)
        return ph - np.floor(ph)

    def values(self, x: float, start: int, stop: int, shift=None, step: int = 1) -> np.ndarray:
        """P(x + shift + n) for n in range(start, stop) (``step=-1`` gives x - n)."""
        if self.form == "ratio":
            raise ValueError("use values of numerator and denominator")
        if step == -1:
            lo, hi = -(stop - 1), -(start - 1)
            return self.values(x, lo, hi, shift)[::-1]
        c = self.coefficients
        out = c.C0 + c.C1 * cis2pi(self.phases(self.alpha, x, start, stop, shift))
        if self.form == "two-freq":
            out = out + c.C2 * cis2pi(self.phases(self.beta, x, start, stop, shift))
        return out

    def log_abs_values(self, x: float, start: int, stop: int, shift=None, step: int = 1):
        """ln|P| (ln|P| - ln|Q| for ratios) with zero hits as -inf; counts hits."""
        if self.form == "ratio":
            num, hits = self.numerator.log_abs_values(x, start, stop, shift, step)
            den, dh = self.denominator.log_abs_values(x, start, stop, shift, step)
            if dh:
                raise SingularityError("denominator vanishes on the orbit")
            return num - den, hits
        a = np.abs(self.values(x, start, stop, shift, step))
        with np.errstate(divide="ignore"):
            la = np.log(a)
        bad = ~(la >= UNDERFLOW_LOG)
        hits = int(bad.sum())
        if hits:
            la = np.where(bad, -np.inf, la)
        return la, hits


def _frac_product(freq: RealParam, shift) -> float:
    """{freq * shift} for an exact or mpmath shift."""
    if isinstance(shift, (int, Fraction, QuadraticSurd)):
        try:
            return frac_of(freq.value * shift)
        except ValueError:  # different quadratic fields
            pass
    with workdps(60):
        if isinstance(shift, QuadraticSurd):
            shift = shift.to_mpf(60)
        elif isinstance(shift, (int, Fraction)):
            shift = mpmath.mpf(Fraction(shift).numerator) / Fraction(shift).denominator
        return frac_of(freq.to_mpf(60) * mpmath.mpf(shift))


def eval_log_abs(poly: OrbitPolynomial, x, shift=None):
    """ln|P(x)| (or ln|P(x)| - ln|Q(x)|); ZERO_HIT when P vanishes or underflows."""
    xf, sh = _split_point(x, shift)
    if poly.form == "ratio":
        den = eval_log_abs(poly.denominator, x, shift)
        if den is ZERO_HIT:
            raise SingularityError("evaluation at a zero of the denominator")
        num = eval_log_abs(poly.numerator, x, shift)
        return ZERO_HIT if num is ZERO_HIT else num - den
    v = abs(poly.values(xf, 0, 1, sh)[0])
    if v == 0.0 or math.log(v) < UNDERFLOW_LOG:
        return ZERO_HIT
    return math.log(v)


def _split_point(x, shift):
    """Split x into a float in [0,1) and an exact/mp integer-plus-offset shift."""
    if isinstance(x, RealParam):
        x = x.value
    if isinstance(x, (Fraction, QuadraticSurd, int)):
        return 0.0, (x if shift is None else x + shift)
    if isinstance(x, mpmath.mpf):
        with workdps(60):
            fl = int(mpmath.floor(x))
            rest = float(x - fl)
        return rest, (Fraction(fl) if shift is None else shift + fl)
    xf = float(x)
    fl = math.floor(xf)
    if fl:
        sh = Fraction(fl) if shift is None else shift + fl
        return xf - fl, sh
    return xf, shift
