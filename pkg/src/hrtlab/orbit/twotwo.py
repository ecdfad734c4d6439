"""Constructions for the (2,2) form: conjugate orbits, Riemann sums, periodic blocks,
and the divergence of the one-frequency reciprocal average."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import integrate, optimize

from ..diophantine import continued_fraction
from ..exact import RealParam, frac_multiples
from ..trigpoly import OrbitPolynomial, SingularityError
from .core import fsum_log, parallel_map


# ---------------------------------------------------------------------------
# conjugates trick


@dataclass
class ConjugateSelection:
    x: float
    theta: float
    y: float
    z: float
    m: int
    N: int
    residual: float
    psi_left: float
    psi_right: float
    psi_gap: float

    def to_json(self) -> dict:
        return {k: (repr(v) if isinstance(v, float) else v) for k, v in self.__dict__.items()}


def conjugate_select(x: float, A: float, B: complex, alpha: RealParam, n_prime: int,
                     N: int = 100) -> ConjugateSelection:
    """y = -x - 2 theta/alpha + n'/alpha with B = r e(theta); z = {y}, m = [y].

    ``residual`` is max_{0<=n<=N} |P(y - n) - conj P(x + n)| for P(u) = A + B e(alpha u);
    ``psi_gap`` compares sum_{n=-N+m}^{-1+m} psi(alpha z + alpha n) with
    sum_{n=1}^{N} psi(alpha x + alpha n), psi = ln|A + B e(.)|.
    """
    if isinstance(A, complex):
        if abs(A.imag) > 1e-15 * abs(A):
            raise ValueError("A must be real (rotate the equation first)")
        A = A.real
    if B == 0:
        raise ValueError("B must be nonzero")
    theta = cmath.phase(B) / (2 * math.pi)
    a = float(alpha)
    y = -x - 2 * theta / a + n_prime / a
    m = math.floor(y)
    z = y - m
    P = OrbitPolynomial.one_freq(A, B, alpha)
    left = P.values(y, 0, N + 1, step=-1)
    right = P.values(x, 0, N + 1)
    residual = float(np.max(np.abs(left - np.conj(right))))
    # psi sums: z + n for -N+m <= n <= -1+m, against x + n for 1 <= n <= N
    lz, _ = P.log_abs_values(z, -N + m, m)
    lx, _ = P.log_abs_values(x, 1, N + 1)
    sl, sr = fsum_log(lz), fsum_log(lx)
    return ConjugateSelection(float(x), theta, y, z, m, N, residual, sl, sr, abs(sl - sr))


# ---------------------------------------------------------------------------
# Riemann sums of phi(u) = ln|C + D e(u)|


def jensen_integral(C: complex, D: complex) -> tuple[float, float, float]:
    """(quadrature of int_0^1 ln|C + D e(u)| du, ln max(|C|,|D|), error estimate)."""
    if C == 0 or D == 0:
        raise ValueError("C and D must be nonzero")
    # the integrand dips near u0 where C + D e(u0) is smallest
    u0 = (cmath.phase(-C / D) / (2 * math.pi)) % 1.0

    def f(u):
        return math.log(abs(C + D * cmath.exp(2j * math.pi * u)))
    pieces = sorted({0.0, u0, 1.0})
    val, err = 0.0, 0.0
    for lo, hi in zip(pieces, pieces[1:]):
        if hi - lo <= 0:
            continue
        v, e = integrate.quad(f, lo, hi, limit=400, epsabs=1e-13, epsrel=1e-13)
        val += v
        err += e
    return val, math.log(max(abs(C), abs(D))), err


def residue_coverage(p: int, q: int) -> bool:
    """{n p mod q : 1 <= n <= q} == {0, ..., q-1}, checked exactly."""
    return sorted((n * p) % q for n in range(1, q + 1)) == list(range(q))


@dataclass
class RiemannDeviation:
    q: int
    p: int
    y: float
    forward: float
    backward: float
    integral: float
    jensen: float
    lipschitz_bound: float
    residues_ok: bool

    def to_json(self) -> dict:
        return {k: (repr(v) if isinstance(v, float) else v) for k, v in self.__dict__.items()}


def riemann_deviation(C: complex, D: complex, beta: RealParam, q: int, y: float, p: int | None = None,
                      eps_deg: float = 1e-9) -> RiemannDeviation:
    """|sum_{n=1}^{q} phi(beta y + beta n) - q int phi| and the same over -q <= n <= -1.

    The bound 2 Lip with Lip = 2 pi min(|C|,|D|)/||C|-|D|| covers both the Riemann
    sum error and the shift from beta n to n p/q.
    """
    if abs(abs(C) - abs(D)) <= eps_deg * max(abs(C), abs(D)):
        raise ValueError("|C| = |D|: phi is unbounded")
    if p is None:
        cf = continued_fraction(beta, 64)
        match = [pq for pq in cf.convergents if pq[1] == q]
        if not match:
            raise ValueError(f"q={q} is not a convergent denominator")
        p = match[0][0]
    Q = OrbitPolynomial.one_freq(C, D, beta)
    integral, jensen, _ = jensen_integral(C, D)
    fwd, _ = Q.log_abs_values(y, 1, q + 1)
    bwd, _ = Q.log_abs_values(y, -q, 0)
    dev_f = abs(fsum_log(fwd) - q * integral)
    dev_b = abs(fsum_log(bwd) - q * integral)
    lip = 2 * math.pi * min(abs(C), abs(D)) / abs(abs(C) - abs(D))
    return RiemannDeviation(q, p, float(y), dev_f, dev_b, integral, jensen, 2 * lip,
                            residue_coverage(p, q))


# ---------------------------------------------------------------------------
# rational beta: r-periodic block products


@dataclass
class PeriodicCheck:
    p: int
    r: int
    x: float
    z: float
    m: int
    T_x: float
    T_z: float
    periodicity_error: float
    branch: str
    K: float
    K_first_half: float
    K_second_half: float
    N_max: int
    N_independent: bool
    log_ratios: list[float] = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        return {k: (repr(v) if isinstance(v, float) else v) for k, v in self.__dict__.items()
                if k != "log_ratios"}


def block_log(Q: OrbitPolynomial, x: float, r: int) -> float:
    """ln T(x) = sum_{j<r} ln|Q(x+j)|."""
    la, hits = Q.log_abs_values(x, 0, r)
    if hits:
        raise SingularityError("Q vanishes on the block")
    return fsum_log(la)


def periodic_product_check(C: complex, D: complex, beta: RealParam, x: float, z: float, m: int,
                           N_max: int = 100_000, tol: float = 1e-9) -> PeriodicCheck:
    """Block periodicity T(x+1) = T(x) and the constant K in the branch selected by T.

    Branch T(x) >= T(z): K = sup_N prod_{n=-N+m}^{-1}|Q(z+n)| / prod_{n=0}^{N}|Q(x+n)|.
    Branch T(x) <  T(z): the mirrored ratio with x and z exchanged. ``N_independent``
    checks that the supremum over N in (N_max/2, N_max] does not exceed the one
    over N <= N_max/2.
    """
    if not beta.is_rational:
        raise ValueError("beta must be an exact rational")
    fr = Fraction(beta.value)
    p, r = fr.numerator, fr.denominator
    Q = OrbitPolynomial.one_freq(C, D, beta)
    if m < 0 or m >= N_max:
        raise ValueError("need 0 <= m < N_max")
    Tx, Tz = block_log(Q, x, r), block_log(Q, z, r)
    Tx1 = block_log(Q, x + 1.0, r)
    period_err = abs(math.exp(Tx1 - Tx) - 1.0)
    if Tx >= Tz:
        branch, a, b = "T(x)>=T(z)", z, x
    else:
        branch, a, b = "T(x)<T(z)", x, z
    # numerator for N: n from -N+m to -1 (N - m terms); denominator n = 0..N
    back, hb = Q.log_abs_values(a, -N_max + m, 0)
    fwd, hf = Q.log_abs_values(b, 0, N_max + 1)
    if hb or hf:
        raise SingularityError("Q vanishes on an orbit")
    back_c = np.concatenate([[0.0], np.cumsum(back[::-1])])  # back_c[j] = sum of the j terms nearest -1
    fwd_c = np.cumsum(fwd)
    Ns = np.arange(m + 1, N_max + 1)
    lr = back_c[Ns - m] - fwd_c[Ns]
    half = len(Ns) // 2
    k1 = float(lr[:half].max()) if half else float(lr.max())
    k2 = float(lr[half:].max())
    return PeriodicCheck(p, r, float(x), float(z), m, math.exp(Tx), math.exp(Tz), period_err, branch,
                         math.exp(float(lr.max())), math.exp(k1), math.exp(k2), N_max,
                         bool(k2 <= k1 + tol), lr[:: max(1, len(lr) // 64)].tolist())


# ---------------------------------------------------------------------------
# divergence of inf_x (1/N) sum 1/|1 - e(x + alpha n)|


@dataclass
class DivergenceRow:
    N: int
    m_N: int
    inf_avg: float
    argmin: float
    ratio_to_log: float
    candidates: int

    def to_json(self) -> dict:
        return {k: (repr(v) if isinstance(v, float) else v) for k, v in self.__dict__.items()}


@dataclass
class DivergenceTable:
    alpha: str
    rows: list[DivergenceRow]
    increasing: bool
    min_ratio: float
    flags: list[str]

    def csv(self) -> str:
        out = ["N,m_N,inf_avg,ratio_to_log"]
        for r in self.rows:
            out.append(f"{r.N},{r.m_N},{r.inf_avg!r},{r.ratio_to_log!r}")
        return "\n".join(out) + "\n"

    def to_json(self) -> dict:
        return {"alpha": self.alpha, "rows": [r.to_json() for r in self.rows],
                "increasing": self.increasing, "min_ratio": repr(self.min_ratio), "flags": self.flags}


def dirichlet_denominator(alpha: RealParam, N: int) -> int:
    """Largest convergent denominator q <= N, so |alpha - p/q| <= 1/(qN)."""
    cf = continued_fraction(alpha, 200)
    best = 1
    for q in cf.denominators:
        if q <= N:
            best = max(best, q)
    return best


def _avg_fn(pts: np.ndarray, N: int):
    def f(xs):
        xs = np.atleast_1d(xs)
        out = np.empty(xs.size)
        for i0 in range(0, xs.size, 64):
            u = xs[i0:i0 + 64, None] + pts[None, :]
            s = np.abs(np.sin(math.pi * u))
            with np.errstate(divide="ignore"):
                out[i0:i0 + 64] = (0.5 / s).sum(axis=1) / N
        return out
    return f


def divergence_avg(alpha: RealParam, N: int, x) -> np.ndarray:
    """(1/N) sum_{n=1}^{N} 1/|1 - e(x + alpha n)| = (1/N) sum 1/(2|sin pi(x + {alpha n})|)."""
    return _avg_fn(frac_multiples(alpha, 1, N + 1), N)(np.asarray(x, dtype=np.float64))


def divergence_inf(alpha: RealParam, N: int, grid: int = 2000, gaps: int = 256, refine: int = 8):
    """Approximate inf over x by a grid, the midpoints of the widest gaps between
    singularities, and a bounded convex minimisation inside the best few gaps.

    Between consecutive singularities -{alpha n} the average is convex, so each
    refined gap is minimised exactly up to the solver tolerance.
    """
    pts = frac_multiples(alpha, 1, N + 1)
    f = _avg_fn(pts, N)
    sing = np.sort(np.mod(-pts, 1.0))
    lo = sing
    hi = np.concatenate([sing[1:], [sing[0] + 1.0]])
    width = hi - lo
    order = np.argsort(-width, kind="stable")[:gaps]
    mids = np.mod(0.5 * (lo[order] + hi[order]), 1.0)
    grid_x = (np.arange(grid) + 0.5) / grid
    cand = np.concatenate([grid_x, mids])
    vals = f(cand)
    best_i = int(np.argmin(vals))
    best_v, best_x = float(vals[best_i]), float(cand[best_i])
    # refine inside the gaps holding the best candidates
    top = np.argsort(vals, kind="stable")[:refine]
    for i in top.tolist():
        c = cand[i]
        j = int(np.searchsorted(sing, c)) - 1
        a = sing[j] if j >= 0 else sing[-1] - 1.0
        b = sing[j + 1] if j + 1 < sing.size else sing[0] + 1.0
        eps = (b - a) * 1e-9
        res = optimize.minimize_scalar(lambda t: float(f(np.array([t]))[0]), bounds=(a + eps, b - eps),
                                       method="bounded", options={"xatol": 1e-12 * max(b - a, 1e-300)})
        if res.fun < best_v:
            best_v, best_x = float(res.fun), float(res.x % 1.0)
    return best_v, best_x, int(cand.size)


def divergence_demo(alpha: RealParam, N_list, grid: int = 2000, workers: int = 1) -> DivergenceTable:
    flags = []
    if alpha.is_rational:
        flags.append("rational-alpha: outside preconditions")

    def row(N):
        v, xm, nc = divergence_inf(alpha, N, grid)
        m = dirichlet_denominator(alpha, N)
        ratio = v / math.log(m) if m > 1 else math.inf
        return DivergenceRow(int(N), m, v, xm, ratio, nc)
    rows = parallel_map(row, list(N_list), workers)
    inc = all(b.inf_avg > a.inf_avg for a, b in zip(rows, rows[1:]))
    finite = [r.ratio_to_log for r in rows if math.isfinite(r.ratio_to_log)]
    return DivergenceTable(str(alpha), rows, inc, min(finite) if finite else math.inf, flags)


def nearest_term_dominance(alpha: RealParam, N: int, n: int, offset: float = 1e-7) -> tuple[float, float]:
    """(largest single term, full average) at x = -{alpha n} + offset."""
    pts = frac_multiples(alpha, 1, N + 1)
    x = (-pts[n - 1] + offset) % 1.0
    u = np.abs(np.sin(math.pi * (x + pts)))
    terms = 0.5 / u / N
    return float(terms.max()), float(terms.sum())

