"""Reciprocal-sum averages along orbits and Monte-Carlo exceptional sets."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import mpmath
import numpy as np

from ..diophantine import min_weighted_norm
from ..exact import RealParam, frac_multiples, workdps
from ..trigpoly import Coefficients, OrbitPolynomial, ZeroSet, dist_int, zero_distance_bound, zeros
from .core import abs_grid, batch_reciprocal_sums, map_samples, reciprocal_average, OrbitReport

DEFAULT_SAMPLES = 10_000
DEFAULT_DELTA = 0.01


class ParameterError(ValueError):
    pass


@dataclass
class ExceptionalSetEstimate:
    """Monte-Carlo estimate of the measure of an exceptional set of base points."""

    delta: float
    C: float
    samples: int
    violating_fraction: float
    std_error: float
    seed: int
    kind: str
    parts: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    member_fn: Callable | None = field(default=None, repr=False)

    def member(self, xs) -> np.ndarray:
        return self.member_fn(np.atleast_1d(np.asarray(xs, dtype=np.float64)))

    def contains(self, x: float) -> bool:
        return bool(self.member([x])[0])

    def to_json(self) -> dict:
        return {"kind": self.kind, "delta": repr(self.delta), "C": repr(self.C),
                "samples": self.samples, "violating_fraction": repr(self.violating_fraction),
                "std_error": repr(self.std_error), "seed": self.seed,
                "parts": {k: repr(v) for k, v in self.parts.items()},
                "provenance": self.provenance}


def _std_error(p: float, n: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / n) if n else math.nan


def sample_points(samples: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).random(samples)


def upper_threshold(stats: np.ndarray, eligible: np.ndarray, budget: float, total: int) -> float:
    """Smallest C with #{eligible, stat > C} <= budget * total (an empirical quantile)."""
    vals = np.sort(stats[eligible])[::-1]
    if vals.size == 0:
        return math.inf
    k = int(math.floor(budget * total))
    return float(vals[min(k, vals.size - 1)])


def _circ_dist_to_set(u: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Distance on R/Z from each u to the nearest point of pts."""
    s = np.sort(np.mod(pts, 1.0))
    idx = np.searchsorted(s, u)
    lo = s[(idx - 1) % s.size]
    hi = s[idx % s.size]
    return np.minimum(dist_int(u - lo), dist_int(u - hi))


def scale_exceptional_set(poly: OrbitPolynomial, entry, delta: float = DEFAULT_DELTA,
                          samples: int = DEFAULT_SAMPLES, seed: int = 0, workers: int = 1,
                          zero_set: ZeroSet | None = None) -> ExceptionalSetEstimate:
    """Union of the three pieces excluded for the scale-form average.

    E1: {alpha x} within delta|alpha|/(20 P_k) of some {-n alpha + g1}, n < [P_k];
    E2: min(||alpha x||, ||beta x||) <= delta(|alpha| + |beta|)/100;
    E3: the remaining x whose normalised average exceeds C, with C the empirical
    quantile leaving a delta/10 fraction of the samples above it.
    """
    if poly.form != "two-freq":
        raise ValueError("scale exceptional sets are defined for C0 + C1 e(ax) + C2 e(bx)")
    zs = zero_set or zeros(poly.coefficients)
    a, b = float(poly.alpha), float(poly.beta)
    P = entry.P_float
    nP = entry.P_int
    cloud = []
    for g1, _ in zs.zeros:
        cloud.append(np.mod(g1 + frac_multiples(-poly.alpha, 0, nP), 1.0))
    cloud = np.concatenate(cloud) if cloud else np.empty(0)
    r1 = delta * abs(a) / (20.0 * P)
    r2 = delta * (abs(a) + abs(b)) / 100.0
    norm = entry.M * P * math.log(P)

    def near(xs):
        e1 = (_circ_dist_to_set(np.mod(a * xs, 1.0), cloud) < r1) if cloud.size else np.zeros(xs.size, bool)
        e2 = np.minimum(dist_int(a * xs), dist_int(b * xs)) <= r2
        return e1, e2

    def stat(xs):
        return batch_reciprocal_sums(poly, xs, 0, nP) / norm

    xs = sample_points(samples, seed)
    e1, e2 = near(xs)
    st = map_samples(stat, xs, workers)
    elig = ~(e1 | e2)
    C = upper_threshold(st, elig, delta / 10.0, samples)
    e3 = elig & (st > C)

    def member(q):
        f1, f2 = near(q)
        return f1 | f2 | (stat(q) > C)

    viol = float(np.mean(e1 | e2 | e3)) if samples else math.nan
    parts = {"E1": float(np.mean(e1)), "E2": float(np.mean(e2)), "E3": float(np.mean(e3))}
    prov = {"N": entry.N, "P": repr(P), "M": repr(entry.M), "n_terms": nP,
            "zeros": len(zs.zeros), "statistic": "(1/(M_k P_k log P_k)) sum 1/|P(x+n)|"}
    return ExceptionalSetEstimate(delta, C, samples, viol, _std_error(viol, samples), seed,
                                  "scale", parts, prov, member)


def power_exceptional_set(stat_fn: Callable[[np.ndarray], np.ndarray], delta: float, samples: int,
                          seed: int, workers: int = 1, label: str = "") -> ExceptionalSetEstimate:
    """Exceptional set {stat > C} with C the empirical (1 - delta/2) quantile."""
    xs = sample_points(samples, seed)
    st = map_samples(stat_fn, xs, workers)
    C = upper_threshold(st, np.ones(samples, bool), delta / 2.0, samples)
    viol = float(np.mean(st > C)) if samples else math.nan

    def member(q):
        return stat_fn(q) > C
    return ExceptionalSetEstimate(delta, C, samples, viol, _std_error(viol, samples), seed,
                                  "power", {"E": viol}, {"statistic": label}, member)


# ---------------------------------------------------------------------------
# sums over an arbitrary finite point set


def reciprocal_sums_at(points, x) -> tuple[float, float]:
    """((1/N) sum 1/||x - x_n||, (1/N^2) sum 1/||x - x_n||^2)."""
    pts = np.asarray(points, dtype=np.float64)
    d = dist_int(float(x) - pts)
    with np.errstate(divide="ignore"):
        return float(np.sum(1.0 / d) / pts.size), float(np.sum(1.0 / d ** 2) / pts.size ** 2)


@dataclass
class GenericSumsEstimate:
    N: int
    delta: float
    radius: float
    C1: float
    threshold1: float
    C2: float
    estimate: ExceptionalSetEstimate

    def to_json(self) -> dict:
        return {"N": self.N, "delta": repr(self.delta), "radius": repr(self.radius),
                "C1": repr(self.C1), "threshold1": repr(self.threshold1), "C2": repr(self.C2),
                "estimate": self.estimate.to_json()}


def chebyshev_constants(N: int, delta: float) -> tuple[float, float, float]:
    """(threshold for the 1/||.|| average, C1 = threshold/log N, C2).

    Off the union U of radius-delta/(10N) arcs, the integral of (1/N) sum 1/||x-x_n||
    is at most 2 ln(5N/delta) and that of (1/N^2) sum 1/||x-x_n||^2 at most 20/delta.
    Chebyshev with budget 2 delta/5 for each, plus |U| <= delta/5, totals delta.
    """
    t1 = 5.0 * math.log(5.0 * N / delta) / delta
    C1 = t1 / math.log(N) if N >= 2 else math.inf
    C2 = 50.0 / delta ** 2
    return t1, C1, C2


def generic_reciprocal_sums(points, samples: int = DEFAULT_SAMPLES, delta: float = DEFAULT_DELTA,
                            seed: int = 0, workers: int = 1) -> GenericSumsEstimate:
    pts = np.mod(np.asarray(points, dtype=np.float64), 1.0)
    N = pts.size
    if N < 1:
        raise ParameterError("need at least one point")
    if not 0 < delta < 1:
        raise ParameterError("delta must lie in (0, 1)")
    radius = delta / (10.0 * N)
    t1, C1, C2 = chebyshev_constants(N, delta)

    def flags(xs):
        d = dist_int(xs[:, None] - pts[None, :])
        in_u = (d <= radius).any(axis=1)
        with np.errstate(divide="ignore"):
            s1 = (1.0 / d).sum(axis=1) / N
            s2 = (1.0 / d ** 2).sum(axis=1) / N ** 2
        return np.stack([in_u, s1 >= t1, s2 >= C2], axis=1).astype(np.float64)

    xs = sample_points(samples, seed)
    f = map_samples(flags, xs, workers).reshape(-1, 3).astype(bool)
    union = f.any(axis=1)
    viol = float(np.mean(union))

    def member(q):
        return flags(q).astype(bool).any(axis=1)

    est = ExceptionalSetEstimate(delta, C1, samples, viol, _std_error(viol, samples), seed, "generic",
                                 {"U": float(f[:, 0].mean()), "S1": float(f[:, 1].mean()),
                                  "S2": float(f[:, 2].mean())},
                                 {"N": N, "threshold1": repr(t1), "C2": repr(C2)}, member)
    return GenericSumsEstimate(N, delta, radius, C1, t1, C2, est)


# ---------------------------------------------------------------------------
# A_n profiles


def profile_terms(zs: ZeroSet, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """A_n with u = alpha(x+n), v = beta(x+n) (min over the zeros)."""
    return zero_distance_bound(u, v, zs)


def _profile_sum(poly: OrbitPolynomial, zs: ZeroSet, xs: np.ndarray, N: int, gamma: float) -> np.ndarray:
    from .core import _phase_grid
    u = _phase_grid(poly.alpha, xs, 0, N)
    v = _phase_grid(poly.beta, xs, 0, N)
    A = profile_terms(zs, u, v)
    with np.errstate(divide="ignore"):
        return (1.0 / A).sum(axis=1) / float(N) ** gamma


def _exponent_M(N: float, gamma: float, ge: float, D: float) -> float:
    return N ** ((gamma - 1.0) * ge / (ge - 1.0)) * D ** (1.0 / (ge - 1.0))


def an_profile(coeffs: Coefficients, alpha: RealParam, beta: RealParam, x: float, N: int,
               gamma: float = 2.0, epsilon: float = 0.1, delta: float = DEFAULT_DELTA,
               exceptional: ExceptionalSetEstimate | None = None, slope_tol: float = 1e-9) -> OrbitReport:
    """(1/N^gamma) sum_{n<N} 1/A_n(x) with the branch data of the slope t."""
    if gamma + epsilon <= 1:
        raise ParameterError("gamma + epsilon must exceed 1")
    poly = OrbitPolynomial.two_freq(coeffs, alpha, beta)
    zs = zeros(coeffs)
    direct = reciprocal_average(poly, x, gamma=gamma, N=N)
    if zs.no_triangle:
        margin = -zs.defect
        rep = OrbitReport(float(x), N, "forward", direct.log_product, direct.min_log_abs,
                          direct.reciprocal_avg, f"1/N^{gamma!r} sum 1/|P|", flags=["no-triangle"])
        rep.bound = N ** (1.0 - gamma) / margin
        rep.within_bound = bool(direct.reciprocal_avg <= rep.bound * (1 + 1e-12))
        rep.extra["branch"] = "no-triangle"
        return rep
    val = float(_profile_sum(poly, zs, np.array([float(x)]), N, gamma)[0])
    a, b = float(alpha), float(beta)
    flags = []
    extra = {"t": repr(zs.t), "direct_avg": repr(direct.reciprocal_avg), "zeros": len(zs.zeros)}
    if abs(a + zs.t * b) <= slope_tol * (abs(a) + abs(b)):
        extra["branch"] = "alpha+t*beta=0"
        theta = alpha / beta
        ge = gamma + epsilon
        D = min_weighted_norm(theta, N, ("pow", ge)).minimum
        M = _exponent_M(N * abs(b), gamma, ge, D)
        pts = frac_multiples(theta, 0, N)
        g1, g2 = zs.zeros[0]
        S = []
        for xi in (g1 + zs.t * g2, g1 + zs.t * g2 + zs.t):
            members = np.nonzero(dist_int(pts - xi) <= 1.0 / M)[0]
            S.append({"xi": repr(xi), "size": int(members.size),
                      "bound": repr(N * (1.0 / (M * D)) ** (1.0 / ge)),
                      "N^(1/10)": repr(N ** 0.1), "members": members.tolist()[:64]})
            # exceptional set of the branch: ||alpha(x+n) - g1|| small on S(xi)
            if members.size:
                u = np.mod(a * float(x) + frac_multiples(alpha, 0, N)[members], 1.0)
                if np.any(dist_int(u - g1) <= delta * N ** -0.1):
                    flags.append("branch-exceptional")
        extra.update({"D_eps": repr(D), "M": repr(M), "S": S})
    else:
        extra["branch"] = "alpha+t*beta!=0"
    if exceptional is not None and exceptional.contains(float(x)):
        flags.append("exceptional")
    rep = OrbitReport(float(x), N, "forward", direct.log_product, direct.min_log_abs, val,
                      f"1/N^{gamma!r} sum 1/A_n", flags=sorted(set(flags)), extra=extra)
    return rep


def an_profile_samples(coeffs: Coefficients, alpha: RealParam, beta: RealParam, N: int, gamma: float,
                       samples: int, seed: int, workers: int = 1) -> np.ndarray:
    """Profile values for seeded base points (vectorised)."""
    poly = OrbitPolynomial.two_freq(coeffs, alpha, beta)
    zs = zeros(coeffs)
    xs = sample_points(samples, seed)
    if zs.no_triangle:
        return map_samples(lambda q: (1.0 / abs_grid(poly, q, 0, N)).sum(axis=1) / float(N) ** gamma,
                           xs, workers)
    return map_samples(lambda q: _profile_sum(poly, zs, q, N, gamma), xs, workers)


# ---------------------------------------------------------------------------
# ball counts for Diophantine ratios


@dataclass
class BallCount:
    xi: float
    R: float
    N: int
    gamma: float
    epsilon: float
    D_eps: float
    D_eps_argmin: int
    M: float
    count: int
    bound: float
    holds: bool
    in_range: bool
    dyadic_sum: float
    pairs_checked: int
    pair_violations: int
    close_pairs: int

    def to_json(self) -> dict:
        out = {}
        for k, v in self.__dict__.items():
            out[k] = repr(v) if isinstance(v, float) else v
        return out


def _exact_dist(theta: RealParam, n: int, xi: float) -> float:
    with workdps(50):
        v = theta.to_mpf(50) * n - mpmath.mpf(Fraction(xi).numerator) / Fraction(xi).denominator
        return float(abs(v - mpmath.nint(v)))


def diophantine_ball_count(xi: float, R: float, N: int, theta: RealParam, gamma: float = 2.0,
                           epsilon: float = 0.1, D_eps: tuple[float, int] | None = None) -> BallCount:
    """Count n < N with ||n theta - xi|| < R against N (R/D_eps)^(1/(gamma+eps))."""
    ge = gamma + epsilon
    if ge <= 1:
        raise ParameterError("gamma + epsilon must exceed 1")
    if D_eps is None:
        st = min_weighted_norm(theta, N, ("pow", ge))
        D_eps = (st.minimum, st.argmin)
    D, n_star = D_eps
    M = _exponent_M(float(N), gamma, ge, D)
    d = dist_int(frac_multiples(theta, 0, N) - float(xi))
    inside = d < R
    for n in np.nonzero(np.abs(d - R) <= 1e-12)[0]:
        inside[n] = _exact_dist(theta, int(n), float(xi)) < R
    idx = np.nonzero(inside)[0]
    count = int(idx.size)
    bound = N * (R / D) ** (1.0 / ge)
    with np.errstate(divide="ignore"):
        far = d >= 1.0 / M
        dyadic = float(np.sum(1.0 / d[far]) / float(N) ** gamma)
    gaps = np.diff(idx)
    viol = 0
    close = 0
    limit = (D / R) ** (1.0 / ge)
    for g in gaps.tolist():
        w = g ** ge * float(min(abs(v) for v in (theta.frac_times(g), theta.frac_times(g) - 1)))
        if w < D * (1 - 1e-12):
            viol += 1
        if g <= limit:
            close += 1
    return BallCount(float(xi), float(R), N, gamma, epsilon, float(D), int(n_star), M, count, bound,
                     bool(count <= bound + 1), bool(1.0 / M <= R <= D / 2 ** ge), dyadic,
                     int(gaps.size), viol, close)
