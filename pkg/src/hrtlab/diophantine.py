"""Continued fractions, best approximants, weighted-norm minima and scale sequences."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import mpmath

from .exact import (workdps, 
    Exact,
    PrecisionError,
    QuadraticSurd,
    RealParam,
    _fixed_bits,
    exact_floor,
)

__all__ = [
    "ContinuedFraction",
    "RationalRatioError",
    "BruteForceCapError",
    "FracParts",
    "ScaleEntry",
    "ScaleSequence",
    "WeightedNormStat",
    "frac_parts",
    "continued_fraction",
    "best_approximant_check",
    "min_weighted_norm",
    "min_n_norm_exact",
    "scale_sequence",
    "norm_exact",
]

DEFAULT_BRUTE_CAP = 10**7


class RationalRatioError(ValueError):
    """alpha/beta is rational: use the rational-beta (periodicity) path instead."""


class BruteForceCapError(RuntimeError):
    def __init__(self, required: int, cap: int):
        super().__init__(f"brute-force range {required} exceeds cap {cap}; rerun with cap >= {required}")
        self.required = required
        self.cap = cap


@dataclass(frozen=True)
class FracParts:
    integer_part: int
    fractional_part: Exact
    signed_frac: Exact
    dist_to_int: Exact

    def as_tuple(self):
        return (self.integer_part, self.fractional_part, self.signed_frac, self.dist_to_int)


def _decimal_guard(x: RealParam, frac: Exact) -> None:
    # the declared digits must separate x from the nearest integer and from 1/2
    if x.kind != "decimal":
        return
    tol = Fraction(1, 10**x.precision_digits)
    half = Fraction(1, 2)
    if frac < tol or 1 - frac < tol or abs(frac - half) < tol:
        raise PrecisionError(f"precision horizon exceeded: {x} is within 1e-{x.precision_digits} "
                             "of a rounding boundary")


def frac_parts(x: RealParam, n: int = 1) -> FracParts:
    """[nx], {nx}, <nx> in [-1/2, 1/2) and ||nx||, exactly."""
    v = x.times(n)
    k = exact_floor(v)
    f = v - k
    _decimal_guard(x, f)
    signed = f if f < Fraction(1, 2) else f - 1
    dist = f if f <= Fraction(1, 2) else 1 - f
    return FracParts(k, f, signed, dist)


def norm_exact(x: RealParam, n: int) -> Exact:
    """||n x|| as an exact number."""
    v = x.times(n)
    f = v - exact_floor(v)
    return f if f <= Fraction(1, 2) else 1 - f


# ---------------------------------------------------------------------------
# continued fractions


@dataclass
class ContinuedFraction:
    partial_quotients: list[int]
    convergents: list[tuple[int, int]]
    trust_depth: int
    terminated: bool
    source: str = ""
    truncated: bool = False

    def to_json(self) -> dict:
        return {
            "input": self.source,
            "partial_quotients": list(self.partial_quotients),
            "convergents": [[str(p), str(q)] for p, q in self.convergents],
            "trust_depth": self.trust_depth,
            "terminated": self.terminated,
            "truncated": self.truncated,
        }

    @property
    def denominators(self) -> list[int]:
        return [q for _, q in self.convergents]


def _partial_quotients(v: Exact) -> Iterator[int]:
    while True:
        a = exact_floor(v)
        yield a
        rest = v - a
        if rest == 0:
            return
        v = 1 / rest


def convergents_from(quotients) -> Iterator[tuple[int, int]]:
    p0, q0, p1, q1 = 1, 0, 0, 1
    for a in quotients:
        p0, p1 = a * p0 + p1, p0
        q0, q1 = a * q0 + q1, q0
        yield p0, q0


def continued_fraction(x: RealParam, depth: int) -> ContinuedFraction:
    """Partial quotients a_0..a_{depth-1} and convergents of x.

    Rationals terminate (Euclid); surds are expanded exactly in their quadratic
    field; decimal literals are expanded exactly but only levels with
    q_k**2 <= 10**digits are trusted, and the result is cut there.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    quotients: list[int] = []
    convs: list[tuple[int, int]] = []
    gen = _partial_quotients(x.value)
    terminated = False
    cap = 10**x.precision_digits if x.kind == "decimal" else None
    truncated = False
    p0, q0, p1, q1 = 1, 0, 0, 1
    for _ in range(depth):
        try:
            a = next(gen)
        except StopIteration:
            terminated = True
            break
        p, q = a * p0 + p1, a * q0 + q1
        if cap is not None and q * q > cap:
            truncated = True
            break
        quotients.append(a)
        convs.append((p, q))
        p0, p1, q0, q1 = p, p0, q, q0
    else:
        # peek: a rational whose expansion has exactly `depth` terms is complete
        try:
            next(gen)
        except StopIteration:
            terminated = True
    return ContinuedFraction(quotients, convs, len(convs), terminated, str(x), truncated)


# ---------------------------------------------------------------------------
# brute-force minima of n ||n x||


def _scaled_norms(x: RealParam, start: int, stop: int):
    """Yield (n, D_n) with D_n = ||n x|| * 2**bits up to an error of n+1."""
    n_abs = max(abs(start), abs(stop - 1), 1)
    x.check_horizon(n_abs)
    bits = _fixed_bits(n_abs, x.precision_digits or 16)
    t = x.fixed_point(bits)
    one = 1 << bits
    mask = one - 1
    for n in range(start, stop):
        f = (n * t) & mask
        yield n, (f if 2 * f <= one else one - f), bits


def min_n_norm_exact(x: RealParam, lo: int, hi: int, cap: int = DEFAULT_BRUTE_CAP,
                     weighted: bool = True):
    """Exact (argmin, min) of n*||n x|| (or of ||n x|| when not weighted) over lo <= n <= hi.

    A fixed-point pass with a rigorous error bound shortlists candidates, which
    are then compared in exact arithmetic. Ties go to the smallest n.
    """
    if hi < lo:
        raise ValueError("empty range")
    if hi - lo + 1 > cap:
        raise BruteForceCapError(hi - lo + 1, cap)
    vals = []
    best = None
    for n, dn, bits in _scaled_norms(x, lo, hi + 1):
        w = n * dn if weighted else dn
        vals.append((n, w))
        if best is None or w < best:
            best = w
    slack = 2 * (hi + 1) * (hi + 2) if weighted else 2 * (hi + 2)
    shortlist = [n for n, w in vals if w <= best + slack]
    best_n, best_v = None, None
    for n in shortlist:
        v = norm_exact(x, n)
        if weighted:
            v = n * v
        if best_v is None or v < best_v:
            best_n, best_v = n, v
    return best_n, best_v


@dataclass(frozen=True)
class BestApproximantResult:
    """Outcome of the exhaustive best-approximant search at level k.

    ``ok`` combines three exact facts: ||q_k x|| is minimal among 1 <= n < q_{k+1};
    q_k ||q_k x|| is minimal among q_k <= n < q_{k+1}; and the minimum of
    n ||n x|| over 1 <= n < q_{k+1} sits at a convergent denominator.
    ``global_identity`` records whether q_k itself minimises n ||n x|| over the
    whole range 1 <= n < q_{k+1}; that stronger identity fails in general.
    """

    ok: bool
    k: int
    q: int
    witness: int
    value: Exact
    minimum: Exact
    searched_upto: int
    window_ok: bool
    weighted_witness: int
    weighted_at_convergent: bool
    global_identity: bool

    def __bool__(self):
        return self.ok

    def to_json(self) -> dict:
        return {"ok": self.ok, "k": self.k, "q": self.q, "witness": self.witness,
                "value": repr(float(self.value)), "minimum": repr(float(self.minimum)),
                "searched_upto": self.searched_upto, "window_ok": self.window_ok,
                "weighted_witness": self.weighted_witness,
                "weighted_at_convergent": self.weighted_at_convergent,
                "global_identity": self.global_identity}


def best_approximant_check(x: RealParam, k: int, cap: int = DEFAULT_BRUTE_CAP,
                           cf: ContinuedFraction | None = None) -> BestApproximantResult:
    """Exhaustive check of the best-approximation property of q_k over n < q_{k+1}."""
    if cf is None or len(cf.convergents) <= k + 1:
        cf = continued_fraction(x, k + 2)
    if k >= cf.trust_depth:
        raise PrecisionError(f"level {k} beyond trust depth {cf.trust_depth}")
    q = cf.convergents[k][1]
    if k + 1 < len(cf.convergents):
        upto = max(cf.convergents[k + 1][1] - 1, q)
    else:
        upto = q  # rational endpoint: q x is an integer
    if upto > cap:
        raise BruteForceCapError(upto, cap)
    n_star, m = min_n_norm_exact(x, 1, upto, cap, weighted=False)
    norm_q = norm_exact(x, q)
    value = q * norm_q
    _, wmin_window = min_n_norm_exact(x, q, upto, cap)
    w_n, w_min = min_n_norm_exact(x, 1, upto, cap)
    denoms = {d for d in cf.denominators[: k + 1]}
    at_conv = w_n in denoms
    ok = (norm_q == m) and (value == wmin_window) and at_conv
    return BestApproximantResult(ok, k, q, n_star, value, m, upto, value == wmin_window,
                                 w_n, at_conv, value == w_min)


# ---------------------------------------------------------------------------
# weighted norms


@dataclass(frozen=True)
class WeightedNormStat:
    x: str
    weight: str
    horizon: int
    minimum: float
    argmin: int
    exact_minimum: Exact | None = None
    start: int = 1

    def to_json(self) -> dict:
        return {"x": self.x, "weight": self.weight, "horizon": self.horizon,
                "minimum": repr(self.minimum), "argmin": self.argmin, "start": self.start}


def _weight_fn(weight):
    if weight in ("n", 1):
        return "n", lambda n: mpmath.mpf(n)
    if weight in ("nlogn", "n log n", "n*log(n)"):
        return "nlogn", lambda n: n * mpmath.log(n)
    if isinstance(weight, tuple) and weight[0] == "pow":
        g = float(weight[1])
        return f"n^{g!r}", lambda n: mpmath.mpf(n) ** g
    if isinstance(weight, (int, float)):
        g = float(weight)
        return f"n^{g!r}", lambda n: mpmath.mpf(n) ** g
    raise ValueError(f"unknown weight {weight!r}")


def min_weighted_norm(x: RealParam, N: int, weight="n") -> WeightedNormStat:
    """min over 1 <= n <= N of weight(n) * ||n x||.

    ``weight`` is ``"n"``, ``"nlogn"`` or ``("pow", gamma)``. For ``"nlogn"``
    the search starts at n = 2 since log 1 = 0 makes n = 1 trivial.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    name, w = _weight_fn(weight)
    if name == "n":
        n_star, v = min_n_norm_exact(x, 1, N, cap=max(N, DEFAULT_BRUTE_CAP))
        return WeightedNormStat(str(x), name, N, float(v), n_star, v)
    start = 2 if name == "nlogn" else 1
    if N < start:
        raise ValueError("N too small for this weight")
    best = None
    best_n = start
    wf = {"nlogn": lambda n: n * math.log(n)}.get(name)
    if wf is None:
        g = float(weight[1]) if isinstance(weight, tuple) else float(weight)
        wf = lambda n: float(n) ** g  # noqa: E731
    for n, dn, bits in _scaled_norms(x, start, N + 1):
        val = wf(n) * math.ldexp(dn, -bits)
        if best is None or val < best:
            best, best_n = val, n
    # re-evaluate the minimiser at extended precision
    with workdps(40):
        exact_norm = norm_exact(x, best_n)
        nm = exact_norm.to_mpf(40) if isinstance(exact_norm, QuadraticSurd) else mpmath.mpf(
            exact_norm.numerator) / exact_norm.denominator
        val = float(w(best_n) * nm)
    return WeightedNormStat(str(x), name, N, val, best_n, None, start)


# ---------------------------------------------------------------------------
# scale sequences


@dataclass
class ScaleEntry:
    """One almost period: N_k, P_k = N_k/beta, M_k with 1/M_k = N_k||N_k alpha/beta||/D."""

    N: int
    P: Exact
    M: float
    m: int
    base_N: int
    value: Exact  # N ||N alpha/beta||
    min_term: Exact | None = None  # min_{n <= N} n ||n alpha/beta||
    min_method: str = ""
    checks: dict = field(default_factory=dict)

    @property
    def P_float(self) -> float:
        return float(self.P)

    @property
    def P_int(self) -> int:
        return exact_floor(self.P)

    @property
    def P_frac(self) -> float:
        return float(self.P - exact_floor(self.P))

    @classmethod
    def manual(cls, N: int, beta: RealParam, M: float = 1.0) -> "ScaleEntry":
        """Entry for controls where alpha/beta is rational (no scale certificate)."""
        return cls(N=N, P=(1 / beta).times(N), M=M, m=1, base_N=N, value=Fraction(0),
                   min_method="manual")

    def to_json(self) -> dict:
        return {"N": self.N, "P": repr(self.P_float), "M": repr(self.M), "m": self.m,
                "base_N": self.base_N, "value": repr(float(self.value)),
                "min_term": None if self.min_term is None else repr(float(self.min_term)),
                "min_method": self.min_method, "checks": dict(self.checks)}


@dataclass
class ScaleSequence:
    alpha: RealParam
    beta: RealParam
    s: Fraction
    entries: list[ScaleEntry]
    D: Exact
    regime: str
    epsilon: Exact
    epsilon_argmin: int
    search_bound: int
    shortfall: int = 0
    skipped_levels: list[int] = field(default_factory=list)

    @property
    def ratio(self) -> RealParam:
        return self.alpha / self.beta

    @property
    def D_float(self) -> float:
        return float(self.D)

    @property
    def verified(self) -> bool:
        return all(all(e.checks.values()) for e in self.entries)

    def to_json(self) -> dict:
        return {"alpha": str(self.alpha), "beta": str(self.beta), "s": str(self.s),
                "D": repr(self.D_float), "regime": self.regime,
                "epsilon": repr(float(self.epsilon)), "epsilon_argmin": self.epsilon_argmin,
                "search_bound": self.search_bound, "shortfall": self.shortfall,
                "skipped_levels": self.skipped_levels,
                "entries": [e.to_json() for e in self.entries]}


def _min_term(theta: RealParam, N: int, conv_q: list[int], brute_bound: int):
    if N <= brute_bound:
        _, v = min_n_norm_exact(theta, 1, N, cap=max(brute_bound, DEFAULT_BRUTE_CAP))
        return v, "brute-force"
    # for q_j <= n < q_{j+1}: ||n x|| >= ||q_j x|| and n >= q_j
    v = min(q * norm_exact(theta, q) for q in conv_q if q <= N)
    return v, "convergents"


def scale_sequence(alpha: RealParam, beta: RealParam, s, K: int, search_bound: int,
                   min_N: int = 2, max_depth: int = 400) -> ScaleSequence:
    """Almost periods N_k with {N_k/beta} < s and N_k||N_k alpha/beta|| <= D min(...).

    The base levels are continued-fraction denominators of alpha/beta: all of
    them in the badly approximable regime, or the filtered set
    {k : s q_{k+1} > q_k} in the well approximable one. Each base level is
    multiplied by the least m <= ceil(1/s) giving {m q / beta} < s. D is the
    certified maximum over the emitted entries.
    """
    s = Fraction(s)
    if not (0 < s < 1):
        raise ValueError("s must lie in (0, 1)")
    if K < 1:
        raise ValueError("K must be >= 1")
    if not alpha.nonzero() or not beta.nonzero():
        raise ValueError("alpha and beta must be nonzero")
    theta = alpha / beta
    if theta.is_rational:
        raise RationalRatioError("rational ratio alpha/beta: use the rational-beta path")
    inv_beta = 1 / beta

    eps_n, eps = min_n_norm_exact(theta, 1, search_bound, cap=max(search_bound, DEFAULT_BRUTE_CAP))
    cf = continued_fraction(theta, max_depth)
    qs: list[int] = []
    for q in cf.denominators:
        if not qs or q > qs[-1]:
            qs.append(q)

    well_levels = [i for i in range(len(qs) - 1)
                   if qs[i] >= min_N and s * qs[i + 1] > qs[i] and qs[i + 1] <= search_bound]
    regime = "well-approximable" if len(well_levels) >= K else "badly-approximable"
    if regime == "well-approximable":
        base_idx = [i for i in range(len(qs) - 1) if qs[i] >= min_N and s * qs[i + 1] > qs[i]]
    else:
        base_idx = [i for i in range(len(qs)) if qs[i] >= min_N]

    m_max = math.ceil(1 / s)
    raw: list[tuple[int, int, int]] = []
    skipped: list[int] = []
    for i in base_idx:
        if len(raw) == K:
            break
        base = qs[i]
        for m in range(1, m_max + 1):
            try:
                f = inv_beta.frac_times(m * base)
            except PrecisionError:
                f = None
                break
            if f < s:
                break
        else:
            f = None
        N = m * base if f is not None else None
        if N is None or (raw and N <= raw[-1][0]):
            skipped.append(base)
            continue
        raw.append((N, m, base))

    entries: list[ScaleEntry] = []
    D = None
    for N, m, base in raw:
        value = N * norm_exact(theta, N)
        mt, method = _min_term(theta, N, qs, search_bound)
        ratio = value / mt
        cand = ratio if ratio >= value else value
        D = cand if D is None or cand > D else D
        entries.append(ScaleEntry(N=N, P=inv_beta.times(N), M=0.0, m=m, base_N=base,
                                  value=value, min_term=mt, min_method=method))
    if D is None:
        D = Fraction(1)
    for e in entries:
        e.M = float(D / e.value)
        e.checks = {
            "i": inv_beta.frac_times(e.N) < s,
            "ii": e.value <= D * e.min_term,
            "iii": e.value <= D,
        }
    for a, b in zip(entries, entries[1:]):
        b.checks["increasing"] = b.N > a.N
    return ScaleSequence(alpha, beta, s, entries, D, regime, eps, eps_n, search_bound,
                         shortfall=K - len(entries), skipped_levels=skipped)
