"""Paired-orbit comparison at almost periods, the decay obstruction probe."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..exact import exact_floor, workdps
from ..trigpoly import OrbitPolynomial
from .averages import ExceptionalSetEstimate, sample_points, scale_exceptional_set
from .core import fsum_log, parallel_map


class ExceptionalPointError(ValueError):
    """Base point lies in the estimated exceptional set."""


class NoAdmissibleSample(RuntimeError):
    def __init__(self, k: int, budget: int, rejected: dict):
        super().__init__(f"no admissible base point at level {k} within {budget} draws: {rejected}")
        self.k, self.budget, self.rejected = k, budget, rejected


def almost_period_defect(freq, entry) -> float:
    """|e(P_k freq) - 1| = 2|sin(pi {P_k freq})| from the exact product."""
    if freq.is_exact:
        f = float(freq.value * entry.P - exact_floor(freq.value * entry.P))
    else:
        with workdps(60):
            f = float(freq.to_mpf(60) * entry.P_float % 1)
    return 2.0 * abs(math.sin(math.pi * f))


@dataclass
class PairComparison:
    k: int
    N: int
    P: float
    M: float
    x: float
    log_x: float
    log_y: float
    log_ratio: float
    chain_bound: float
    step_alpha: float
    step_beta: float
    step_bound: float
    step_ok: bool
    chain_ok: bool
    flags: list[str] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {}
        for k, v in self.__dict__.items():
            out[k] = repr(v) if isinstance(v, float) else v
        return out


def _sum_log(poly: OrbitPolynomial, x: float, n: int, shift=None) -> tuple[float, np.ndarray]:
    la, _ = poly.log_abs_values(x, 0, n, shift)
    return fsum_log(la), la


def pair_compare(poly: OrbitPolynomial, entry, D, x: float, k: int = 0,
                 exceptional: ExceptionalSetEstimate | None = None, force: bool = False) -> PairComparison:
    """log prod |P(y+n)| - log prod |P(x+n)| over n < [P_k] with y = x - P_k exactly.

    ``chain_bound`` is sum log(1 + d/|P(x+n)|) with d = |C1||e(P a)-1| + |C2||e(P b)-1|,
    a rigorous upper bound for the log ratio.
    """
    flags = []
    if exceptional is not None and exceptional.contains(x):
        if not force:
            raise ExceptionalPointError(f"x={x!r} lies in the estimated exceptional set")
        flags.append("forced-exceptional")
    n = entry.P_int
    lx, la = _sum_log(poly, x, n)
    ly, _ = _sum_log(poly, x, n, shift=-entry.P)
    c = poly.coefficients
    s_a = almost_period_defect(poly.alpha, entry)
    s_b = almost_period_defect(poly.beta, entry) if poly.beta is not None else 0.0
    bound = 10.0 * float(D) / (entry.P_float * entry.M)
    d = abs(c.C1) * s_a + abs(c.C2 or 0) * s_b
    chain = math.fsum(np.log1p(d * np.exp(-la)).tolist())
    ratio = ly - lx
    tol = 1e-9 * (1.0 + abs(lx))
    return PairComparison(k, entry.N, entry.P_float, entry.M, float(x), lx, ly, ratio, chain,
                          s_a, s_b, bound, bool(s_a <= bound and s_b <= bound),
                          bool(ratio <= chain + tol), flags)


@dataclass
class LFit:
    L: float
    slope: float
    per_level: list[float]
    log_P: list[float]
    samples: int
    spread: float

    def to_json(self) -> dict:
        return {"L": repr(self.L), "slope": repr(self.slope),
                "per_level": [repr(v) for v in self.per_level],
                "log_P": [repr(v) for v in self.log_P], "samples": self.samples,
                "spread": repr(self.spread)}


def fit_L(levels: list[list[PairComparison]]) -> LFit:
    """Smallest L with log_ratio <= L log P_k on every comparison, plus a LSQ slope."""
    logs, per, xs, ys = [], [], [], []
    for comps in levels:
        lp = math.log(comps[0].P)
        logs.append(lp)
        r = max(c.log_ratio for c in comps)
        per.append(r / lp)
        for c in comps:
            xs.append(lp)
            ys.append(c.log_ratio)
    L = max(per) if per else math.nan
    xa, ya = np.array(xs), np.array(ys)
    slope = float(np.dot(xa, ya) / np.dot(xa, xa)) if xa.size else math.nan
    pos = [p for p in per if p > 0]
    spread = (max(pos) / min(pos) - 1.0) if pos else 0.0
    return LFit(float(L), slope, per, logs, len(xs), spread)


def good_samples(est: ExceptionalSetEstimate, count: int, seed: int, budget: int | None = None,
                 k: int = 0) -> np.ndarray:
    """First ``count`` seeded draws outside the estimated exceptional set."""
    budget = budget or 20 * count
    xs = sample_points(budget, seed)
    keep = xs[~est.member(xs)]
    if keep.size < count:
        raise NoAdmissibleSample(k, budget, {"accepted": int(keep.size), "needed": count})
    return keep[:count]


@dataclass
class PairPipeline:
    levels: list[list[PairComparison]]
    fit: LFit
    estimates: list[ExceptionalSetEstimate]
    step_ok: bool
    chain_ok: bool

    def csv(self) -> str:
        rows = ["k,Pk,log_ratio"]
        for comps in self.levels:
            for c in comps:
                rows.append(f"{c.k},{c.P!r},{c.log_ratio!r}")
        return "\n".join(rows) + "\n"

    def to_json(self) -> dict:
        return {"fit": self.fit.to_json(), "step_ok": self.step_ok, "chain_ok": self.chain_ok,
                "estimates": [e.to_json() for e in self.estimates],
                "levels": [{"k": c[0].k, "N": c[0].N, "P": repr(c[0].P), "M": repr(c[0].M),
                            "max_log_ratio": repr(max(p.log_ratio for p in c)),
                            "step_alpha": repr(c[0].step_alpha), "step_bound": repr(c[0].step_bound)}
                           for c in self.levels]}


def pair_pipeline(poly: OrbitPolynomial, seq, samples: int = 100, seed: int = 7, delta: float = 0.01,
                  est_samples: int = 10_000, workers: int = 1, levels: range | None = None) -> PairPipeline:
    out, ests = [], []
    ks = list(levels) if levels is not None else list(range(1, len(seq.entries) + 1))
    for k in ks:
        e = seq.entries[k - 1]
        est = scale_exceptional_set(poly, e, delta, est_samples, seed + 1000 * k, workers)
        xs = good_samples(est, samples, seed + k, k=k)
        comps = parallel_map(lambda x: pair_compare(poly, e, seq.D, float(x), k), xs, workers)
        out.append(comps)
        ests.append(est)
    fit = fit_L(out)
    return PairPipeline(out, fit, ests, all(c.step_ok for cs in out for c in cs),
                        all(c.chain_ok for cs in out for c in cs))


# ---------------------------------------------------------------------------
# (2,2) ratio form


@dataclass
class RatioPairComparison:
    k: int
    N: int
    P: float
    x: float
    log_ratio: float
    recip_P: float
    recip_Q: float
    step_alpha: float
    step_beta: float
    chain_bound: float

    def to_json(self) -> dict:
        return {k: (repr(v) if isinstance(v, float) else v) for k, v in self.__dict__.items()}


def ratio_pair_compare(P: OrbitPolynomial, Q: OrbitPolynomial, entry, x: float, k: int = 0) -> RatioPairComparison:
    """Same comparison for R = P/Q; the two reciprocal sums are reported separately."""
    R = OrbitPolynomial.ratio(P, Q)
    n = entry.P_int
    lr_x, _ = R.log_abs_values(x, 0, n)
    lr_y, _ = R.log_abs_values(x, 0, n, shift=-entry.P)
    ratio = fsum_log(lr_y) - fsum_log(lr_x)
    lp, _ = P.log_abs_values(x, 0, entry.N + 1)
    lq, _ = Q.log_abs_values(x, 0, entry.N + 1)
    rp = math.fsum(np.exp(-lp).tolist()) / entry.N
    rq = math.fsum(np.exp(-lq).tolist()) / entry.N
    sa = almost_period_defect(P.alpha, entry)
    sb = almost_period_defect(Q.alpha, entry)
    lpx, _ = P.log_abs_values(x, 0, n)
    lqx, _ = Q.log_abs_values(x, 0, n)
    dp = abs(P.coefficients.C1) * sa
    dq = abs(Q.coefficients.C1) * sb
    # |R(y)| <= (|P(x)| + dp)/(|Q(x)| - dq) termwise, when |Q(x)| > dq
    qx = np.exp(lqx)
    if np.all(qx > dq):
        chain = math.fsum((np.log1p(dp * np.exp(-lpx)) - np.log1p(-dq / qx)).tolist())
    else:
        chain = math.inf
    return RatioPairComparison(k, entry.N, entry.P_float, float(x), ratio, rp, rq, sa, sb, chain)


# ---------------------------------------------------------------------------
# decay obstruction


@dataclass
class DecayProbe:
    k: int
    N: int
    P: float
    x: float
    x_prime: float
    frac_P: float
    forward_log: float
    backward_log: float
    O_mult: float
    O_recip: float
    reference: float
    margin_mult: float
    margin_recip: float
    draws: int

    def to_json(self) -> dict:
        return {k: (repr(v) if isinstance(v, float) else v) for k, v in self.__dict__.items()}


def decay_probe(poly: OrbitPolynomial, seq, samples: int = 2000, delta: float = 0.01, seed: int = 0,
                L: float = 0.0, est_samples: int = 10_000, workers: int = 1,
                levels=None) -> list[DecayProbe]:
    """O_k = log prod_{n<[P]} |P(x+n)| + sigma log prod_{1<=n<=[P]} |P(x'-n)|, x' = x - {P_k}.

    sigma = +1 is the multiplicative convention, -1 the reciprocal one. The base
    point must avoid the estimated exceptional set and x' must lie in [0,1) outside
    it too. ``margin`` is O_k + L log P_k.
    """
    out = []
    ks = list(levels) if levels is not None else list(range(1, len(seq.entries) + 1))
    for k in ks:
        e = seq.entries[k - 1]
        est = scale_exceptional_set(poly, e, delta, est_samples, seed + 1000 * k, workers)
        fP = e.P - exact_floor(e.P)
        xs = sample_points(samples, seed + k)
        bad = est.member(xs)
        chosen = None
        rejected = {"exceptional": 0, "shift-outside": 0, "shift-exceptional": 0}
        for i, x in enumerate(xs.tolist()):
            if bad[i]:
                rejected["exceptional"] += 1
                continue
            xp = x - float(fP)
            if xp < 0:
                rejected["shift-outside"] += 1
                continue
            if est.contains(xp):
                rejected["shift-exceptional"] += 1
                continue
            chosen = (i, x)
            break
        if chosen is None:
            raise NoAdmissibleSample(k, samples, rejected)
        i, x = chosen
        n = e.P_int
        fwd, _ = _sum_log(poly, x, n)
        # x' - m for 1 <= m <= [P]: evaluate x + n - P for n < [P] via the exact shift
        la_b, _ = poly.log_abs_values(x, 0, n, shift=-e.P)
        bwd = fsum_log(la_b)
        O_m = fwd + bwd
        O_r = fwd - bwd
        ref = -L * math.log(e.P_float)
        out.append(DecayProbe(k, e.N, e.P_float, x, x - float(fP), float(fP), fwd, bwd, O_m, O_r, ref,
                              O_m - ref, O_r - ref, i + 1))
    return out
