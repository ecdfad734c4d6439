"""Evaluation along Z-orbits x + n: log products and batched |P| tables."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from ..exact import RealParam, frac_multiples
from ..trigpoly import UNDERFLOW_LOG, ZERO_HIT, OrbitPolynomial, SingularityError, cis2pi, _frac_product

# fixed sample-chunk size: results never depend on the worker count
CHUNK = 256
_UNDERFLOW_ABS = math.exp(UNDERFLOW_LOG)


def parallel_map(fn: Callable, items: Sequence, workers: int = 1) -> list:
    """Order-preserving map; ``workers > 1`` uses a thread pool."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def chunked(n: int, size: int = CHUNK) -> list[tuple[int, int]]:
    return [(i, min(i + size, n)) for i in range(0, n, size)]


def map_samples(fn: Callable[[np.ndarray], np.ndarray], xs: np.ndarray, workers: int = 1) -> np.ndarray:
    """Apply a vectorised per-sample statistic in fixed chunks; merge by index."""
    parts = parallel_map(lambda ab: fn(xs[ab[0]:ab[1]]), chunked(len(xs)), workers)
    return np.concatenate(parts) if parts else np.empty(0)


def fsum_log(values: np.ndarray) -> float:
    """Compensated sum of a log table; ZERO_HIT if any entry is -inf."""
    if values.size and not np.all(np.isfinite(values)):
        if np.any(np.isneginf(values)):
            return ZERO_HIT
        raise ArithmeticError("non-finite log value")
    return math.fsum(values.tolist())


def _phase_grid(freq: RealParam, xs: np.ndarray, start: int, stop: int, shift=None) -> np.ndarray:
    """freq * (x_i + shift + n) mod 1, shape (len(xs), stop - start)."""
    base = np.asarray(xs, dtype=np.float64) * float(freq)
    base = base - np.floor(base)
    if shift is not None:
        base = base + _frac_product(freq, shift)
    ph = base[:, None] + frac_multiples(freq, start, stop)[None, :]
    return ph - np.floor(ph)


def abs_grid(poly: OrbitPolynomial, xs: np.ndarray, start: int, stop: int, shift=None) -> np.ndarray:
    """|P(x_i + shift + n)| for a batch of base points, shape (len(xs), stop - start).

    Ratio polynomials give |P|/|Q| and raise if Q vanishes.
    """
    if poly.form == "ratio":
        num = abs_grid(poly.numerator, xs, start, stop, shift)
        den = abs_grid(poly.denominator, xs, start, stop, shift)
        if np.any(den == 0.0):
            raise SingularityError("denominator vanishes on a sampled orbit")
        return num / den
    c = poly.coefficients
    v = c.C0 + c.C1 * cis2pi(_phase_grid(poly.alpha, xs, start, stop, shift))
    if poly.form == "two-freq":
        v = v + c.C2 * cis2pi(_phase_grid(poly.beta, xs, start, stop, shift))
    return np.abs(v)


@dataclass
class Orbit:
    x: float
    N: int
    direction: str
    polynomial: OrbitPolynomial
    shift: object = None

    def __post_init__(self):
        if self.direction not in ("forward", "backward"):
            raise ValueError("direction must be forward or backward")
        if self.N < 0:
            raise ValueError("N must be >= 0")

    def log_abs(self) -> tuple[np.ndarray, int]:
        """ln|P| at x+n (0 <= n < N) or x-n (1 <= n <= N)."""
        if self.direction == "forward":
            return self.polynomial.log_abs_values(self.x, 0, self.N, self.shift)
        return self.polynomial.log_abs_values(self.x, 1, self.N + 1, self.shift, step=-1)


@dataclass
class OrbitReport:
    x: float
    N: int
    direction: str
    log_product: float
    min_log_abs: float
    reciprocal_avg: float | None = None
    normalisation: str = ""
    bound: float | None = None
    within_bound: bool | None = None
    strip_occupancy: dict | None = None
    flags: list[str] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        def num(v):
            return None if v is None else repr(float(v))
        return {"x": repr(float(self.x)), "N": self.N, "direction": self.direction,
                "log_product": num(self.log_product), "min_log_abs": num(self.min_log_abs),
                "reciprocal_avg": num(self.reciprocal_avg), "normalisation": self.normalisation,
                "bound": num(self.bound), "within_bound": self.within_bound,
                "strip_occupancy": self.strip_occupancy, "flags": list(self.flags),
                "extra": self.extra}


def orbit_product(orbit: Orbit) -> OrbitReport:
    """Compensated log-domain product of |P| along the orbit."""
    la, hits = orbit.log_abs()
    flags = []
    if hits:
        flags.append(f"zero-hit:{hits}")
    lp = fsum_log(la)
    mn = float(la.min()) if la.size else math.inf
    return OrbitReport(float(orbit.x), orbit.N, orbit.direction, lp, mn, flags=flags)


def log_product(poly: OrbitPolynomial, x, N: int, shift=None, direction: str = "forward") -> float:
    return orbit_product(Orbit(x, N, direction, poly, shift)).log_product


def reciprocal_terms(poly: OrbitPolynomial, x, start: int, stop: int, shift=None) -> tuple[np.ndarray, int]:
    """1/|P(x + shift + n)| with zero hits mapped to +inf."""
    la, hits = poly.log_abs_values(x, start, stop, shift)
    with np.errstate(over="ignore"):
        return np.exp(-la), hits


def reciprocal_average(poly: OrbitPolynomial, x, entry=None, gamma: float | None = None,
                       N: int | None = None, C: float | None = None) -> OrbitReport:
    """Scale form (1/(M_k P_k)) sum_{n<[P_k]} 1/|P(x+n)| or power form (1/N^gamma) sum_{n<N}.

    With ``C`` the average is compared to C log P_k (scale form) or C (power form).
    """
    if entry is not None:
        n_terms = entry.P_int
        norm = entry.M * entry.P_float
        label = "1/(M_k P_k)"
        ref = math.log(entry.P_float)
    elif gamma is not None and N is not None:
        n_terms = int(N)
        norm = float(N) ** gamma
        label = f"1/N^{gamma!r}"
        ref = 1.0
    else:
        raise ValueError("need a scale entry or (gamma, N)")
    la, hits = poly.log_abs_values(x, 0, n_terms)
    with np.errstate(over="ignore"):
        terms = np.exp(-la)
    flags = []
    if hits:
        flags.append(f"zero-hit:{hits}")
        avg = math.inf
    else:
        avg = math.fsum(terms.tolist()) / norm
    rep = OrbitReport(float(x), n_terms, "forward",
                      fsum_log(la), float(la.min()) if la.size else math.inf, avg, label, flags=flags)
    rep.extra["reference"] = ref
    if C is not None:
        rep.bound = C * ref
        rep.within_bound = bool(avg <= rep.bound)
        if hits:
            rep.flags.append("bound-exceeded")
    return rep


def batch_reciprocal_sums(poly: OrbitPolynomial, xs: np.ndarray, start: int, stop: int,
                          workers: int = 1) -> np.ndarray:
    """sum_{start<=n<stop} 1/|P(x_i+n)| for each sample (inf on zero hits)."""
    def block(chunk):
        a = abs_grid(poly, chunk, start, stop)
        bad = a <= _UNDERFLOW_ABS
        r = 1.0 / np.where(bad, 1.0, a)
        r[bad] = np.inf
        return r.sum(axis=1)
    return map_samples(block, np.asarray(xs, dtype=np.float64), workers)


def batch_log_products(poly: OrbitPolynomial, xs: Iterable, N: int, shift=None,
                       workers: int = 1) -> list[float]:
    return parallel_map(lambda x: log_product(poly, x, N, shift), list(xs), workers)
