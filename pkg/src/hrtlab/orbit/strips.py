"""Occupancy of the thin strips beta u - alpha v = const by the backward orbit cloud."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ..exact import RealParam, frac_multiples


@dataclass
class StripReport:
    N: int
    P: float
    M: float
    n_points: int
    width: float
    histogram: dict[int, int]
    max_occupancy: int
    degenerate: bool
    forbidden_pairs: list[tuple[int, int]] = field(default_factory=list)
    pairs_scanned: int = 0

    def csv_rows(self) -> list[tuple[int, int]]:
        return sorted(self.histogram.items())

    def to_json(self) -> dict:
        return {"N": self.N, "P": repr(self.P), "M": repr(self.M), "n_points": self.n_points,
                "width": repr(self.width), "max_occupancy": self.max_occupancy,
                "degenerate": self.degenerate, "strips_used": len(self.histogram),
                "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
                "forbidden_pairs": [list(p) for p in self.forbidden_pairs],
                "pairs_scanned": self.pairs_scanned}


def orbit_cloud(alpha: RealParam, beta: RealParam, zero: tuple[float, float], n: int):
    """({-k alpha + g1}, {-k beta + g2}) for 0 <= k < n."""
    g1, g2 = zero
    u = frac_multiples(-alpha, 0, n) + g1
    v = frac_multiples(-beta, 0, n) + g2
    return u - np.floor(u), v - np.floor(v)


def strip_count(entry, alpha: RealParam, beta: RealParam, zero: tuple[float, float],
                scan_pairs: bool = True) -> StripReport:
    """Histogram over strips j/(2 M P) <= beta u - alpha v < (j+1)/(2 M P).

    With ``scan_pairs`` every pair n != m with 2/beta < |m-n| < [P] - 1/beta whose
    strip coordinates differ by less than the strip width is listed (none expected).
    """
    n = entry.P_int
    P, M = entry.P_float, entry.M
    a, b = float(alpha), float(beta)
    u, v = orbit_cloud(alpha, beta, zero, n)
    w = b * u - a * v
    width = 1.0 / (2.0 * M * P)
    j = np.floor(w / width).astype(np.int64)
    hist = Counter(j.tolist())
    occ = max(hist.values()) if hist else 0
    degenerate = len(hist) == 1 and n > 1
    rep = StripReport(entry.N, P, M, n, width, dict(hist), occ, degenerate)
    if scan_pairs and n > 1:
        lo_gap, hi_gap = 2.0 / abs(b), n - 1.0 / abs(b)
        order = np.argsort(w, kind="stable")
        ws = w[order]
        scanned = 0
        bad = []
        for i in range(n):
            k = i + 1
            while k < n and ws[k] - ws[i] < width:
                gap = abs(int(order[k]) - int(order[i]))
                scanned += 1
                if lo_gap < gap < hi_gap:
                    p = sorted((int(order[i]), int(order[k])))
                    bad.append((p[0], p[1]))
                k += 1
        rep.forbidden_pairs = sorted(bad)
        rep.pairs_scanned = scanned
    return rep


def occupancy_profile(seq, zero: tuple[float, float]) -> list[StripReport]:
    return [strip_count(e, seq.alpha, seq.beta, zero) for e in seq.entries]


def strips_csv(rep: StripReport) -> str:
    lines = ["strip_index,count"] + [f"{k},{c}" for k, c in rep.csv_rows()]
    return "\n".join(lines) + "\n"


def max_occupancy_constant(reports: list[StripReport]) -> int:
    return max((r.max_occupancy for r in reports), default=0)

