"""Computations along Z-orbits of the trigonometric polynomials."""

from .averages import (ExceptionalSetEstimate, GenericSumsEstimate, ParameterError, an_profile,
                       an_profile_samples, diophantine_ball_count, generic_reciprocal_sums,
                       power_exceptional_set, reciprocal_sums_at, scale_exceptional_set)
from .core import Orbit, OrbitReport, orbit_product, parallel_map, reciprocal_average
from .pairs import (DecayProbe, ExceptionalPointError, NoAdmissibleSample, PairComparison, decay_probe,
                    fit_L, pair_compare, pair_pipeline, ratio_pair_compare)
from .strips import StripReport, strip_count
from .twotwo import (conjugate_select, divergence_demo, jensen_integral, periodic_product_check,
                     residue_coverage, riemann_deviation)

__all__ = [
    "ExceptionalSetEstimate", "GenericSumsEstimate", "ParameterError", "an_profile", "an_profile_samples",
    "diophantine_ball_count", "generic_reciprocal_sums", "power_exceptional_set", "reciprocal_sums_at",
    "scale_exceptional_set", "Orbit", "OrbitReport", "orbit_product", "parallel_map",
    "reciprocal_average", "DecayProbe", "ExceptionalPointError", "NoAdmissibleSample", "PairComparison",
    "decay_probe", "fit_L", "pair_compare", "pair_pipeline", "ratio_pair_compare", "StripReport",
    "strip_count", "conjugate_select", "divergence_demo", "jensen_integral", "periodic_product_check",
    "residue_coverage", "riemann_deviation",
]
