"""hrtlab command line: one subcommand per construction, JSON reports and CSV plot data."""

from __future__ import annotations

import argparse
import cmath
import json
import math
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import configspace as cs
from .diophantine import (BruteForceCapError, RationalRatioError, best_approximant_check, continued_fraction,
                          min_weighted_norm, scale_sequence)
from .exact import ParseError, PrecisionError, RealParam, parse_complex, parse_real
from .orbit import averages, core, pairs, strips, twotwo
from .report import RunReport, emit_plotdata, load_baselines
from .trigpoly import Coefficients, OrbitPolynomial, SingularityError, lower_bound_certificate, zeros

PRECISION_ENV = "HRTLAB_PRECISION"
MONTE_CARLO = {"avg", "anprofile", "pair", "ratiopair", "probe", "ballcount", "conjugate"}
GOLDEN = "surd:(1+1√5)/2"


class InputError(ValueError):
    pass


# ---------------------------------------------------------------------------
# argument helpers


def _real(text: str | None, args, name: str) -> RealParam | None:
    if text is None:
        return None
    rp = parse_real(text)
    if args.precision and rp.kind == "rational" and "/" not in text and "." in text and "surd" not in text:
        rp = RealParam.decimal(text.strip(), int(args.precision))
    return rp


def _need(args, name: str) -> RealParam:
    v = _real(getattr(args, name), args, name)
    if v is None:
        raise InputError(f"--{name} is required for {args.cmd}")
    return v


def _cplx(text: str | None, default: complex | None = None) -> complex:
    if text is None:
        if default is None:
            raise InputError("missing complex coefficient")
        return default
    return parse_complex(text)


def _levels(text: str | None, default: str) -> list[int]:
    t = (text or default).strip()
    if ".." in t:
        a, b = t.split("..", 1)
        lo, hi = int(a), int(b)
    else:
        lo, hi = 1, int(t)
    if lo < 1 or hi < lo:
        raise InputError(f"bad level range {t!r}")
    return list(range(lo, hi + 1))


def _int_list(text: str | None, default: str) -> list[int]:
    return [int(float(v)) for v in (text or default).split(",") if v.strip()]


def _float_list(text: str | None, default: str) -> list[float]:
    return [float(v) for v in (text or default).split(",") if v.strip()]


def _coeffs(args) -> Coefficients:
    return Coefficients(_cplx(args.c0, 1), _cplx(args.c1, 1), _cplx(args.c2, 1))


def _seq(args, K: int):
    alpha, beta = _need(args, "alpha"), _need(args, "beta")
    s = Fraction(args.s) if args.s else Fraction(1, 4)
    bound = int(float(args.N)) if args.N and args.cmd == "scales" else 10 ** 5
    return scale_sequence(alpha, beta, s, K, bound)


def _points(args) -> cs.Configuration:
    if args.points is None:
        raise InputError("--points is required (JSON array of 4 [t, xi] pairs)")
    text = args.points
    if os.path.exists(text):
        text = Path(text).read_text()
    try:
        return cs.Configuration.from_json(text)
    except json.JSONDecodeError as e:
        raise InputError(f"--points is not valid JSON: {e}") from e


# ---------------------------------------------------------------------------
# subcommands


def run_cf(args, rep: RunReport):
    x = _need(args, "x")
    cf = continued_fraction(x, args.depth)
    rep.results["continued_fraction"] = cf.to_json()


def run_approx(args, rep: RunReport):
    x = _need(args, "x")
    ks = _levels(args.k, "1..10")
    cf = continued_fraction(x, max(ks) + 2)
    res = [best_approximant_check(x, k, cf=cf) for k in ks]
    rep.results["levels"] = [r.to_json() for r in res]
    rep.checks["best_approximant"] = all(r.ok for r in res)


def run_khinchine(args, rep: RunReport):
    x = _need(args, "x")
    N = int(float(args.N or 10 ** 4))
    rep.results["nlogn"] = min_weighted_norm(x, N, "nlogn").to_json()
    rep.results["n"] = min_weighted_norm(x, N, "n").to_json()


def run_scales(args, rep: RunReport):
    K = max(_levels(args.k, "6"))
    seq = _seq(args, K)
    rep.results["sequence"] = seq.to_json()
    rep.checks["scale_checks"] = seq.verified
    rep.checks["full_length"] = seq.shortfall == 0
    rep.constant("scales.D", seq.D_float, "upper", K=K, s=str(seq.s), search_bound=seq.search_bound)


def run_zeros(args, rep: RunReport):
    rep.results["zeros"] = zeros(_coeffs(args)).to_json()


def run_lowerbound(args, rep: RunReport):
    n = int(float(args.N or 2000))
    cert = lower_bound_certificate(_coeffs(args), n)
    rep.results["certificate"] = cert.to_json()
    rep.checks["c_emp_positive"] = bool(cert.c_emp > 0)
    rep.constant("lowerbound.c_emp", cert.c_emp, "lower", grid=n)


def _poly(args) -> OrbitPolynomial:
    alpha = _need(args, "alpha")
    beta = _real(args.beta, args, "beta")
    if beta is None:
        return OrbitPolynomial.one_freq(_cplx(args.c0, 1), _cplx(args.c1, 1), alpha)
    return OrbitPolynomial.two_freq(_coeffs(args), alpha, beta)


def run_orbit(args, rep: RunReport):
    poly = _poly(args)
    N = int(float(args.N or 1000))
    x = float(args.x or 0.0)
    r = core.orbit_product(core.Orbit(x, N, args.direction, poly))
    rep.results["orbit"] = r.to_json()
    rep.checks["finite"] = bool(math.isfinite(r.log_product))


def run_avg(args, rep: RunReport):
    poly = _poly(args)
    delta = float(args.delta)
    samples = int(args.samples or averages.DEFAULT_SAMPLES)
    if args.gamma is not None:
        N = int(float(args.N or 1000))
        g = float(args.gamma)
        est = averages.power_exceptional_set(
            lambda q: core.batch_reciprocal_sums(poly, q, 0, N) / float(N) ** g,
            delta, samples, args.seed, args.workers, f"1/N^{g!r} sum 1/|P|")
        rep.results["estimate"] = est.to_json()
        rep.constant("avg.C_power", est.C, "upper", N=N, gamma=g, samples=samples, seed=args.seed)
        rep.checks["measure_within_delta"] = bool(est.violating_fraction <= delta)
        return
    ks = _levels(args.k, "1..6")
    seq = _seq(args, max(ks))
    out, cmax = [], 0.0
    ok = True
    for k in ks:
        e = seq.entries[k - 1]
        est = averages.scale_exceptional_set(poly, e, delta, samples, args.seed + k, args.workers)
        out.append({"k": k, **est.to_json()})
        cmax = max(cmax, est.C)
        ok &= est.violating_fraction <= delta
    rep.results["levels"] = out
    rep.checks["measure_within_delta"] = bool(ok)
    rep.constant("avg.C", cmax, "upper", levels=ks, samples=samples, seed=args.seed, delta=delta)


def run_strips(args, rep: RunReport):
    ks = _levels(args.k, "1..6")
    seq = _seq(args, max(ks))
    zs = zeros(_coeffs(args))
    if zs.no_triangle:
        raise InputError("coefficients have no real zero; strips need a zero (g1, g2)")
    reps = [strips.strip_count(seq.entries[k - 1], seq.alpha, seq.beta, zs.zeros[0]) for k in ks]
    rep.results["levels"] = [{"k": k, **r.to_json()} for k, r in zip(ks, reps)]
    rep.checks["no_forbidden_pairs"] = all(not r.forbidden_pairs for r in reps)
    rep.constant("strips.max_occupancy", strips.max_occupancy_constant(reps), "upper", levels=ks)
    for k, r in zip(ks, reps):
        rep.series[f"strips_k{k}.csv"] = strips.strips_csv(r)


def run_ballcount(args, rep: RunReport):
    alpha, beta = _need(args, "alpha"), _need(args, "beta")
    theta = alpha / beta
    N = int(float(args.N or 10 ** 4))
    g, eps = float(args.gamma if args.gamma is not None else 2.0), float(args.epsilon)
    ge = g + eps
    if ge <= 1:
        raise averages.ParameterError("gamma + epsilon must exceed 1")
    st = min_weighted_norm(theta, N, ("pow", ge))
    D = (st.minimum, st.argmin)
    if args.x is not None and args.R is not None:
        pts = [(float(args.x), float(args.R))]
    else:
        rng = np.random.default_rng(args.seed)
        M = N ** ((g - 1) * ge / (ge - 1)) * D[0] ** (1 / (ge - 1))
        lo, hi = math.log(1 / M), math.log(D[0] / 2 ** ge)
        n = int(args.samples or 50)
        pts = list(zip(rng.random(n).tolist(), np.exp(rng.uniform(lo, hi, n)).tolist()))
    res = [averages.diophantine_ball_count(xi, R, N, theta, g, eps, D) for xi, R in pts]
    rep.results["D_eps"] = st.to_json()
    rep.results["balls"] = [r.to_json() for r in res]
    rep.checks["count_bound"] = all(r.holds for r in res)
    rep.checks["pair_step"] = all(r.pair_violations == 0 for r in res)
    rep.constant("ballcount.max_dyadic_sum", max(r.dyadic_sum for r in res), "upper", N=N, seed=args.seed)


def run_anprofile(args, rep: RunReport):
    coeffs = _coeffs(args)
    alpha, beta = _need(args, "alpha"), _need(args, "beta")
    N = int(float(args.N or 10 ** 4))
    g = float(args.gamma if args.gamma is not None else 2.0)
    eps = float(args.epsilon)
    if args.x is not None:
        r = averages.an_profile(coeffs, alpha, beta, float(args.x), N, g, eps, float(args.delta))
        rep.results["profile"] = r.to_json()
        return
    n = int(args.samples or 200)
    vals = averages.an_profile_samples(coeffs, alpha, beta, N, g, n, args.seed, args.workers)
    C = float(np.quantile(vals, 0.95, method="higher"))
    rep.results["quantiles"] = {q: float(np.quantile(vals, float(q))) for q in ("0.5", "0.9", "0.95", "1.0")}
    rep.results["fraction_within_C"] = float(np.mean(vals <= C))
    rep.checks["95pct_within_C"] = bool(np.mean(vals <= C) >= 0.95)
    rep.constant("anprofile.C95", C, "upper", N=N, gamma=g, samples=n, seed=args.seed)


def run_pair(args, rep: RunReport):
    poly = _poly(args)
    ks = _levels(args.k, "1..6")
    seq = _seq(args, max(ks))
    pp = pairs.pair_pipeline(poly, seq, int(args.samples or 100), args.seed, float(args.delta),
                             workers=args.workers, levels=ks)
    rep.results["pair"] = pp.to_json()
    rep.checks["per_step_bound"] = pp.step_ok
    rep.checks["chain_bound"] = pp.chain_ok
    rep.constant("pair.L", pp.fit.L, "upper", levels=ks, samples=pp.fit.samples, seed=args.seed)
    rep.series["pair_Lfit.csv"] = pp.csv()


def run_ratiopair(args, rep: RunReport):
    alpha, beta = _need(args, "alpha"), _need(args, "beta")
    P = OrbitPolynomial.one_freq(_cplx(args.A, 2), _cplx(args.B, 1), alpha)
    Q = OrbitPolynomial.one_freq(_cplx(args.C, 2), _cplx(args.D, 1), beta)
    ks = _levels(args.k, "1..6")
    seq = _seq(args, max(ks))
    xs = averages.sample_points(int(args.samples or 100), args.seed)
    out, worst = [], -math.inf
    for k in ks:
        e = seq.entries[k - 1]
        comps = core.parallel_map(lambda x: pairs.ratio_pair_compare(P, Q, e, float(x), k), xs, args.workers)
        m = max(c.log_ratio for c in comps)
        worst = max(worst, m)
        out.append({"k": k, "N": e.N, "P": repr(e.P_float), "max_log_ratio": repr(m),
                    "max_recip_P": repr(max(c.recip_P for c in comps)),
                    "max_recip_Q": repr(max(c.recip_Q for c in comps)),
                    "chain_ok": all(c.log_ratio <= c.chain_bound + 1e-9 for c in comps)})
    rep.results["levels"] = out
    rep.checks["chain_bound"] = all(o["chain_ok"] for o in out)
    rep.constant("ratiopair.max_log_ratio", worst, "upper", levels=ks, seed=args.seed)


def run_conjugate(args, rep: RunReport):
    N = int(float(args.N or 100))
    if args.samples:
        rng = np.random.default_rng(args.seed)
        res = []
        for _ in range(int(args.samples)):
            x = float(rng.random())
            A = float(rng.uniform(0.5, 2.0))
            B = float(rng.uniform(0.1, 3.0)) * cmath.exp(2j * math.pi * float(rng.random()))
            alpha = _real(args.alpha, args, "alpha") or RealParam.from_float(float(rng.uniform(0.3, 3.0)))
            n1 = int(rng.integers(1, 6))
            res.append(twotwo.conjugate_select(x, A, B, alpha, n1, N))
    else:
        alpha = _need(args, "alpha")
        res = [twotwo.conjugate_select(float(args.x or 0.25), _cplx(args.A, 1).real, _cplx(args.B, 1),
                                       alpha, int(args.n_prime), N)]
    rep.results["selections"] = [r.to_json() for r in res]
    rep.results["max_residual"] = max(r.residual for r in res)
    rep.results["max_psi_gap"] = max(r.psi_gap for r in res)
    rep.checks["conjugacy_residual"] = all(r.residual <= 1e-10 for r in res)
    rep.checks["psi_sum_identity"] = all(r.psi_gap <= 1e-8 for r in res)


def run_riemann(args, rep: RunReport):
    C, D = _cplx(args.C, 2), _cplx(args.D, 1)
    beta = _need(args, "beta")
    qmax = int(float(args.N or 10 ** 4))
    ys = _float_list(args.x, "0,0.3,0.7")
    cf = continued_fraction(beta, 64)
    qs = [(p, q) for p, q in cf.convergents if 2 <= q <= qmax]
    res = [twotwo.riemann_deviation(C, D, beta, q, y, p) for p, q in qs for y in ys]
    worst = max(max(r.forward, r.backward) for r in res)
    rep.results["deviations"] = [r.to_json() for r in res]
    rep.results["max_deviation"] = worst
    rep.checks["bounded_by_2Lip"] = all(max(r.forward, r.backward) <= r.lipschitz_bound for r in res)
    rng = np.random.default_rng(args.seed)
    jen = []
    for _ in range(20):
        c, d = (complex(*rng.uniform(-3, 3, 2)) for _ in range(2))
        if abs(abs(c) - abs(d)) < 1e-3:
            continue
        integral, expected, _err = twotwo.jensen_integral(c, d)
        jen.append({"C": repr(c), "D": repr(d), "integral": repr(integral), "expected": repr(expected)})
    rep.results["jensen_samples"] = jen
    rep.checks["jensen"] = all(abs(r.integral - r.jensen) <= 1e-6 for r in res) and all(
        abs(float(j["integral"]) - float(j["expected"])) <= 1e-6 for j in jen)
    rep.checks["residue_coverage"] = all(r.residues_ok for r in res)
    rep.constant("riemann.max_deviation", worst, "upper", qmax=qmax)


def run_periodcheck(args, rep: RunReport):
    C, D = _cplx(args.C, 2), _cplx(args.D, 1)
    beta = _need(args, "beta")
    x, z = float(args.x or 0.1), float(args.z if args.z is not None else 0.6)
    N = int(float(args.N or 10 ** 5))
    res = [twotwo.periodic_product_check(C, D, beta, a, b, int(args.m), N) for a, b in ((x, z), (z, x))]
    rep.results["branches"] = [r.to_json() for r in res]
    rep.checks["block_periodicity"] = all(r.periodicity_error <= 1e-10 for r in res)
    rep.checks["N_independent"] = all(r.N_independent for r in res)
    rep.constant("periodcheck.K", max(r.K for r in res), "upper", N_max=N, m=int(args.m))


def run_diverge(args, rep: RunReport):
    alpha = _need(args, "alpha")
    Ns = _int_list(args.N, "100,1000,10000,100000")
    t = twotwo.divergence_demo(alpha, Ns, workers=args.workers)
    rep.results["table"] = t.to_json()
    rep.checks["increasing"] = t.increasing
    rep.constant("diverge.min_ratio", t.min_ratio, "lower", N=Ns)
    rep.series["divergence.csv"] = t.csv()


def run_probe(args, rep: RunReport):
    poly = _poly(args)
    ks = _levels(args.k, "1..6")
    seq = _seq(args, max(ks))
    L = pairs.pair_pipeline(poly, seq, 100, args.seed, float(args.delta), workers=args.workers,
                            levels=ks).fit.L
    res = pairs.decay_probe(poly, seq, int(args.samples or 2000), float(args.delta), args.seed, L,
                            workers=args.workers, levels=ks)
    rep.results["L"] = L
    keep = {"mult": ("O_mult", "margin_mult"), "recip": ("O_recip", "margin_recip")}
    conv = ["mult", "recip"] if args.convention == "both" else [args.convention]
    rows = []
    for r in res:
        row = {k: v for k, v in r.to_json().items()
               if not any(k in keep[c] for c in keep if c not in conv)}
        rows.append(row)
    rep.results["levels"] = rows
    for c in conv:
        rep.constant(f"probe.min_margin_{c}", min(getattr(r, keep[c][1]) for r in res), "lower",
                     levels=ks, seed=args.seed, L=L)


def run_classify(args, rep: RunReport):
    c = cs.classify(_points(args))
    if c.classification in ("(1,3)", "(2,2)"):
        n = cs.normalize(c)
        c.lattice_flag = cs.lattice_test(n.alpha, n.beta)
    rep.results["configuration"] = c.to_json()


def run_normalize(args, rep: RunReport):
    c = cs.classify(_points(args))
    n = cs.normalize(c)
    c.lattice_flag = cs.lattice_test(n.alpha, n.beta)
    rep.results["configuration"] = c.to_json()
    rep.results["normalization"] = n.to_json()


HANDLERS = {
    "cf": run_cf, "approx": run_approx, "khinchine": run_khinchine, "scales": run_scales,
    "zeros": run_zeros, "lowerbound": run_lowerbound, "orbit": run_orbit, "avg": run_avg,
    "strips": run_strips, "ballcount": run_ballcount, "anprofile": run_anprofile, "pair": run_pair,
    "ratiopair": run_ratiopair, "conjugate": run_conjugate, "riemann": run_riemann,
    "periodcheck": run_periodcheck, "diverge": run_diverge, "probe": run_probe,
    "normalize": run_normalize, "classify": run_classify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    env = os.environ.get(PRECISION_ENV)
    common.add_argument("--x", help="real literal (base point, xi for ballcount, y list for riemann)")
    common.add_argument("--alpha")
    common.add_argument("--beta")
    for c in ("c0", "c1", "c2", "A", "B", "C", "D"):
        common.add_argument(f"--{c}", help="complex literal")
    common.add_argument("--k", help="levels 'a..b' or a count")
    common.add_argument("--N", help="length, horizon, grid size or comma list")
    common.add_argument("--gamma", type=float)
    common.add_argument("--epsilon", type=float, default=0.1)
    common.add_argument("--delta", type=float, default=averages.DEFAULT_DELTA)
    common.add_argument("--s", help="rational threshold for {P_k} (default 1/4)")
    common.add_argument("--samples", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--precision", type=int, default=int(env) if env else None,
                        help=f"digits for plain decimal literals (default ${PRECISION_ENV} or exact)")
    common.add_argument("--out", help="output directory for report.json and CSV series")
    common.add_argument("--format", choices=["json", "csv", "both"], default="json")
    common.add_argument("--baseline", help="baseline JSON for regression comparison (default: packaged; 'none' disables)")
    common.add_argument("--convention", choices=["mult", "recip", "both"], default="both")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--timings", action="store_true", help="include wall-clock timings")
    common.add_argument("--depth", type=int, default=20)
    common.add_argument("--direction", choices=["forward", "backward"], default="forward")
    common.add_argument("--R", type=float, help="ball radius for ballcount")
    common.add_argument("--z", help="second base point for periodcheck")
    common.add_argument("--m", type=int, default=1, help="integer offset for periodcheck")
    common.add_argument("--n-prime", dest="n_prime", type=int, default=1)
    common.add_argument("--points", help="JSON array of 4 [t, xi] pairs, or a file holding one")
    p = argparse.ArgumentParser(prog="hrtlab", description=__doc__)
    sub = p.add_subparsers(dest="cmd", required=True)
    for name in HANDLERS:
        sub.add_parser(name, parents=[common])
    return p


# flags that never change computed values
_NEUTRAL = {"workers", "out", "format", "baseline", "timings"}


def _matching_baselines(baselines: dict, args) -> dict:
    """Entries pinned with an ``argv`` apply only to runs with the same configuration."""
    mine = {k: v for k, v in vars(args).items() if k not in _NEUTRAL}
    out = {}
    for name, b in baselines.items():
        if "argv" in b:
            theirs = {k: v for k, v in vars(build_parser().parse_args(b["argv"])).items()
                      if k not in _NEUTRAL}
            if theirs.get("seed") is None and mine.get("seed") == 0:
                theirs["seed"] = 0
            if theirs != mine:
                continue
        out[name] = b
    return out


def _config_echo(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("timings",)}


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    rep = RunReport(args.cmd, _config_echo(args))
    t0 = time.perf_counter()
    try:
        if args.cmd in MONTE_CARLO and args.seed is None and not (args.cmd == "conjugate" and not args.samples):
            raise InputError(f"--seed is mandatory for {args.cmd}")
        if args.seed is None:
            args.seed = 0
        HANDLERS[args.cmd](args, rep)
        if args.baseline != "none":
            rep.apply_baselines(_matching_baselines(load_baselines(args.baseline), args))
    except ParseError as e:
        print(f"error[malformed-real]: {e}", file=sys.stderr)
        return 2
    except PrecisionError as e:
        print(f"error[precision-exhausted]: {e}", file=sys.stderr)
        return 2
    except (cs.ConfigurationError, InputError, RationalRatioError, averages.ParameterError,
            BruteForceCapError, FileNotFoundError) as e:
        print(f"error[input]: {e}", file=sys.stderr)
        return 2
    except (SingularityError, pairs.NoAdmissibleSample) as e:
        print(f"error[invariant]: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        print(f"error[input]: {e}", file=sys.stderr)
        return 2
    if args.timings:
        rep.timings = {"total_s": time.perf_counter() - t0}
    text = rep.dumps()
    if args.out:
        d = Path(args.out)
        d.mkdir(parents=True, exist_ok=True)
        if args.format in ("json", "both"):
            (d / "report.json").write_text(text + "\n")
        if args.format in ("csv", "both"):
            emit_plotdata(rep, d)
    else:
        if args.format in ("json", "both"):
            stdout.write(text + "\n")
        if args.format in ("csv", "both"):
            for name in sorted(rep.series):
                stdout.write(f"# {name}\n{rep.series[name]}")
    return 0 if rep.ok else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
