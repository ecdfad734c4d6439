"""Independent high-precision references, built on mpmath only."""

import mpmath

DPS = 60


def mp(x):
    """mpmath value of a test literal: 'phi', 'sqrt2', 'p/q', or a float."""
    with mpmath.workdps(DPS):
        if x == "phi":
            return (1 + mpmath.sqrt(5)) / 2
        if x == "sqrt2":
            return mpmath.sqrt(2)
        if isinstance(x, str) and "/" in x:
            p, q = x.split("/")
            return mpmath.mpf(int(p)) / int(q)
        return mpmath.mpf(x)


def norm(v):
    return abs(v - mpmath.nint(v))


def cf_quotients(x, depth):
    out = []
    with mpmath.workdps(DPS):
        v = mp(x)
        for _ in range(depth):
            a = int(mpmath.floor(v))
            out.append(a)
            f = v - a
            if f < mpmath.mpf(10) ** (-DPS + 10):
                break
            v = 1 / f
    return out


def convergent_denominators(x, depth):
    q0, q1 = 1, 0
    out = []
    for a in cf_quotients(x, depth):
        q0, q1 = q1, a * q1 + q0
        out.append(q1)
    return out


def min_n_norm(x, lo, hi, weighted=True):
    """(argmin, min) of n||n x|| (or ||n x||) over lo <= n <= hi by direct enumeration."""
    with mpmath.workdps(DPS):
        v = mp(x)
        best, arg = None, None
        for n in range(lo, hi + 1):
            t = (n if weighted else 1) * norm(n * v)
            if best is None or t < best:
                best, arg = t, n
        return arg, best


def log_abs_product(c0, c1, c2, alpha, beta, x, N, dps=40):
    """sum_{n<N} ln|c0 + c1 e(alpha(x+n)) + c2 e(beta(x+n))| at ``dps`` digits."""
    with mpmath.workdps(dps):
        a, b, xv = mp(alpha), mp(beta), mpmath.mpf(x)
        tot = mpmath.mpf(0)
        for n in range(N):
            z = c0 + c1 * mpmath.expjpi(2 * a * (xv + n))
            if c2:
                z += c2 * mpmath.expjpi(2 * b * (xv + n))
            tot += mpmath.log(abs(z))
        return float(tot)
