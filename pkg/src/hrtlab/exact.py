"""Exact real inputs: big rationals, quadratic surds and finite-precision decimals.

Every quantity of the form ``n * x`` that the rest of the package needs is
derived from an exact floor computation, so ``||n x||`` stays meaningful for
large ``n`` instead of drowning in float noise.
"""

from __future__ import annotations

import math
import re
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

import mpmath
import numpy as np

GUARD_DIGITS = 10
_MP_LOCK = threading.RLock()


@contextmanager
def workdps(dps: int):
    """mpmath.workdps under a process-wide lock.

    mpmath keeps its precision in global state, so worker threads must not
    interleave precision changes.
    """
    with _MP_LOCK, mpmath.workdps(dps):
        yield
# decimal inputs must keep this many correct digits after multiplication by n
MIN_RESULT_DIGITS = 6


class PrecisionError(ArithmeticError):
    """Raised instead of returning a silently rounded result."""


class ParseError(ValueError):
    pass


def _squarefree_split(d: int) -> tuple[int, int]:
    """Return (k, r) with d = k**2 * r and r squarefree (trial division)."""
    k, r, p = 1, d, 2
    while p * p <= r:
        while r % (p * p) == 0:
            r //= p * p
            k *= p
        p += 1
    return k, r


def _is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


class QuadraticSurd:
    """The number (a + b*sqrt(d)) / c with integers a, b, c and d > 1 squarefree."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a: int, b: int, d: int, c: int = 1):
        if c == 0:
            raise ZeroDivisionError("surd denominator is zero")
        if d <= 0:
            raise ValueError("surd radicand must be positive")
        k, d = _squarefree_split(d)
        b *= k
        if d == 1:
            a, b, d = a + b, 0, 1
        if c < 0:
            a, b, c = -a, -b, -c
        g = math.gcd(math.gcd(a, b), c)
        if g > 1:
            a, b, c = a // g, b // g, c // g
        self.a, self.b, self.c, self.d = a, b, c, d

    @classmethod
    def from_rational(cls, q: Union[int, Fraction], d: int) -> "QuadraticSurd":
        q = Fraction(q)
        return cls(q.numerator, 0, d, q.denominator)

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def as_fraction(self) -> Fraction:
        if self.b:
            raise ValueError("surd is irrational")
        return Fraction(self.a, self.c)

    def _coerce(self, other) -> "QuadraticSurd":
        if isinstance(other, QuadraticSurd):
            if other.b and self.b and other.d != self.d:
                raise ValueError(f"mixed quadratic fields sqrt({self.d}) and sqrt({other.d})")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadraticSurd.from_rational(other, self.d)
        return NotImplemented

    def _field(self, other: "QuadraticSurd") -> int:
        return self.d if self.b else other.d

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        d = self._field(o)
        return QuadraticSurd(self.a * o.c + o.a * self.c, self.b * o.c + o.b * self.c, d, self.c * o.c)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticSurd(-self.a, -self.b, self.d, self.c)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        d = self._field(o)
        a = self.a * o.a + self.b * o.b * d
        b = self.a * o.b + self.b * o.a
        return QuadraticSurd(a, b, d, self.c * o.c)

    __rmul__ = __mul__

    def conjugate(self) -> "QuadraticSurd":
        return QuadraticSurd(self.a, -self.b, self.d, self.c)

    def reciprocal(self) -> "QuadraticSurd":
        # c / (a + b sqrt d) = c (a - b sqrt d) / (a^2 - b^2 d)
        norm = self.a * self.a - self.b * self.b * self.d
        if norm == 0:
            raise ZeroDivisionError("division by zero surd")
        return QuadraticSurd(self.c * self.a, -self.c * self.b, self.d, norm)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def sign(self) -> int:
        """Exact sign of the value."""
        a, b = self.a, self.b
        if b == 0:
            return (a > 0) - (a < 0)
        if a >= 0 and b >= 0:
            return 1 if (a or b) else 0
        if a <= 0 and b <= 0:
            return -1
        # opposite signs: compare a^2 with b^2 d
        lhs, rhs = a * a, b * b * self.d
        if a > 0:
            return 1 if lhs > rhs else -1
        return 1 if rhs > lhs else -1

    def floor(self) -> int:
        """Exact floor via integer square roots."""
        if self.b == 0:
            return self.a // self.c
        r = math.isqrt(self.b * self.b * self.d)
        s = r if self.b > 0 else -r - 1
        return (self.a + s) // self.c

    def _cmp(self, other) -> int:
        return (self - other).sign()

    def __eq__(self, other):
        try:
            o = self._coerce(other)
        except ValueError:
            return False
        if o is NotImplemented:
            return NotImplemented
        return (self - o).sign() == 0

    def __hash__(self):
        if self.b == 0:
            return hash(Fraction(self.a, self.c))
        return hash((self.a, self.b, self.c, self.d))

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def to_mpf(self, dps: int = 50):
        with workdps(dps + GUARD_DIGITS):
            v = (mpmath.mpf(self.a) + mpmath.mpf(self.b) * mpmath.sqrt(self.d)) / self.c
        return v

    def __float__(self):
        return float(self.to_mpf(30))

    def __repr__(self):
        return f"QuadraticSurd({self.a}, {self.b}, d={self.d}, c={self.c})"

    def __str__(self):
        if self.b == 0:
            return str(Fraction(self.a, self.c))
        return f"surd:({self.a}{'+' if self.b >= 0 else '-'}{abs(self.b)}√{self.d})/{self.c}"


Exact = Union[Fraction, QuadraticSurd]


def exact_floor(v: Exact) -> int:
    if isinstance(v, QuadraticSurd):
        return v.floor()
    return math.floor(v)


@dataclass(frozen=True)
class RealParam:
    """A real input with a declared precision horizon.

    ``kind`` is ``"rational"``, ``"surd"`` or ``"decimal"``. ``value`` is an
    exact :class:`Fraction` or :class:`QuadraticSurd`; for decimals it is the
    literal read exactly, trusted to ``precision_digits`` digits.
    """

    kind: str
    value: Exact
    precision_digits: int | None = None
    source: str = ""

    def __post_init__(self):
        if self.kind == "surd" and not isinstance(self.value, QuadraticSurd):
            raise TypeError("surd kind needs a QuadraticSurd value")
        if self.kind == "surd" and self.value.is_rational:
            object.__setattr__(self, "kind", "rational")
            object.__setattr__(self, "value", self.value.as_fraction())
        if self.kind == "rational" and not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))
        if self.kind == "decimal" and self.precision_digits is None:
            raise ValueError("decimal inputs need precision_digits")

    # constructors -------------------------------------------------------

    @classmethod
    def rational(cls, p: int | Fraction | str, q: int = 1) -> "RealParam":
        return cls("rational", Fraction(p) / q)

    @classmethod
    def surd(cls, a: int, b: int, d: int, c: int = 1) -> "RealParam":
        if _is_square(d):
            raise ValueError(f"d={d} is a perfect square")
        return cls("surd", QuadraticSurd(a, b, d, c))

    @classmethod
    def from_float(cls, x: float) -> "RealParam":
        """Exact binary rational of a float."""
        return cls("rational", Fraction(x))

    @classmethod
    def decimal(cls, literal: str, digits: int) -> "RealParam":
        return cls("decimal", Fraction(literal), digits, literal)

    # properties ---------------------------------------------------------

    @property
    def is_exact(self) -> bool:
        return self.kind != "decimal"

    @property
    def is_rational(self) -> bool | None:
        """Exact rationality; ``None`` when undecidable (decimal input)."""
        if self.kind == "decimal":
            return None
        return self.kind == "rational"

    def __float__(self):
        return float(self.value)

    def to_mpf(self, dps: int = 50):
        if isinstance(self.value, QuadraticSurd):
            return self.value.to_mpf(dps)
        with workdps(dps):
            return mpmath.mpf(self.value.numerator) / self.value.denominator

    def __str__(self):
        if self.kind == "decimal":
            return f"{self.source}~digits={self.precision_digits}"
        return str(self.value)

    # precision horizon --------------------------------------------------

    def max_multiplier(self) -> int | None:
        """Largest |n| for which n*x keeps MIN_RESULT_DIGITS correct digits."""
        if self.kind != "decimal":
            return None
        return 10 ** max(self.precision_digits - MIN_RESULT_DIGITS, 0)

    def check_horizon(self, n: int) -> None:
        cap = self.max_multiplier()
        if cap is not None and abs(n) > cap:
            raise PrecisionError(
                f"precision horizon exceeded: |n|={abs(n)} > {cap} for {self}")

    def working_digits(self, n: int = 1) -> int:
        base = self.precision_digits or 16
        return base + math.ceil(math.log10(max(abs(n), 1)) + 1e-12) + GUARD_DIGITS

    # exact multiples ----------------------------------------------------

    def times(self, n: int) -> Exact:
        self.check_horizon(n)
        return self.value * n

    def floor_times(self, n: int) -> int:
        return exact_floor(self.times(n))

    def frac_times(self, n: int) -> Exact:
        v = self.times(n)
        return v - exact_floor(v)

    def fixed_point(self, bits: int) -> int:
        """floor(x * 2**bits), exact."""
        return exact_floor(self.value * (1 << bits))

    # arithmetic (exact where the field allows it) ------------------------

    def _binop(self, other, op):
        if not isinstance(other, RealParam):
            other = RealParam.rational(Fraction(other))
        v = op(self.value, other.value)
        digits = [p for p in (self.precision_digits, other.precision_digits) if p is not None]
        if digits:
            return RealParam("decimal", Fraction(float(v)) if isinstance(v, QuadraticSurd) else v,
                             max(min(digits) - 1, 1), f"{float(v)!r}")
        if isinstance(v, QuadraticSurd):
            return RealParam("surd", v)
        return RealParam("rational", v)

    def __mul__(self, other):
        return self._binop(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binop(other, lambda a, b: a / b)

    def __rtruediv__(self, other):
        return RealParam.rational(Fraction(other))._binop(self, lambda a, b: a / b)

    def __add__(self, other):
        return self._binop(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binop(other, lambda a, b: a - b)

    def __neg__(self):
        return RealParam(self.kind, -self.value, self.precision_digits, self.source)

    def nonzero(self) -> bool:
        if isinstance(self.value, QuadraticSurd):
            return self.value.sign() != 0
        return self.value != 0


def _fixed_bits(n_abs_max: int, digits: int = 16) -> int:
    need = digits + math.ceil(math.log10(max(n_abs_max, 1)) + 1e-12) + GUARD_DIGITS
    return max(128, math.ceil(need * math.log2(10)) + 8)


@lru_cache(maxsize=256)
def _frac_multiples_cached(x: RealParam, start: int, stop: int) -> np.ndarray:
    n_abs = max(abs(start), abs(stop - 1), 1)
    x.check_horizon(n_abs)
    bits = _fixed_bits(n_abs, x.precision_digits or 16)
    t = x.fixed_point(bits)
    mask = (1 << bits) - 1
    shift = bits - 53
    scale = 2.0 ** -53
    out = np.fromiter((((n * t) & mask) >> shift for n in range(start, stop)),
                      dtype=np.float64, count=stop - start)
    out *= scale
    out.setflags(write=False)
    return out


def frac_multiples(x: RealParam, start: int, stop: int) -> np.ndarray:
    """{n x} for start <= n < stop as float64, accurate to ~2**-53 absolutely.

    Uses an exact fixed-point image of x with enough bits that n*x carries
    far more than double precision after the integer part is discarded.
    """
    return _frac_multiples_cached(x, int(start), int(stop))


def frac_of(v, dps: int = 60) -> float:
    """Fractional part of an exact number or mpf as a float in [0, 1)."""
    if isinstance(v, (Fraction, QuadraticSurd, int)):
        f = v - exact_floor(v)
        return float(f)
    with workdps(dps):
        f = v - mpmath.floor(v)
        r = float(f)
    return 0.0 if r >= 1.0 else r


_SURD_RE = re.compile(
    r"^surd:\(?\s*([+-]?\d+)\s*([+-])\s*(\d*)\s*(?:√|sqrt)\s*\(?(\d+)\)?\s*\)?\s*(?:/\s*([+-]?\d+))?$")
_DEC_RE = re.compile(r"^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)~digits=(\d+)$")
_RAT_RE = re.compile(r"^[+-]?\d+(?:/[+-]?\d+)?$")
_PLAIN_DEC_RE = re.compile(r"^[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?$")


def parse_real(text: str) -> RealParam:
    """Parse ``"p/q"``, ``"surd:(a+b√d)/c"`` or ``"<decimal>~digits=N"``.

    A plain decimal without the digits suffix is read as the exact rational
    it denotes.
    """
    s = text.strip().replace(" ", "")
    m = _SURD_RE.match(s)
    if m:
        a, sgn, b, d, c = m.groups()
        b = int(b) if b else 1
        if sgn == "-":
            b = -b
        c = int(c) if c else 1
        if c == 0:
            raise ParseError(f"zero denominator in {text!r}")
        if _is_square(int(d)):
            raise ParseError(f"radicand {d} is a perfect square in {text!r}")
        return RealParam("surd", QuadraticSurd(int(a), b, int(d), c), source=text)
    m = _DEC_RE.match(s)
    if m:
        return RealParam("decimal", Fraction(m.group(1)), int(m.group(2)), m.group(1))
    if _RAT_RE.match(s):
        try:
            return RealParam("rational", Fraction(s), source=text)
        except ZeroDivisionError as exc:
            raise ParseError(f"zero denominator in {text!r}") from exc
    if _PLAIN_DEC_RE.match(s):
        return RealParam("rational", Fraction(s), source=text)
    raise ParseError(f"cannot parse real literal {text!r}")


def parse_complex(text: str) -> complex:
    """Parse ``"re+imi"`` style literals (``i`` or ``j`` suffix)."""
    s = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(s)
    except ValueError as exc:
        raise ParseError(f"cannot parse complex literal {text!r}") from exc
