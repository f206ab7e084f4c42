"""Exact and certified real numbers.

Classification work needs the actual arithmetic structure of p, q, θ: a
decimal truncation of √2 is rational and carries none of its Diophantine
behaviour. Supported kinds:

* ``Fraction`` -- exact rationals (decimal strings parse to these);
* ``QuadraticSurd`` -- a + b√d with rational a, b;
* ``LiouvilleSum`` -- Σ base^(-a_j), a_1 = 1, a_(j+1) = base^(a_j), kept
  symbolic because its denominators stop fitting in memory at depth 3;
* ``DecimalApprox`` -- a decimal known only to its printed digits.

Every kind can produce an :class:`Enclosure` (exact rational centre plus a
rigorous mpf offset interval), which is what distance scans consume.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Union

import mpmath

from .errors import ConfigError, OverflowBudgetError


@dataclass(frozen=True)
class Enclosure:
    """Value lies in ``center + [lo, hi]``."""

    center: Fraction
    lo: mpmath.mpf
    hi: mpmath.mpf

    @property
    def exact(self) -> bool:
        return self.lo == 0 and self.hi == 0


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot make an exact rational from {x!r}")


def _squarefree_split(d: int) -> tuple[int, int]:
    """Return (k, r) with d = k**2 * r and r squarefree."""
    k, r = 1, d
    f = 2
    while f * f <= r:
        while r % (f * f) == 0:
            r //= f * f
            k *= f
        f += 1
    return k, r


@total_ordering
class QuadraticSurd:
    """The real number ``a + b*sqrt(d)`` with a, b rational and d > 1 squarefree."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b, d: int):
        a, b = _frac(a), _frac(b)
        if d < 0:
            raise ValueError("only real quadratic surds are supported")
        if d in (0, 1):
            a, b, d = a + b * d, Fraction(0), 0
        else:
            k, d = _squarefree_split(d)
            b *= k
            if d == 1:
                a, b, d = a + b, Fraction(0), 0
        self.a, self.b, self.d = a, b, d

    @classmethod
    def sqrt(cls, d: int) -> "QuadraticSurd":
        return cls(0, 1, d)

    @classmethod
    def golden(cls) -> "QuadraticSurd":
        return cls(Fraction(1, 2), Fraction(1, 2), 5)

    # -- structure ---------------------------------------------------------
    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def as_fraction(self) -> Fraction:
        if not self.is_rational:
            raise ValueError(f"{self} is irrational")
        return self.a

    def _coerce(self, other):
        if isinstance(other, QuadraticSurd):
            if other.is_rational:
                return other.a, Fraction(0)
            if self.is_rational or other.d == self.d:
                return other.a, other.b
            raise ValueError("surds over different quadratic fields do not mix")
        if isinstance(other, (int, Fraction)):
            return Fraction(other), Fraction(0)
        return NotImplemented

    def _field(self, other) -> int:
        if isinstance(other, QuadraticSurd) and not other.is_rational:
            return other.d
        return self.d

    def __add__(self, other):
        c = self._coerce(other)
        if c is NotImplemented:
            return c
        return QuadraticSurd(self.a + c[0], self.b + c[1], self._field(other))

    __radd__ = __add__

    def __neg__(self):
        return QuadraticSurd(-self.a, -self.b, self.d)

    def __sub__(self, other):
        c = self._coerce(other)
        if c is NotImplemented:
            return c
        return QuadraticSurd(self.a - c[0], self.b - c[1], self._field(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        c = self._coerce(other)
        if c is NotImplemented:
            return c
        d = self._field(other)
        a2, b2 = c
        return QuadraticSurd(self.a * a2 + self.b * b2 * d, self.a * b2 + self.b * a2, d)

    __rmul__ = __mul__

    def reciprocal(self) -> "QuadraticSurd":
        norm = self.a * self.a - self.b * self.b * self.d
        if norm == 0:
            raise ZeroDivisionError("reciprocal of zero")
        return QuadraticSurd(self.a / norm, -self.b / norm, self.d)

    def __truediv__(self, other):
        if isinstance(other, QuadraticSurd):
            return self * other.reciprocal()
        return QuadraticSurd(self.a / _frac(other), self.b / _frac(other), self.d)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __floor__(self) -> int:
        # (A + B*sqrt(d)) / C with integers, C > 0
        den = self.a.denominator * self.b.denominator
        A = self.a.numerator * self.b.denominator
        B = self.b.numerator * self.a.denominator
        if B == 0:
            return A // den
        S = B * B * self.d
        t = math.isqrt(S)
        # sqrt(S) is irrational because d is squarefree and > 1
        top = A + t if B > 0 else A - t - 1
        return top // den

    def sign(self) -> int:
        if self.b == 0:
            return (self.a > 0) - (self.a < 0)
        # compare a with -b*sqrt(d) exactly
        lhs, rhs = self.a, -self.b
        if lhs >= 0 and rhs <= 0:
            return 1
        if lhs <= 0 and rhs >= 0:
            return -1
        # same sign: compare squares
        if lhs > 0:
            return 1 if lhs * lhs > rhs * rhs * self.d else -1
        return -1 if lhs * lhs > rhs * rhs * self.d else 1

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        if isinstance(other, QuadraticSurd):
            return self.a == other.a and self.b == other.b and (self.b == 0 or self.d == other.d)
        return NotImplemented

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __hash__(self):
        return hash((self.a, self.b, self.d if self.b else 0))

    def mpf(self, prec: int) -> mpmath.mpf:
        with mpmath.workprec(prec + 16):
            v = mpmath.mpf(self.a.numerator) / self.a.denominator
            if self.b:
                v += mpmath.mpf(self.b.numerator) / self.b.denominator * mpmath.sqrt(self.d)
        return +v

    def __float__(self):
        return float(self.mpf(64))

    def __repr__(self):
        return f"QuadraticSurd({self.a}, {self.b}, {self.d})"

    def __str__(self):
        return format_real(self)


class LiouvilleSum:
    """Σ_{j<=depth} base^(-a_j) with a_1 = 1 and a_(j+1) = base^(a_j).

    The sum is rational for every finite depth; what it carries is a prefix of
    exponentially good rational approximations at n_j = base^(a_j).
    """

    MAX_MATERIALIZED_DIGITS = 200_000

    def __init__(self, depth: int, base: int):
        if base < 2:
            raise ValueError("base must be >= 2")
        if depth < 1:
            raise ValueError("depth must be >= 1")
        self.depth, self.base = depth, base
        exps = [1]
        for _ in range(depth - 1):
            nxt = exps[-1]
            # base ** nxt is the next exponent; refuse absurd exponent sizes
            if nxt * math.log2(base) > 4096:
                raise OverflowBudgetError(
                    f"exponent base**{nxt} exceeds the representable budget at depth {depth}"
                )
            exps.append(base ** nxt)
        self.exponents: tuple[int, ...] = tuple(exps)

    def term_log2(self, j: int) -> float:
        return -self.exponents[j] * math.log2(self.base)

    @property
    def materializable(self) -> bool:
        return self.exponents[-1] * math.log10(self.base) <= self.MAX_MATERIALIZED_DIGITS

    def as_fraction(self) -> Fraction:
        if not self.materializable:
            raise OverflowBudgetError("denominator base**a_depth is too large to materialize")
        return sum((Fraction(1, self.base ** a) for a in self.exponents), Fraction(0))

    def witness_indices(self) -> list[int]:
        """n_j = base^(a_j) for j < depth; n_j * (prefix through j) is an integer."""
        return [self.base ** a for a in self.exponents[:-1]]

    def enclose(self, bits: int) -> Enclosure:
        center = Fraction(0)
        k = 0
        while k < self.depth and self.exponents[k] * math.log2(self.base) <= bits + 64:
            center += Fraction(1, self.base ** self.exponents[k])
            k += 1
        if k == self.depth:
            return Enclosure(center, mpmath.mpf(0), mpmath.mpf(0))
        first = mpmath.power(mpmath.mpf(self.base), -self.exponents[k])
        # remaining terms are each below the square of the previous ones
        return Enclosure(center, first, 2 * first)

    def __float__(self):
        return float(sum(self.base ** -float(a) for a in self.exponents[:2]))

    def __eq__(self, other):
        if not isinstance(other, LiouvilleSum):
            return NotImplemented
        return (self.depth, self.base) == (other.depth, other.base)

    def __hash__(self):
        return hash(("liouville", self.depth, self.base))

    def __repr__(self):
        return f"LiouvilleSum(depth={self.depth}, base={self.base})"

    def __str__(self):
        return format_real(self)


@dataclass(frozen=True)
class DecimalApprox:
    """A decimal known to ±half a unit in its last printed digit."""

    text: str

    @property
    def center(self) -> Fraction:
        return Fraction(self.text)

    @property
    def radius(self) -> Fraction:
        digits = len(self.text.split(".")[1]) if "." in self.text else 0
        return Fraction(1, 2 * 10 ** digits)

    def __float__(self):
        return float(self.center)

    def __str__(self):
        return "~" + self.text


ExactReal = Union[Fraction, QuadraticSurd, LiouvilleSum, DecimalApprox]
RealLike = Union[ExactReal, int, float]


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction, QuadraticSurd, LiouvilleSum))


def is_rational(x) -> bool | None:
    """True/False when decidable, None for approximations and floats."""
    if isinstance(x, (int, Fraction)):
        return True
    if isinstance(x, QuadraticSurd):
        return x.is_rational
    if isinstance(x, LiouvilleSum):
        return True
    return None


def enclose(x, bits: int) -> Enclosure:
    """Rigorous enclosure of ``x`` with a rational centre of about ``bits`` bits."""
    zero = mpmath.mpf(0)
    if isinstance(x, int):
        return Enclosure(Fraction(x), zero, zero)
    if isinstance(x, Fraction):
        return Enclosure(x, zero, zero)
    if isinstance(x, QuadraticSurd):
        if x.is_rational:
            return Enclosure(x.a, zero, zero)
        scaled = x * (1 << bits)
        return Enclosure(Fraction(math.floor(scaled), 1 << bits), zero, mpmath.ldexp(1, -bits))
    if isinstance(x, LiouvilleSum):
        return x.enclose(bits)
    if isinstance(x, DecimalApprox):
        r = mpmath.mpf(x.radius.numerator) / x.radius.denominator
        return Enclosure(x.center, -r, r)
    if isinstance(x, float):
        # declared double precision: the float is taken at face value
        return Enclosure(Fraction(x), zero, zero)
    raise TypeError(f"unsupported real {x!r}")


def to_mpf(x, prec: int = 53) -> mpmath.mpf:
    with mpmath.workprec(prec + 16):
        if isinstance(x, QuadraticSurd):
            return x.mpf(prec)
        e = enclose(x, prec + 8)
        c = mpmath.mpf(e.center.numerator) / e.center.denominator
        return +(c + (e.lo + e.hi) / 2)


def to_float(x) -> float:
    if isinstance(x, float):
        return x
    return float(to_mpf(x, 64))


def floor_exact(x) -> int:
    if isinstance(x, (int, Fraction)):
        return math.floor(x)
    if isinstance(x, QuadraticSurd):
        return math.floor(x)
    raise TypeError(f"exact floor undefined for {x!r}")


def frac_mod1(x):
    """Canonical representative of x mod 1 in [0, 1)."""
    if isinstance(x, float):
        return x % 1.0
    if isinstance(x, (int, Fraction)):
        return Fraction(x) - math.floor(x)
    if isinstance(x, QuadraticSurd):
        return x - floor_exact(x)
    raise TypeError(f"mod 1 undefined for {x!r}")


# -- parsing -----------------------------------------------------------------

_SURD_RE = re.compile(r"^surd\(\s*([^,]+)\s*,\s*([^,]+)\s*,\s*(\d+)\s*\)$")
_SQRT_RE = re.compile(r"^(-)?sqrt\(\s*(\d+)\s*\)$")
_LIOU_RE = re.compile(r"^liouville\(\s*(\d+)\s*,\s*(\d+)\s*\)$")
_NUM_RE = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)$")
_RAT_RE = re.compile(r"^[+-]?\d+\s*/\s*\d+$")


def parse_real(token: str) -> ExactReal:
    """Parse a real from a config token.

    Accepted forms: ``3``, ``-0.25``, ``3/7``, ``sqrt(2)``, ``-sqrt(3)``,
    ``golden``, ``surd(a,b,d)`` for a + b√d, ``liouville(depth,base)`` and
    ``~1.4142`` for a decimal approximation.
    """
    t = token.strip()
    if not t:
        raise ConfigError("empty real token")
    if t == "golden":
        return QuadraticSurd.golden()
    if t.startswith("~"):
        body = t[1:]
        if not _NUM_RE.match(body):
            raise ConfigError(f"bad approximate decimal {token!r}")
        return DecimalApprox(body)
    m = _SQRT_RE.match(t)
    if m:
        s = QuadraticSurd.sqrt(int(m.group(2)))
        s = -s if m.group(1) else s
        return s.a if s.is_rational else s
    m = _SURD_RE.match(t)
    if m:
        try:
            s = QuadraticSurd(Fraction(m.group(1).strip()), Fraction(m.group(2).strip()), int(m.group(3)))
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad surd {token!r}: {exc}") from exc
        return s.a if s.is_rational else s
    m = _LIOU_RE.match(t)
    if m:
        return LiouvilleSum(int(m.group(1)), int(m.group(2)))
    if _NUM_RE.match(t) or _RAT_RE.match(t):
        try:
            return Fraction(t.replace(" ", ""))
        except ZeroDivisionError as exc:
            raise ConfigError(f"zero denominator in {token!r}") from exc
    raise ConfigError(f"cannot parse real {token!r}")


def format_real(x) -> str:
    """Canonical token; ``parse_real(format_real(x)) == x``."""
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, QuadraticSurd):
        if x.is_rational:
            return format_real(x.a)
        if x == QuadraticSurd.golden():
            return "golden"
        if x.a == 0 and abs(x.b) == 1:
            return ("-" if x.b < 0 else "") + f"sqrt({x.d})"
        return f"surd({format_real(x.a)},{format_real(x.b)},{x.d})"
    if isinstance(x, LiouvilleSum):
        return f"liouville({x.depth},{x.base})"
    if isinstance(x, DecimalApprox):
        return "~" + x.text
    if isinstance(x, float):
        return repr(x)
    raise TypeError(f"cannot format {x!r}")
