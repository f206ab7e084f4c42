"""Unitary flat line bundles on the elliptic curve C = C/<1, τ> and on X.

A character is stored by its phases (generator ↦ e^{2πi·phase}) rather than by
unit complex numbers, so tensor products and triviality are exact whenever the
phases are rationals or quadratic surds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .group import GroupParams
from .reals import QuadraticSurd, format_real, frac_mod1, is_exact

FLOAT_TRIVIAL_TOL = 1e-12


@dataclass(frozen=True)
class Character:
    phase1: object
    phase2: object

    def __post_init__(self):
        object.__setattr__(self, "phase1", _reduce(self.phase1))
        object.__setattr__(self, "phase2", _reduce(self.phase2))

    @property
    def exact(self) -> bool:
        return is_exact(self.phase1) and is_exact(self.phase2)

    def as_dict(self) -> dict:
        return {"phase1": format_real(self.phase1), "phase2": format_real(self.phase2)}


def _reduce(x):
    if isinstance(x, int):
        x = Fraction(x)
    if isinstance(x, QuadraticSurd) and x.is_rational:
        x = x.a
    return frac_mod1(x)


def _add(a, b):
    if isinstance(a, float) or isinstance(b, float):
        return float(a) + float(b)
    return a + b


def _scale(n: int, a):
    if isinstance(a, float):
        return n * a
    return a * n


def char_tensor(a: Character, b: Character) -> Character:
    if not isinstance(a, Character) or not isinstance(b, Character):
        raise TypeError("char_tensor expects two characters over the same base")
    return Character(_add(a.phase1, b.phase1), _add(a.phase2, b.phase2))


def char_inverse(a: Character) -> Character:
    return Character(_scale(-1, a.phase1), _scale(-1, a.phase2))


def twist_character(F: Character, E: Character, n: int) -> Character:
    """Character of F^n ⊗ E."""
    return Character(_add(_scale(n, F.phase1), E.phase1), _add(_scale(n, F.phase2), E.phase2))


@dataclass(frozen=True)
class Triviality:
    trivial: bool
    flag: str  # "exact" | "numerical"

    def __bool__(self):
        return self.trivial


def _phase_trivial(x) -> tuple[bool, bool]:
    """(is zero mod 1, decided exactly)."""
    if isinstance(x, float):
        return min(x, 1.0 - x) < FLOAT_TRIVIAL_TOL, False
    return x == 0, True


def is_trivial_flat(c: Character) -> Triviality:
    t1, e1 = _phase_trivial(c.phase1)
    t2, e2 = _phase_trivial(c.phase2)
    return Triviality(t1 and t2, "exact" if (e1 and e2) else "numerical")


def h0_flat_elliptic(c: Character) -> int:
    """dim H^0(C, L_c): 1 for the trivial bundle, 0 otherwise."""
    return 1 if is_trivial_flat(c).trivial else 0


# -- "for all n" decisions -----------------------------------------------------


@dataclass(frozen=True)
class _IntSet:
    """A set of integers: empty, everything, one point, or a residue class."""

    kind: str  # "empty" | "all" | "point" | "class"
    value: int = 0
    modulus: int = 1

    def contains(self, n: int) -> bool:
        if self.kind == "empty":
            return False
        if self.kind == "all":
            return True
        if self.kind == "point":
            return n == self.value
        return (n - self.value) % self.modulus == 0


def _integrality_set(theta, x) -> _IntSet | None:
    """{n in Z : theta + n*x in Z} for exact inputs in a common quadratic field."""
    def parts(y):
        if isinstance(y, (int, Fraction)):
            return Fraction(y), Fraction(0), 0
        if isinstance(y, QuadraticSurd):
            return y.a, y.b, y.d
        return None

    pt, px = parts(theta), parts(x)
    if pt is None or px is None:
        return None
    (ta, tb, td), (xa, xb, xd) = pt, px
    if tb and xb and td != xd:
        return None
    if xb != 0:
        n = -tb / xb
        if n.denominator != 1:
            return _IntSet("empty")
        n = int(n)
        return _IntSet("point", n) if (ta + n * xa).denominator == 1 else _IntSet("empty")
    if tb != 0:
        return _IntSet("empty")
    # rational: ta + n*xa in Z; solvable iff a residue class mod den(xa)
    if xa == 0:
        return _IntSet("all") if ta.denominator == 1 else _IntSet("empty")
    P = xa.denominator
    for r in range(P):
        if (ta + r * xa).denominator == 1:
            return _IntSet("class", r, P)
    return _IntSet("empty")


def _smallest(points: Iterable[int]) -> int | None:
    best = None
    for n in points:
        if best is None or (abs(n), -n) < (abs(best), -best):
            best = n
    return best


def _first_common(s1: _IntSet, s2: _IntSet) -> tuple[bool, int | None]:
    """(intersection nonempty, element of smallest |n|, positive on ties)."""
    if "empty" in (s1.kind, s2.kind):
        return False, None
    for a, b in ((s1, s2), (s2, s1)):
        if a.kind == "point":
            return (True, a.value) if b.contains(a.value) else (False, None)
    if s1.kind == "all" and s2.kind == "all":
        return True, 0
    if s1.kind == "all" or s2.kind == "all":
        cls = s2 if s1.kind == "all" else s1
        r = cls.value % cls.modulus
        return True, _smallest([r, r - cls.modulus])
    L = s1.modulus * s2.modulus // math.gcd(s1.modulus, s2.modulus)
    hits = [n for n in range(L) if s1.contains(n) and s2.contains(n)]
    if not hits:
        return False, None
    return True, _smallest([hits[0], hits[0] - L])


@dataclass(frozen=True)
class AssumptionReport:
    passed: bool
    mode: str  # "exact" | "scanned"
    witness: int | None
    n_box: int

    def as_dict(self) -> dict:
        return {"passed": self.passed, "mode": self.mode, "witness_n": self.witness, "n_box": self.n_box}


def _scan_integral(theta, x, n: int) -> bool:
    v = float(theta) + n * float(x)
    return abs(v - round(v)) < FLOAT_TRIVIAL_TOL


def thm_assumption_check(params: GroupParams, theta1, theta2, n_box: int = 1000) -> AssumptionReport:
    """Decide: for every n, θ1 + n p ∉ Z or θ2 + n q ∉ Z.

    Exact inputs (rationals and surds of one quadratic field) are decided for
    all n; anything else is scanned over |n| <= n_box and labelled "scanned".
    """
    if n_box < 1:
        raise ValueError("n_box must be >= 1")
    s1 = _integrality_set(theta1, params.p)
    s2 = _integrality_set(theta2, params.q)
    if s1 is not None and s2 is not None:
        bad, witness = _first_common(s1, s2)
        return AssumptionReport(not bad, "exact", witness, n_box)
    order = sorted(range(-n_box, n_box + 1), key=lambda n: (abs(n), -n))
    for n in order:
        if _scan_integral(theta1, params.p, n) and _scan_integral(theta2, params.q, n):
            return AssumptionReport(False, "scanned", n, n_box)
    return AssumptionReport(True, "scanned", None, n_box)


@dataclass(frozen=True)
class H0Entry:
    n: int
    dim: int
    character: Character


@dataclass(frozen=True)
class H0Spectrum:
    entries: tuple[H0Entry, ...]

    @property
    def total(self) -> int:
        return sum(e.dim for e in self.entries)

    def dims(self) -> dict[int, int]:
        return {e.n: e.dim for e in self.entries}


def h0_spectrum(F: Character, E: Character, n_range: tuple[int, int]) -> H0Spectrum:
    """Per-mode dim H^0(C, F^n ⊗ E) for n in the closed interval ``n_range``."""
    lo, hi = n_range
    entries = []
    for n in range(lo, hi + 1):
        ch = twist_character(F, E, n)
        entries.append(H0Entry(n, h0_flat_elliptic(ch), ch))
    return H0Spectrum(tuple(entries))


def neighborhood_vanishing_check(E_on_W: Character, N_WZ: Character, n_max: int) -> bool:
    """True iff E|_W ⊗ N^{-n} is non-trivial for every 0 <= n <= n_max."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    N_inv = char_inverse(N_WZ)
    return all(not is_trivial_flat(twist_character(N_inv, E_on_W, n)).trivial for n in range(n_max + 1))


def neighborhood_vanishing_certificate(E_on_W: Character, N_WZ: Character) -> tuple[bool, int | None]:
    """Exact all-n >= 0 version: (holds for every n >= 0, first failing n)."""
    sets = []
    for e, nphase in ((E_on_W.phase1, N_WZ.phase1), (E_on_W.phase2, N_WZ.phase2)):
        neg = nphase * -1 if not isinstance(nphase, float) else -nphase
        s = _integrality_set(e, neg)
        if s is None:
            raise ValueError("certificate needs exact phases")
        sets.append(s)
    s1, s2 = sets
    if "empty" in (s1.kind, s2.kind):
        return True, None
    for a, b in ((s1, s2), (s2, s1)):
        if a.kind == "point":
            ok = a.value >= 0 and b.contains(a.value)
            return (False, a.value) if ok else (True, None)
    if s1.kind == "all" and s2.kind == "all":
        return False, 0
    mods = [s.modulus for s in (s1, s2) if s.kind == "class"]
    L = math.lcm(*mods)
    for n in range(L):
        if s1.contains(n) and s2.contains(n):
            return False, n
    return True, None
