"""Number-theoretic side: theta/wild evidence, (H)'_S and Kazama margins,
continued fractions, Liouville-type witnesses and resonance search.

Finite data cannot decide the theta/wild dichotomy, so every verdict here
carries its evidence: fitted (A, δ) or a certified witness index.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .errors import PrecisionExhausted, ResonanceError
from .reals import (
    DecimalApprox,
    LiouvilleSum,
    QuadraticSurd,
    enclose,
    is_rational,
    to_float,
)

DEFAULT_DELTA0 = 0.9
DEFAULT_WINDOW_START = 100


# -- continued fractions -------------------------------------------------------


@dataclass(frozen=True)
class ContinuedFractionExpansion:
    quotients: tuple[int, ...]
    convergents: tuple[tuple[int, int], ...]
    rational: bool  # expansion terminated: x is rational

    def __len__(self):
        return len(self.quotients)


def _convergents(quotients: Sequence[int]) -> tuple[tuple[int, int], ...]:
    p2, p1 = 0, 1
    q2, q1 = 1, 0
    out = []
    for a in quotients:
        p2, p1 = p1, a * p1 + p2
        q2, q1 = q1, a * q1 + q2
        out.append((p1, q1))
    return tuple(out)


def _cf_exact(x, depth: int) -> tuple[list[int], bool]:
    quotients: list[int] = []
    while len(quotients) <= depth:
        a = math.floor(x)
        quotients.append(a)
        rest = x - a
        if rest == 0:
            return quotients, True
        x = 1 / rest
    return quotients, False


def _cf_interval(lo: Fraction, hi: Fraction, depth: int) -> tuple[list[int], bool]:
    """Partial quotients shared by every real in [lo, hi]."""
    quotients: list[int] = []
    while len(quotients) <= depth:
        a_lo, a_hi = math.floor(lo), math.floor(hi)
        if a_lo != a_hi:
            raise PrecisionExhausted(
                f"available precision certifies only {len(quotients)} partial quotients"
            )
        quotients.append(a_lo)
        r_lo, r_hi = lo - a_lo, hi - a_lo
        if r_lo == 0 and r_hi == 0:
            return quotients, True
        if r_lo == 0:
            raise PrecisionExhausted(
                f"available precision certifies only {len(quotients)} partial quotients"
            )
        lo, hi = 1 / r_hi, 1 / r_lo
    return quotients, False


def continued_fraction(x, depth: int) -> ContinuedFractionExpansion:
    """Partial quotients a_0..a_depth (fewer when x is rational).

    An early stop means x is rational, which is the toroidality test for
    the pair (p, q). Decimal approximations raise :class:`PrecisionExhausted`
    once their digits stop determining the next quotient.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if isinstance(x, int):
        x = Fraction(x)
    if isinstance(x, QuadraticSurd) and x.is_rational:
        x = x.a
    if isinstance(x, (Fraction, QuadraticSurd)):
        qs, rational = _cf_exact(x, depth)
    elif isinstance(x, LiouvilleSum):
        if x.materializable:
            qs, rational = _cf_exact(x.as_fraction(), depth)
        else:
            bits = 64 * (depth + 4)
            e = x.enclose(bits)
            qs, rational = _cf_interval(e.center, e.center + Fraction(1, 1 << bits), depth)
    elif isinstance(x, DecimalApprox):
        qs, rational = _cf_interval(x.center - x.radius, x.center + x.radius, depth)
        rational = False if len(qs) <= depth else rational
    else:
        raise TypeError(f"continued_fraction needs an exact real, got {x!r}")
    return ContinuedFractionExpansion(tuple(qs), _convergents(qs), rational)


@dataclass(frozen=True)
class ToroidalVerdict:
    toroidal: bool | None
    reason: str

    def as_dict(self) -> dict:
        return {"toroidal": self.toroidal, "reason": self.reason}


def toroidal_test(p, q, depth: int = 64) -> ToroidalVerdict:
    """X_{τ,p,q} is toroidal iff p or q is irrational."""
    reasons = []
    verdicts = []
    for name, x in (("p", p), ("q", q)):
        if isinstance(x, LiouvilleSum):
            verdicts.append(True)
            reasons.append(f"{name} is a finite Liouville-type sum (rational)")
            continue
        r = is_rational(x)
        if r is None:
            try:
                cf = continued_fraction(x, depth)
                r = cf.rational
            except PrecisionExhausted:
                r = None
        verdicts.append(r)
        reasons.append(f"{name} {'rational' if r else 'irrational' if r is False else 'undecided'}")
    if any(v is False for v in verdicts):
        return ToroidalVerdict(True, "; ".join(reasons))
    if all(v is True for v in verdicts):
        return ToroidalVerdict(False, "not toroidal: " + "; ".join(reasons))
    return ToroidalVerdict(None, "; ".join(reasons))


# -- distance sequences ------------------------------------------------------


@dataclass
class DistanceSequence:
    kind: str  # "lattice2d" | "fiber"
    indices: list[int]
    values: list  # mpf
    errors: list  # mpf, rigorous half-widths
    precision_bits: int
    params: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.indices)

    @property
    def N(self) -> int:
        return max(self.indices) if self.indices else 0

    def as_float_array(self) -> np.ndarray:
        return np.array([float(v) for v in self.values])

    def certified_zero(self, i: int) -> bool:
        return self.values[i] == 0 and self.errors[i] == 0


def _dist_interval(r: Fraction, lo, hi, wp: int):
    """dist(r + t, Z) for t in [lo, hi]; returns (low, high) as mpf."""
    k = round(r)
    f = r - k
    with mpmath.workprec(wp):
        fm = mpmath.mpf(f.numerator) / f.denominator
        a, b = fm + lo, fm + hi
        # relative rounding slack: tiny offsets around an exact zero survive
        binary = f.denominator & (f.denominator - 1) == 0
        slack = ((0 if binary else abs(fm)) + abs(lo) + abs(hi)) * mpmath.ldexp(1, -wp + 4)

        def d(t):
            t = abs(t)
            return min(t, 1 - t)

        if a <= 0 <= b:
            low = mpmath.mpf(0)
        else:
            low = min(d(a), d(b))
        high = max(d(a), d(b))
        if a <= mpmath.mpf(0.5) <= b or a <= -mpmath.mpf(0.5) <= b:
            high = mpmath.mpf(0.5)
        low = max(mpmath.mpf(0), low - slack)
        high = high + slack
    return low, high


def distance_sequence(
    kind: str,
    p=Fraction(0),
    q=Fraction(0),
    theta2=Fraction(0),
    N: int = 1000,
    precision: int = 128,
    indices: Sequence[int] | None = None,
) -> DistanceSequence:
    """d_n = dist((np, nq), Z^2) ("lattice2d") or dist(nq - θ2, Z) ("fiber")."""
    if kind not in ("lattice2d", "fiber"):
        raise ValueError(f"unknown distance kind {kind!r}")
    if indices is None:
        if N < 1:
            raise ValueError("N must be >= 1")
        indices = range(1, N + 1)
    indices = [int(n) for n in indices]
    nmax = max(abs(n) for n in indices)
    bits = precision + nmax.bit_length() + 16
    wp = bits + 32
    eq = enclose(q, bits)
    if kind == "fiber":
        et = enclose(theta2, bits)
    else:
        ep = enclose(p, bits)
    values, errors = [], []
    with mpmath.workprec(wp):
        for n in indices:
            if kind == "fiber":
                r = n * eq.center - et.center
                lo = n * eq.lo - et.hi if n >= 0 else n * eq.hi - et.hi
                hi = n * eq.hi - et.lo if n >= 0 else n * eq.lo - et.lo
                low, high = _dist_interval(r, lo, hi, wp)
            else:
                lows, highs = [], []
                for e in (ep, eq):
                    lo = n * e.lo if n >= 0 else n * e.hi
                    hi = n * e.hi if n >= 0 else n * e.lo
                    a, b = _dist_interval(n * e.center, lo, hi, wp)
                    lows.append(a)
                    highs.append(b)
                low = mpmath.sqrt(lows[0] ** 2 + lows[1] ** 2)
                high = mpmath.sqrt(highs[0] ** 2 + highs[1] ** 2)
            values.append((low + high) / 2)
            errors.append((high - low) / 2)
    info = {"q": str(q), "theta2": str(theta2)} if kind == "fiber" else {"p": str(p), "q": str(q)}
    return DistanceSequence(kind, indices, values, errors, precision, info)


# -- theta / wild evidence -------------------------------------------------------


@dataclass
class ClassificationReport:
    verdict: str  # "theta-evidence" | "wild-witness" | "inconclusive"
    A: float | None
    delta: float | None
    witness_n: int | None
    witness_log_margin: float | None  # log(d_n) - n log(delta0) at the witness
    resonant: bool
    r: float | None  # fitted rate: least-squares slope of log d_n against n on the window
    r_min: float | None  # worst case min log(d_n)/n on the window
    r_all: float | None  # same minimum over every index
    N: int
    window_start: int
    delta0: float
    precision_bits: int
    sequence: DistanceSequence | None = None

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "A": self.A,
            "delta": self.delta,
            "witness_n": self.witness_n,
            "witness_log_margin": self.witness_log_margin,
            "resonant": self.resonant,
            "r": self.r,
            "r_min": self.r_min,
            "r_all": self.r_all,
            "N": self.N,
            "window_start": self.window_start,
            "delta0": self.delta0,
            "precision_bits": self.precision_bits,
        }


def _mp_to_float(x) -> float:
    """Float of an mpf, clamped to the normal range (the exponent may be huge)."""
    if x == 0:
        return 0.0
    return float(x) if abs(mpmath.log(abs(x), 2)) < 1000 else float(mpmath.sign(x)) * (
        0.0 if abs(x) < 1 else math.inf
    )


def exp_bound_scan(
    d: DistanceSequence,
    delta0: float = DEFAULT_DELTA0,
    window_start: int = DEFAULT_WINDOW_START,
) -> ClassificationReport:
    """Theta/wild evidence from a distance sequence.

    A certified zero anywhere is an exact resonance. Otherwise the test
    d_n < delta0^n only runs on n >= window_start: for small n the
    exponential bound is above the trivial scale and says nothing.

    The exponent statistic r is the slope of a least-squares line through
    (n, log d_n) on the window, i.e. the fitted rate in d_n ~ A e^{rn}. A
    polynomially small d_n (bounded quotients give d_n ~ 1/n) fits r -> 0 as
    N grows. The pointwise minimum of log(d_n)/n is reported as r_min; it is
    pinned by the smallest n in the window and does not tend to 0.
    """
    if len(d) == 0:
        raise ValueError("empty distance sequence")
    if not 0 < delta0 < 1:
        raise ValueError("delta0 must lie in (0, 1)")
    log_d0 = mpmath.log(delta0)
    common = dict(
        N=d.N, window_start=window_start, delta0=delta0, precision_bits=d.precision_bits, sequence=d
    )
    for i, n in enumerate(d.indices):
        if d.certified_zero(i):
            return ClassificationReport(
                "wild-witness", None, None, n, None, True, None, None, None, **common
            )
    window = [i for i, n in enumerate(d.indices) if n >= window_start]
    for i in window:
        n = d.indices[i]
        upper = d.values[i] + d.errors[i]
        if upper > 0 and mpmath.log(upper) < n * log_d0:
            margin = mpmath.log(upper) - n * log_d0
            return ClassificationReport(
                "wild-witness", None, None, n, _mp_to_float(margin), False, None, None, None, **common
            )
    positive = [i for i in range(len(d)) if d.values[i] > 0]
    r_all = min((mpmath.log(d.values[i]) / d.indices[i] for i in positive), default=None)
    fit = [i for i in window if d.values[i] > 0]
    if not fit:
        return ClassificationReport(
            "inconclusive", None, None, None, None, False, None, None,
            None if r_all is None else float(r_all), **common
        )
    ns = np.array([d.indices[i] for i in fit], float)
    logs = np.array([float(mpmath.log(d.values[i])) for i in fit])
    r = float(np.polyfit(ns, logs, 1)[0]) if len(fit) >= 2 else float(logs[0] / ns[0])
    r_min = float(np.min(logs / ns))
    delta = max(mpmath.mpf(delta0), mpmath.exp(r))
    A = min(d.values[i] / delta ** d.indices[i] for i in positive)
    return ClassificationReport(
        "theta-evidence", _mp_to_float(A), float(delta), None, None, False,
        r, r_min, float(r_all), **common
    )


# -- margins -----------------------------------------------------------------


def _box(box: int):
    r = np.arange(-box, box + 1)
    return np.meshgrid(r, r, r, indexing="ij")


def hs_margin(tau: complex, q, theta2, a: float, box: int) -> float:
    """min over the box of |τm1 + q m2 - m3 - θ2| e^{a max(|m1|,|m2|)}, (m1,m2) != 0."""
    if box < 1 or a <= 0:
        raise ValueError("need box >= 1 and a > 0")
    m1, m2, m3 = _box(box)
    qf, tf = to_float(q), to_float(theta2)
    re = tau.real * m1 + (qf * m2 - tf) - m3
    im = tau.imag * m1
    val = np.hypot(re, im) * np.exp(a * np.maximum(np.abs(m1), np.abs(m2)))
    val[(m1 == 0) & (m2 == 0)] = np.inf
    return float(val.min())


def hs_terms(tau: complex, q, theta2, a: float, box: int) -> list[float]:
    """Every term of :func:`hs_margin` in lexicographic index order."""
    out = []
    qf, tf = to_float(q), to_float(theta2)
    for m1 in range(-box, box + 1):
        for m2 in range(-box, box + 1):
            if m1 == 0 and m2 == 0:
                continue
            for m3 in range(-box, box + 1):
                out.append(abs(tau * m1 + qf * m2 - m3 - tf) * math.exp(a * max(abs(m1), abs(m2))))
    return out


def kazama_term(tau: complex, p, q, a: float, m) -> float:
    m1, m2, m3 = m
    den = abs(tau * (to_float(p) * m2 - m1) + m3 - to_float(q) * m2)
    if den == 0:
        raise ResonanceError(m)
    return math.exp(-a * max(abs(m1), abs(m2))) / den


def _exact_kazama_resonance(p, q, box: int):
    for m2 in range(-box, box + 1):
        pm, qm = p * m2, q * m2
        if is_rational(pm) and is_rational(qm):
            pm_f = pm.as_fraction() if isinstance(pm, QuadraticSurd) else Fraction(pm)
            qm_f = qm.as_fraction() if isinstance(qm, QuadraticSurd) else Fraction(qm)
            if pm_f.denominator == 1 and qm_f.denominator == 1:
                m = (int(pm_f), m2, int(qm_f))
                if m != (0, 0, 0) and abs(m[0]) <= box and abs(m[2]) <= box:
                    return m
    return None


def kazama_margin(tau: complex, p, q, a: float, box: int) -> float:
    """max over the box of e^{-a max(|m1|,|m2|)} / |τ(p m2 - m1) + m3 - q m2|."""
    if box < 1 or a <= 0:
        raise ValueError("need box >= 1 and a > 0")
    exact = all(isinstance(x, (int, Fraction, QuadraticSurd)) for x in (p, q))
    if exact:
        hit = _exact_kazama_resonance(p, q, box)
        if hit is not None:
            raise ResonanceError(hit)
    m1, m2, m3 = _box(box)
    pf, qf = to_float(p), to_float(q)
    den = np.abs(tau * (pf * m2 - m1) + (m3 - qf * m2))
    zero = (m1 == 0) & (m2 == 0) & (m3 == 0)
    den[zero] = np.inf
    if not exact:
        tiny = den < 1e-14 * (1 + np.abs(m1) + np.abs(m2) + np.abs(m3))
        if tiny.any():
            idx = np.argwhere(tiny)[0]
            raise ResonanceError(tuple(int(k) - box for k in idx))
    val = np.exp(-a * np.maximum(np.abs(m1), np.abs(m2))) / den
    return float(val.max())


def norm_equiv_constants(tau: complex) -> tuple[float, float]:
    """Singular values of (u, v) ↦ τu + v as a real map R^2 -> R^2 (smallest, largest)."""
    if not tau.imag > 0:
        raise ValueError("Im(tau) must be positive")
    s = np.linalg.svd(np.array([[tau.real, 1.0], [tau.imag, 0.0]]), compute_uv=False)
    return float(s[-1]), float(s[0])


# -- Liouville-type constructor ------------------------------------------------


@dataclass(frozen=True)
class LiouvilleWitness:
    n: int
    log2_dist_upper: float
    certified: bool  # dist(n q, Z) < 2^{-n}


@dataclass(frozen=True)
class SuperLiouville:
    value: LiouvilleSum
    witnesses: tuple[LiouvilleWitness, ...]
    rational: bool = True  # a finite sum always is

    @property
    def certified_indices(self) -> list[int]:
        return [w.n for w in self.witnesses if w.certified]

    @property
    def degenerate(self) -> bool:
        return not self.certified_indices


def make_super_liouville(depth: int, base: int = 10) -> SuperLiouville:
    """q = Σ_{j<=depth} base^{-a_j}, a_1 = 1, a_{j+1} = base^{a_j}, with certified witnesses.

    At n_j = base^{a_j}, n_j q ≡ n_j Σ_{i>j} base^{-a_i} (mod 1) and the tail
    is below 2 base^{-a_{j+1}}; the witness is certified when
    n_j · 2 base^{-a_{j+1}} < 2^{-n_j}, decided on exact exponents.
    """
    if not 2 <= depth <= 4:
        raise ValueError("depth must lie in [2, 4]")
    value = LiouvilleSum(depth, base)
    lb = mpmath.log(base, 2)
    out = []
    for j, n in enumerate(value.witness_indices()):
        nxt = value.exponents[j + 1]
        # log2 of n_j * 2 * base^{-a_{j+1}}
        log2_upper = (value.exponents[j] - nxt) * lb + 1
        # the tail must also stay below 1/2 for the distance to equal n_j * tail
        certified = bool(log2_upper < -1 and log2_upper < -n)
        out.append(LiouvilleWitness(n, float(log2_upper), certified))
    return SuperLiouville(value, tuple(out))


# -- resonance search -------------------------------------------------------------


def resonance_search(tau: complex, p, q, theta1, theta2, box: int, tol: float = 1e-9) -> list[tuple[int, int, int]]:
    """σ ∈ [-box, box]^3 \\ {0} solving both real equations of the resonance system."""
    if box < 1:
        raise ValueError("box must be >= 1")
    s1, s2, s3 = _box(box)
    pf, qf = to_float(p), to_float(q)
    t1, t2 = to_float(theta1), to_float(theta2)
    w = s1 - pf * s2 + t1
    eq_im = np.abs(tau.imag * w)
    eq_re = np.abs(tau.real * w + s2 * qf + s3 - t2)
    hit = (eq_im < tol) & (eq_re < tol) & ~((s1 == 0) & (s2 == 0) & (s3 == 0))
    return [tuple(int(k) for k in row) for row in np.stack([s1[hit], s2[hit], s3[hit]], axis=1)]
