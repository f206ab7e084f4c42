"""Parameters of X = C^2 / Γ_{τ,p,q}, the covering (C*)^2 -> X and its deck map.

Coordinates on the covering are ξ = e^{2πiz}, η = e^{2πiw}; the deck
automorphism is σ(ξ, η) = (λξ, μη) with λ = e^{2πiτ}, μ = e^{2πiq}. Points
are carried in log-polar form (u, α, v, β) = (log|ξ|, arg ξ, log|η|, arg η)
so that σ^n for large |n| never under- or overflows.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DomainError
from .reals import RealLike, format_real, to_float

TWO_PI = 2.0 * math.pi

# |t - round(t)| below this snaps a slab coordinate onto a slab boundary
_SLAB_SNAP = 1e-12


@dataclass(frozen=True)
class GroupParams:
    tau: complex
    p: RealLike = Fraction(0)
    q: RealLike = Fraction(0)
    precision_bits: int = 53

    def __post_init__(self):
        object.__setattr__(self, "tau", complex(self.tau))
        if not self.tau.imag > 0:
            raise DomainError(f"Im(tau) must be positive, got tau={self.tau}")
        if self.precision_bits < 53:
            raise DomainError("precision context must be at least 53 bits")

    @property
    def p_float(self) -> float:
        return to_float(self.p)

    @property
    def q_float(self) -> float:
        return to_float(self.q)

    def as_dict(self, theta1=Fraction(0), theta2=Fraction(0)) -> dict:
        return {
            "tau_re": self.tau.real,
            "tau_im": self.tau.imag,
            "p": format_real(self.p),
            "q": format_real(self.q),
            "theta1": format_real(theta1),
            "theta2": format_real(theta2),
            "precision_bits": self.precision_bits,
        }


@dataclass(frozen=True)
class DerivedConstants:
    """λ, μ, ν together with their exponents.

    ``log_lam = 2πiτ`` is kept exactly as given rather than recovered from λ,
    so λ^m is evaluated as exp(m·log_lam) without compounding rounding.
    """

    lam: complex
    mu: complex
    nu: complex
    log_lam: complex
    q: float
    theta2: float
    tau: complex = field(default=0j)

    def __post_init__(self):
        if abs(abs(self.lam) - math.exp(self.log_lam.real)) > 1e-12 * abs(self.lam):
            raise DomainError("lambda modulus inconsistent with its exponent")
        if not abs(self.lam) < 1:
            raise DomainError("|lambda| must be < 1")
        for name in ("mu", "nu"):
            if abs(abs(getattr(self, name)) - 1) >= 1e-12:
                raise DomainError(f"{name} must be a unit complex number")

    @property
    def log_abs_lam(self) -> float:
        """log|λ| = -2π Im τ (negative)."""
        return self.log_lam.real

    def lam_pow(self, m) -> complex:
        return cmath.exp(m * self.log_lam)

    def mu_pow(self, n) -> complex:
        return cmath.exp(1j * TWO_PI * ((n * self.q) % 1.0))

    def as_dict(self) -> dict:
        return {
            "lambda_re": self.lam.real,
            "lambda_im": self.lam.imag,
            "mu_re": self.mu.real,
            "mu_im": self.mu.imag,
            "nu_re": self.nu.real,
            "nu_im": self.nu.imag,
        }


def derive_constants(params: GroupParams, theta2: RealLike = 0) -> DerivedConstants:
    tau = params.tau
    if tau.imag <= 0:
        raise DomainError("Im(tau) must be positive")
    q = to_float(params.q)
    th2 = to_float(theta2)
    log_lam = 1j * TWO_PI * tau
    return DerivedConstants(
        lam=cmath.exp(log_lam),
        mu=cmath.exp(1j * TWO_PI * (q % 1.0)),
        nu=cmath.exp(1j * TWO_PI * (th2 % 1.0)),
        log_lam=log_lam,
        q=q,
        theta2=th2,
        tau=tau,
    )


@dataclass(frozen=True)
class NormalizedLattice:
    s: complex
    t: complex

    def __post_init__(self):
        if not self.s.imag > 0:
            raise DomainError("Im(s) must be positive")


def normalize_lattice(params: GroupParams) -> NormalizedLattice:
    """(s, t) = (τ, q - pτ): Γ becomes ⟨e1, e2, (s, t)⟩ after a linear change."""
    return NormalizedLattice(params.tau, params.q_float - params.p_float * params.tau)


@dataclass(frozen=True)
class CoverPoint:
    """A point of (C*)^2 stored as (log|ξ|, arg ξ, log|η|, arg η)."""

    u: float
    alpha: float
    v: float
    beta: float

    @classmethod
    def from_cartesian(cls, xi: complex, eta: complex) -> "CoverPoint":
        if xi == 0 or eta == 0:
            raise DomainError("covering points must have nonzero coordinates")
        return cls(math.log(abs(xi)), cmath.phase(xi), math.log(abs(eta)), cmath.phase(eta))

    @property
    def xi(self) -> complex:
        return cmath.exp(complex(self.u, self.alpha))

    @property
    def eta(self) -> complex:
        return cmath.exp(complex(self.v, self.beta))

    def agrees_with(self, other: "CoverPoint", tol: float = 1e-10) -> bool:
        def dang(a, b):
            return abs((a - b + math.pi) % TWO_PI - math.pi)

        return (
            abs(self.u - other.u) <= tol
            and abs(self.v - other.v) <= tol
            and dang(self.alpha, other.alpha) <= tol
            and dang(self.beta, other.beta) <= tol
        )


def sigma_apply(point: CoverPoint, n: int, c: DerivedConstants) -> CoverPoint:
    """σ^n(ξ, η) = (λ^n ξ, μ^n η), computed on exponents."""
    if n == 0:
        return point
    return CoverPoint(
        point.u + n * c.log_lam.real,
        math.remainder(point.alpha + n * c.log_lam.imag, TWO_PI),
        point.v,
        math.remainder(point.beta + TWO_PI * ((n * c.q) % 1.0), TWO_PI),
    )


def slab_index(u: float, c: DerivedConstants) -> int:
    """n with |λ|^{n+1} < e^u <= |λ|^n (half-open slabs)."""
    t = u / c.log_abs_lam
    r = round(t)
    if abs(t - r) < _SLAB_SNAP * max(1.0, abs(t)):
        return int(r)
    return math.floor(t)


def reduce_to_fundamental(point: CoverPoint, c: DerivedConstants) -> tuple[CoverPoint, int]:
    """Return (rep, n) with rep in D_0 = {|λ| < |ξ| <= 1} and σ^n(rep) = point."""
    n = slab_index(point.u, c)
    rep = sigma_apply(point, -n, c)
    if n != 0:
        # pin the radial coordinate; the sum above may drift by an ulp
        rep = CoverPoint(min(0.0, point.u - n * c.log_abs_lam), rep.alpha, rep.v, rep.beta)
    return rep, n
