"""Weighted integrals over the slabs D_n.

The integrand |f̃|²_ω e^{-ψ} dλ̃ in log coordinates (u, α, v, β) is
4|f|²_ω e^{-4u²} du dα dv dβ: the η-parts of e^{-ψ} and dλ̃ cancel. For an
equivariant f̃ the slab D_n contributes the D_0 integral with e^{-4u²}
replaced by e^{-4(u + nL)²}, L = log|λ|. Slab terms are accumulated as
logarithms since e^{-4(nL)²} underflows after a couple of slabs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .forms import Form01
from .geometry import log_frame_norm, wedge_norm

TWO_PI = 2 * math.pi


class QuadratureDivergence(ArithmeticError):
    pass


@dataclass(frozen=True)
class Quadrature:
    y_nodes: int = 64  # Gauss-Legendre per slab (u = -2π Im τ · y)
    v_nodes: int = 64  # Gauss-Legendre per v-panel
    v_panels: int = 4
    x_points: int = 64  # trapezoid
    beta_points: int = 8  # trapezoid


def _gl(n: int, a: float, b: float):
    t, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * t + 0.5 * (a + b), 0.5 * (b - a) * w


def _profiles(f: Form01, q: Quadrature):
    """Per y-node integrals over (x, β, v) of 4|f|², 4·wedge and 4|f|²(|η|²+|η|⁻²),
    including the Jacobian 4π² Im τ of (x, y) -> (u, α)."""
    if f.evaluator is None:
        raise ValueError("form has no pointwise evaluator")
    y, wy = _gl(q.y_nodes, 0.0, 1.0)
    edges = np.linspace(-f.K, f.K, q.v_panels + 1)
    vs, wv = zip(*(_gl(q.v_nodes, a, b) for a, b in zip(edges[:-1], edges[1:])))
    v, wv = np.concatenate(vs), np.concatenate(wv)
    x = np.arange(q.x_points) / q.x_points
    beta = TWO_PI * np.arange(q.beta_points) / q.beta_points
    B, Vv, X = beta[:, None, None], v[None, :, None], x[None, None, :]
    jac = 4 * math.pi**2 * f.constants.tau.imag
    plain, wedge, heavy = [], [], []
    for yi in y:
        a, b = f.evaluator(X, yi, Vv, B)
        a = np.broadcast_to(a, (len(beta), len(v), len(x)))
        b = np.broadcast_to(b, a.shape)
        n2 = log_frame_norm(a, b, Vv)
        w2 = wedge_norm(a, b, Vv)
        if not (np.all(np.isfinite(n2)) and np.all(np.isfinite(w2))):
            raise QuadratureDivergence("non-finite integrand samples")
        # trapezoid in x and β: mean times period; GL weights in v
        scale = 4 * jac * TWO_PI  # 4 from dλ̃, 2π from β (x has period 1)
        plain.append(scale * float(np.sum(n2.mean(axis=(0, 2)) * wv)))
        wedge.append(scale * float(np.sum(w2.mean(axis=(0, 2)) * wv)))
        heavy.append(scale * float(np.sum(n2.mean(axis=(0, 2)) * 2 * np.cosh(2 * v) * wv)))
    return y, wy, np.array(plain), np.array(wedge), np.array(heavy)


def _log(x: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(x)


@dataclass
class SlabSumResult:
    log_terms: dict  # n -> log ∫_{D_n} |f̃|²_ω e^{-ψ} dλ̃
    total: float
    d0_plain: float  # ∫_{D_0} |f̃|²_ω dλ̃
    d0_penultimate: float  # ∫_{D_0} |f̃|²_ω /(|η|²+|η|⁻²) dλ̃
    bound: float  # Σ_{n>=0} e^{-n c} ∫_{D_0}|f̃|²_ω dλ̃, c = (log|λ|²)²
    bound_penultimate: float  # 2 Σ_{n>=0} e^{-n c} ∫_{D_0}|f̃|²_ω/(|η|²+|η|⁻²) dλ̃
    bound_slabwise: float  # Σ_{n>=0} e^{-n²c}(...) + Σ_{n<0} e^{-(n+1)²c}(...)
    log10_tail_ratio: float  # log10 of the |n| >= 2 share of the total
    n_window: int

    @property
    def holds(self) -> bool:
        return self.total <= self.bound

    @property
    def slack(self) -> float:
        return self.bound - self.total

    @property
    def terms(self) -> dict:
        return {n: math.exp(t) if t > -745 else 0.0 for n, t in self.log_terms.items()}

    def as_dict(self) -> dict:
        return {
            "log_terms": {str(n): (t if math.isfinite(t) else None) for n, t in sorted(self.log_terms.items())},
            "total": self.total,
            "D0_plain": self.d0_plain,
            "D0_penultimate": self.d0_penultimate,
            "bound": self.bound,
            "bound_penultimate": self.bound_penultimate,
            "bound_slabwise": self.bound_slabwise,
            "slack": self.slack,
            "holds": self.holds,
            "log10_tail_ratio": self.log10_tail_ratio if math.isfinite(self.log10_tail_ratio) else None,
            "n_window": self.n_window,
        }


def _slab_logs(y, wy, prof, L, tau_im, n_window):
    u = -TWO_PI * tau_im * y
    lw = _log(wy * prof)
    return {n: float(logsumexp(lw - 4 * (u + n * L) ** 2)) for n in range(-n_window, n_window + 1)}


def slab_sum_integrals(f: Form01, n_window: int = 4, quad: Quadrature | None = None) -> SlabSumResult:
    q = quad or Quadrature()
    c = f.constants
    L = c.log_abs_lam
    y, wy, plain, _, heavy = _profiles(f, q)
    logs = _slab_logs(y, wy, plain, L, c.tau.imag, n_window)
    vals = np.array(list(logs.values()))
    if np.all(np.isneginf(vals)):
        total, tail = 0.0, -math.inf
    else:
        log_total = float(logsumexp(vals))
        tail_vals = np.array([t for n, t in logs.items() if abs(n) >= 2])
        log_tail = float(logsumexp(tail_vals)) if np.any(np.isfinite(tail_vals)) else -math.inf
        total = math.exp(log_total)
        tail = (log_tail - log_total) / math.log(10)
    d0_plain = float(np.sum(wy * heavy))
    d0_pen = float(np.sum(wy * plain))
    cc = (2 * L) ** 2
    geo = 1 / (1 - math.exp(-cc))
    slabwise = sum(math.exp(-(n * n) * cc) for n in range(0, 40)) + sum(
        math.exp(-((n + 1) ** 2) * cc) for n in range(-40, 0)
    )
    return SlabSumResult(
        logs, total, d0_plain, d0_pen, geo * d0_plain, 2 * geo * d0_pen, slabwise * d0_pen, tail, n_window
    )


@dataclass
class WedgeResult:
    wedge_total: float
    norm_total: float

    @property
    def ratio(self) -> float:
        return self.wedge_total / self.norm_total if self.norm_total else 0.0

    def holds(self, rel: float = 1e-10) -> bool:
        return self.wedge_total <= 0.5 * self.norm_total * (1 + rel)

    def as_dict(self) -> dict:
        return {"wedge_total": self.wedge_total, "norm_total": self.norm_total, "ratio": self.ratio,
                "holds": self.holds()}


def wedge_integrals(f: Form01, n_window: int = 4, quad: Quadrature | None = None) -> WedgeResult:
    """∫|f̃ ∧ dξ/ξ ∧ dη/η|²_ω e^{-ψ} dλ̃ against ∫|f̃|²_ω e^{-ψ} dλ̃, summed over slabs."""
    q = quad or Quadrature()
    c = f.constants
    y, wy, plain, wedge, _ = _profiles(f, q)
    L = c.log_abs_lam

    def total(prof):
        logs = np.array(list(_slab_logs(y, wy, prof, L, c.tau.imag, n_window).values()))
        return 0.0 if np.all(np.isneginf(logs)) else math.exp(float(logsumexp(logs)))

    return WedgeResult(total(wedge), total(plain))
