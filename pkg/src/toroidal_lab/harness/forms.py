"""Grids on the covering and (0,1)-forms built by pullback.

A point of (C*)^2 is written ξ = e^{2πi(x + τy)}, η = e^{v + iβ}. With
x, y ∈ [0, 1) this covers the fundamental slab D_0 exactly once, and the
deck map σ is y ↦ y + 1, β ↦ β + 2πq. Forms use the σ-invariant log frames

    f = a dξ̄/ξ̄ + b dη̄/η̄,

in which ∂̄ acts as L1 = ξ̄∂_ξ̄ = (i/2π)∂_z̄ and L2 = η̄∂_η̄ = (∂_v + i∂_β)/2.
Arrays are laid out (β, v, y, x).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from ..errors import AliasingError, RecipeError
from ..group import DerivedConstants, GroupParams, derive_constants
from ..reals import to_float

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class TorusGrid:
    kx: int = 64
    ky: int = 64
    kb: int = 4
    nv: int = 192
    V: float = 4.0  # v runs over the periodic box [-V, V)

    def __post_init__(self):
        for k in (self.kx, self.ky, self.kb):
            if k < 2 or k & (k - 1):
                raise ValueError("angular grid counts must be powers of two")
        if self.nv < 2 or self.nv % 2:
            raise ValueError("nv must be even")

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.kx) / self.kx

    @property
    def y(self) -> np.ndarray:
        return np.arange(self.ky) / self.ky

    @property
    def v(self) -> np.ndarray:
        return -self.V + 2 * self.V * np.arange(self.nv) / self.nv

    @property
    def beta(self) -> np.ndarray:
        return TWO_PI * np.arange(self.kb) / self.kb

    @property
    def eta_modes(self) -> np.ndarray:
        """η-exponent carried by each slot of a β-FFT."""
        return np.rint(np.fft.fftfreq(self.kb) * self.kb).astype(int)

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (self.kb, self.nv, self.ky, self.kx)

    def mesh(self):
        """Broadcastable (β, v, y, x) coordinate arrays."""
        return (
            self.beta[:, None, None, None],
            self.v[None, :, None, None],
            self.y[None, None, :, None],
            self.x[None, None, None, :],
        )

    def cell_volume(self) -> float:
        return (2 * self.V / self.nv) * (TWO_PI / self.kb) / (self.kx * self.ky)


def reduced_phase(x: float) -> float:
    """x reduced into [-1/2, 1/2)."""
    r = x - math.floor(x + 0.5)
    return 0.0 if r == -0.0 else r


def mode_phases(grid: TorusGrid, c: DerivedConstants) -> np.ndarray:
    """φ_n = θ2 - nq in [-1/2, 1/2): g_n(x, y+1) = e^{2πiφ_n} g_n(x, y)."""
    return np.array([reduced_phase(c.theta2 - n * c.q) for n in grid.eta_modes])


# -- cutoffs -------------------------------------------------------------------


def bump(v, K: float = 2.0):
    """χ(v) = exp(-4t²/(1-t²)), t = v/K; smooth, χ(0) = 1, supported in |v| < K."""
    t = np.asarray(v, float) / K
    inside = np.abs(t) < 1
    tt = np.where(inside, t, 0.0)
    return np.where(inside, np.exp(-4 * tt**2 / (1 - tt**2)), 0.0)


def bump_prime(v, K: float = 2.0):
    t = np.asarray(v, float) / K
    inside = np.abs(t) < 1
    tt = np.where(inside, t, 0.0)
    return np.where(inside, bump(v, K) * (-8 * tt / (1 - tt**2) ** 2) / K, 0.0)


# -- profiles P(x, y) ---------------------------------------------------------


def _smooth_profile(c1: float, c2: float):
    def P(x, y):
        return np.exp(c1 * np.cos(TWO_PI * x) + c2 * np.sin(TWO_PI * y))

    def Px(x, y):
        return -TWO_PI * c1 * np.sin(TWO_PI * x) * P(x, y)

    def Py(x, y):
        return TWO_PI * c2 * np.cos(TWO_PI * y) * P(x, y)

    return P, Px, Py


def _rough_p(x):
    """Periodic C^1 piecewise quadratic with mean-zero piecewise linear slope."""
    x = np.mod(x, 1.0)
    left = x * x / 2 - x / 4
    right = 0.75 * (x - 0.5) - (x * x - 0.25) / 2
    return np.where(x < 0.5, left, right)


def _rough_dp(x):
    x = np.mod(x, 1.0)
    return np.where(x < 0.5, x, 1 - x) - 0.25


def _rough_profile(c1: float, c2: float):
    def P(x, y):
        return np.exp(8 * c1 * _rough_p(x) + c2 * np.sin(TWO_PI * y))

    def Px(x, y):
        return 8 * c1 * _rough_dp(x) * P(x, y)

    def Py(x, y):
        return TWO_PI * c2 * np.cos(TWO_PI * y) * P(x, y)

    return P, Px, Py


# -- recipes ----------------------------------------------------------------


@dataclass(frozen=True)
class Recipe:
    """How to manufacture a test form.

    kind: "zero", "exact" (f = ∂̄g0), "rough" (exact with a C^1 profile in x)
    or "cech" (f = s·∂̄χ with s = Σ c ξ^m η^n holomorphic).
    modes: η-exponent n -> complex coefficient (for cech: (n, m) -> coefficient).
    """

    kind: str = "exact"
    modes: dict = field(default_factory=lambda: {0: 1.0, 1: 0.5, -1: 0.25})
    K: float = 2.0
    c1: float = 0.5
    c2: float = 0.5

    def __post_init__(self):
        if self.kind not in ("zero", "exact", "rough", "cech"):
            raise RecipeError(f"unknown recipe kind {self.kind!r}")
        if not self.K > 0:
            raise RecipeError("support window K must be positive")


@dataclass
class Form01:
    """a dξ̄/ξ̄ + b dη̄/η̄ sampled on a TorusGrid.

    ``phis[k]`` is the y-twist of β-slot k (g_n(x, y+1) = e^{2πiφ} g_n);
    ``evaluator`` gives (a, b) at arbitrary broadcast (x, y, v, β), used by
    quadrature off the grid.
    """

    grid: TorusGrid
    a: np.ndarray
    b: np.ndarray
    phis: np.ndarray
    K: float
    constants: DerivedConstants
    evaluator: Callable | None = None
    equivariant: bool = True
    recipe: Recipe | None = None
    g0: Callable | None = None  # manufactured primitive, when known

    def weighted_l2(self) -> float:
        """Discrete L² norm with the pointwise ω-norm."""
        return math.sqrt(_omega_sumsq(self.a, self.b, self.grid) * self.grid.cell_volume())

    def support_flag_residual(self) -> float:
        """sup of |a|, |b| outside the support window (should vanish)."""
        outside = np.abs(self.grid.v) >= self.K
        if not outside.any():
            return 0.0
        return float(max(np.abs(self.a[:, outside]).max(), np.abs(self.b[:, outside]).max()))


def _omega_sumsq(a, b, grid: TorusGrid) -> float:
    s = 1 / (2 * np.cosh(2 * grid.v))[None, :, None, None]
    return float(np.sum(np.abs(a) ** 2) + np.sum(s * np.abs(b) ** 2))


def _exact_evaluator(recipe: Recipe, c: DerivedConstants, phi_of: Callable[[int], float]):
    P, Px, Py = (_rough_profile if recipe.kind == "rough" else _smooth_profile)(recipe.c1, recipe.c2)
    tau = c.tau
    K = recipe.K

    def g0(x, y, v, beta):
        out = 0j
        for n, coef in recipe.modes.items():
            phi = phi_of(n)
            out = out + coef * bump(v, K) * np.exp(n * (v + 1j * beta)) * np.exp(2j * math.pi * phi * y) * P(x, y)
        return out

    def ab(x, y, v, beta):
        a = 0j
        b = 0j
        for n, coef in recipe.modes.items():
            phi = phi_of(n)
            w = coef * np.exp(n * (v + 1j * beta)) * np.exp(2j * math.pi * phi * y)
            p, px, py = P(x, y), Px(x, y), Py(x, y)
            a = a + bump(v, K) * w * (tau * px - 2j * math.pi * phi * p - py) / (4 * math.pi * tau.imag)
            b = b + bump_prime(v, K) * w * p / 2
        return a, b

    return ab, g0


def _cech_evaluator(recipe: Recipe, c: DerivedConstants):
    tau = c.tau
    K = recipe.K

    def ab(x, y, v, beta):
        s = 0j
        for (n, m), coef in recipe.modes.items():
            s = s + coef * np.exp(2j * math.pi * m * (x + tau * y)) * np.exp(n * (v + 1j * beta))
        a = np.zeros(np.broadcast_shapes(np.shape(x), np.shape(y), np.shape(v), np.shape(beta)), complex)
        return a + 0 * s, s * bump_prime(v, K) / 2

    return ab


def build_test_form(
    params: GroupParams,
    theta1=Fraction(0),
    theta2=Fraction(0),
    recipe: Recipe | None = None,
    grid: TorusGrid | None = None,
) -> Form01:
    """Manufacture f̃ on the covering from a recipe.

    The exact recipe is f = ∂̄g0 with
        g0 = χ(v) Σ_n c_n η^n e^{2πiφ_n y} P(x, y),
    which is σ-equivariant because φ_n = θ2 - nq; its derivatives are
    closed-form, so f is exactly ∂̄-closed. Cech forms s·∂̄χ are closed but
    equivariant only when every monomial ξ^m η^n of s has λ^m μ^n = ν.
    """
    recipe = recipe or Recipe()
    grid = grid or TorusGrid()
    if to_float(params.p) != 0 or to_float(theta1) != 0:
        raise RecipeError("the pipeline covers p = θ1 = 0 only")
    if recipe.K + 1.5 > grid.V:
        raise RecipeError(f"cutoff band |v| < {recipe.K} (+ margin) exceeds the grid box [-{grid.V}, {grid.V})")
    c = derive_constants(params, theta2)
    phis = mode_phases(grid, c)
    slot = {int(n): k for k, n in enumerate(grid.eta_modes)}
    B, Vv, Y, X = grid.mesh()

    if recipe.kind == "zero":
        z = np.zeros(grid.shape, complex)
        return Form01(grid, z, z.copy(), phis, recipe.K, c, lambda x, y, v, b: (0 * x + 0j, 0 * x + 0j),
                      True, recipe, lambda x, y, v, b: 0 * x + 0j)

    if recipe.kind in ("exact", "rough"):
        for n in recipe.modes:
            if n not in slot or abs(n) >= grid.kb // 2:
                raise AliasingError(f"η-mode {n} does not fit {grid.kb} β-points")
        ab, g0 = _exact_evaluator(recipe, c, lambda n: phis[slot[n]])
        a, b = ab(X, Y, Vv, B)
        return Form01(grid, np.asarray(a, complex), np.asarray(b, complex), phis, recipe.K, c, ab, True, recipe, g0)

    # cech: ξ^m = e^{2πim(x+τy)} is not y-periodic on the slab for m != 0
    for n, m in recipe.modes:
        if m != 0:
            raise RecipeError("cech monomials must be powers of η alone")
        if n not in slot or abs(n) >= grid.kb // 2:
            raise AliasingError(f"η-mode {n} does not fit {grid.kb} β-points")
    ab = _cech_evaluator(recipe, c)
    a, b = ab(X, Y, Vv, B)
    equivariant = all(
        abs(c.lam_pow(m) * c.mu_pow(n) - c.nu) < 1e-12 for (n, m), coef in recipe.modes.items() if coef != 0
    )
    return Form01(grid, np.asarray(a, complex), np.asarray(b, complex), np.zeros(grid.kb), recipe.K, c, ab,
                  equivariant, recipe)


def form_equivariance_residual(f: Form01) -> float:
    """sup over the grid of |f(σP) - ν f(P)| in the σ-invariant log frames."""
    if f.evaluator is None:
        raise ValueError("form has no pointwise evaluator")
    B, Vv, Y, X = f.grid.mesh()
    c = f.constants
    a1, b1 = f.evaluator(X, Y + 1.0, Vv, B + TWO_PI * c.q)
    a0, b0 = f.evaluator(X, Y, Vv, B)
    return float(max(np.abs(a1 - c.nu * a0).max(), np.abs(b1 - c.nu * b0).max()))


# -- spectral building blocks ----------------------------------------------------


def beta_modes(arr: np.ndarray) -> np.ndarray:
    """η-mode components: arr = Σ_k out[k] e^{i n_k β}."""
    return np.fft.fft(arr, axis=0) / arr.shape[0]


def beta_synth(modes: np.ndarray) -> np.ndarray:
    return np.fft.ifft(modes, axis=0) * modes.shape[0]


def twist(grid: TorusGrid, phi: float, sign: int = 1) -> np.ndarray:
    """e^{±2πiφy} on the y axis, shaped to broadcast against (v, y, x)."""
    return np.exp(sign * 2j * math.pi * phi * grid.y)[None, :, None]


def l1_multiplier(grid: TorusGrid, tau: complex, phi: float) -> np.ndarray:
    """Symbol of ξ̄∂_ξ̄ on e^{2πi(jx + (k+φ)y)}: i(τj - k - φ) / (2 Im τ); shape (ky, kx)."""
    j = np.fft.fftfreq(grid.kx) * grid.kx
    k = np.fft.fftfreq(grid.ky) * grid.ky
    return 1j * (tau * j[None, :] - (k[:, None] + phi)) / (2 * tau.imag)


def l2_apply(grid: TorusGrid, arr_n: np.ndarray, n: int) -> np.ndarray:
    """η̄∂_η̄ on the η^n-slot: ((∂_v) - n)/2, ∂_v spectrally on the periodic v box."""
    L = 2 * grid.V
    freqs = np.fft.fftfreq(grid.nv) * grid.nv
    dv = np.fft.ifft(np.fft.fft(arr_n, axis=0) * (2j * math.pi * freqs / L)[:, None, None], axis=0)
    return (dv - n * arr_n) / 2


def l1_apply(grid: TorusGrid, arr_n: np.ndarray, tau: complex, phi: float) -> np.ndarray:
    p = arr_n * twist(grid, phi, -1)
    fhat = np.fft.fft2(p, axes=(1, 2)) * l1_multiplier(grid, tau, phi)[None]
    return np.fft.ifft2(fhat, axes=(1, 2)) * twist(grid, phi, 1)


def closedness_residual(f: Form01) -> float:
    """‖L1 b - L2 a‖ / (‖L1 b‖ + ‖L2 a‖), discrete L² over the grid."""
    grid, tau = f.grid, f.constants.tau
    am, bm = beta_modes(f.a), beta_modes(f.b)
    num = den = 0.0
    for k, n in enumerate(grid.eta_modes):
        l1b = l1_apply(grid, bm[k], tau, f.phis[k])
        l2a = l2_apply(grid, am[k], int(n))
        num += float(np.sum(np.abs(l1b - l2a) ** 2))
        den += float(np.sum(np.abs(l1b) ** 2) + np.sum(np.abs(l2a) ** 2))
    if den == 0:
        return 0.0
    return math.sqrt(num) / math.sqrt(den)
