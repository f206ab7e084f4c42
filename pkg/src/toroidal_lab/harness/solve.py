"""Mode-wise ∂̄ solve on X (p = θ1 = 0).

Splitting f̃ into η-modes gives, for each n, a (0,1)-datum on the elliptic
curve valued in the flat bundle with y-twist φ_n = θ2 - nq. There ξ̄∂_ξ̄ is
diagonal on e^{2πi(jx + (k+φ_n)y)} with symbol i(τj - k - φ_n)/(2 Im τ), so
g_n is a pointwise division in the double Fourier basis, one v-slice at a
time. The symbol vanishes only for j = k = 0 and φ_n = 0: the mode whose
character is trivial.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..errors import AliasingError, ClosednessError, ResonantObstruction
from ..group import DerivedConstants
from .forms import (
    TWO_PI,
    Form01,
    TorusGrid,
    _omega_sumsq,
    beta_modes,
    l1_multiplier,
    l2_apply,
    twist,
)

RESONANT_PHASE_TOL = 1e-12


@dataclass
class ModeSection:
    """g = Σ_n e^{inβ} e^{2πiφ_n y} p_n(x, y, v) + Σ extras.

    ``spectra[k]`` is the 2-D FFT over (y, x) of the periodic part p_n for
    β-slot k, per v-slice. ``extras`` are callables (x, y, v, β) -> values,
    used for closed-form pieces such as the correction A(ξ).
    """

    grid: TorusGrid
    constants: DerivedConstants
    phis: np.ndarray
    spectra: list  # per β-slot: complex array (nv, ky, kx) or None for zero
    extras: list = field(default_factory=list)

    def mode_values(self, k: int, y_shift: int = 0) -> np.ndarray:
        """g_n on the (v, y, x) grid with y replaced by y + y_shift."""
        fhat = self.spectra[k]
        if fhat is None:
            return np.zeros(self.grid.shape[1:], complex)
        p = np.fft.ifft2(fhat, axes=(1, 2))
        return p * twist(self.grid, self.phis[k]) * np.exp(2j * math.pi * self.phis[k] * y_shift)

    def __call__(self, y_shift: int = 0, beta_shift: float = 0.0) -> np.ndarray:
        """Samples on the grid points (x, y + y_shift, v, β + beta_shift).

        x and y are taken on the grid modulo 1; an integer y-shift is applied
        through each mode's twist factor, the β-shift through e^{inβ}.
        """
        grid = self.grid
        out = np.zeros(grid.shape, complex)
        beta = grid.beta + beta_shift
        for k, n in enumerate(grid.eta_modes):
            if self.spectra[k] is None:
                continue
            out += np.exp(1j * n * beta)[:, None, None, None] * self.mode_values(k, y_shift)[None]
        if self.extras:
            B, Vv, Y, X = grid.mesh()
            for fn in self.extras:
                out = out + fn(X, Y + y_shift, Vv, B + beta_shift)
        return out

    def sigma_pullback(self, power: int = 1) -> np.ndarray:
        """(σ^power)*g on the grid: y ↦ y + power, β ↦ β + 2π q·power."""
        return self(power, TWO_PI * ((power * self.constants.q) % 1.0))

    def with_extra(self, fn: Callable) -> "ModeSection":
        return ModeSection(self.grid, self.constants, self.phis, self.spectra, self.extras + [fn])


@dataclass
class DbarSolveReport:
    g: ModeSection
    trunc: int
    min_divisor: float
    min_divisor_mode: tuple[int, int, int] | None  # (n, j, k)
    closedness: float
    residual_rel: float
    per_mode_residual: dict

    def as_dict(self) -> dict:
        return {
            "trunc": self.trunc,
            "min_divisor": self.min_divisor,
            "min_divisor_mode_njk": None if self.min_divisor_mode is None else list(self.min_divisor_mode),
            "closedness": self.closedness,
            "dbar_residual_rel": self.residual_rel,
            "per_mode_residual": {str(k): v for k, v in sorted(self.per_mode_residual.items())},
        }


def _truncation_mask(grid: TorusGrid, trunc: int) -> np.ndarray:
    if trunc + 1 > min(grid.kx, grid.ky):
        raise AliasingError(f"{trunc} modes need at least {trunc + 1} angular points, have {min(grid.kx, grid.ky)}")
    j = np.fft.fftfreq(grid.kx) * grid.kx
    k = np.fft.fftfreq(grid.ky) * grid.ky
    half = trunc // 2
    return (np.abs(k)[:, None] <= half) & (np.abs(j)[None, :] <= half)


def solve_dbar_modes(f: Form01, trunc: int = 32, tol: float = 1e-6, data_tol: float = 1e-12) -> DbarSolveReport:
    """Solve ∂̄g = f mode by mode, keeping |j|, |k| <= trunc/2.

    Raises ResonantObstruction when a trivial-character mode (φ_n = 0,
    j = k = 0) carries data above ``data_tol`` relative to the form, and
    ClosednessError when f fails the closedness check at ``tol``.
    """
    from .forms import closedness_residual

    grid, c = f.grid, f.constants
    mask = _truncation_mask(grid, trunc)
    closed = closedness_residual(f)
    if closed > tol:
        raise ClosednessError(closed, tol)
    am, bm = beta_modes(f.a), beta_modes(f.b)
    scale = max(float(np.abs(f.a).max(initial=0)), float(np.abs(f.b).max(initial=0)), 1e-300)
    spectra = []
    min_div, min_mode = math.inf, None
    for k, n in enumerate(grid.eta_modes):
        n = int(n)
        phi = f.phis[k]
        if not np.any(am[k]) and not np.any(bm[k]):
            spectra.append(None)
            continue
        D = l1_multiplier(grid, c.tau, phi)
        spec_a = np.fft.fft2(am[k] * twist(grid, phi, -1), axes=(1, 2))
        if abs(phi) < RESONANT_PHASE_TOL:
            # the (j, k) = (0, 0) symbol vanishes; the datum there must be zero
            mean_a = np.abs(spec_a[:, 0, 0]).max() / (grid.kx * grid.ky)
            mean_b = np.abs(np.fft.fft2(bm[k], axes=(1, 2))[:, 0, 0]).max() / (grid.kx * grid.ky)
            data = max(mean_a, mean_b)
            if data > data_tol * scale:
                raise ResonantObstruction((n, 0, 0), data, abs(phi), stage="solve_dbar_modes")
        Dm = np.where(mask, D, np.inf)
        Dm[0, 0] = np.inf if abs(D[0, 0]) < RESONANT_PHASE_TOL else Dm[0, 0]
        spectra.append(spec_a / Dm[None])
        absD = np.abs(np.where(np.isfinite(Dm), Dm, np.inf))
        i = np.unravel_index(int(np.argmin(absD)), absD.shape)
        if absD[i] < min_div:
            jj = int(np.rint(np.fft.fftfreq(grid.kx)[i[1]] * grid.kx))
            kk = int(np.rint(np.fft.fftfreq(grid.ky)[i[0]] * grid.ky))
            min_div, min_mode = float(absD[i]), (n, jj, kk)
    g = ModeSection(grid, c, f.phis.copy(), spectra)
    rel, per_mode = dbar_residual(g, f)
    return DbarSolveReport(g, trunc, min_div, min_mode, closed, rel, per_mode)


def dbar_residual(g: ModeSection, f: Form01) -> tuple[float, dict]:
    """‖∂̄g - f‖ / ‖f‖ in the discrete ω-weighted L² norm, plus per-mode values."""
    grid, tau = g.grid, g.constants.tau
    am, bm = beta_modes(f.a), beta_modes(f.b)
    s = (1 / (2 * np.cosh(2 * grid.v)))[:, None, None]
    num = 0.0
    per_mode = {}
    for k, n in enumerate(grid.eta_modes):
        if g.spectra[k] is None:
            l1g = np.zeros(grid.shape[1:], complex)
            gk = l1g
        else:
            D = l1_multiplier(grid, tau, g.phis[k])
            l1g = np.fft.ifft2(g.spectra[k] * np.where(np.isfinite(D), D, 0)[None], axes=(1, 2)) * twist(grid, g.phis[k])
            gk = g.mode_values(k)
        l2g = l2_apply(grid, gk, int(n))
        r = float(np.sum(np.abs(l1g - am[k]) ** 2) + np.sum(s * np.abs(l2g - bm[k]) ** 2))
        # β-modes carry weight kb in the sample-space sum (Parseval)
        per_mode[int(n)] = math.sqrt(r * grid.kb)
        num += r * grid.kb
    den = _omega_sumsq(f.a, f.b, grid)
    if den == 0:
        return (0.0 if num == 0 else math.inf), per_mode
    return math.sqrt(num / den), per_mode


@dataclass
class TruncationStudy:
    truncs: list[int]
    residuals: list[float]

    @property
    def monotone(self) -> bool:
        """Non-increasing within twice the noise floor."""
        floor = 2 * max(min(self.residuals), 1e-15)
        return all(b <= a + floor for a, b in zip(self.residuals, self.residuals[1:]))

    def as_dict(self) -> dict:
        return {"truncs": self.truncs, "residuals": self.residuals, "monotone": self.monotone}


def truncation_convergence_study(f: Form01, truncs: Sequence[int] = (8, 16, 32)) -> TruncationStudy:
    res = [solve_dbar_modes(f, t, tol=math.inf).residual_rel for t in truncs]
    return TruncationStudy(list(truncs), res)
