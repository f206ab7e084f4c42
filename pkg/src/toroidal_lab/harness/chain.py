"""From ĝ to an equivariant g̃: the defect F = ν⁻¹σ*ĝ - ĝ, its η-mode
profile, the holomorphic piece a0(ξ), the correction A and g̃ = ĝ - A.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..group import DerivedConstants
from ..laurent import LaurentSeries1, eval_series
from ..small_divisor import DROP_TOL, RESONANCE_TOL, correction_A
from .forms import TorusGrid, beta_modes
from .solve import ModeSection


def _xi(grid: TorusGrid, tau: complex, X, Y):
    return np.exp(2j * math.pi * (X + tau * Y))


def holomorphy_residual(F: np.ndarray, grid: TorusGrid, tau: complex) -> float:
    """How far sampled F is from Σ a_{n,m} ξ^m η^n.

    For holomorphic F the (β, x)-Fourier coefficients are
    c_{n,m}(v, y) = a_{n,m} e^{2πimτy} e^{nv}. Each (n, m) is predicted from its
    largest sample; the transport factor is clipped at modulus 1 so that
    rounding noise in the reference is never amplified.
    """
    modes = beta_modes(F)
    c = np.fft.fft(modes, axis=-1) / grid.kx  # (kb, nv, ky, m)
    m = np.fft.fftfreq(grid.kx) * grid.kx
    y, v = grid.y, grid.v
    worst = 0.0
    for k, n in enumerate(grid.eta_modes):
        ck = c[k]
        mag = np.abs(ck).reshape(-1, grid.kx)
        ref = np.argmax(mag, axis=0)
        iv, iy = np.unravel_index(ref, (grid.nv, grid.ky))
        cref = ck[iv, iy, np.arange(grid.kx)]
        dy = y[None, :, None] - y[iy][None, None, :]
        dv = v[:, None, None] - v[iv][None, None, :]
        logf = 2j * math.pi * m[None, None, :] * tau * dy + n * dv
        factor = np.exp(np.minimum(logf.real, 0.0) + 1j * logf.imag)
        pred = cref[None, None, :] * factor
        worst = max(worst, float(np.abs(ck - pred).max()))
    return worst


def extract_a0(F: np.ndarray, grid: TorusGrid, tau: complex) -> LaurentSeries1:
    """a0(ξ) = Σ a_{0,m} ξ^m from the η^0 part of F.

    Each coefficient is read on the y-row where e^{2πimτy} has the largest
    modulus (y = 0 for m >= 0, the last row for m < 0), then averaged over v.
    """
    k0 = int(np.nonzero(grid.eta_modes == 0)[0][0])
    F0 = beta_modes(F)[k0]
    c = np.fft.fft(F0, axis=-1) / grid.kx  # (nv, ky, m)
    m = np.rint(np.fft.fftfreq(grid.kx) * grid.kx).astype(int)
    rows = np.where(m >= 0, 0, grid.ky - 1)
    yv = grid.y[rows]
    vals = c[:, rows, np.arange(grid.kx)].mean(axis=0) * np.exp(-2j * math.pi * m * tau * yv)
    order = np.argsort(m)
    return LaurentSeries1(vals[order], int(m[order][0]))


@dataclass
class ChainReport:
    F_sup: float
    eta_profile: dict
    constancy_violation: float
    holomorphy_residual: float
    a0: LaurentSeries1
    A: LaurentSeries1
    g_tilde: ModeSection
    equivariance_residual: float
    tol: float

    @property
    def flagged(self) -> bool:
        return self.constancy_violation >= self.tol or self.holomorphy_residual >= self.tol

    def as_dict(self) -> dict:
        return {
            "F_sup": self.F_sup,
            "eta_profile": {str(k): v for k, v in sorted(self.eta_profile.items())},
            "constancy_violation": self.constancy_violation,
            "holomorphy_residual": self.holomorphy_residual,
            "a0": self.a0.as_dict(),
            "A": self.A.as_dict(),
            "equivariance_residual": self.equivariance_residual,
            "tol": self.tol,
            "flagged": self.flagged,
        }


def correction_chain(
    g_hat: ModeSection,
    c: DerivedConstants | None = None,
    tol: float = 1e-8,
    resonance_tol: float = RESONANCE_TOL,
    drop_tol: float = DROP_TOL,
) -> ChainReport:
    c = c or g_hat.constants
    grid = g_hat.grid
    g0 = g_hat()
    F = g_hat.sigma_pullback() / c.nu - g0
    modes = beta_modes(F)
    profile = {int(n): float(np.abs(modes[k]).max()) for k, n in enumerate(grid.eta_modes)}
    constancy = max((v for n, v in profile.items() if n != 0), default=0.0)
    holo = holomorphy_residual(F, grid, c.tau)
    a0 = extract_a0(F, grid, c.tau)
    A = correction_A(a0, c, resonance_tol, drop_tol)
    tau = c.tau

    def minus_A(X, Y, V, B):
        return -eval_series(A, _xi(grid, tau, X, Y))

    g_tilde = g_hat.with_extra(minus_A)
    equiv = float(np.abs(g_tilde.sigma_pullback() - c.nu * g_tilde()).max())
    return ChainReport(
        float(np.abs(F).max()), profile, constancy, holo, a0, A, g_tilde, equiv, tol
    )


def support_decay_report(g, K: float, margin: float = 0.5, grid: TorusGrid | None = None) -> float:
    """sup |g| over the grid band |log|η|| > K + margin."""
    if isinstance(g, ModeSection):
        grid, vals = g.grid, g()
    else:
        if grid is None:
            raise ValueError("sampled input needs its grid")
        vals = np.asarray(g)
    outside = np.abs(grid.v) > K + margin
    if not outside.any():
        raise ValueError(f"grid box [-{grid.V}, {grid.V}) has no points beyond {K + margin}")
    return float(np.abs(vals[:, outside]).max(initial=0.0))
