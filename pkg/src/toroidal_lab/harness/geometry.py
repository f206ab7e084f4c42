"""Weight ψ, metric ω and the volume form dλ̃ on (C*)^2.

    ψ = (log|ξ|²)² + log(|η|² + |η|⁻²)
    ω = i/|ξ|² dξ∧dξ̄ + i(1 + |η|⁻⁴) dη∧dη̄
    dλ̃ = 4 g_ξξ̄ g_ηη̄ × Lebesgue(ξ, η)

Everything is vectorized over numpy arrays of ξ and η.
"""
from __future__ import annotations

from dataclasses import dataclass

import mpmath
import numpy as np

from ..errors import DomainError


@dataclass(frozen=True)
class GeometryValues:
    psi: np.ndarray
    g_xixi: np.ndarray
    g_etaeta: np.ndarray
    vol_density: np.ndarray
    curvature: tuple[np.ndarray, np.ndarray]


def _check_nonzero(xi, eta):
    if np.any(np.asarray(xi) == 0) or np.any(np.asarray(eta) == 0):
        raise DomainError("ξ and η must be nonzero")


def psi(xi, eta):
    s = np.abs(eta) ** 2
    return np.log(np.abs(xi) ** 2) ** 2 + np.log(s + 1 / s)


def psi_log(u, v):
    """ψ in log coordinates u = log|ξ|, v = log|η|."""
    return 4 * np.asarray(u) ** 2 + np.logaddexp(2 * np.asarray(v), -2 * np.asarray(v))


def geometry_eval(xi, eta) -> GeometryValues:
    _check_nonzero(xi, eta)
    ax2 = np.abs(xi) ** 2
    s = np.abs(eta) ** 2
    g1 = 1 / ax2
    g2 = 1 + 1 / s**2
    curv_xi = 2 / ax2
    curv_eta = 4 * s / (1 + s**2) ** 2  # = 4 / (|η|² (|η|² + |η|⁻²)²)
    return GeometryValues(psi(xi, eta), g1, g2, 4 * g1 * g2, (curv_xi, curv_eta))


def omega_real_matrix(g1: float, g2: float) -> np.ndarray:
    """ω as an antisymmetric form on R^4 = (Re ξ, Im ξ, Re η, Im η).

    i g dζ∧dζ̄ = 2g dx∧dy for each factor.
    """
    W = np.zeros((4, 4))
    W[0, 1], W[1, 0] = 2 * g1, -2 * g1
    W[2, 3], W[3, 2] = 2 * g2, -2 * g2
    return W


def volume_from_omega(g1: float, g2: float) -> float:
    """ω²/2 relative to Lebesgue measure, as sqrt(det) of the real matrix."""
    return float(np.sqrt(np.linalg.det(omega_real_matrix(g1, g2))))


def form_norm(f_xibar, f_etabar, xi, eta):
    """|f|²_ω for f = f_ξ̄ dξ̄ + f_η̄ dη̄ (coordinate components)."""
    _check_nonzero(xi, eta)
    g = geometry_eval(xi, eta)
    return np.abs(f_xibar) ** 2 / g.g_xixi + np.abs(f_etabar) ** 2 / g.g_etaeta


def log_frame_norm(a, b, v):
    """|f|²_ω for f = a dξ̄/ξ̄ + b dη̄/η̄ with v = log|η|."""
    return np.abs(a) ** 2 + np.abs(b) ** 2 / (2 * np.cosh(2 * np.asarray(v)))


def wedge_norm(a, b, v):
    """|f ∧ dξ/ξ ∧ dη/η|²_ω = s(|a|² + s|b|²), s = 1/(|η|² + |η|⁻²) <= 1/2."""
    s = 1 / (2 * np.cosh(2 * np.asarray(v)))
    return s * (np.abs(a) ** 2 + s * np.abs(b) ** 2)


def frame_norms(xi, eta) -> tuple[np.ndarray, np.ndarray]:
    """(|dξ/ξ|²_ω, |dη/η|²_ω) evaluated through ``form_norm``."""
    one = form_norm(1 / np.conj(xi), 0.0, xi, eta)
    two = form_norm(0.0, 1 / np.conj(eta), xi, eta)
    return one, two


def _psi_log_mp(u, v):
    return 4 * u**2 + mpmath.log(mpmath.exp(2 * v) + mpmath.exp(-2 * v))


def curvature_fd(u, v, h: float = 1e-4, dps: int | None = 30) -> tuple[np.ndarray, np.ndarray]:
    """Curvature coefficients from central differences of ψ in (u, v).

    ψ depends on u = log|ξ| and v = log|η| only, so ∂_ξ∂_ξ̄ψ = ψ_uu / (4|ξ|²)
    and likewise for η. With ``dps`` set, ψ is evaluated in that many digits
    so that only the O(h²) stencil error remains; in doubles the 4u² term
    swamps ψ_vv at h = 1e-4.
    """
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    if dps is None:
        puu = (psi_log(u + h, v) - 2 * psi_log(u, v) + psi_log(u - h, v)) / h**2
        pvv = (psi_log(u, v + h) - 2 * psi_log(u, v) + psi_log(u, v - h)) / h**2
        return puu / (4 * np.exp(2 * u)), pvv / (4 * np.exp(2 * v))
    uu, vv = np.broadcast_arrays(u, v)
    out_u = np.empty(uu.shape)
    out_v = np.empty(uu.shape)
    with mpmath.workdps(dps):
        hh = mpmath.mpf(h)
        for idx in np.ndindex(uu.shape):
            a, b = mpmath.mpf(uu[idx]), mpmath.mpf(vv[idx])
            c = _psi_log_mp(a, b)
            puu = (_psi_log_mp(a + hh, b) - 2 * c + _psi_log_mp(a - hh, b)) / hh**2
            pvv = (_psi_log_mp(a, b + hh) - 2 * c + _psi_log_mp(a, b - hh)) / hh**2
            out_u[idx] = float(puu / (4 * mpmath.exp(2 * a)))
            out_v[idx] = float(pvv / (4 * mpmath.exp(2 * b)))
    return out_u, out_v
