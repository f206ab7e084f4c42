"""Truncated Laurent series in one and two variables.

Index convention, fixed everywhere: F(ξ, η) = Σ a[n, m] ξ^m η^n, so the
first array axis is the η-exponent n and the second the ξ-exponent m.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import AliasingError, DegenerateFitError

TINY = 1e-300


def _check_finite(a: np.ndarray):
    if not np.all(np.isfinite(a)):
        raise ValueError("Laurent coefficients must be finite")


@dataclass(frozen=True)
class LaurentSeries1:
    """Σ_{m=m_min}^{m_max} a_m ξ^m."""

    coeffs: np.ndarray
    m_min: int
    radius: float = 1.0

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1:
            raise ValueError("LaurentSeries1 needs a 1-D coefficient array")
        _check_finite(c)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, m_min: int, m_max: int, radius: float = 1.0) -> "LaurentSeries1":
        return cls(np.zeros(m_max - m_min + 1, complex), m_min, radius)

    @property
    def m_max(self) -> int:
        return self.m_min + len(self.coeffs) - 1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.m_min, self.m_max + 1)

    def __getitem__(self, m: int) -> complex:
        k = m - self.m_min
        return complex(self.coeffs[k]) if 0 <= k < len(self.coeffs) else 0j

    def __call__(self, xi):
        return eval_series(self, xi)

    def as_dict(self) -> dict:
        return {
            "m_min": self.m_min,
            "m_max": self.m_max,
            "radius": self.radius,
            "re": self.coeffs.real.tolist(),
            "im": self.coeffs.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LaurentSeries1":
        c = np.array(d["re"]) + 1j * np.array(d["im"])
        if len(c) != d["m_max"] - d["m_min"] + 1:
            raise ValueError("coefficient count does not match the index range")
        return cls(c, d["m_min"], d.get("radius", 1.0))


@dataclass(frozen=True)
class LaurentSeries2:
    """Σ a[n - n_min, m - m_min] ξ^m η^n."""

    coeffs: np.ndarray
    n_min: int
    m_min: int

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 2:
            raise ValueError("LaurentSeries2 needs a 2-D coefficient array (n, m)")
        _check_finite(c)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, N: int, M: int) -> "LaurentSeries2":
        return cls(np.zeros((2 * N + 1, 2 * M + 1), complex), -N, -M)

    @property
    def n_max(self) -> int:
        return self.n_min + self.coeffs.shape[0] - 1

    @property
    def m_max(self) -> int:
        return self.m_min + self.coeffs.shape[1] - 1

    @property
    def n_indices(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_max + 1)

    @property
    def m_indices(self) -> np.ndarray:
        return np.arange(self.m_min, self.m_max + 1)

    def __getitem__(self, nm) -> complex:
        n, m = nm
        i, j = n - self.n_min, m - self.m_min
        if 0 <= i < self.coeffs.shape[0] and 0 <= j < self.coeffs.shape[1]:
            return complex(self.coeffs[i, j])
        return 0j

    def row(self, n: int, radius: float = 1.0) -> LaurentSeries1:
        """The η^n coefficient a_n(ξ) as a series in ξ."""
        return LaurentSeries1(self.coeffs[n - self.n_min].copy(), self.m_min, radius)

    def sup_norm_coeffs(self) -> float:
        return float(np.abs(self.coeffs).max(initial=0.0))

    def __call__(self, xi, eta):
        return eval_series(self, xi, eta)

    def as_dict(self) -> dict:
        return {
            "index_convention": "a[n,m] * xi^m * eta^n",
            "n_min": self.n_min,
            "n_max": self.n_max,
            "m_min": self.m_min,
            "m_max": self.m_max,
            "re": self.coeffs.real.tolist(),
            "im": self.coeffs.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LaurentSeries2":
        if d.get("index_convention", "a[n,m] * xi^m * eta^n") != "a[n,m] * xi^m * eta^n":
            raise ValueError("unknown index convention")
        c = np.array(d["re"]) + 1j * np.array(d["im"])
        if c.shape != (d["n_max"] - d["n_min"] + 1, d["m_max"] - d["m_min"] + 1):
            raise ValueError("coefficient shape does not match the index range")
        return cls(c, d["n_min"], d["m_min"])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "m", "re", "im"])
        for i, n in enumerate(self.n_indices):
            for j, m in enumerate(self.m_indices):
                z = self.coeffs[i, j]
                w.writerow([int(n), int(m), repr(float(z.real)), repr(float(z.imag))])
        return buf.getvalue()


@dataclass(frozen=True)
class LogPolarGrid:
    u_min: float
    u_max: float
    n_u: int
    K_xi: int
    K_eta: int
    v_min: float
    v_max: float
    n_v: int
    max_mode: int

    def __post_init__(self):
        for K in (self.K_xi, self.K_eta):
            if K < 2 or K & (K - 1):
                raise ValueError("angular counts must be powers of two")
            if K < 2 * self.max_mode + 1:
                raise AliasingError(f"K={K} cannot resolve modes up to {self.max_mode}")
        if self.u_max <= self.u_min or self.v_max <= self.v_min:
            raise ValueError("empty radial range")

    def u(self) -> np.ndarray:
        return np.linspace(self.u_min, self.u_max, self.n_u)

    def v(self) -> np.ndarray:
        return np.linspace(self.v_min, self.v_max, self.n_v)

    def angles(self, K: int) -> np.ndarray:
        return 2 * np.pi * np.arange(K) / K


def _mode_range(n_range) -> np.ndarray:
    lo, hi = n_range
    if hi < lo:
        raise ValueError("empty mode range")
    return np.arange(lo, hi + 1)


def coeffs_from_circle_samples(samples, radius: float, n_range: tuple[int, int]) -> np.ndarray:
    """a_n = r^{-n} (1/K) Σ_k s_k e^{-2πi nk/K} for n in the closed range.

    The samples are F(r e^{2πik/K}); the trapezoid rule on the circle is the
    contour integral (1/2πi)∮ F η^{-n-1} dη, exact for band-limited data.
    """
    s = np.asarray(samples, dtype=complex)
    K = s.shape[-1]
    ns = _mode_range(n_range)
    if K < 2 * int(np.abs(ns).max()) + 1:
        raise AliasingError(f"{K} samples cannot resolve modes up to |n|={int(np.abs(ns).max())}")
    if radius <= 0:
        raise ValueError("radius must be positive")
    fhat = np.fft.fft(s, axis=-1) / K
    return fhat[..., ns % K] * radius ** (-ns.astype(float))


def coeffs2_from_torus_samples(samples, r_xi: float, r_eta: float, N: int, M: int) -> LaurentSeries2:
    """Two-variable version; samples[k_eta, k_xi] on the torus |ξ|=r_xi, |η|=r_eta."""
    s = np.asarray(samples, dtype=complex)
    Ke, Kx = s.shape
    if Ke < 2 * N + 1 or Kx < 2 * M + 1:
        raise AliasingError(f"grid {s.shape} cannot resolve modes ({N}, {M})")
    fhat = np.fft.fft2(s) / (Ke * Kx)
    ns, ms = np.arange(-N, N + 1), np.arange(-M, M + 1)
    c = fhat[np.ix_(ns % Ke, ms % Kx)]
    c = c * (float(r_eta) ** -ns.astype(float))[:, None] * (float(r_xi) ** -ms.astype(float))[None, :]
    return LaurentSeries2(c, -N, -M)


def _horner1(coeffs: np.ndarray, m_min: int, x):
    """Σ coeffs[k] x^{m_min+k}, Horner in x for m >= 0 and in 1/x for m < 0."""
    x = np.asarray(x, dtype=complex)
    m_max = m_min + len(coeffs) - 1
    out = np.zeros(x.shape, complex)
    if m_max >= 0:
        acc = np.zeros(x.shape, complex)
        for m in range(m_max, max(m_min, 0) - 1, -1):
            acc = acc * x + coeffs[m - m_min]
        if m_min > 0:
            acc = acc * x ** m_min
        out = out + acc
    if m_min < 0:
        y = 1 / x
        acc = np.zeros(x.shape, complex)
        for m in range(m_min, min(m_max, -1) + 1):
            acc = acc * y + coeffs[m - m_min]
        # acc = Σ_{m=m_min}^{top} a_m y^{top - m}, shift to y^{-m}
        top = min(m_max, -1)
        out = out + acc * y ** (-top)
    return out


def eval_series(s, xi, eta=None):
    if isinstance(s, LaurentSeries1):
        if eta is not None:
            raise TypeError("one-variable series takes a single point")
        r = _horner1(s.coeffs, s.m_min, xi)
        return complex(r) if np.ndim(r) == 0 else r
    if isinstance(s, LaurentSeries2):
        if eta is None:
            raise TypeError("two-variable series needs (xi, eta)")
        xi, eta = np.broadcast_arrays(np.asarray(xi, complex), np.asarray(eta, complex))
        rows = np.stack([_horner1(s.coeffs[i], s.m_min, xi) for i in range(s.coeffs.shape[0])], axis=-1)
        r = np.zeros(xi.shape, complex)
        # Horner over n with the row values as coefficients
        if s.n_max >= 0:
            acc = np.zeros(xi.shape, complex)
            for n in range(s.n_max, max(s.n_min, 0) - 1, -1):
                acc = acc * eta + rows[..., n - s.n_min]
            if s.n_min > 0:
                acc = acc * eta ** s.n_min
            r = r + acc
        if s.n_min < 0:
            y = 1 / eta
            top = min(s.n_max, -1)
            acc = np.zeros(xi.shape, complex)
            for n in range(s.n_min, top + 1):
                acc = acc * y + rows[..., n - s.n_min]
            r = r + acc * y ** (-top)
        return complex(r) if r.ndim == 0 else r
    raise TypeError(f"cannot evaluate {type(s).__name__}")


def _profile(s, axis: str):
    if isinstance(s, LaurentSeries1):
        return s.indices, np.abs(s.coeffs)
    if isinstance(s, LaurentSeries2):
        if axis == "n":
            return s.n_indices, np.abs(s.coeffs).max(axis=1)
        return s.m_indices, np.abs(s.coeffs).max(axis=0)
    idx, vals = s
    return np.asarray(idx), np.abs(np.asarray(vals))


def decay_rate_fit(s, axis: str = "m", min_points: int = 5) -> tuple[float | None, float | None]:
    """Least-squares slopes of log|a_k| against k on k <= 0 and k >= 0.

    A side with fewer than ``min_points`` coefficients above 1e-300 gives
    None. A two-variable series is profiled by its max over the other index.
    """
    idx, mag = _profile(s, axis)
    if not np.any(mag > TINY):
        raise DegenerateFitError("all coefficients below 1e-300")

    def fit(mask):
        keep = mask & (mag > TINY)
        if keep.sum() < min_points:
            return None
        k, y = idx[keep].astype(float), np.log(mag[keep])
        return float(np.polyfit(k, y, 1)[0])

    inner, outer = fit(idx <= 0), fit(idx >= 0)
    if inner is None and outer is None:
        raise DegenerateFitError(f"fewer than {min_points} usable coefficients on either side")
    return inner, outer


def weighted_norm(s, weight: Callable[[int, int], float] | None = None) -> float:
    """sqrt(Σ (w_{n,m} |a_{n,m}|)^2), summed by increasing |n| then |m|."""
    if isinstance(s, LaurentSeries1):
        items = [((0, int(m)), s.coeffs[k]) for k, m in enumerate(s.indices)]
    elif isinstance(s, LaurentSeries2):
        items = [
            ((int(n), int(m)), s.coeffs[i, j])
            for i, n in enumerate(s.n_indices)
            for j, m in enumerate(s.m_indices)
        ]
    else:
        raise TypeError(f"cannot take a norm of {type(s).__name__}")
    items.sort(key=lambda it: (abs(it[0][0]), abs(it[0][1]), it[0]))
    terms = []
    for (n, m), a in items:
        w = 1.0 if weight is None else weight(n, m)
        terms.append((w * abs(a)) ** 2)
    return math.sqrt(math.fsum(terms))


def series_from_function(
    f: Callable, N: int, M: int, r_xi: float = 1.0, r_eta: float = 1.0, K: int | None = None
) -> LaurentSeries2:
    """Sample f on a torus and extract the (2N+1) x (2M+1) coefficient block."""
    Ke = K or max(2 * N + 2, 16)
    Kx = K or max(2 * M + 2, 16)
    th_e = 2 * np.pi * np.arange(Ke) / Ke
    th_x = 2 * np.pi * np.arange(Kx) / Kx
    eta = r_eta * np.exp(1j * th_e)[:, None]
    xi = r_xi * np.exp(1j * th_x)[None, :]
    return coeffs2_from_torus_samples(f(xi, eta), r_xi, r_eta, N, M)


def csv_rows_1d(idx: Sequence[int], values: Sequence[complex]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["m", "re", "im"])
    for m, z in zip(idx, values):
        w.writerow([int(m), repr(float(np.real(z))), repr(float(np.imag(z)))])
    return buf.getvalue()
