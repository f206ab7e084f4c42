"""Divisors λ^m μ^n - ν, the formal solve of σ*G - νG = νF, and the
one-variable correction A(ξ).

Divisors are evaluated as ν(λ^m e^{2πiφ} - 1) with φ = nq - θ2 reduced to
[-1/2, 1/2), so the m = 0 row is 2i sin(πφ) e^{iπφ}·ν and resonances come
out as exact zeros rather than cancellation noise.
"""
from __future__ import annotations

import cmath
import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ResonantObstruction
from .group import DerivedConstants
from .laurent import LaurentSeries1, LaurentSeries2, eval_series

RESONANCE_TOL = 1e-10
DROP_TOL = 1e-12


def _phase(n, c: DerivedConstants):
    """nq - θ2 reduced into [-1/2, 1/2)."""
    phi = np.mod(np.multiply(n, c.q) - c.theta2, 1.0)
    return np.where(phi >= 0.5, phi - 1.0, phi)


def _divisor(m, n, c: DerivedConstants):
    m = np.asarray(m)
    phi = _phase(n, c)
    zero_row = 2j * np.sin(np.pi * phi) * np.exp(1j * np.pi * phi)
    # modulus and phase apart so |λ^m| past the double range gives inf, not nan
    with np.errstate(over="ignore", invalid="ignore"):
        mag = np.exp(m * c.log_lam.real)
        ang = m * c.log_lam.imag + 2 * np.pi * phi + cmath.phase(c.nu)
        general = (mag * np.cos(ang) - c.nu.real) + 1j * (mag * np.sin(ang) - c.nu.imag)
    return np.where(m == 0, c.nu * zero_row, general)


def divisor_value(c: DerivedConstants, m: int, n: int) -> complex:
    """λ^m μ^n - ν."""
    return complex(_divisor(m, n, c))


@dataclass
class DivisorTable:
    constants: DerivedConstants
    N: int
    M: int
    values: np.ndarray  # values[m + M, n + N]
    resonance_tol: float = RESONANCE_TOL

    @property
    def m_indices(self) -> np.ndarray:
        return np.arange(-self.M, self.M + 1)

    @property
    def n_indices(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1)

    def __getitem__(self, mn) -> complex:
        m, n = mn
        return complex(self.values[m + self.M, n + self.N])

    @property
    def min_index(self) -> tuple[int, int]:
        k = int(np.argmin(np.abs(self.values)))  # first in lexicographic (m, n) order
        i, j = divmod(k, self.values.shape[1])
        return int(i - self.M), int(j - self.N)

    @property
    def min_abs(self) -> float:
        return float(np.abs(self.values).min())

    @property
    def resonances(self) -> list[tuple[int, int]]:
        ii, jj = np.nonzero(np.abs(self.values) < self.resonance_tol)
        return [(int(i - self.M), int(j - self.N)) for i, j in zip(ii, jj)]

    def zero_row(self) -> np.ndarray:
        return self.values[self.M]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["m", "n", "re", "im", "abs"])
        for i, m in enumerate(self.m_indices):
            for j, n in enumerate(self.n_indices):
                z = self.values[i, j]
                w.writerow([int(m), int(n), repr(float(z.real)), repr(float(z.imag)), repr(float(abs(z)))])
        return buf.getvalue()

    def as_dict(self) -> dict:
        return {
            "N": self.N,
            "M": self.M,
            "min_abs": self.min_abs,
            "min_index_mn": list(self.min_index),
            "resonances_mn": [list(r) for r in self.resonances],
            "resonance_tol": self.resonance_tol,
        }


def divisor_min_scan(c: DerivedConstants, box, resonance_tol: float = RESONANCE_TOL) -> DivisorTable:
    """Table of λ^m μ^n - ν over |n| <= N, |m| <= M; ``box`` is N or (N, M)."""
    N, M = (box, box) if isinstance(box, int) else box
    if N < 1 or M < 1:
        raise ValueError("box must be >= 1")
    m = np.arange(-M, M + 1)[:, None]
    n = np.arange(-N, N + 1)[None, :]
    vals = _divisor(m, n, c)
    return DivisorTable(c, N, M, np.asarray(vals, complex), resonance_tol)


@dataclass
class CohomSolveReport:
    G: LaurentSeries2
    skipped: list[tuple[int, int]]  # (m, n) resonant modes with negligible data
    min_divisor: float
    min_divisor_index: tuple[int, int]
    residual: float | None = None

    def as_dict(self) -> dict:
        return {
            "skipped_modes_mn": [list(s) for s in self.skipped],
            "min_divisor": self.min_divisor,
            "min_divisor_index_mn": list(self.min_divisor_index),
            "residual": self.residual,
            "G": self.G.as_dict(),
        }


def solve_cohomological(
    F: LaurentSeries2,
    c: DerivedConstants,
    resonance_tol: float = RESONANCE_TOL,
    drop_tol: float = DROP_TOL,
    check_grid: int | None = 32,
) -> CohomSolveReport:
    """G_{n,m} = ν a_{n,m} / (λ^m μ^n - ν) mode by mode."""
    n = F.n_indices[:, None]
    m = F.m_indices[None, :]
    delta = np.asarray(_divisor(m, n, c), complex)  # shape (n, m) like F
    mag = np.abs(delta)
    resonant = mag < resonance_tol
    data = np.abs(F.coeffs)
    skipped = []
    for i, j in zip(*np.nonzero(resonant)):
        mode = (int(m[0, j]), int(n[i, 0]))
        if data[i, j] >= drop_tol:
            raise ResonantObstruction(mode, data[i, j], mag[i, j], stage="solve_cohomological")
        skipped.append(mode)
    safe = np.where(resonant, 1.0, delta)
    G = np.where(resonant, 0.0, c.nu * F.coeffs / safe)
    k = int(np.argmin(mag))
    i, j = divmod(k, mag.shape[1])
    report = CohomSolveReport(
        LaurentSeries2(G, F.n_min, F.m_min),
        sorted(skipped),
        float(mag[i, j]),
        (int(m[0, j]), int(n[i, 0])),
    )
    if check_grid:
        report.residual = verify_functional_equation(report.G, F, c, torus_grid(check_grid))
    return report


def torus_grid(K: int = 32, r_xi: float = 1.0, r_eta: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Points (ξ, η) on the torus |ξ| = r_xi, |η| = r_eta, K x K, offset off the axes."""
    th = 2 * np.pi * (np.arange(K) + 0.37) / K
    xi = r_xi * np.exp(1j * th)[None, :]
    eta = r_eta * np.exp(1j * th)[:, None]
    return np.broadcast_arrays(xi, eta)


def verify_functional_equation(G: LaurentSeries2, F: LaurentSeries2, c: DerivedConstants, grid) -> float:
    """sup over the grid of |G(λξ, μη) - νG(ξ, η) - νF(ξ, η)|."""
    xi, eta = grid
    lhs = eval_series(G, c.lam * xi, c.mu * eta)
    res = lhs - c.nu * eval_series(G, xi, eta) - c.nu * eval_series(F, xi, eta)
    return float(np.abs(res).max(initial=0.0))


def a_divisor(c: DerivedConstants, m):
    """λ^m ν^{-1} - 1."""
    m = np.asarray(m)
    th = math.remainder(c.theta2, 1.0)
    zero = -2j * np.sin(np.pi * th) * np.exp(-1j * np.pi * th)
    general = np.exp(m * c.log_lam - 2j * np.pi * th) - 1.0
    return np.where(m == 0, zero, general)


def correction_A(
    a0: LaurentSeries1,
    c: DerivedConstants,
    resonance_tol: float = RESONANCE_TOL,
    drop_tol: float = DROP_TOL,
) -> LaurentSeries1:
    """A_m = a_{0,m} / (λ^m ν^{-1} - 1), so that ν^{-1}A(λξ) - A(ξ) = a0(ξ)."""
    m = a0.indices
    den = np.asarray(a_divisor(c, m), complex)
    mag = np.abs(den)
    bad = mag < resonance_tol
    for k in np.nonzero(bad)[0]:
        if abs(a0.coeffs[k]) >= drop_tol:
            raise ResonantObstruction((int(m[k]), 0), abs(a0.coeffs[k]), mag[k], stage="correction_A")
    A = np.where(bad, 0.0, a0.coeffs / np.where(bad, 1.0, den))
    return LaurentSeries1(A, a0.m_min, a0.radius)


@dataclass
class ConvergenceVerdict:
    certified: bool
    annulus: tuple[float, float] | None  # (inner radius, outer radius)
    reason: str
    divisor_growth: float = 0.0
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "certified": self.certified,
            "annulus": None if self.annulus is None else list(self.annulus),
            "reason": self.reason,
            "divisor_growth": self.divisor_growth,
            **self.details,
        }


def divisor_growth(table: DivisorTable) -> float:
    """Exponential growth rate of 1/|λ^0 μ^n - ν| along the m = 0 row.

    max of -log|δ_{0,n}| / |n| over the outer half N/2 <= |n| <= N, clipped
    at 0: constants at small |n| do not affect radii of convergence. Infinite
    when the row contains an exact zero anywhere.
    """
    row = np.abs(table.zero_row())
    ns = table.n_indices
    if np.any(row[ns != 0] == 0):
        return math.inf
    keep = np.abs(ns) >= max(1, table.N // 2)
    rates = -np.log(row[keep]) / np.abs(ns[keep])
    return max(0.0, float(rates.max()))


def _annulus(inner_slope, outer_slope, growth: float) -> tuple[float, float]:
    # coefficients ~ e^{s k}: k >= 0 converges for |z| < e^{-s}, k <= 0 for |z| > e^{-s}
    r_out = math.inf if outer_slope is None else math.exp(-(outer_slope + growth))
    r_in = 0.0 if inner_slope is None else math.exp(-(inner_slope - growth))
    return r_in, r_out


def convergence_certificate(F_decay, table: DivisorTable) -> ConvergenceVerdict:
    """Does the η-decay of F beat the small-divisor growth of the m = 0 row?

    ``F_decay`` is the (inner, outer) slope pair from ``decay_rate_fit`` along
    n, or None for the zero series. The annulus is in |η| and extrapolates the
    truncation; it is evidence, not a proof.
    """
    if F_decay is None:
        return ConvergenceVerdict(True, (0.0, math.inf), "zero series")
    g = divisor_growth(table)
    if math.isinf(g):
        return ConvergenceVerdict(False, None, "resonant divisor on the m=0 row", g)
    inner, outer = F_decay
    r_in, r_out = _annulus(inner, outer, g)
    if not (outer is None or outer + g < 0) or not (inner is None or inner - g > 0) or not r_in < r_out:
        return ConvergenceVerdict(
            False, None, "small divisors beat decay", g, {"inner_slope": inner, "outer_slope": outer}
        )
    return ConvergenceVerdict(
        True, (r_in, r_out), "decay beats divisor growth", g, {"inner_slope": inner, "outer_slope": outer}
    )


def a_series_certificate(a0_decay, c: DerivedConstants) -> ConvergenceVerdict:
    """A_m = a_{0,m}/(λ^m ν^{-1} - 1) with |divisor| >= 1 - |λ| (m >= 1) and
    >= |λ|^{-|m|} - 1 (m <= -1): A converges wherever a0 does (in |ξ|)."""
    if a0_decay is None:
        return ConvergenceVerdict(True, (0.0, math.inf), "zero series")
    if abs(cmath.exp(-2j * math.pi * c.theta2) - 1) == 0:
        return ConvergenceVerdict(False, None, "nu = 1: the m=0 divisor vanishes")
    inner, outer = a0_decay
    r_in, r_out = _annulus(inner, outer, 0.0)
    if r_in < r_out and (outer is None or outer < 0) and (inner is None or inner > 0):
        return ConvergenceVerdict(True, (r_in, r_out), "divisors bounded below", 0.0)
    return ConvergenceVerdict(False, None, "a0 itself does not decay")
