"""The acceptance suite: eleven checks, each returning pass/fail with evidence.

``run_suite`` drives them for the ``verify`` command and the test module.
"""
from __future__ import annotations

import cmath
import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .bundle import Character, h0_spectrum, neighborhood_vanishing_check, thm_assumption_check
from .diophantine import (
    distance_sequence,
    exp_bound_scan,
    make_super_liouville,
    norm_equiv_constants,
    toroidal_test,
)
from .group import GroupParams, derive_constants
from .harness.chain import correction_chain
from .harness.forms import Recipe, TorusGrid, build_test_form, bump
from .harness.geometry import curvature_fd, frame_norms, geometry_eval
from .harness.integrals import Quadrature, slab_sum_integrals, wedge_integrals
from .harness.pipeline import run_pipeline
from .harness.solve import solve_dbar_modes
from .laurent import LaurentSeries1, LaurentSeries2, eval_series
from .reals import QuadraticSurd
from .small_divisor import correction_A, divisor_min_scan, solve_cohomological, torus_grid, verify_functional_equation

SQRT2 = QuadraticSurd.sqrt(2)
THIRD = Fraction(1, 3)


@dataclass
class CriterionResult:
    id: int
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} [{self.id:2d}] {self.name} ({self.seconds:.2f}s)"

    def as_dict(self) -> dict:
        # wall time stays out of reports so they are reproducible byte for byte
        return {"id": self.id, "name": self.name, "passed": self.passed, "details": self.details}


@dataclass
class SuiteOptions:
    seed: int = 0
    quad_tol: float = 1e-8
    precision_bits: int = 128


def _rng(opts: SuiteOptions, salt: int) -> np.random.Generator:
    return np.random.default_rng([opts.seed, salt])


# -- 1, 2: geometry ----------------------------------------------------------------


def metric_identities(opts: SuiteOptions) -> dict:
    rng = _rng(opts, 1)
    n = 10_000
    xi = np.exp(rng.uniform(-3, 3, n) + 1j * rng.uniform(0, 2 * np.pi, n))
    eta = np.exp(rng.uniform(-3, 3, n) + 1j * rng.uniform(0, 2 * np.pi, n))
    one, two = frame_norms(xi, eta)
    _, at_unit = frame_norms(xi, np.exp(1j * rng.uniform(0, 2 * np.pi, n)))
    err_one = float(np.abs(one - 1).max())
    excess = float((two - 0.5).max())
    err_eq = float(np.abs(at_unit - 0.5).max())
    return {
        "passed": err_one < 1e-14 and excess <= 1e-12 and err_eq < 1e-12,
        "points": n, "dxi_err": err_one, "deta_excess": excess, "deta_unit_err": err_eq,
    }


def curvature_consistency(opts: SuiteOptions) -> dict:
    rng = _rng(opts, 2)
    u = rng.uniform(-2, 2, 1000)
    v = rng.uniform(-2, 2, 1000)
    g = geometry_eval(np.exp(u), np.exp(v))
    fd_xi, fd_eta = curvature_fd(u, v, 1e-4)
    rel = max(float(np.max(np.abs(fd_xi - g.curvature[0]) / g.curvature[0])),
              float(np.max(np.abs(fd_eta - g.curvature[1]) / g.curvature[1])))
    positive = bool(np.all(g.curvature[0] > 0) and np.all(g.curvature[1] > 0))
    return {"passed": rel < 1e-6 and positive, "points": 1000, "max_rel_err": rel, "positive": positive}


# -- 3, 4: weighted estimates -------------------------------------------------------


def _estimate_fixtures():
    base = GroupParams(1j, 0, SQRT2)
    return [
        ("exact tau=i", base, Recipe("exact")),
        ("zero tau=i", base, Recipe("zero")),
        ("exact tau=1+i", GroupParams(1 + 1j, 0, SQRT2), Recipe("exact", {0: 0.5, -1: 1.0}, c1=0.3, c2=-0.4)),
        ("exact tau=2i", GroupParams(2j, 0, SQRT2), Recipe("exact", {0: 1.0, 1: -0.5j})),
    ]


_FINE = Quadrature(y_nodes=96, v_nodes=96, v_panels=6, x_points=96, beta_points=8)


def slab_sum_check(opts: SuiteOptions) -> dict:
    rows, ok = [], True
    for name, params, recipe in _estimate_fixtures():
        f = build_test_form(params, 0, THIRD, recipe)
        r = slab_sum_integrals(f)
        fine = slab_sum_integrals(f, quad=_FINE)
        drift = abs(fine.total - r.total) / r.total if r.total else 0.0
        row = {"fixture": name, "total": r.total, "bound": r.bound, "slack": r.slack, "quad_drift": drift,
               "log10_tail_ratio": r.log10_tail_ratio}
        good = r.holds and drift <= opts.quad_tol
        if params.tau == 1j and r.total > 0:
            good = good and r.log10_tail_ratio < -60
        row["passed"] = good
        ok = ok and good
        rows.append(row)
    return {"passed": ok, "fixtures": rows, "quad_tol": opts.quad_tol}


def wedge_check(opts: SuiteOptions) -> dict:
    rows, ok = [], True
    for name, params, recipe in _estimate_fixtures():
        f = build_test_form(params, 0, THIRD, recipe)
        r = wedge_integrals(f)
        rows.append({"fixture": name, **r.as_dict()})
        ok = ok and r.holds(1e-10)
    return {"passed": ok, "fixtures": rows}


# -- 5, 6: small divisors -----------------------------------------------------------


def cohomological_check(opts: SuiteOptions) -> dict:
    rng = _rng(opts, 5)
    c = derive_constants(GroupParams(1j, 0, SQRT2), THIRD)
    grid = torus_grid(32)
    worst = 0.0
    for _ in range(100):
        coeffs = rng.normal(size=(21, 21)) + 1j * rng.normal(size=(21, 21))
        F = LaurentSeries2(coeffs, -10, -10)
        rep = solve_cohomological(F, c, check_grid=None)
        res = verify_functional_equation(rep.G, F, c, grid)
        fsup = float(np.abs(eval_series(F, *grid)).max())
        worst = max(worst, res / fsup)
    half = derive_constants(GroupParams(1j, 0, SQRT2), Fraction(1, 2))  # ν = -1
    G00 = solve_cohomological(LaurentSeries2(np.ones((1, 1), complex), 0, 0), half, check_grid=None).G.coeffs[0, 0]
    A0 = correction_A(LaurentSeries1(np.ones(1, complex), 0), half).coeffs[0]
    hand = max(abs(G00 + 0.5), abs(A0 + 0.5))
    return {"passed": worst < 1e-11 and hand < 1e-14, "fixtures": 100, "worst_rel_residual": worst,
            "G00": G00, "A0": A0, "hand_err": hand}


def divisor_structure(opts: SuiteOptions) -> dict:
    c = derive_constants(GroupParams(1j, 0, SQRT2), THIRD)
    N, M = 50, 8
    t = divisor_min_scan(c, (N, M))
    lam = abs(c.lam)
    floor = np.abs(np.abs(lam) ** t.m_indices.astype(float) - 1)[:, None]
    lower_ok = bool(np.all(np.abs(t.values) >= floor * (1 - 1e-10) - 1e-10))
    off_row = [r for r in t.resonances if r[0] != 0]
    row = np.abs(t.zero_row())
    ns = t.n_indices
    q, th = float(SQRT2), 1 / 3
    sin_err = float(np.abs(row - 2 * np.abs(np.sin(np.pi * (ns * q - th)))).max())
    d = distance_sequence("fiber", 0, SQRT2, THIRD, precision=opts.precision_bits, indices=list(ns))
    dn = d.as_float_array()
    bracket = bool(np.all(4 * dn <= row + 1e-10) and np.all(row <= 2 * np.pi * dn + 1e-10))
    ok = lower_ok and not off_row and sin_err < 1e-10 and bracket
    return {"passed": ok, "box_NM": [N, M], "lower_bound_ok": lower_ok, "off_row_resonances": off_row,
            "sin_row_err": sin_err, "bracket_ok": bracket}


# -- 7, 8: the ∂̄ pipeline ------------------------------------------------------------


def dbar_round_trip(opts: SuiteOptions) -> dict:
    rep = run_pipeline(GroupParams(1j, 0, SQRT2), 0, THIRD, Recipe("exact"), TorusGrid(64, 64),
                       trunc=32, tol=1e-6, study=(8, 16, 32))
    res = rep.residuals
    study = rep.truncation["residuals"]
    ok = (res["dbar"] < 1e-6 and res["equivariance"] < 1e-8 and res["support_decay"] < 1e-6
          and study[-1] < study[0] / 10)
    return {"passed": ok, "residuals": res, "truncation": rep.truncation, "round_trip_sup": rep.round_trip}


def _defect_eta1(X, Y, V, B):
    return 1e-3 * bump(V, 2.0) * np.exp(V + 1j * B)


def _defect_nonholo(X, Y, V, B):
    return 1e-3 * np.cos(2 * np.pi * X) + 0 * V


def correction_chain_check(opts: SuiteOptions) -> dict:
    params = GroupParams(1j, 0, SQRT2)
    f = build_test_form(params, 0, THIRD, Recipe("exact"))
    g = solve_dbar_modes(f, 32).g
    clean = correction_chain(g, tol=1e-8)
    flagged = {}
    for name, fn in (("eta1", _defect_eta1), ("non_holomorphic", _defect_nonholo)):
        flagged[name] = correction_chain(g.with_extra(fn), tol=1e-8).flagged
    ok = clean.constancy_violation < 1e-8 and not clean.flagged and all(flagged.values())
    return {"passed": ok, "clean_constancy": clean.constancy_violation,
            "clean_holomorphy": clean.holomorphy_residual, "defects_flagged": flagged}


# -- 9: classification ----------------------------------------------------------------


def classification_fixtures(opts: SuiteOptions) -> dict:
    bits = opts.precision_bits
    golden = exp_bound_scan(distance_sequence("fiber", 0, QuadraticSurd.golden(), 0, 10_000, bits))
    golden_ok = golden.verdict == "theta-evidence" and golden.r is not None and golden.r >= -0.01
    sl = make_super_liouville(3, 10)
    wild = exp_bound_scan(distance_sequence("fiber", 0, sl.value, 0, precision=bits, indices=sl.certified_indices),
                          window_start=1)
    wild_ok = wild.verdict == "wild-witness" and wild.witness_n in sl.certified_indices
    rat = toroidal_test(Fraction(1, 3), Fraction(2, 5))
    rat_ok = not rat.toroidal
    return {
        "passed": golden_ok and wild_ok and rat_ok,
        "golden": {"verdict": golden.verdict, "r": golden.r, "r_min": golden.r_min, "r_bound": -0.01, "passed": golden_ok},
        "super_liouville": {"verdict": wild.verdict, "witness_n": wild.witness_n,
                            "certified": sl.certified_indices, "passed": wild_ok},
        "rational": {"toroidal": rat.toroidal, "reason": rat.reason, "passed": rat_ok},
    }


# -- 10: bundle logic ------------------------------------------------------------------


def _rand_frac(rng: random.Random) -> Fraction:
    d = rng.randint(1, 12)
    return Fraction(rng.randint(0, d - 1), d)


def _oracle_fails(p, q, t1, t2) -> bool:
    period = math.lcm(p.denominator, q.denominator)
    return any((t1 + n * p).denominator == 1 and (t2 + n * q).denominator == 1 for n in range(period))


def bundle_logic(opts: SuiteOptions) -> dict:
    rng = random.Random(opts.seed * 1_000_003 + 10)
    passing, failing, mismatches = 0, 0, []
    while passing < 50 or failing < 50:
        p, q = _rand_frac(rng), _rand_frac(rng)
        if failing < 50 and rng.random() < 0.5:
            n0 = rng.randint(-20, 20)
            t1, t2 = -n0 * p + rng.randint(-2, 2), -n0 * q + rng.randint(-2, 2)
        else:
            t1, t2 = _rand_frac(rng), _rand_frac(rng)
        report = thm_assumption_check(GroupParams(1j, p, q), t1, t2)
        oracle_fail = _oracle_fails(p, q, t1, t2)
        if report.passed == oracle_fail:
            mismatches.append(("assumption", str(p), str(q), str(t1), str(t2)))
        L = math.lcm(p.denominator, q.denominator)
        total = h0_spectrum(Character(p, q), Character(t1, t2), (-L, L)).total
        if report.passed and passing < 50:
            passing += 1
            if total != 0:
                mismatches.append(("h0>0 on passing", str(p), str(q), str(t1), str(t2)))
        elif not report.passed and failing < 50:
            failing += 1
            if total == 0:
                mismatches.append(("h0=0 on failing", str(p), str(q), str(t1), str(t2)))
    nb_mismatch = 0
    for _ in range(200):
        E = Character(_rand_frac(rng), _rand_frac(rng))
        N = Character(_rand_frac(rng), _rand_frac(rng))
        n_max = rng.randint(0, 50)
        brute = all(
            abs(cmath.exp(2j * math.pi * float(E.phase1 - n * N.phase1)) - 1) > 1e-9
            or abs(cmath.exp(2j * math.pi * float(E.phase2 - n * N.phase2)) - 1) > 1e-9
            for n in range(n_max + 1)
        )
        nb_mismatch += brute != neighborhood_vanishing_check(E, N, n_max)
    return {"passed": not mismatches and nb_mismatch == 0, "passing": passing, "failing": failing,
            "mismatches": mismatches[:10], "neighborhood_cases": 200, "neighborhood_mismatches": nb_mismatch}


# -- 11: norm equivalence ------------------------------------------------------------------


def norm_equivalence(opts: SuiteOptions) -> dict:
    lo, hi = norm_equiv_constants(1j)
    ident = max(abs(lo - 1), abs(hi - 1))
    rng = _rng(opts, 11)
    worst = 0.0
    for tau in (1j, 2j, 1 + 1j):
        k_lo, k_hi = norm_equiv_constants(tau)
        uv = rng.integers(-10**6, 10**6, size=(100_000, 2)).astype(float)
        nrm = np.hypot(uv[:, 0], uv[:, 1])
        val = np.abs(tau * uv[:, 0] + uv[:, 1])
        keep = nrm > 0
        viol = np.maximum(k_lo * nrm - val, val - k_hi * nrm)[keep] / nrm[keep]
        worst = max(worst, float(viol.max()))
    return {"passed": ident < 1e-12 and worst <= 1e-12, "tau_i_constants": [lo, hi], "sandwich_violation": worst}


CRITERIA: dict[int, tuple[str, Callable[[SuiteOptions], dict]]] = {
    1: ("metric identities", metric_identities),
    2: ("curvature consistency", curvature_consistency),
    3: ("slab sum below the geometric bound", slab_sum_check),
    4: ("wedge norm at most half the norm", wedge_check),
    5: ("cohomological solver", cohomological_check),
    6: ("divisor structure", divisor_structure),
    7: ("dbar round trip", dbar_round_trip),
    8: ("correction chain", correction_chain_check),
    9: ("classification fixtures", classification_fixtures),
    10: ("bundle logic", bundle_logic),
    11: ("norm-equivalence constants", norm_equivalence),
}


def run_criterion(cid: int, opts: SuiteOptions | None = None) -> CriterionResult:
    opts = opts or SuiteOptions()
    name, fn = CRITERIA[cid]
    t0 = time.perf_counter()
    details = fn(opts)
    passed = bool(details.pop("passed"))
    return CriterionResult(cid, name, passed, details, time.perf_counter() - t0)


def parse_selection(text: str) -> list[int]:
    """"all", "" (nothing) or a comma list of criterion ids."""
    text = text.strip()
    if text == "all":
        return sorted(CRITERIA)
    if not text or text == "none":
        return []
    ids = []
    for tok in text.split(","):
        cid = int(tok)
        if cid not in CRITERIA:
            raise ValueError(f"no criterion {cid}")
        ids.append(cid)
    return sorted(set(ids))


@dataclass
class SuiteReport:
    results: list[CriterionResult]

    @property
    def vacuous(self) -> bool:
        return not self.results

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def as_dict(self) -> dict:
        return {"criteria": [r.as_dict() for r in self.results], "run": len(self.results),
                "failed": [r.id for r in self.results if not r.passed], "passed": self.passed,
                "vacuous": self.vacuous}


def run_suite(ids, opts: SuiteOptions | None = None) -> SuiteReport:
    return SuiteReport([run_criterion(i, opts) for i in ids])
