import math
from fractions import Fraction

import numpy as np
import pytest

from toroidal_lab.errors import ResonantObstruction
from toroidal_lab.group import GroupParams, derive_constants
from toroidal_lab.laurent import LaurentSeries1, LaurentSeries2, eval_series
from toroidal_lab.reals import QuadraticSurd
from toroidal_lab.small_divisor import (
    a_divisor,
    a_series_certificate,
    convergence_certificate,
    correction_A,
    divisor_growth,
    divisor_min_scan,
    divisor_value,
    solve_cohomological,
    torus_grid,
    verify_functional_equation,
)

SQRT2 = QuadraticSurd.sqrt(2)
C = derive_constants(GroupParams(1j, 0, SQRT2), Fraction(1, 3))


def consts(q, th, tau=1j):
    return derive_constants(GroupParams(tau, 0, q), th)


def test_divisor_examples():
    c = consts(Fraction(1, 4), Fraction(3, 4))
    assert abs(divisor_value(c, 0, 3)) < 1e-15
    assert divisor_value(consts(0, 0), 1, 0) == pytest.approx(math.exp(-2 * math.pi) - 1, abs=1e-15)
    for n in range(-20, 21):
        assert abs(divisor_value(C, 0, n)) == pytest.approx(2 * abs(math.sin(math.pi * (n * math.sqrt(2) - 1 / 3))),
                                                             abs=1e-12)


def test_divisor_large_m_never_nan():
    assert math.isfinite(abs(divisor_value(C, -100, 3)))
    assert abs(divisor_value(C, -200, 3)) == math.inf
    assert abs(divisor_value(C, 200, 3) + C.nu) < 1e-300 + 1e-15


def test_table_min_on_zero_row():
    t = divisor_min_scan(C, (16, 16))
    assert t.min_index[0] == 0
    assert t.resonances == []


def test_table_resonant_row_when_q_theta_zero():
    t = divisor_min_scan(consts(0, 0), 4)
    assert t.min_abs == 0
    assert {m for m, _ in t.resonances} == {0} and len(t.resonances) == 9


def test_table_box_one_by_hand():
    t = divisor_min_scan(C, (1, 1))
    assert t.values.shape == (3, 3)
    for m in (-1, 0, 1):
        for n in (-1, 0, 1):
            hand = C.lam**m * C.mu**n - C.nu
            assert abs(t[m, n] - hand) <= 1e-12 * max(1, abs(hand))


def test_table_bounds():
    t = divisor_min_scan(C, (30, 6))
    lam = abs(C.lam)
    for i, m in enumerate(t.m_indices):
        row = np.abs(t.values[i])
        floor = abs(lam**m - 1)
        assert np.all(row >= floor * (1 - 1e-12) - 1e-12)
    ms = np.arange(1, 7)
    assert np.all(np.abs(a_divisor(C, ms)) >= 1 - lam - 1e-15)
    assert np.all(np.abs(a_divisor(C, -ms)) >= (lam ** -ms - 1) * (1 - 1e-12))


def test_csv_and_dict():
    t = divisor_min_scan(C, (2, 1))
    lines = t.to_csv().splitlines()
    assert lines[0] == "m,n,re,im,abs" and len(lines) == 1 + 3 * 5
    assert t.as_dict()["min_index_mn"] == list(t.min_index)


def test_single_mode_hand_case():
    half = consts(0, Fraction(1, 2))
    F = LaurentSeries2(np.ones((1, 1)), 0, 0)
    rep = solve_cohomological(F, half)
    assert abs(rep.G[0, 0] + 0.5) < 1e-15
    assert rep.residual < 1e-14


def test_zero_data():
    rep = solve_cohomological(LaurentSeries2.zeros(3, 3), C)
    assert not np.any(rep.G.coeffs) and rep.residual == 0


def test_resonant_constant():
    with pytest.raises(ResonantObstruction) as err:
        solve_cohomological(LaurentSeries2(np.ones((1, 1)), 0, 0), consts(0, 0))
    assert err.value.mode == (0, 0)


def test_resonant_mode_with_negligible_data_is_skipped():
    c = consts(Fraction(1, 4), Fraction(1, 4))  # μ = ν, so (m, n) = (0, 1) is resonant
    a = np.zeros((3, 3), complex)
    a[0, 1] = 1.0  # n = -1, m = 0
    a[2, 1] = 1e-14  # n = 1, m = 0
    rep = solve_cohomological(LaurentSeries2(a, -1, -1), c)
    assert (0, 1) in rep.skipped


def test_random_fixtures_and_linearity():
    rng = np.random.default_rng(7)
    grid = torus_grid(32)
    F1 = LaurentSeries2(rng.normal(size=(21, 21)) + 1j * rng.normal(size=(21, 21)), -10, -10)
    F2 = LaurentSeries2(rng.normal(size=(21, 21)) + 0j, -10, -10)
    G1 = solve_cohomological(F1, C, check_grid=None).G
    G2 = solve_cohomological(F2, C, check_grid=None).G
    sup = np.abs(eval_series(F1, *grid)).max()
    assert verify_functional_equation(G1, F1, C, grid) < 1e-11 * sup
    Gs = solve_cohomological(LaurentSeries2(F1.coeffs + 2 * F2.coeffs, -10, -10), C, check_grid=None).G
    assert np.abs(Gs.coeffs - (G1.coeffs + 2 * G2.coeffs)).max() < 1e-12 * np.abs(Gs.coeffs).max()


def test_zero_G_residual_is_sup_F():
    F = LaurentSeries2(np.array([[0.0, 1.0, 0.5]]), 0, -1)
    grid = torus_grid(16)
    res = verify_functional_equation(LaurentSeries2.zeros(0, 1), F, C, grid)
    assert res == pytest.approx(np.abs(eval_series(F, *grid)).max(), rel=1e-14)


def test_correction_A_examples():
    half = consts(0, Fraction(1, 2))
    A = correction_A(LaurentSeries1(np.ones(1), 0), half)
    assert abs(A[0] + 0.5) < 1e-15
    assert not np.any(correction_A(LaurentSeries1(np.zeros(5), -2), C).coeffs)
    with pytest.raises(ResonantObstruction):
        correction_A(LaurentSeries1(np.ones(1), 0), consts(0, 0))


def test_correction_A_functional_equation():
    rng = np.random.default_rng(4)
    a0 = LaurentSeries1(rng.normal(size=9) * 0.5 ** np.abs(np.arange(-4, 5)), -4)
    A = correction_A(a0, C)
    z = np.exp(1j * np.linspace(0, 6, 17)) * 0.3
    lhs = eval_series(A, C.lam * z) / C.nu - eval_series(A, z)
    assert np.abs(lhs - eval_series(a0, z)).max() < 1e-10 * np.abs(eval_series(a0, z)).max()


def test_certificates():
    t = divisor_min_scan(C, (40, 2))
    assert convergence_certificate(None, t).certified
    assert convergence_certificate((1.0, -1.0), t).certified
    g = divisor_growth(t)
    assert 0 <= g < 0.2
    wild = divisor_min_scan(consts(Fraction(1, 4), Fraction(1, 4)), (40, 2))
    verdict = convergence_certificate((1.0, -1.0), wild)
    assert not verdict.certified
    assert a_series_certificate((0.5, -0.5), C).certified
    assert a_series_certificate(None, C).certified
    assert not a_series_certificate((0.5, -0.5), consts(0, 0)).certified
