import math
from fractions import Fraction

import numpy as np
import pytest

from toroidal_lab.errors import AliasingError, ClosednessError, DomainError, RecipeError, ResonantObstruction
from toroidal_lab.group import GroupParams
from toroidal_lab.harness.chain import correction_chain, support_decay_report
from toroidal_lab.harness.forms import (
    Form01,
    Recipe,
    TorusGrid,
    build_test_form,
    bump,
    closedness_residual,
    form_equivariance_residual,
)
from toroidal_lab.harness.geometry import (
    curvature_fd,
    form_norm,
    frame_norms,
    geometry_eval,
    psi,
    volume_from_omega,
    wedge_norm,
    log_frame_norm,
)
from toroidal_lab.harness.integrals import Quadrature, slab_sum_integrals, wedge_integrals
from toroidal_lab.harness.pipeline import run_pipeline
from toroidal_lab.harness.solve import solve_dbar_modes, truncation_convergence_study
from toroidal_lab.reals import QuadraticSurd

SQRT2 = QuadraticSurd.sqrt(2)
P = GroupParams(1j, 0, SQRT2)
GRID = TorusGrid(32, 32, 4, 128)
QUICK = Quadrature(32, 32, 4, 32, 8)


# -- geometry ---------------------------------------------------------------


def test_geometry_at_one():
    g = geometry_eval(1.0, 1.0)
    assert g.psi == pytest.approx(math.log(2))
    assert (g.g_xixi, g.g_etaeta) == (1.0, 2.0)
    assert g.vol_density == 8.0


def test_psi_on_shell():
    assert psi(math.e, 1.0) == pytest.approx(4 + math.log(2))


def test_zero_rejected():
    with pytest.raises(DomainError):
        geometry_eval(0.0, 1.0)


@pytest.mark.parametrize("xi,eta", [(1.0, 1.0), (0.3 + 2j, 0.5), (5.0, 1j * 3)])
def test_volume_density_matches_omega(xi, eta):
    g = geometry_eval(xi, eta)
    assert volume_from_omega(float(g.g_xixi), float(g.g_etaeta)) == pytest.approx(float(g.vol_density), rel=1e-12)


def test_frame_norms():
    one, two = frame_norms(2.0 + 1j, 1.0)
    assert one == pytest.approx(1.0) and two == pytest.approx(0.5)
    a, b, v = 0.3 - 1j, 2.0, 0.7
    eta = math.exp(v)
    direct = form_norm(a / np.conj(3.0), b / eta, 3.0, eta)
    assert direct == pytest.approx(log_frame_norm(a, b, v), rel=1e-13)


def test_wedge_at_most_half():
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=200) + 1j * rng.normal(size=200), rng.normal(size=200)
    v = rng.normal(size=200) * 3
    assert np.all(wedge_norm(a, b, v) <= 0.5 * log_frame_norm(a, b, v) * (1 + 1e-14))


def test_curvature_fd_against_closed_form():
    u, v = np.array([0.3, -1.2]), np.array([0.1, 1.5])
    cu, cv = curvature_fd(u, v)
    g = geometry_eval(np.exp(u), np.exp(v))
    assert np.allclose(cu, g.curvature[0], rtol=1e-7)
    assert np.allclose(cv, g.curvature[1], rtol=1e-7)


# -- forms ------------------------------------------------------------------


def test_bump_support():
    v = np.linspace(-3, 3, 61)
    b = bump(v, 2.0)
    assert b[30] == 1.0 and np.all(b[np.abs(v) >= 2] == 0)


def test_zero_form():
    f = build_test_form(P, 0, Fraction(1, 3), Recipe("zero"), GRID)
    assert f.weighted_l2() == 0 and closedness_residual(f) == 0


def test_exact_form_closed_and_equivariant():
    f = build_test_form(P, 0, Fraction(1, 3), Recipe(), GRID)
    # spectral v-derivative on 128 nodes; the default solve tolerance is 1e-6
    assert closedness_residual(f) < 1e-6
    fine = build_test_form(P, 0, Fraction(1, 3), Recipe(), TorusGrid(32, 32, 4, 192))
    assert closedness_residual(fine) < closedness_residual(f)
    assert form_equivariance_residual(f) < 1e-12
    assert f.support_flag_residual() == 0


def test_single_mode_gives_pure_eta_part():
    # θ2 = q makes φ_1 = 0, and c1 = c2 = 0 makes P constant
    f = build_test_form(GroupParams(1j, 0, Fraction(1, 4)), 0, Fraction(1, 4), Recipe(modes={1: 1.0}, c1=0, c2=0),
                        GRID)
    B, V, Y, X = GRID.mesh()
    eta = np.exp(V + 1j * B)
    from toroidal_lab.harness.forms import bump_prime
    assert np.abs(f.a).max() < 1e-15
    assert np.abs(f.b - bump_prime(V, 2.0) * eta / 2).max() < 1e-13


def test_cech_form():
    f = build_test_form(P, 0, Fraction(1, 3), Recipe("cech", modes={(1, 0): 1.0}), GRID)
    assert closedness_residual(f) < 1e-10
    assert not f.equivariant
    with pytest.raises(RecipeError):
        build_test_form(P, 0, Fraction(1, 3), Recipe("cech", modes={(0, 1): 1.0}), GRID)


def test_recipe_errors():
    with pytest.raises(RecipeError):
        Recipe("nonsense")
    with pytest.raises(RecipeError):
        Recipe(K=0)
    with pytest.raises(RecipeError):
        build_test_form(P, 0, Fraction(1, 3), Recipe(K=3.0), GRID)
    with pytest.raises(RecipeError):
        build_test_form(GroupParams(1j, Fraction(1, 2), SQRT2), 0, Fraction(1, 3), Recipe(), GRID)
    with pytest.raises(AliasingError):
        build_test_form(P, 0, Fraction(1, 3), Recipe(modes={2: 1.0}), GRID)


def test_grid_validation():
    with pytest.raises(ValueError):
        TorusGrid(30, 32, 4, 128)
    with pytest.raises(ValueError):
        TorusGrid(32, 32, 4, 127)


# -- solve and chain ----------------------------------------------------------


def test_solve_zero_form():
    f = build_test_form(P, 0, Fraction(1, 3), Recipe("zero"), GRID)
    rep = solve_dbar_modes(f, 16)
    assert rep.residual_rel == 0 and not np.any(rep.g())


def test_solve_round_trip():
    f = build_test_form(P, 0, Fraction(1, 3), Recipe(), GRID)
    rep = solve_dbar_modes(f, 24)
    assert rep.residual_rel < 1e-6
    chain = correction_chain(rep.g, f.constants)
    B, V, Y, X = GRID.mesh()
    assert np.abs(chain.g_tilde() - f.g0(X, Y, V, B)).max() < 1e-6
    assert chain.equivariance_residual < 1e-10 and not chain.flagged


def test_solve_resonant_obstruction():
    # θ2 = q puts the η^1 mode on the trivial character; the x,y-mean of its data is nonzero
    params = GroupParams(1j, 0, Fraction(1, 4))
    f = build_test_form(params, 0, Fraction(1, 4), Recipe("cech", modes={(1, 0): 1.0}), GRID)
    with pytest.raises(ResonantObstruction) as err:
        solve_dbar_modes(f, 16)
    assert err.value.mode[0] == 1


def test_non_closed_form_rejected():
    f = build_test_form(P, 0, Fraction(1, 3), Recipe(), GRID)
    broken = Form01(f.grid, f.a * 1.5, f.b, f.phis, f.K, f.constants)
    with pytest.raises(ClosednessError):
        solve_dbar_modes(broken, 16)


def test_chain_flags_non_equivariant_defect():
    f = build_test_form(P, 0, Fraction(1, 3), Recipe(), GRID)
    rep = solve_dbar_modes(f, 24)
    bad = rep.g.with_extra(lambda X, Y, V, B: 1e-3 * bump(V, 2.0) * np.exp(V + 1j * B) + 0 * X)
    assert correction_chain(bad, f.constants).flagged


def test_support_decay():
    f = build_test_form(P, 0, Fraction(1, 3), Recipe(), GRID)
    rep = solve_dbar_modes(f, 24)
    assert support_decay_report(rep.g, f.K) < 1e-8
    zero = np.zeros(GRID.shape)
    assert support_decay_report(zero, 2.0, grid=GRID) == 0
    tail = zero.copy()
    tail[:, np.abs(GRID.v) > 3.0] = 0.25
    assert support_decay_report(tail, 2.0, grid=GRID) == 0.25
    with pytest.raises(ValueError):
        support_decay_report(zero, 2.0)


def test_truncation_studies():
    smooth = truncation_convergence_study(build_test_form(P, 0, Fraction(1, 3), Recipe(), GRID), (4, 8, 16))
    assert smooth.monotone and smooth.residuals[-1] < smooth.residuals[0]
    rough = truncation_convergence_study(build_test_form(P, 0, Fraction(1, 3), Recipe("rough"), GRID), (4, 8, 16))
    assert rough.monotone
    assert rough.residuals[-1] > smooth.residuals[-1]


# -- integrals ----------------------------------------------------------------


def test_integrals_zero_form():
    f = build_test_form(P, 0, Fraction(1, 3), Recipe("zero"), GRID)
    r = slab_sum_integrals(f, quad=QUICK)
    assert r.total == 0 and r.holds
    w = wedge_integrals(f, quad=QUICK)
    assert w.ratio == 0 and w.holds()


def test_slab_sum_and_wedge_hold():
    f = build_test_form(P, 0, Fraction(1, 3), Recipe(), GRID)
    r = slab_sum_integrals(f, quad=QUICK)
    assert r.holds and r.total <= r.bound_penultimate * (1 + 1e-12)
    assert r.log10_tail_ratio < -20
    w = wedge_integrals(f, quad=QUICK)
    assert w.holds() and 0 < w.ratio <= 0.5


def test_pipeline_default_is_green():
    rep = run_pipeline(P, 0, Fraction(1, 3), Recipe(), GRID, trunc=24, quad=QUICK, study=(8, 16))
    assert rep.passed, rep.checks
    d = rep.as_dict()
    assert set(d["residuals"]) == {"dbar", "equivariance", "support_decay", "constancy", "holomorphy"}
