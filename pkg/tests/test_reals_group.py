import cmath
import math
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from toroidal_lab.errors import ConfigError, DomainError
from toroidal_lab.group import (
    CoverPoint,
    GroupParams,
    derive_constants,
    normalize_lattice,
    reduce_to_fundamental,
    sigma_apply,
)
from toroidal_lab.reals import DecimalApprox, LiouvilleSum, QuadraticSurd, format_real, parse_real


@pytest.mark.parametrize("token", ["0", "1/3", "-2/7", "0.125", "sqrt(2)", "golden", "liouville(3,10)", "~0.333"])
def test_real_tokens_round_trip(token):
    x = parse_real(token)
    assert parse_real(format_real(x)) == x


def test_token_types():
    assert parse_real("0.125") == Fraction(1, 8)
    assert isinstance(parse_real("sqrt(2)"), QuadraticSurd)
    assert isinstance(parse_real("liouville(2,10)"), LiouvilleSum)
    assert isinstance(parse_real("~0.1"), DecimalApprox)


@pytest.mark.parametrize("token", ["", "abc", "sqrt(x)", "1/0"])
def test_bad_tokens(token):
    with pytest.raises((ConfigError, ValueError, ZeroDivisionError)):
        parse_real(token)


def test_surd_arithmetic_exact():
    g = QuadraticSurd.golden()
    assert g * g == g + 1


def test_constants_half_integer_case():
    c = derive_constants(GroupParams(1j, 0, Fraction(1, 2)), Fraction(1, 2))
    assert abs(c.lam - 0.0018674427317079893) < 1e-15
    assert abs(c.lam.imag) < 1e-18
    assert abs(c.mu + 1) < 1e-15 and abs(c.nu + 1) < 1e-15


def test_constants_integer_phases():
    c = derive_constants(GroupParams(1j, 0, 0), 0)
    assert c.mu == 1 and c.nu == 1


def test_constants_two_i_quarter():
    c = derive_constants(GroupParams(2j, 0, Fraction(1, 4)))
    assert abs(abs(c.lam) - math.exp(-4 * math.pi)) < 1e-12 * math.exp(-4 * math.pi)
    assert abs(c.mu - 1j) < 1e-15


def test_lower_half_plane_rejected():
    with pytest.raises(DomainError):
        GroupParams(-1j, 0, 0)


def test_precision_floor():
    with pytest.raises((DomainError, ValueError)):
        GroupParams(1j, 0, 0, precision_bits=30)


@pytest.mark.parametrize(
    "tau,p,q,t",
    [(1j, 2, 3, 3 - 2j), (1j, 0, 0.7, 0.7), (1 + 1j, 1, 0, -1 - 1j)],
)
def test_normalize_lattice(tau, p, q, t):
    lat = normalize_lattice(GroupParams(tau, p, q))
    assert lat.s == tau and abs(lat.t - t) < 1e-15


C_I = derive_constants(GroupParams(1j, 0, QuadraticSurd.sqrt(2)), Fraction(1, 3))


def test_sigma_identity_and_one_step():
    pt = CoverPoint.from_cartesian(1, 1)
    assert sigma_apply(pt, 0, C_I).agrees_with(pt)
    one = sigma_apply(pt, 1, C_I)
    assert abs(one.xi - math.exp(-2 * math.pi)) < 1e-15
    assert abs(one.eta - C_I.mu) < 1e-12


def test_sigma_large_index_does_not_underflow():
    pt = CoverPoint.from_cartesian(1, 1)
    far = sigma_apply(pt, 500, C_I)
    assert far.u == pytest.approx(-1000 * math.pi)
    assert sigma_apply(far, -500, C_I).agrees_with(pt)


def test_reduce_examples():
    pt = CoverPoint.from_cartesian(cmath.exp(-0.5), 1)
    rep, n = reduce_to_fundamental(pt, C_I)
    assert n == 0 and rep.agrees_with(pt)
    rep, n = reduce_to_fundamental(CoverPoint(-3 * math.pi, 0.2, 0.0, 0.0), C_I)
    assert n == 1 and rep.u == pytest.approx(-math.pi)
    rep, n = reduce_to_fundamental(CoverPoint(-4 * math.pi, 0.0, 0.0, 0.0), C_I)
    assert n == 2  # |ξ| = |λ|² sits on the closed side of D_2


@settings(max_examples=60, deadline=None)
@given(
    u=st.floats(-40, 40),
    a=st.floats(0, 6.28),
    v=st.floats(-3, 3),
    n=st.integers(-64, 64),
    k=st.integers(-64, 64),
)
def test_deck_index_shifts_exactly(u, a, v, n, k):
    # within rounding distance of a slab wall the side is not decidable in doubles
    t = u / C_I.log_abs_lam
    assume(abs(t - round(t)) > 1e-9)
    pt = CoverPoint(u, a, v, 0.3)
    _, n0 = reduce_to_fundamental(pt, C_I)
    moved = sigma_apply(pt, n, C_I)
    rep, idx = reduce_to_fundamental(moved, C_I)
    assert idx == n0 + n
    L = C_I.log_abs_lam
    assert (idx + 1) * L < rep.u + idx * L + 1e-9 and rep.u + idx * L <= idx * L + 1e-9
    assert sigma_apply(rep, idx, C_I).agrees_with(moved, 1e-8)
    assert sigma_apply(sigma_apply(pt, n, C_I), k, C_I).agrees_with(sigma_apply(pt, n + k, C_I), 1e-8)


@pytest.mark.parametrize("k", [-7, -1, 0, 1, 3, 64])
def test_points_on_slab_walls(k):
    pt = CoverPoint(k * C_I.log_abs_lam, 0.0, 0.0, 0.0)
    rep, n = reduce_to_fundamental(pt, C_I)
    assert n == k and rep.u == 0.0
