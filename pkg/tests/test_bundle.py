import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from toroidal_lab.bundle import (
    Character,
    char_tensor,
    h0_flat_elliptic,
    h0_spectrum,
    is_trivial_flat,
    neighborhood_vanishing_certificate,
    neighborhood_vanishing_check,
    thm_assumption_check,
    twist_character,
)
from toroidal_lab.group import GroupParams
from toroidal_lab.reals import QuadraticSurd

F = Fraction
SQRT2 = QuadraticSurd.sqrt(2)


def ch(a, b):
    return Character(a, b)


def test_tensor_examples():
    x = ch(F(2, 7), F(5, 9))
    assert char_tensor(ch(0, 0), x) == x
    assert char_tensor(ch(F(1, 2), F(1, 3)), ch(F(1, 2), F(2, 3))) == ch(0, 0)
    assert char_tensor(ch(F(3, 10), F(9, 10)), ch(F(8, 10), F(2, 10))) == ch(F(1, 10), F(1, 10))


def test_phases_reduce_into_unit_interval():
    c = ch(F(-1, 3), F(7, 2))
    assert c.phase1 == F(2, 3) and c.phase2 == F(1, 2)


def test_tensor_rejects_foreign_objects():
    with pytest.raises(TypeError):
        char_tensor(ch(0, 0), (0, 0))


def test_twist_examples():
    E = ch(0, F(1, 3))
    assert twist_character(ch(0, SQRT2), E, 0) == E
    assert twist_character(ch(0, F(1, 3)), ch(0, F(1, 3)), 2) == ch(0, 0)
    got = twist_character(ch(0, SQRT2), E, 1)
    assert got.phase2 == (SQRT2 + F(1, 3)) - 1


def test_triviality_flags():
    assert is_trivial_flat(ch(0, 0)).trivial and is_trivial_flat(ch(0, 0)).flag == "exact"
    assert not is_trivial_flat(ch(F(1, 2), 0))
    t = is_trivial_flat(ch(1e-15, 0.0))
    assert t.trivial and t.flag == "numerical"


def test_h0_flat():
    assert h0_flat_elliptic(ch(0, 0)) == 1
    assert h0_flat_elliptic(ch(F(1, 2), 0)) == 0
    assert h0_flat_elliptic(ch(0, F(1, 3))) == 0


def test_assumption_examples():
    p = GroupParams(1j, 0, SQRT2)
    r = thm_assumption_check(p, 0, F(1, 3))
    assert r.passed and r.mode == "exact"
    r = thm_assumption_check(p, 0, SQRT2)
    assert not r.passed and r.witness == -1


def test_assumption_rational_by_residues():
    params = GroupParams(1j, F(1, 2), F(1, 3))
    r = thm_assumption_check(params, F(1, 4), 0)
    brute = any((F(1, 4) + n * F(1, 2)).denominator == 1 and (n * F(1, 3)).denominator == 1 for n in range(6))
    assert r.passed == (not brute) and r.mode == "exact"


def test_assumption_scanned_for_floats():
    r = thm_assumption_check(GroupParams(1j, 0, 0.25), 0, 0.5, n_box=10)
    assert r.mode == "scanned" and not r.passed and r.witness == 2


def test_h0_spectrum_examples():
    assert h0_spectrum(ch(0, F(1, 2)), ch(0, F(1, 4)), (-4, 4)).total == 0
    dims = h0_spectrum(ch(0, F(1, 2)), ch(0, 0), (-4, 4)).dims()
    assert [n for n, d in dims.items() if d] == [-4, -2, 0, 2, 4]
    assert h0_spectrum(ch(0, 0), ch(0, 0), (-3, 3)).total == 7


def test_neighborhood_examples():
    assert neighborhood_vanishing_check(ch(0, F(1, 3)), ch(0, F(1, 2)), 10)
    assert not neighborhood_vanishing_check(ch(0, F(1, 2)), ch(0, F(1, 2)), 10)
    assert not neighborhood_vanishing_check(ch(0, 0), ch(F(1, 5), SQRT2), 0)


def test_neighborhood_certificate_names_first_failure():
    holds, first = neighborhood_vanishing_certificate(ch(0, F(1, 2)), ch(0, F(1, 2)))
    assert not holds and first == 1
    holds, first = neighborhood_vanishing_certificate(ch(0, F(1, 3)), ch(0, SQRT2))
    assert holds and first is None


fracs = st.fractions(min_value=-3, max_value=3, max_denominator=12)


@given(fracs, fracs, fracs, fracs, fracs, fracs)
def test_tensor_group_laws(a, b, c, d, e, f):
    x, y, z = ch(a, b), ch(c, d), ch(e, f)
    assert char_tensor(x, y) == char_tensor(y, x)
    assert char_tensor(char_tensor(x, y), z) == char_tensor(x, char_tensor(y, z))


@given(fracs, fracs, fracs, fracs, st.integers(-20, 20))
def test_twist_is_repeated_tensor(a, b, c, d, n):
    F_, E = ch(a, b), ch(c, d)
    acc = E
    step = F_ if n >= 0 else ch(-a, -b)
    for _ in range(abs(n)):
        acc = char_tensor(acc, step)
    assert twist_character(F_, E, n) == acc
    assert h0_flat_elliptic(acc) == int(is_trivial_flat(acc).trivial)


@given(fracs, fracs, fracs, fracs)
def test_h0_vanishes_when_assumption_holds(p, q, t1, t2):
    r = thm_assumption_check(GroupParams(1j, p, q), t1, t2)
    L = math.lcm(p.denominator, q.denominator)
    total = h0_spectrum(ch(p, q), ch(t1, t2), (-L, L)).total
    assert (total == 0) == r.passed
