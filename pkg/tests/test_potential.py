import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stokescope.potential import Potential, PotentialError, derivative, primitive


def test_eval_monomial():
    p = Potential((0, 0, 1j))
    assert p(2.0) == 4j


def test_eval_with_jump():
    p = Potential((0, 0, 1j), jumps=((0.0, 0.1),))
    assert p(0.5) == pytest.approx(0.25j + 0.1j)
    # at the jump location the left piece's value is returned
    assert p(0.0) == 0j
    assert p(-0.5) == 0.25j


def test_eval_zero_polynomial():
    p = Potential((0,))
    for x in (0.0, 1.5, -2j, 0.3 + 0.4j):
        assert p(x) == 0


def test_jumps_keyed_on_real_part():
    p = Potential((0, 0, 1j), jumps=((0.0, 0.1),))
    assert p(0.5 + 3j) == p.poly(0.5 + 3j) + 0.1j
    assert p(-0.5 + 3j) == p.poly(-0.5 + 3j)


def test_jump_validation():
    with pytest.raises(PotentialError):
        Potential((1,), jumps=((1.5, 0.1),))
    with pytest.raises(PotentialError):
        Potential((1,), jumps=((0.3, 0.1), (0.2, 0.1)))


def test_primitive_examples():
    Y = primitive(Potential((0, 0, 1j)))
    assert Y(1.0) == pytest.approx(1j / 3)
    assert Y(-1.0) == pytest.approx(-1j / 3)
    Yc = primitive(Potential((2 + 1j,)))
    assert Yc(0.5) == pytest.approx((2 + 1j) * 0.5)
    Yl = primitive(Potential((1j, 2)))
    assert Yl(1.0) == pytest.approx(1 + 1j)
    assert Y(0.0) == 0


def test_primitive_continuous_at_jumps():
    p = Potential((0, 1), jumps=((-0.4, 0.2), (0.3, -0.5)))
    Y = primitive(p)
    for b, _ in p.jumps:
        left = Y(b - 1e-12)
        right = Y(b + 1e-12)
        assert abs(left - right) < 1e-10
    assert Y(0.0) == 0


def test_derivative_examples():
    assert derivative(Potential((0, 0, 1j))).coeffs == (0j, 2j)
    assert derivative(Potential((5,))).coeffs == (0j,)
    assert derivative(Potential((0, 0, 0, 1))).coeffs == (0j, 0j, 3 + 0j)


coeff = st.complex_numbers(min_magnitude=0, max_magnitude=1e3,
                           allow_nan=False, allow_infinity=False)


@given(st.lists(coeff, min_size=1, max_size=8))
@settings(max_examples=60, deadline=None)
def test_derivative_of_primitive_is_exact(coeffs):
    p = Potential(tuple(coeffs))
    assert derivative(primitive(p)).coeffs == p.coeffs


@given(st.lists(coeff, min_size=1, max_size=6),
       st.floats(-0.9, 0.9), st.floats(-0.9, 0.9))
@settings(max_examples=40, deadline=None)
def test_eval_matches_derivative_by_finite_differences(coeffs, x, _y):
    p = Potential(tuple(coeffs))
    dp = derivative(p)
    h = 1e-6
    fd = (p.poly(x + h) - p.poly(x - h)) / (2 * h)
    scale = max(1.0, abs(dp.poly(x)))
    assert abs(fd - dp.poly(x)) <= 1e-6 * scale * (1 + p.max_abs_on_interval(-1, 1))


def test_json_roundtrip():
    p = Potential((1 + 2j, 0, 1j), jumps=((0.25, -0.3),))
    q = Potential.from_json(p.to_json())
    assert q.coeffs == p.coeffs and q.jumps == p.jumps


def test_two_sided_jump_matches_convention():
    p = Potential((0, 0, 1j)).with_two_sided_jump(0.1, 0.3)
    assert p(0.0) == pytest.approx(-0.1j)
    assert p(0.5) == pytest.approx(0.25j + 0.1j)


def test_trailing_zero_coefficients_trimmed():
    p = Potential((1, 2, 0, 0))
    assert p.degree == 1
