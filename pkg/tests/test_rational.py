import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qfbamp.errors import ParameterError, PoleError, SignatureError, UndefinedRootsError
from qfbamp.rational import (
    Polynomial,
    Port,
    RationalFunction,
    TransferMatrix,
    cancel,
    para_conjugate,
    poly_arith,
    signature_matrix,
)

coef = st.floats(-5, 5, allow_nan=False, allow_infinity=False, allow_subnormal=False)
cplx = st.builds(complex, coef, coef)
poly_coeffs = st.lists(cplx, min_size=1, max_size=5)


def test_polynomial_trims_exact_trailing_zeros():
    p = Polynomial([1.0, 2.0, 0.0, 0.0])
    assert p.degree == 1
    assert Polynomial([0.0, 0.0]).is_zero


def test_polynomial_arithmetic_against_numpy():
    a, b = [1.0, -2.0, 3.0], [0.5, 4.0]
    s = 0.3 + 0.7j
    for op, fn in (("add", np.add), ("sub", np.subtract), ("mul", np.multiply)):
        got = poly_arith(a, b, op)(s)
        want = fn(np.polyval(a[::-1], s), np.polyval(b[::-1], s))
        assert abs(got - want) < 1e-14


def test_subtraction_cancels_exactly():
    p = Polynomial([0.1, 0.2, 0.3])
    assert (p - p).is_zero
    q = Polynomial([1.0, 3.0]) * Polynomial([1.0, 3.0])
    assert (q - Polynomial([1.0, 6.0, 9.0])).is_zero


def test_subtraction_keeps_small_leading_term_of_large_polynomial():
    p = Polynomial([-8e26, 1e13, 1.0])
    q = Polynomial([-8e26, 1e13])
    assert (p - q).degree == 2


def test_roots_of_zero_polynomial_undefined():
    with pytest.raises(UndefinedRootsError):
        Polynomial([0.0]).roots()


def test_roots_of_quadratic():
    r = np.sort_complex(Polynomial([2.0, -3.0, 1.0]).roots())
    assert np.allclose(r, [1.0, 2.0])


@settings(max_examples=60, deadline=None)
@given(poly_coeffs, st.floats(-10, 10, allow_nan=False))
def test_para_conjugate_is_conjugate_on_imaginary_axis(c, w):
    p = Polynomial(c)
    assert abs(p.para_conjugate()(1j * w) - np.conj(p(1j * w))) <= 1e-12 * (1 + abs(p(1j * w)))


@settings(max_examples=60, deadline=None)
@given(poly_coeffs, poly_coeffs, poly_coeffs, st.floats(-3, 3, allow_nan=False))
def test_rational_arithmetic_is_pointwise(a, b, c, w):
    s = 0.37 + 1j * w
    f = RationalFunction(a, [1.0, 2.0, 1.0])
    g = RationalFunction(b, Polynomial([3.0, 1.0]))
    h = RationalFunction(c, [5.0, 1.0])
    fs, gs, hs = f(s), g(s), h(s)
    scale = 1 + abs(fs) + abs(gs) + abs(hs)
    assert abs((f + g)(s) - (fs + gs)) <= 1e-10 * scale
    assert abs((f - g * h)(s) - (fs - gs * hs)) <= 1e-10 * scale ** 2
    if abs(hs) > 1e-3 and not h.is_zero:
        assert abs((f / h)(s) - fs / hs) <= 1e-9 * scale / abs(hs)


def test_identical_factors_cancel_exactly():
    d = Polynomial([2.0, 3.0, 1.0])
    f = RationalFunction([1.0], d)
    g = f * RationalFunction(d, [1.0, 5.0])
    assert g.den_degree == 1
    assert g.num_degree == 0


def test_evaluation_at_pole_raises():
    f = RationalFunction([1.0], [1.0, 1.0])
    with pytest.raises(PoleError) as info:
        f(-1.0)
    assert info.value.s == -1.0


def test_zero_denominator_rejected():
    with pytest.raises(ParameterError):
        RationalFunction([1.0], [0.0])


def test_cancel_removes_near_pair_only_when_asked():
    f = RationalFunction(Polynomial.from_roots([-1.0 + 1e-12]), Polynomial.from_roots([-1.0, -2.0]))
    assert f.den_degree == 2
    g, pairs = cancel(f, 1e-9)
    assert g.den_degree == 1 and g.num_degree == 0
    assert len(pairs) == 1
    assert abs(g(0.5j) - f(0.5j)) < 1e-10


def test_cancel_repeated_root_by_centroid():
    f = RationalFunction(Polynomial.from_roots([-1.0, -1.0, -1.0]), Polynomial.from_roots([-1.0, -1.0, -1.0, -3.0]))
    f = RationalFunction(f.num * Polynomial([1.0 + 1e-15]), f.den)
    g, pairs = f.cancel(1e-6)
    assert g.den_degree == 1


def test_at_infinity_and_properness():
    assert RationalFunction([1.0, 2.0], [3.0, 4.0]).at_infinity() == pytest.approx(0.5)
    assert RationalFunction([1.0], [1.0, 1.0]).at_infinity() == 0
    assert not RationalFunction([0.0, 0.0, 1.0], [1.0, 1.0]).is_proper


def test_para_conjugate_function():
    f = RationalFunction([1j, 2.0], [1.0 + 1j, 1.0])
    w = 0.8
    assert abs(para_conjugate(f)(1j * w) - np.conj(f(1j * w))) < 1e-14


def test_signature_matrix():
    assert np.array_equal(signature_matrix([Port.ANNIHILATION, Port.CREATION]), np.diag([1.0, -1.0]))


def test_transfer_matrix_product_and_det():
    a = TransferMatrix([[RationalFunction([1.0], [1.0, 1.0]), 2.0], [0.0, RationalFunction.s()]])
    b = TransferMatrix.from_constant([[1.0, 1.0], [1.0, -1.0]])
    s = 0.3 + 0.2j
    assert np.allclose((a @ b)(s), a(s) @ b(s))
    assert abs(a.det()(s) - np.linalg.det(a(s))) < 1e-14


def test_three_by_three_det():
    m = np.array([[1.0, 2.0, 0.5], [0.0, 3.0, 1.0], [2.0, 1.0, 4.0]])
    t = TransferMatrix([[RationalFunction.constant(v) for v in row] for row in m])
    assert abs(t.det()(0.0) - np.linalg.det(m)) < 1e-12


def test_signature_mismatch_in_product():
    A, C = Port.ANNIHILATION, Port.CREATION
    a = TransferMatrix.from_constant(np.eye(2), (A, C), (A, C))
    b = TransferMatrix.from_constant(np.eye(2), (A, A), (A, A))
    with pytest.raises(SignatureError):
        a @ b


def test_evaluation_shape():
    t = TransferMatrix.from_constant(np.ones((2, 3)))
    assert t(np.array([0.1j, 0.2j])).shape == (2, 2, 3)
