import io

import numpy as np
import pytest

from qfbamp.components import (
    CavityParams,
    NdpaParams,
    butterworth_params,
    make_beam_splitter,
    make_butterworth_controller,
    make_cavity_reflection,
    make_cavity_transmission,
    make_ndpa,
)
from qfbamp.errors import NyquistPreconditionError, ParameterError
from qfbamp.feedback import close_loop
from qfbamp.rational import Polynomial, RationalFunction
from qfbamp.stability import (
    Verdict,
    closed_loop_characteristic,
    nyquist,
    routh_hurwitz_quartic,
    stable_by_roots,
    write_nyquist_csv,
)


def _differentiator_loop(kappa=1.0, lam=2.0):
    G = make_ndpa(NdpaParams(2.01 * lam, lam))
    return close_loop(G, make_cavity_transmission(CavityParams(kappa, kappa))).open_loop


def test_differentiator_is_unstable():
    L = _differentiator_loop()
    res = nyquist(L)
    assert res.verdict is Verdict.UNSTABLE
    assert res.winding_number == -1
    assert stable_by_roots(closed_loop_characteristic(L)) is Verdict.UNSTABLE


def test_winding_invariant_under_refinement():
    L = _differentiator_loop()
    assert nyquist(L, points=100).winding_number == nyquist(L, points=400).winding_number


def test_zero_loop_is_stable():
    res = nyquist(RationalFunction.constant(0.0))
    assert res.verdict is Verdict.STABLE and res.winding_number == 0


def test_reflection_loop_touches_minus_one_at_infinity():
    G = make_ndpa(NdpaParams(2.2, 1.0))
    L = close_loop(G, make_cavity_reflection(CavityParams(1.0, 1.0))).open_loop
    assert L.at_infinity() == pytest.approx(-1.0)
    assert nyquist(L).verdict is Verdict.MARGINAL


def test_nyquist_precondition():
    L = RationalFunction([1.0], [-1.0, 1.0])
    with pytest.raises(NyquistPreconditionError):
        nyquist(L)
    with pytest.raises(ParameterError):
        nyquist(RationalFunction([0.0, 0.0, 1.0], [1.0, 1.0]))


def test_simple_first_order_loops():
    # 1 + k/(s+1): stable for k > -1
    assert nyquist(RationalFunction([3.0], [1.0, 1.0])).verdict is Verdict.STABLE
    res = nyquist(RationalFunction([-3.0], [1.0, 1.0]))
    assert res.verdict is Verdict.UNSTABLE and abs(res.winding_number) == 1


def test_nyquist_csv_format():
    res = nyquist(RationalFunction([1.0], [1.0, 1.0]), 0.1, 10.0, points=5)
    buf = io.StringIO()
    write_nyquist_csv(res, buf)
    lines = buf.getvalue().split("\n")
    assert lines[0] == "omega,re,im"
    assert len(lines) == res.omega.size + 2


def _random_loop(rng):
    lam = rng.uniform(0.5, 5)
    G = make_ndpa(NdpaParams(lam * rng.uniform(2.001, 3.0), lam))
    kind = rng.integers(3)
    if kind == 0:
        K = make_cavity_transmission(CavityParams(rng.uniform(0.1, 5), rng.uniform(0.1, 5), rng.uniform(-2, 2)))
    elif kind == 1:
        K = make_butterworth_controller(butterworth_params(rng.uniform(0.1, 5), rng.uniform(0.1, 5)))
    else:
        K = make_beam_splitter(rng.uniform(0.05, 0.95))
    return close_loop(G, K).open_loop


def test_nyquist_agrees_with_roots_on_random_loops():
    rng = np.random.default_rng(7)
    checked = disagreements = 0
    while checked < 100:
        L = _random_loop(rng)
        char = closed_loop_characteristic(L)
        top = np.max(char.roots().real)
        res = nyquist(L)
        if res.min_distance < 1e-4 or abs(top) < 1e-4:
            continue
        checked += 1
        disagreements += res.verdict is not stable_by_roots(char)
    assert disagreements == 0


def test_routh_hurwitz_examples():
    r = routh_hurwitz_quartic([4.0, 6.0, 4.0, 1.0])
    assert r.verdict is Verdict.STABLE
    assert np.allclose(r.conditions, (4.0, 5.0, 3.2, 1.0))
    assert routh_hurwitz_quartic([1.0, 1.0, 1.0, 1.0]).verdict is Verdict.UNSTABLE
    assert routh_hurwitz_quartic([4.0, 6.0, 4.0, 0.0]).verdict is Verdict.MARGINAL
    # (s^2 + 1)(s^2 + 2 s + 1): pure imaginary pair
    assert routh_hurwitz_quartic([2.0, 2.0, 2.0, 1.0]).verdict is Verdict.MARGINAL


def test_routh_hurwitz_validation():
    with pytest.raises(ParameterError):
        routh_hurwitz_quartic([1.0, 2.0, 3.0])
    with pytest.raises(ParameterError):
        routh_hurwitz_quartic([1j, 2.0, 3.0, 4.0])


def test_routh_hurwitz_agrees_with_roots():
    rng = np.random.default_rng(11)
    checked = disagreements = 0
    while checked < 1000:
        rts = []
        while len(rts) < 4:
            if rng.random() < 0.5 and len(rts) <= 2:
                z = complex(rng.uniform(-3, 1), rng.uniform(0.1, 3))
                rts += [z, z.conjugate()]
            else:
                rts.append(complex(rng.uniform(-3, 1)))
        if np.min(np.abs(np.real(rts))) < 1e-3:
            continue
        c = np.real(np.poly(rts))
        checked += 1
        disagreements += routh_hurwitz_quartic(c[1:]).verdict is not stable_by_roots(c[::-1])
    assert disagreements == 0


def test_stable_by_roots():
    assert stable_by_roots(Polynomial([1.0, 0.0, 1.0])) is Verdict.MARGINAL
    assert stable_by_roots([2.0, 3.0, 1.0]) is Verdict.STABLE
    assert stable_by_roots([-1.0, 1.0]) is Verdict.UNSTABLE
    with pytest.raises(ParameterError):
        stable_by_roots([1.0])
