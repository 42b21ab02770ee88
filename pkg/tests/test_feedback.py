import numpy as np
import pytest

from oracles import beam_splitter, cav_t, closed_loop_solve, ndpa, three_port_solve
from qfbamp.components import (
    CavityParams,
    NdpaParams,
    butterworth_params,
    check_commutation,
    log_grid,
    make_beam_splitter,
    make_butterworth_controller,
    make_cavity_reflection,
    make_cavity_transmission,
    make_ndpa,
)
from qfbamp.errors import ParameterError, SignatureError, SingularInterconnectionError
from qfbamp.feedback import (
    close_loop,
    high_gain_convergence,
    ideal_closed_loop,
    ndpa_family,
    nonreciprocal_close,
    nonreciprocal_ideal,
    open_loop_system,
)
from qfbamp.rational import Port, RationalFunction, TransferMatrix

A, C = Port.ANNIHILATION, Port.CREATION
GRID = log_grid(1.0)


def test_two_port_loop_matches_direct_wiring_solve():
    G = make_ndpa(NdpaParams(4.3, 2.0))
    K = make_cavity_reflection(CavityParams(1.0, 1.5, 0.2))
    cl = close_loop(G, K)
    for s in (0.37j + 0.1, 2.0j, 0.01j):
        assert np.allclose(cl.gfb(s), closed_loop_solve(G(s), K(s)), atol=1e-12, rtol=1e-12)


def test_open_loop_gain_is_minus_k21_g22():
    G = make_ndpa(NdpaParams(4.02, 2.0))
    K = make_cavity_transmission(CavityParams(1.0, 1.0))
    L = close_loop(G, K).open_loop
    s = 0.3j
    assert L(s) == pytest.approx(-K(s)[1, 0] * G(s)[1, 1])
    # 1 + L(0) with L(0) = -(g^2/4 + lam^2)/(g^2/4 - lam^2)
    assert L(0.0).real == pytest.approx(-8.0401 / 0.0401, rel=1e-12)
    sys3 = open_loop_system(G, K)
    assert sys3[2, 1](s) == pytest.approx(-L(s))


def test_closed_loops_preserve_commutation():
    G = make_ndpa(NdpaParams(2.01 * 2, 2.0))
    for K in (
        make_cavity_transmission(CavityParams(1.0, 1.0)),
        make_cavity_reflection(CavityParams(1.0, 1.5)),
        make_butterworth_controller(butterworth_params(1.0, 1.5)),
    ):
        assert check_commutation(close_loop(G, K).gfb, GRID).max_violation < 1e-9
        assert check_commutation(ideal_closed_loop(K), GRID).max_violation < 1e-9


def test_ideal_lpf_is_differentiator():
    kappa = 1.3
    K = make_cavity_transmission(CavityParams(kappa, kappa))
    s = 0.4j
    want = np.array([[s + kappa, s], [s, s - kappa]]) / kappa
    assert np.allclose(ideal_closed_loop(K)(s), want, atol=1e-14)


def test_ideal_hpf_is_integrator():
    kappa = 0.7
    K = make_cavity_reflection(CavityParams(kappa, kappa))
    s = 0.4j
    want = np.array([[-s - kappa, kappa], [kappa, s - kappa]]) / s
    assert np.allclose(ideal_closed_loop(K)(s), want, atol=1e-14)


def test_ideal_active_filter():
    k1, k2 = 1.0, 1.5
    K = make_cavity_reflection(CavityParams(k1, k2))
    s = 0.4j
    assert ideal_closed_loop(K)(s)[0, 0] == pytest.approx(-(s + (k1 + k2) / 2) / (s + (k2 - k1) / 2))


def test_finite_integrator_low_frequency_form():
    # finite-gain HPF loop: |G21fb| ~ kappa / ((1 + kappa/lam) w) inside the band
    # where the amplifier gain still dominates; it saturates below w ~ 1e-2
    lam, kappa = 2.0, 1.0
    cl = close_loop(make_ndpa(NdpaParams(2.01 * lam, lam)), make_cavity_reflection(CavityParams(kappa, kappa)))
    for w in (0.05, 0.1):
        got = cl.gfb(1j * w)[1, 0] * 1j * w / kappa
        assert abs(got) == pytest.approx(1 / (1 + kappa / lam), rel=5e-3)
    assert abs(cl.gfb(1e-3j)[1, 0] * 1e-3j) < 0.3


def test_signature_mismatch_rejected():
    G = make_ndpa(NdpaParams(2.2, 1.0))
    K = make_cavity_transmission(CavityParams(1.0, 1.0), port=A)
    with pytest.raises(SignatureError):
        close_loop(G, K)


def test_singular_interconnection():
    G = TransferMatrix.from_constant([[1.0, 0.0], [0.0, 1.0]], (A, C), (A, C))
    K = TransferMatrix.from_constant([[0.0, 1.0], [1.0, 0.0]], (C, C), (C, C))
    with pytest.raises(SingularInterconnectionError):
        close_loop(G, K)


def test_ideal_needs_nonzero_k21():
    K = TransferMatrix.from_constant(np.eye(2), (C, C), (C, C))
    with pytest.raises(ParameterError):
        ideal_closed_loop(K)


def test_high_gain_convergence_report():
    lam = 10.0
    K = make_cavity_transmission(CavityParams(1.0, 1.0))
    rep = high_gain_convergence(ndpa_family(lam), K, [0.05j * lam])
    rows = rep.rows
    assert [r["eps"] for r in rows] == [1e-1, 1e-2, 1e-3]
    errs = rep.errors(0.05j * lam)
    # independent evaluation of the same quantity
    s = 0.05j * lam
    Kv = cav_t(s, 1.0, 1.0)
    ideal = -1 / Kv[1, 0] * np.array([[1, Kv[1, 1]], [Kv[0, 0], np.linalg.det(Kv)]])
    ref = [np.abs(closed_loop_solve(ndpa(s, (2 + e) * lam, lam), Kv) - ideal).max() for e in (1e-1, 1e-2, 1e-3)]
    assert np.allclose(errs, ref, rtol=1e-9)
    flags = rep.flags[complex(s)]
    assert flags["gain_ceiling"]
    assert "gain ceiling" in flags["notes"]


def test_high_gain_converges_at_low_frequency():
    lam = 10.0
    K = make_cavity_reflection(CavityParams(1.0, 1.0))
    s = 1e-4j * lam
    rep = high_gain_convergence(ndpa_family(lam), K, [s])
    assert rep.flags[complex(s)]["converging"]


def _nr_pair():
    G = make_ndpa(NdpaParams(2.2, 1.0))
    Gb = make_ndpa(NdpaParams(2.3, 1.0))
    return G, Gb


def test_three_port_matches_direct_solve():
    G, Gb = _nr_pair()
    K = make_cavity_transmission(CavityParams(1.0, 1.5, 0.3), port=A)
    cl = nonreciprocal_close(G, Gb, K)
    for w in (0.3, 0.01, 4.0):
        s = 1j * w
        Kv = K(s)
        got = cl.gfb(s)
        ref = three_port_solve(G(s), Gb(s), Kv, Kv.conj())
        assert np.allclose(got, ref, atol=1e-12, rtol=1e-12)


def test_three_port_preserves_commutation():
    G, Gb = _nr_pair()
    K = make_cavity_transmission(CavityParams(1.0, 1.5, 0.3), port=A)
    assert check_commutation(nonreciprocal_close(G, Gb, K).gfb, GRID).max_violation < 1e-9
    assert check_commutation(nonreciprocal_ideal(K), GRID).max_violation < 1e-12


def test_three_port_ideal_beam_splitter():
    K = make_beam_splitter(0.25, port=A)
    r3 = np.sqrt(3)
    want = [[-2, -r3, 0], [r3, 2, 0], [0, 0, 1]]
    assert np.allclose(nonreciprocal_ideal(K)(0.1j), want, atol=1e-12)


def test_three_port_limit_close_to_ideal():
    K = make_beam_splitter(0.5, port=A)
    G = make_ndpa(NdpaParams(2 + 1e-4, 1.0))
    s = 0.01j
    fin, ide = nonreciprocal_close(G, G, K).gfb(s), nonreciprocal_ideal(K)(s)
    assert np.max(np.abs(fin - ide) / np.maximum(1, np.abs(ide))) < 0.01
    assert abs(abs(fin[2, 2]) - 1) < 1e-3


def test_three_port_needs_annihilation_controller():
    G, Gb = _nr_pair()
    with pytest.raises(SignatureError):
        nonreciprocal_close(G, Gb, make_beam_splitter(0.5))
