"""Closed-form numpy evaluations used as independent references in tests."""

import numpy as np


def ndpa(s, gamma, lam):
    d = (s + gamma / 2) ** 2 - lam ** 2
    a = (s * s - lam ** 2 - gamma ** 2 / 4) / d
    b = -gamma * lam / d
    return np.array([[a, b], [b, a]])


def cav_t(s, k1, k2, delta=0.0):
    d = s + (k1 + k2) / 2 - 1j * delta
    r = np.sqrt(k1 * k2)
    return np.array([[s + (k2 - k1) / 2 - 1j * delta, -r], [-r, s + (k1 - k2) / 2 - 1j * delta]]) / d


def cav_r(s, k1, k2, delta=0.0):
    d = s + (k1 + k2) / 2 - 1j * delta
    r = np.sqrt(k1 * k2)
    return np.array([[-r, s + (k1 - k2) / 2 - 1j * delta], [s + (k2 - k1) / 2 - 1j * delta, -r]]) / d


def butterworth(s, k1, k2):
    dl = (k1 + k2) / 2
    d = s + (k1 + k2) / 2 + 1j * dl
    r = np.sqrt(k1 * k2)
    right = np.array([[s + (k1 - k2) / 2 + 1j * dl, -r], [-r, s - (k1 - k2) / 2 + 1j * dl]]) / d
    return right @ np.array([[0, -1], [1, 0]]) @ cav_t(s, k1, k2, dl)


def beam_splitter(T):
    return np.array([[np.sqrt(T), -np.sqrt(1 - T)], [np.sqrt(1 - T), np.sqrt(T)]], dtype=complex)


def closed_loop_solve(G, K):
    """Two-port loop by solving the wiring equations directly.

    Unknowns (G out1, G out2, K out1, K out2); inputs (G in1, K in2);
    wiring G out2 -> K in1 and K out2 -> G in2.
    """
    M = np.eye(4, dtype=complex)
    rhs = np.zeros((4, 2), dtype=complex)
    # G out_i = G_i1 u1 + G_i2 (K out2)
    for i in range(2):
        rhs[i, 0] = G[i, 0]
        M[i, 3] -= G[i, 1]
    # K out_i = K_i1 (G out2) + K_i2 u2
    for i in range(2):
        M[2 + i, 1] -= K[i, 0]
        rhs[2 + i, 1] = K[i, 1]
    X = np.linalg.solve(M, rhs)
    return X[[0, 2]]


def three_port_solve(G, Gb, K, Kp):
    """Three-port non-reciprocal loop by solving all internal wiring equations.

    ``Kp`` is the reverse-path controller evaluated on the imaginary axis.
    Inputs (b1^dag, b3, b4); outputs (b2~^dag, b3~, b4~).
    """
    names = ["bt1", "btt1d", "bt2d", "btt2", "bt3", "btt3", "bt4", "b2"]
    idx = {k: j for j, k in enumerate(names)}
    inp = {"b1d": 0, "b3": 1, "b4": 2}
    M = np.eye(8, dtype=complex)
    rhs = np.zeros((8, 3), dtype=complex)

    def eq(lhs, terms):
        r = idx[lhs]
        for coef, var in terms:
            if var in idx:
                M[r, idx[var]] -= coef
            else:
                rhs[r, inp[var]] += coef

    eq("bt1", [(G[0, 0], "btt3"), (G[0, 1], "b1d")])
    eq("btt1d", [(G[1, 0], "btt3"), (G[1, 1], "b1d")])
    eq("bt2d", [(Gb[0, 0], "btt1d"), (Gb[0, 1], "b2")])
    eq("btt2", [(Gb[1, 0], "btt1d"), (Gb[1, 1], "b2")])
    eq("bt3", [(K[0, 0], "b3"), (K[0, 1], "btt2")])
    eq("btt3", [(K[1, 0], "b3"), (K[1, 1], "btt2")])
    eq("bt4", [(Kp[0, 0], "b4"), (Kp[0, 1], "bt1")])
    eq("b2", [(Kp[1, 0], "b4"), (Kp[1, 1], "bt1")])
    X = np.linalg.solve(M, rhs)
    return X[[idx["bt2d"], idx["bt3"], idx["bt4"]]]
