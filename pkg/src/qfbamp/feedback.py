"""Feedback interconnections of an amplifier with a passive controller.

Covers the two-port loop, its ideal high-gain limit, the three-port open-loop
system used for the Nyquist argument, and the three-port non-reciprocal loop.
All compositions are done on rational functions, so denominators stay exact.
"""

from dataclasses import dataclass, field

import numpy as np

from .components import NdpaParams, make_ndpa
from .errors import ParameterError, SignatureError, SingularInterconnectionError
from .rational import Port, RationalFunction, TransferMatrix

__all__ = [
    "ClosedLoop",
    "ConvergenceReport",
    "close_loop",
    "ideal_closed_loop",
    "open_loop_system",
    "high_gain_convergence",
    "ndpa_family",
    "nonreciprocal_close",
    "nonreciprocal_ideal",
]

SINGULAR_RTOL = 1e-12


@dataclass(frozen=True)
class ClosedLoop:
    gfb: TransferMatrix
    open_loop: RationalFunction = None
    provenance: dict = field(default_factory=dict)


def _one_minus(x, what):
    """Return 1 - x, raising if it vanishes identically (relative to its operands)."""
    out = 1 - x
    scale = max(np.max(np.abs(x.num.coeffs)), np.max(np.abs(x.den.coeffs)))
    if np.max(np.abs(out.num.coeffs)) <= SINGULAR_RTOL * scale:
        raise SingularInterconnectionError(f"{what} vanishes identically")
    return out


def _check_two_port(G, K):
    if G.shape != (2, 2) or K.shape != (2, 2):
        raise ParameterError("amplifier and controller must both be 2x2")
    if G.sig_out[1] != K.sig_in[0] or K.sig_out[1] != G.sig_in[1]:
        raise SignatureError("controller ports do not match the amplifier idler ports")


def close_loop(G, K):
    """Close the idler port of amplifier ``G`` through passive controller ``K``.

    The loop feeds G output 2 into K input 1 and K output 2 back into G input 2;
    the closed loop maps (G input 1, K input 2) to (G output 1, K output 1).
    """
    _check_two_port(G, K)
    g11, g12, g21, g22 = G[0, 0], G[0, 1], G[1, 0], G[1, 1]
    k11, k12, k21, k22 = K[0, 0], K[0, 1], K[1, 0], K[1, 1]
    loop = -(k21 * g22)
    den = _one_minus(k21 * g22, "1 - K21*G22")
    det_g, det_k = G.det(), K.det()
    entries = [
        [(g11 - k21 * det_g) / den, g12 * k22 / den],
        [g21 * k11 / den, (k12 + g22 * det_k) / den],
    ]
    gfb = TransferMatrix(entries, (G.sig_in[0], K.sig_in[1]), (G.sig_out[0], K.sig_out[0]))
    return ClosedLoop(gfb, loop, {"kind": "two-port", "G": G, "K": K})


def ideal_closed_loop(K, amplifier_port=Port.ANNIHILATION):
    """High-gain limit (-1/K21) [[1, K22], [K11, det K]]; depends on K alone."""
    if K.shape != (2, 2):
        raise ParameterError("controller must be 2x2")
    k11, k22, k21 = K[0, 0], K[1, 1], K[1, 0]
    if k21.is_zero:
        raise ParameterError("ideal limit undefined: K21 is identically zero")
    f = -1 / k21
    entries = [[f, f * k22], [f * k11, f * K.det()]]
    port = Port(amplifier_port)
    return TransferMatrix(entries, (port, K.sig_in[1]), (port, K.sig_out[0]))


def open_loop_system(G, K):
    """Three-port system with the feedback wire cut; entry (2, 1) is -L(s)."""
    _check_two_port(G, K)
    z = RationalFunction.constant(0.0)
    entries = [
        [G[0, 0], G[0, 1], z],
        [K[0, 0] * G[1, 0], K[0, 0] * G[1, 1], K[0, 1]],
        [K[1, 0] * G[1, 0], K[1, 0] * G[1, 1], K[1, 1]],
    ]
    return TransferMatrix(
        entries,
        (G.sig_in[0], G.sig_in[1], K.sig_in[1]),
        (G.sig_out[0], K.sig_out[0], K.sig_out[1]),
    )


def ndpa_family(lambda_):
    """Amplifier family eps -> NDPA with gamma = (2 + eps) * lambda_."""
    if not lambda_ > 0:
        raise ParameterError("the NDPA family needs lambda_ > 0")
    return lambda eps: make_ndpa(NdpaParams((2 + eps) * lambda_, lambda_))


@dataclass
class ConvergenceReport:
    """Per (s, eps) rows plus per-s flags.

    Each row holds the entrywise max error between the finite and ideal loops,
    the inverse amplifier gain 1/|G11|, their ratio and the domain metric
    max(|det G / G22|, |G12/G22 - 1|, |G21/G22 - 1|, |G11/G22 - 1|).
    """

    rows: list
    flags: dict

    def errors(self, s):
        return np.array([r["error"] for r in self.rows if r["s"] == s])


def high_gain_convergence(family, K, s_samples, eps_values=(1e-1, 1e-2, 1e-3), domain_tol=0.1):
    """Compare close_loop(family(eps), K) with ideal_closed_loop(K) at each sample point.

    Flags per sample: ``in_domain`` (ideal op-amp relations hold to ``domain_tol``
    at the highest-gain member), ``gain_ceiling`` (1/|G11| shrinks by less than 2x
    across the family), ``converging`` (error strictly decreasing),
    ``proportional`` (error / (1/|G11|) varies by at most 10x), and
    ``linear_in_eps`` (error ratio no larger than eps ratio at every step).
    """
    eps_values = sorted(eps_values, reverse=True)
    ideal = ideal_closed_loop(K)
    loops = [(eps, family(eps)) for eps in eps_values]
    loops = [(eps, G, close_loop(G, K).gfb) for eps, G in loops]
    rows, flags = [], {}
    for s in np.atleast_1d(s_samples):
        s = complex(s)
        target = ideal(s)
        errs, inv = [], []
        metric = None
        for eps, G, gfb in loops:
            g = G(s)
            err = float(np.max(np.abs(gfb(s) - target)))
            ig = float(1 / abs(g[0, 0]))
            metric = float(max(
                abs((g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]) / g[1, 1]),
                abs(g[0, 1] / g[1, 1] - 1),
                abs(g[1, 0] / g[1, 1] - 1),
                abs(g[0, 0] / g[1, 1] - 1),
            ))
            rows.append({"s": s, "eps": eps, "error": err, "inv_gain": ig,
                         "ratio": err / ig, "domain_metric": metric})
            errs.append(err)
            inv.append(ig)
        errs, inv = np.array(errs), np.array(inv)
        ratio = errs / inv
        eps_arr = np.array(eps_values)
        f = {
            "in_domain": bool(metric <= domain_tol),
            "gain_ceiling": bool(inv[-1] > 0.5 * inv[0]),
            "converging": bool(np.all(np.diff(errs) < 0)),
            "proportional": bool(ratio.max() <= 10 * ratio.min()),
            "linear_in_eps": bool(np.all(errs[1:] / errs[:-1] <= eps_arr[1:] / eps_arr[:-1])),
        }
        notes = []
        if not f["in_domain"]:
            notes.append("outside high-gain domain")
        if f["gain_ceiling"]:
            notes.append("gain ceiling")
        f["notes"] = notes
        flags[s] = f
    return ConvergenceReport(rows, flags)


def _check_three_port(G, Gbar, K):
    if G.shape != (2, 2) or Gbar.shape != (2, 2) or K.shape != (2, 2):
        raise ParameterError("G, Gbar and K must all be 2x2")
    A, C = Port.ANNIHILATION, Port.CREATION
    if G.sig_in != (A, C) or G.sig_out != (A, C):
        raise SignatureError("G must have signature (annihilation, creation)")
    if Gbar.sig_in == (A, C) and Gbar.sig_out == (A, C):
        Gbar = Gbar.conjugate_representation()
    if Gbar.sig_in != (C, A) or Gbar.sig_out != (C, A):
        raise SignatureError("Gbar must be an amplifier in either representation")
    if K.sig_in != (A, A) or K.sig_out != (A, A):
        raise SignatureError("K must act on annihilation-mode ports in the three-port loop")
    return Gbar


def nonreciprocal_close(G, Gbar, K):
    """Three-port loop: G and Gbar in series, K closing the signal path and its
    para-conjugate closing the reverse path.

    Ports in: (b1^dag, b3, b4); out: (b2~^dag, b3~, b4~).  ``Gbar`` may be given
    in the standard (annihilation, creation) form; it is then converted to the
    conjugated representation the loop needs.
    """
    Gbar = _check_three_port(G, Gbar, K)
    g11, g12, g21, g22 = G[0, 0], G[0, 1], G[1, 0], G[1, 1]
    b11, b12, b21, b22 = Gbar[0, 0], Gbar[0, 1], Gbar[1, 0], Gbar[1, 1]
    k11, k12, k21, k22 = K[0, 0], K[0, 1], K[1, 0], K[1, 1]
    det_g, det_b, det_k = G.det(), Gbar.det(), K.det()

    den = _one_minus(b21 * g21 * k22, "1 - Gbar21*G21*K22")
    h = [
        [(g12 + b21 * k22 * det_g) / den, g11 * b22 * k22 / den, g11 * k21 / den],
        [b11 * g22 / den, (b12 + g21 * k22 * det_b) / den, b11 * g21 * k21 / den],
        [k12 * b21 * g22 / den, k12 * b22 / den, (k11 - b21 * g21 * det_k) / den],
    ]
    H = TransferMatrix(h)

    ks = K.para_conjugate()
    q11, q12, q21, q22 = ks[0, 0], ks[0, 1], ks[1, 0], ks[1, 1]
    d = _one_minus(h[0][1] * q22, "1 - H12*K22~")
    (h11, h12, h13), (h21, h22, h23), (h31, h32, h33) = h
    entries = [
        [(h21 + (h11 * h22 - h12 * h21) * q22) / d, (h23 + (h13 * h22 - h12 * h23) * q22) / d, h22 * q12 / d],
        [(h31 + (h11 * h32 - h12 * h31) * q22) / d, (h33 + (h13 * h32 - h12 * h33) * q22) / d, h32 * q12 / d],
        [h11 * q21 / d, h13 * q21 / d, (q11 + h12 * (q12 * q21 - q11 * q22)) / d],
    ]
    sig = (Port.CREATION, Port.ANNIHILATION, Port.ANNIHILATION)
    gfb = TransferMatrix(entries, sig, sig)
    return ClosedLoop(gfb, None, {"kind": "three-port", "G": G, "Gbar": Gbar, "K": K, "H": H})


def nonreciprocal_ideal(K):
    """High-gain limit of the three-port loop; only the signal/idler block and the
    reverse-path element (K11~ + (det K)~) / (1 + K22~) survive."""
    if K.shape != (2, 2):
        raise ParameterError("controller must be 2x2")
    k11, k12, k21, k22 = K[0, 0], K[0, 1], K[1, 0], K[1, 1]
    if k22.is_zero:
        raise ParameterError("ideal limit undefined: K22 is identically zero")
    ks = K.para_conjugate()
    z = RationalFunction.constant(0.0)
    entries = [
        [-1 / k22, -k21 / k22, z],
        [-k12 / k22, K.det() / k22, z],
        [z, z, (ks[0, 0] + ks.det()) / (1 + ks[1, 1])],
    ]
    sig = (Port.CREATION, Port.ANNIHILATION, Port.ANNIHILATION)
    return TransferMatrix(entries, sig, sig)
