"""Building blocks: the non-degenerate parametric amplifier, passive cavities,
beam splitter, phase shifter, the Butterworth controller, and realizability checks.

All rates are angular frequencies (s^-1).  Passive elements default to
creation-mode ports because they sit on the idler side of the amplifier loop.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .rational import Polynomial, Port, RationalFunction, TransferMatrix, signature_matrix

A, C = Port.ANNIHILATION, Port.CREATION

__all__ = [
    "NdpaParams",
    "CavityParams",
    "RealizabilityReport",
    "make_ndpa",
    "make_cavity_transmission",
    "make_cavity_reflection",
    "make_beam_splitter",
    "make_phase_shifter",
    "make_butterworth_controller",
    "butterworth_params",
    "check_amplifier_realizable",
    "check_passive_unitary",
    "check_commutation",
    "log_grid",
]


@dataclass(frozen=True)
class NdpaParams:
    """Mirror coupling ``gamma`` and pump coupling ``lambda_``; stable iff gamma > 2*lambda_."""

    gamma: float
    lambda_: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ParameterError("gamma must be positive")
        if not self.lambda_ >= 0:
            raise ParameterError("lambda_ must be non-negative")

    @property
    def stable(self):
        return self.gamma > 2 * self.lambda_


@dataclass(frozen=True)
class CavityParams:
    """Two-port cavity: coupling rates ``kappa1``, ``kappa2`` and signed detuning ``delta``."""

    kappa1: float
    kappa2: float
    delta: float = 0.0

    def __post_init__(self):
        if self.kappa1 < 0 or self.kappa2 < 0 or not self.kappa1 + self.kappa2 > 0:
            raise ParameterError("need kappa1, kappa2 >= 0 with kappa1 + kappa2 > 0")


def log_grid(rate=1.0, points=64, decades=3.0):
    """Log-spaced angular frequencies over ``rate * [10^-decades, 10^decades]``."""
    return rate * np.logspace(-decades, decades, points)


def make_ndpa(p):
    """NDPA transfer matrix over ports (b1, b2^dag) -> (b1~, b2~^dag)."""
    g, lam = float(p.gamma), float(p.lambda_)
    d = Polynomial([g * g / 4 - lam * lam, g, 1.0])
    diag = RationalFunction([-lam * lam - g * g / 4, 0.0, 1.0], d)
    off = RationalFunction([-g * lam], d)
    return TransferMatrix([[diag, off], [off, diag]], (A, C), (A, C))


def _cavity_parts(p):
    k1, k2, dl = float(p.kappa1), float(p.kappa2), float(p.delta)
    d = Polynomial([(k1 + k2) / 2 - 1j * dl, 1.0])
    first = RationalFunction([(k2 - k1) / 2 - 1j * dl, 1.0], d)
    second = RationalFunction([(k1 - k2) / 2 - 1j * dl, 1.0], d)
    cross = RationalFunction([-np.sqrt(k1 * k2)], d)
    return first, second, cross


def make_cavity_transmission(p, port=C):
    """Cavity used in transmission (low-pass between its two ports)."""
    first, second, cross = _cavity_parts(p)
    sig = (Port(port),) * 2
    return TransferMatrix([[first, cross], [cross, second]], sig, sig)


def make_cavity_reflection(p, port=C):
    """Cavity used in reflection (anti-diagonal of the transmission form, high-pass)."""
    first, second, cross = _cavity_parts(p)
    sig = (Port(port),) * 2
    return TransferMatrix([[cross, second], [first, cross]], sig, sig)


def make_beam_splitter(T, port=C):
    """Beam splitter with power transmissivity ``T`` in (0, 1]."""
    if not 0 < T <= 1:
        raise ParameterError("transmissivity T must lie in (0, 1]")
    t, r = np.sqrt(T), np.sqrt(1 - T)
    sig = (Port(port),) * 2
    return TransferMatrix.from_constant([[t, -r], [r, t]], sig, sig)


def make_phase_shifter(phi):
    return RationalFunction.constant(np.exp(1j * phi))


def butterworth_params(kappa1, kappa2):
    """Cavity parameters with the detuning (kappa1 + kappa2)/2 used by the Butterworth controller."""
    return CavityParams(kappa1, kappa2, (kappa1 + kappa2) / 2)


def make_butterworth_controller(p, port=C):
    """K = K_r [[0, -1], [1, 0]] K_l; K_l is the transmission cavity with detuning +delta
    and K_r the mirrored cavity with detuning -delta."""
    k1, k2, dl = float(p.kappa1), float(p.kappa2), float(p.delta)
    sig = (Port(port),) * 2
    left = make_cavity_transmission(p, port)
    dr = Polynomial([(k1 + k2) / 2 + 1j * dl, 1.0])
    cross = RationalFunction([-np.sqrt(k1 * k2)], dr)
    right = TransferMatrix(
        [
            [RationalFunction([(k1 - k2) / 2 + 1j * dl, 1.0], dr), cross],
            [cross, RationalFunction([-(k1 - k2) / 2 + 1j * dl, 1.0], dr)],
        ],
        sig,
        sig,
    )
    swap = TransferMatrix.from_constant([[0, -1], [1, 0]], sig, sig)
    return right @ swap @ left


@dataclass
class RealizabilityReport:
    """Maximum violation per condition over the sampled frequencies."""

    violations: dict
    worst_omega: dict
    tol: float
    n_points: int
    notes: list = field(default_factory=list)

    @property
    def max_violation(self):
        return max(self.violations.values())

    @property
    def passed(self):
        return bool(self.max_violation < self.tol)

    def to_dict(self):
        return {
            "passed": self.passed,
            "tol": self.tol,
            "points": self.n_points,
            "max_violation": self.max_violation,
            "violations": dict(self.violations),
            "worst_omega": dict(self.worst_omega),
        }


def _report(named, omegas, tol):
    violations, worst = {}, {}
    for name, err in named.items():
        k = int(np.argmax(err))
        violations[name] = float(err[k])
        worst[name] = float(omegas[k])
    return RealizabilityReport(violations, worst, tol, len(omegas))


def check_amplifier_realizable(G, omegas, tol=1e-9):
    """Check |G11|^2-|G12|^2 = 1, |G22|^2-|G21|^2 = 1 and G21 conj(G11) - G22 conj(G12) = 0."""
    if G.shape != (2, 2) or G.sig_in != (A, C) or G.sig_out != (A, C):
        raise ParameterError("amplifier check needs a 2x2 matrix with signature (annihilation, creation)")
    omegas = np.asarray(omegas, dtype=float)
    v = G.freq_response(omegas)
    g11, g12, g21, g22 = v[:, 0, 0], v[:, 0, 1], v[:, 1, 0], v[:, 1, 1]
    named = {
        "row1_norm": np.abs(np.abs(g11) ** 2 - np.abs(g12) ** 2 - 1),
        "row2_norm": np.abs(np.abs(g22) ** 2 - np.abs(g21) ** 2 - 1),
        "cross": np.abs(g21 * np.conj(g11) - g22 * np.conj(g12)),
    }
    return _report(named, omegas, tol)


def check_passive_unitary(K, omegas, tol=1e-9):
    """Check K(iw) K(iw)^dag = I at each frequency."""
    m, n = K.shape
    if m != n:
        raise ParameterError("unitarity check needs a square matrix")
    omegas = np.asarray(omegas, dtype=float)
    v = K.freq_response(omegas)
    dev = v @ np.conj(np.swapaxes(v, -1, -2)) - np.eye(m)
    return _report({"unitarity": np.max(np.abs(dev), axis=(-1, -2))}, omegas, tol)


def check_commutation(T, omegas, tol=1e-9):
    """Check T J_in T^dag = J_out with J = diag(+1 annihilation, -1 creation)."""
    omegas = np.asarray(omegas, dtype=float)
    v = T.freq_response(omegas)
    jin, jout = signature_matrix(T.sig_in), signature_matrix(T.sig_out)
    dev = v @ jin @ np.conj(np.swapaxes(v, -1, -2)) - jout
    return _report({"commutation": np.max(np.abs(dev), axis=(-1, -2))}, omegas, tol)
