"""Stability oracles: Nyquist encirclement of -1 by L(iw), Routh-Hurwitz for a
monic quartic, and direct inspection of polynomial roots.

The feedback denominator is 1 - K21*G22 = 1 + L with L = -K21*G22, so the
Nyquist test counts windings of 1 + L(iw) about the origin.
"""

import csv
import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import NyquistPreconditionError, ParameterError
from .rational import Polynomial, RationalFunction

__all__ = [
    "Verdict",
    "NyquistResult",
    "RouthHurwitzResult",
    "nyquist",
    "routh_hurwitz_quartic",
    "stable_by_roots",
    "closed_loop_characteristic",
    "write_nyquist_csv",
]

TURN_LIMIT = 0.2
MAX_POINTS = 200_000


class Verdict(str, enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    MARGINAL = "marginal"


@dataclass
class NyquistResult:
    omega: np.ndarray
    values: np.ndarray
    winding_number: int
    min_distance: float
    verdict: Verdict
    closure: complex = 0j
    notes: list = field(default_factory=list)

    @property
    def samples(self):
        return list(zip(self.omega.tolist(), self.values.tolist()))


def _default_range(L):
    rts = np.concatenate([L.poles(), L.zeros()])
    mags = np.abs(rts[np.abs(rts) > 0])
    if mags.size == 0:
        return 1e-3, 1e3
    return 1e-3 * mags.min(), 1e3 * mags.max()


def _turns(z):
    """Chord turn angle at each interior vertex of polyline z.

    Vertices next to chords shorter than 1e-9 of the curve size are ignored.
    """
    d = np.diff(z)
    tiny = 1e-9 * max(float(np.max(np.abs(z))), 1e-300)
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.abs(np.angle(d[1:] / d[:-1]))
    t[(np.abs(d[1:]) < tiny) | (np.abs(d[:-1]) < tiny)] = 0.0
    return np.nan_to_num(t, nan=0.0)


def nyquist(L, omega_min=None, omega_max=None, margin=1e-6, points=200):
    """Nyquist test of the loop 1 + L(s) for an open loop with stable poles.

    Samples L(iw) on [-omega_max, -omega_min] U [-omega_min, omega_min] U
    [omega_min, omega_max], refining wherever the chord turns more than 0.2 rad
    or the argument of 1 + L jumps more than 0.2 rad, and closes the contour
    through L(infinity).  Negative frequencies are always sampled explicitly,
    which is exact for complex coefficients and harmless for real ones.
    """
    if not isinstance(L, RationalFunction):
        L = RationalFunction(L)
    if not L.is_proper:
        raise ParameterError("Nyquist test needs a proper L(s)")
    poles = L.poles()
    if poles.size and np.max(poles.real) >= 0:
        raise NyquistPreconditionError("Nyquist precondition violated: open-loop pole in the closed right half-plane")
    lo, hi = _default_range(L)
    omega_min = lo if omega_min is None else float(omega_min)
    omega_max = hi if omega_max is None else float(omega_max)
    if not 0 < omega_min < omega_max:
        raise ParameterError("need 0 < omega_min < omega_max")

    pos = np.geomspace(omega_min, omega_max, points)
    gap = np.linspace(-omega_min, omega_min, 21)[1:-1]
    w = np.concatenate([-pos[::-1], gap, pos])
    closure = L.at_infinity()

    for _ in range(60):
        z = L(1j * w)
        ring = np.concatenate([[closure], z, [closure]])
        turn = _turns(ring)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.nan_to_num(np.abs(np.angle((1 + ring[1:]) / (1 + ring[:-1]))))
        flag = np.zeros(w.size - 1, dtype=bool)
        # vertex k of ring (k >= 1) is sample k-1; a bad turn there refines both neighbours
        bad_vertex = np.nonzero(turn > TURN_LIMIT)[0]
        for v in bad_vertex:
            i = v
            if 0 <= i - 1 < flag.size:
                flag[i - 1] = True
            if 0 <= i < flag.size:
                flag[i] = True
        flag |= step[1:-1] > TURN_LIMIT
        if not flag.any() or w.size > MAX_POINTS:
            break
        idx = np.nonzero(flag)[0]
        mids = 0.5 * (w[idx] + w[idx + 1])
        w = np.sort(np.concatenate([w, mids]))
    z = L(1j * w)
    ring = np.concatenate([[closure], z, [closure]])
    with np.errstate(divide="ignore", invalid="ignore"):
        total = np.sum(np.nan_to_num(np.angle((1 + ring[1:]) / (1 + ring[:-1]))))
    winding = int(np.rint(total / (2 * np.pi)))
    dist = float(np.min(np.abs(1 + ring)))
    notes = []
    if w.size > MAX_POINTS:
        notes.append("refinement budget exhausted")
    if dist <= margin:
        verdict = Verdict.MARGINAL
    elif winding == 0:
        verdict = Verdict.STABLE
    else:
        verdict = Verdict.UNSTABLE
    return NyquistResult(w, z, winding, dist, verdict, complex(closure), notes)


def write_nyquist_csv(result, fh):
    """Write columns omega, re, im with 17 significant digits."""
    wr = csv.writer(fh, lineterminator="\n")
    wr.writerow(["omega", "re", "im"])
    for w, z in zip(result.omega, result.values):
        wr.writerow([f"{w:.17g}", f"{z.real:.17g}", f"{z.imag:.17g}"])


def closed_loop_characteristic(L):
    """Numerator of 1 + L over the open-loop denominator; its roots are the closed-loop poles."""
    return (1 + L).num


def stable_by_roots(den, margin=None):
    """Verdict from root locations; marginal if max Re(root) is within +-margin of 0.

    Default margin is 1e-9 * max(1, max |root|).
    """
    den = den if isinstance(den, Polynomial) else Polynomial(den)
    if den.degree < 1:
        raise ParameterError("need degree >= 1")
    rts = den.roots()
    if margin is None:
        margin = 1e-9 * max(1.0, float(np.max(np.abs(rts))))
    top = float(np.max(rts.real))
    if top < -margin:
        return Verdict.STABLE
    if top <= margin:
        return Verdict.MARGINAL
    return Verdict.UNSTABLE


@dataclass
class RouthHurwitzResult:
    verdict: Verdict
    conditions: tuple
    hurwitz: tuple


def routh_hurwitz_quartic(beta, rtol=1e-9):
    """Stability of s^4 + b3 s^3 + b2 s^2 + b1 s + b0 with ``beta = (b3, b2, b1, b0)``.

    Stable iff the Hurwitz determinants b3, b3 b2 - b1, b1 (b3 b2 - b1) - b3^2 b0
    and b0 are all positive.  ``conditions`` holds the equivalent ratio form
    (b3, (b2 b3 - b1)/b3, b3^2 b0/(b1 - b2 b3) + b1, b0).  Any determinant that
    is zero to ``rtol`` (relative to the root scale raised to its weight), with
    none strictly negative, gives a marginal verdict.
    """
    beta = np.asarray(beta)
    if beta.shape != (4,):
        raise ParameterError("beta must hold (b3, b2, b1, b0)")
    if np.iscomplexobj(beta) and np.any(beta.imag != 0):
        raise ParameterError("Routh-Hurwitz test needs real coefficients")
    b3, b2, b1, b0 = (float(np.real(x)) for x in beta)
    h1 = b3
    h2 = b3 * b2 - b1
    h3 = b1 * h2 - b3 * b3 * b0
    h4 = b0
    rho = max(abs(b3), abs(b2) ** 0.5, abs(b1) ** (1 / 3), abs(b0) ** 0.25, 1e-300)
    tols = (rtol * rho, rtol * rho ** 3, rtol * rho ** 6, rtol * rho ** 4)
    with np.errstate(divide="ignore", invalid="ignore"):
        c2 = h2 / b3 if b3 != 0 else np.nan
        c3 = b3 * b3 * b0 / (b1 - b2 * b3) + b1 if h2 != 0 else np.nan
    conditions = (b3, c2, c3, b0)
    hurwitz = (h1, h2, h3, h4)
    if any(h < -t for h, t in zip(hurwitz, tols)):
        verdict = Verdict.UNSTABLE
    elif any(abs(h) <= t for h, t in zip(hurwitz, tols)):
        verdict = Verdict.MARGINAL
    else:
        verdict = Verdict.STABLE
    return RouthHurwitzResult(verdict, conditions, hurwitz)
