"""Gravitational-wave detector with a coherent phase-cancelling filter.

Baseline interferometer noise, the 12-state detector+filter model, LQG
stabilization through two continuous algebraic Riccati equations, and the
closed-loop strain-referred quantum noise budget with per-channel terms.

The Riccati solutions for the detector have entries near 1e12 while A has
entries near 1e8, so a float64 P cannot make the Riccati residual small in
absolute terms.  :func:`solve_care` therefore refines the Schur-based solution
with Newton steps whose residual and iterate are carried in extended precision
(mpmath); the float64 matrix is what downstream code uses.
"""

import configparser
import csv
import math
from dataclasses import dataclass, field, replace

import mpmath as mp
import numpy as np
import scipy.integrate as si
import scipy.linalg as la

from .errors import CareError, ParameterError, PoleError, RankDeficiencyError
from .statespace import C_LIGHT, StateSpaceModel

HBAR = 1.054571817e-34
CHANNELS = ("Qd", "Pd", "Q1", "P1", "Q3", "P3", "Q4", "P4")
STATE_LABELS = ("X_M", "P_M", "q_d", "p_d", "q1", "p1", "q2", "p2", "q3", "p3", "q4", "p4")
INPUT_LABELS = ("F_GW", "Qd_in", "Pd_in", "Q1_loss", "P1_loss", "Q3_loss", "P3_loss", "Q4_loss", "P4_loss")
OUTPUT_LABELS = ("Qd_out", "Pd_out")
CONFIG_KEYS = {
    "M": "M", "L_arm": "L_arm", "P_arm": "P_arm", "lambda_laser": "lambda_laser",
    "Delta_d": "Delta_d", "gamma_IFO": "gamma_IFO", "Omega_M": "Omega_M",
    "lambda": "lambda_", "gamma": "gamma", "kappa1": "kappa1", "L4": "L4",
    "gamma_1loss": "gamma_1loss", "kappa_3loss": "kappa_3loss", "kappa_4loss": "kappa_4loss",
    "Q_scale": "Q_scale", "R": "R", "V_FGW": "V_FGW",
}
RATE_KEYS = {"Delta_d", "gamma_IFO", "Omega_M", "lambda_", "gamma", "kappa1",
             "gamma_1loss", "kappa_3loss", "kappa_4loss"}
SWEEP_CHANNELS = ("gamma_1loss", "kappa_3loss", "kappa_4loss")

__all__ = [
    "HBAR", "CHANNELS", "GwParams", "LqgWeights", "NoiseBudget", "MizunoResult",
    "CareSolution", "LqgResult", "SweepEntry", "default_grid", "baseline_noise",
    "mizuno_integral", "build_full_system", "ctrb_obsv", "solve_care", "lqg_synthesize",
    "closed_loop_blocks", "controlled_noise", "loss_sweep", "parse_config", "write_noise_csv",
]


@dataclass(frozen=True)
class GwParams:
    """Detector and filter parameters; defaults are the reference design values.

    ``gamma`` defaults to 2.01 * lambda_ and ``kappa1`` to 2c/L_arm.  Filter
    couplings and losses may be zero (decoupled filter).
    """

    M: float = 40.0
    L_arm: float = 4000.0
    P_arm: float = 800e3
    lambda_laser: float = 1064e-9
    Delta_d: float = -63.0
    gamma_IFO: float = 1062.0
    Omega_M: float = 1.0
    lambda_: float = 3e6
    gamma: float = None
    kappa1: float = None
    L4: float = 0.5
    gamma_1loss: float = 1e6
    kappa_3loss: float = 100.0
    kappa_4loss: float = 6e5
    Q_scale: float = 1.0
    R: float = 0.01
    V_FGW: float = 1e-22
    hbar: float = HBAR
    c: float = C_LIGHT

    def __post_init__(self):
        if self.gamma is None:
            object.__setattr__(self, "gamma", 2.01 * self.lambda_)
        if self.kappa1 is None:
            object.__setattr__(self, "kappa1", 2 * self.c / self.L_arm)
        for name in ("M", "L_arm", "P_arm", "lambda_laser", "gamma_IFO", "Omega_M", "L4", "R", "V_FGW", "hbar", "c"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be positive")
        for name in ("lambda_", "gamma", "kappa1", "gamma_1loss", "kappa_3loss", "kappa_4loss", "Q_scale"):
            if not getattr(self, name) >= 0:
                raise ParameterError(f"{name} must be non-negative")
        if not math.isfinite(self.Delta_d):
            raise ParameterError("Delta_d must be finite")

    @classmethod
    def fig6(cls):
        """Baseline-detector setting: narrower bandwidth and no detuning."""
        return cls(gamma_IFO=2 * np.pi * 200, Delta_d=0.0)

    def replace(self, **kw):
        return replace(self, **kw)

    @property
    def omega0(self):
        return 2 * np.pi * self.c / self.lambda_laser

    @property
    def G_arm(self):
        return np.sqrt(2 * self.P_arm * self.omega0 / (self.hbar * self.c * self.L_arm))

    @property
    def G_M(self):
        return self.G_arm * np.sqrt(self.hbar / (self.M * self.Omega_M))

    @property
    def g_NI(self):
        return np.sqrt(self.c * self.gamma / (2 * self.L_arm))

    @property
    def g24(self):
        return np.sqrt(self.c * self.gamma / self.L4)

    @property
    def g34(self):
        return np.sqrt(self.c * self.kappa1 / self.L4)

    def weights(self):
        return LqgWeights(self.Q_scale * np.eye(12), self.R, np.diag([self.V_FGW] + [0.5] * 8))


@dataclass(frozen=True)
class LqgWeights:
    Q: np.ndarray
    R: float
    V: np.ndarray

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=float)
        V = np.asarray(self.V, dtype=float)
        if not np.allclose(Q, Q.T) or np.min(la.eigvalsh(Q)) < -1e-12 * max(1.0, la.norm(Q)):
            raise ParameterError("Q must be symmetric positive semidefinite")
        if not float(self.R) > 0:
            raise ParameterError("R must be positive")
        if not np.array_equal(V, np.diag(np.diag(V))) or np.any(np.diag(V) < 0):
            raise ParameterError("V must be diagonal with non-negative entries")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "R", float(self.R))


def default_grid(points=400):
    return 2 * np.pi * np.logspace(1, 4, points)


@dataclass
class NoiseBudget:
    """Strain-referred spectral density S(omega) with per-channel terms (shape (8, N))."""

    omega: np.ndarray
    contributions: np.ndarray
    sql: np.ndarray
    flags: np.ndarray = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.flags is None:
            self.flags = np.zeros(self.omega.size, dtype=bool)

    @property
    def total(self):
        return np.sum(self.contributions, axis=0)

    def channel(self, name):
        return self.contributions[CHANNELS.index(name)]


def _sql(p, omega):
    return p.hbar / (p.M * p.L_arm ** 2 * omega ** 2)


def baseline_xi(p, s):
    """(Xi_Q, Xi_P): strain-referred transfer functions of the two input quadratures."""
    g = p.gamma_IFO
    xq = -np.sqrt(2 * g) * p.hbar * p.G_arm / (p.M * p.L_arm * s ** 2 * (s + g / 2))
    xp = (s - g / 2) / (np.sqrt(2 * g) * p.G_arm * p.L_arm)
    return xq, xp


def baseline_noise(p, omega, ignore_detuning=False):
    """S = (|Xi_Q|^2 + |Xi_P|^2)/2 for the resonant (zero-detuning) detector.

    Non-positive frequencies are flagged and left as NaN.
    """
    if p.Delta_d != 0 and not ignore_detuning:
        raise ParameterError("baseline closed forms assume Delta_d = 0")
    omega = np.asarray(omega, dtype=float)
    flags = omega <= 0
    contrib = np.zeros((len(CHANNELS), omega.size))
    sql = np.full(omega.size, np.nan)
    ok = ~flags
    xq, xp = baseline_xi(p, 1j * omega[ok])
    contrib[0, ok] = np.abs(xq) ** 2 / 2
    contrib[1, ok] = np.abs(xp) ** 2 / 2
    contrib[:, flags] = np.nan
    sql[ok] = _sql(p, omega[ok])
    return NoiseBudget(omega, contrib, sql, flags, {"mode": "baseline"})


@dataclass
class MizunoResult:
    value: float
    closed_form: float

    @property
    def rel_diff(self):
        return abs(self.value / self.closed_form - 1)


def mizuno_integral(p, cutoff_factor=1e4):
    """Integral of 1/|Xi_P(i w)|^2 over w in [0, inf) against 2 pi G_arm^2 L_arm^2.

    Adaptive quadrature up to X = cutoff_factor * gamma_IFO; the tail beyond X
    uses the large-w expansion c (1/X - a^2/(3 X^3) + a^4/(5 X^5)), a = gamma_IFO/2,
    with c the integrand's w^2 coefficient.
    """
    g = p.gamma_IFO

    def f(w):
        return 1.0 / abs(baseline_xi(p, 1j * w)[1]) ** 2

    X = cutoff_factor * g
    edges = [0.0, g / 2, 5 * g, 50 * g, X]
    body = sum(si.quad(f, a, b, epsabs=0, epsrel=1e-12, limit=200)[0] for a, b in zip(edges[:-1], edges[1:]))
    coef = f(X) * (X ** 2 + (g / 2) ** 2)
    a2 = (g / 2) ** 2
    tail = coef * (1 / X - a2 / (3 * X ** 3) + a2 ** 2 / (5 * X ** 5))
    return MizunoResult(body + tail, 2 * np.pi * p.G_arm ** 2 * p.L_arm ** 2)


def build_full_system(p):
    """12-state detector + filter model (A, B_w, C, D) in quadrature form."""
    gI, Dd, OM = p.gamma_IFO, p.Delta_d, p.Omega_M
    GM, gNI, g24, g34, lam = p.G_M, p.g_NI, p.g24, p.g34, p.lambda_
    g1, k3, k4 = p.gamma_1loss, p.kappa_3loss, p.kappa_4loss
    r2 = np.sqrt(2)
    A = np.zeros((12, 12))
    A[0, 1] = OM
    A[1, 2] = r2 * GM
    A[2, 2], A[2, 3], A[2, 5] = -gI / 2, Dd, gNI
    A[3, 0], A[3, 2], A[3, 3], A[3, 4] = r2 * GM, -Dd, -gI / 2, -gNI
    A[4, 3], A[4, 4], A[4, 6] = gNI, -g1 / 2, lam
    A[5, 2], A[5, 5], A[5, 7] = -gNI, -g1 / 2, -lam
    A[6, 4], A[6, 11] = lam, g24
    A[7, 5], A[7, 10] = -lam, -g24
    A[8, 8], A[8, 11] = -k3 / 2, g34
    A[9, 9], A[9, 10] = -k3 / 2, -g34
    A[10, 7], A[10, 9], A[10, 10] = g24, g34, -k4 / 2
    A[11, 6], A[11, 8], A[11, 11] = -g24, -g34, -k4 / 2
    Bw = np.zeros((12, 9))
    Bw[1, 0] = 1 / np.sqrt(p.hbar * p.M * OM)
    Bw[2, 1] = Bw[3, 2] = -np.sqrt(gI)
    Bw[4, 3] = Bw[5, 4] = -np.sqrt(g1)
    Bw[8, 5] = Bw[9, 6] = -np.sqrt(k3)
    Bw[10, 7] = Bw[11, 8] = -np.sqrt(k4)
    C = np.zeros((2, 12))
    C[0, 2] = C[1, 3] = np.sqrt(gI)
    D = np.zeros((2, 9))
    D[0, 1] = D[1, 2] = 1.0
    return StateSpaceModel(A, Bw, C, D, STATE_LABELS, INPUT_LABELS, OUTPUT_LABELS)


def _staircase_rank(A, B, tol):
    """Dimension of the Krylov space of (A, B) by orthogonal staircase (Arnoldi) steps
    on the diagonally balanced pair.  A new direction is kept when its component
    orthogonal to the current basis exceeds ``tol * ||A_bal||_2``."""
    n = A.shape[0]
    Ab, T = la.matrix_balance(A, permute=False, separate=True)
    scale = T[0]
    Bb = B / scale[:, None]
    nA = la.norm(Ab, 2)
    thresh = tol * nA
    basis = []

    def push(v, limit):
        for _ in range(2):
            for u in basis:
                v = v - np.vdot(u, v) * u
        h = la.norm(v)
        if h > limit:
            basis.append(v / h)
            return True
        return False

    block = []
    nb = la.norm(Bb, 2)
    for j in range(Bb.shape[1]):
        if push(Bb[:, j].astype(complex), tol * nb) and nb > 0:
            block.append(basis[-1])
    while block and len(basis) < n:
        new = []
        for v in block:
            if push(Ab @ v, thresh):
                new.append(basis[-1])
            if len(basis) == n:
                break
        block = new
    return len(basis)


def _krylov_svd_rank(A, B, tol):
    n = A.shape[0]
    blocks, X = [], B
    for _ in range(n):
        blocks.append(X)
        X = A @ X
    sv = la.svdvals(np.hstack(blocks))
    return int(np.sum(sv > tol * sv[0])) if sv[0] > 0 else 0


def ctrb_obsv(A, B_u, C_m, tol=1e-10, method="staircase"):
    """Controllability rank of (A, B_u) and observability rank of (A, C_m).

    ``method="staircase"`` (default) builds the Krylov space with orthogonal
    steps on the balanced matrix, which stays reliable when the entries of A span
    many orders of magnitude.  ``method="svd"`` thresholds the singular values
    of the literal matrix [B, AB, ..., A^(n-1) B] at ``tol * sigma_max``.
    """
    A = np.asarray(A)
    B_u = np.asarray(B_u).reshape(A.shape[0], -1)
    C_m = np.asarray(C_m).reshape(-1, A.shape[0])
    rank = _staircase_rank if method == "staircase" else _krylov_svd_rank
    if method not in ("staircase", "svd"):
        raise ParameterError("method must be 'staircase' or 'svd'")
    return rank(A, B_u, tol), rank(A.conj().T, C_m.conj().T, tol)


@dataclass
class CareSolution:
    """Riccati solution with residual norms.

    ``residual`` is the Frobenius residual of the refined extended-precision
    iterate; ``residual_float64`` is the residual of ``P`` itself (rounded to
    float64) evaluated exactly, which is bounded below by rounding of P.
    """

    P: np.ndarray
    residual: float
    residual_float64: float
    iterations: int
    q_norm: float
    P_extended: np.ndarray = None

    @property
    def relative_residual(self):
        return self.residual / self.q_norm if self.q_norm > 0 else self.residual


_to_mp = np.vectorize(mp.mpf, otypes=[object])
_to_float = np.vectorize(float, otypes=[float])


def _mp_residual(P, A, B, Q, Rinv, S):
    K = Rinv.dot(B.T.dot(P) + S.T)
    res = P.dot(A) + A.T.dot(P) - (P.dot(B) + S).dot(K) + Q
    return res, K


def _frob(M):
    return float(mp.sqrt(mp.fsum(x * x for x in M.ravel())))


def solve_care(A, B, Q, R, S=None, refine=True, dps=50, max_iter=40):
    """Stabilizing solution of P A + A^T P - (P B + S) R^-1 (B^T P + S^T) + Q = 0.

    The initial solution comes from the ordered Schur decomposition of the
    Hamiltonian pencil (scipy).  With ``refine`` it is polished by Newton steps:
    each step solves the closed-loop Lyapunov equation for the correction in
    float64 while the iterate and residual are carried with ``dps`` digits.
    Real matrices only.
    """
    A, B, Q = (np.asarray(x) for x in (A, B, Q))
    R = np.atleast_2d(np.asarray(R, dtype=float))
    n, m = A.shape[0], R.shape[0]
    B = B.reshape(n, m)
    S = np.zeros((n, m)) if S is None else np.asarray(S, dtype=float).reshape(n, m)
    if any(np.iscomplexobj(x) and np.any(np.imag(x) != 0) for x in (A, B, Q)):
        raise ParameterError("solve_care handles real matrices only")
    A, B, Q = (np.real(x).astype(float) for x in (A, B, Q))
    try:
        P0 = la.solve_continuous_are(A, B, Q, R, s=S)
    except (la.LinAlgError, ValueError) as exc:
        raise CareError(f"CARE not solvable: {exc}") from exc
    P0 = (P0 + P0.T) / 2
    Rinv = la.inv(R)
    Acl = A - B @ Rinv @ (B.T @ P0 + S.T)
    if np.max(la.eigvals(Acl).real) >= 0:
        raise CareError("CARE not solvable: no stabilizing solution (stable subspace has wrong dimension)")
    qn = float(la.norm(Q))

    with mp.workdps(dps):
        Am, Bm, Qm, Sm, Rm = (_to_mp(x) for x in (A, B, Q, S, Rinv))
        P = _to_mp(P0)
        res, K = _mp_residual(P, Am, Bm, Qm, Rm, Sm)
        r = _frob(res)
        it = 0
        if refine:
            for it in range(1, max_iter + 1):
                if r <= 1e-25 * max(qn, 1e-300):
                    break
                Ac = _to_float(Am - Bm.dot(K))
                X = la.solve_continuous_lyapunov(Ac.T, -_to_float(res))
                P_new = P + _to_mp((X + X.T) / 2)
                res_new, K_new = _mp_residual(P_new, Am, Bm, Qm, Rm, Sm)
                r_new = _frob(res_new)
                if not r_new < r:
                    break
                P, res, K, r = P_new, res_new, K_new, r_new
        Pf = _to_float(P)
        r64 = _frob(_mp_residual(_to_mp(Pf), Am, Bm, Qm, Rm, Sm)[0])
    return CareSolution(Pf, r, r64, it, qn, P)


@dataclass
class LqgResult:
    F_u: np.ndarray
    K_u: np.ndarray
    A_tot: np.ndarray
    B_tot: np.ndarray
    C_tot: np.ndarray
    D_tot: np.ndarray
    care_F: CareSolution = None
    care_K: CareSolution = None
    ranks: tuple = None

    @property
    def max_re_eig(self):
        return float(np.max(la.eigvals(self.A_tot).real))


def _channels(model, control_state, measured_output):
    n = model.n_states
    B_u = np.zeros((n, 1))
    B_u[control_state, 0] = 1.0
    A = np.real(model.A)
    C_m = np.real(model.C[measured_output:measured_output + 1])
    D_m = np.real(model.D[measured_output:measured_output + 1])
    return A, np.real(model.B), B_u, C_m, D_m


def closed_loop_blocks(model, F_u, K_u, control_state=1, measured_output=1):
    """(A_tot, B_tot, C_tot, D_tot) over the stacked state (x, e = x_hat - x)."""
    A, Bw, B_u, C_m, D_m = _channels(model, control_state, measured_output)
    n = A.shape[0]
    F = np.asarray(F_u, dtype=float).reshape(1, n)
    K = np.asarray(K_u, dtype=float).reshape(n, 1)
    A_tot = np.block([[A - B_u @ F, -B_u @ F], [np.zeros((n, n)), A - K @ C_m]])
    B_tot = np.vstack([Bw, K @ D_m - Bw])
    C_tot = np.hstack([C_m, np.zeros((1, n))])
    return A_tot, B_tot, C_tot, D_m.copy()


def lqg_synthesize(model, w, control_state=1, measured_output=1, check_ranks=True):
    """Regulator and Kalman gains plus the closed-loop block matrices.

    F_u = R^-1 B_u^T P_F; the Kalman Riccati equation carries the cross term
    B_w V D_m^T and K_u = (P_K C_m^T + B_w V D_m^T)(D_m V D_m^T)^-1.
    """
    A, Bw, B_u, C_m, D_m = _channels(model, control_state, measured_output)
    ranks = ctrb_obsv(A, B_u, C_m)
    n = A.shape[0]
    if check_ranks and ranks != (n, n):
        raise RankDeficiencyError(f"controllability/observability ranks {ranks} below {n}")
    Rk = D_m @ w.V @ D_m.T
    if la.svdvals(Rk)[-1] <= 1e-14 * max(1.0, la.norm(w.V)):
        raise ParameterError("D_m V D_m^T is singular: the measured output carries no noise")
    care_F = solve_care(A, B_u, w.Q, np.atleast_2d(w.R))
    F_u = (B_u.T @ care_F.P) / w.R
    S = Bw @ w.V @ D_m.T
    care_K = solve_care(A.T, C_m.T, Bw @ w.V @ Bw.T, Rk, S)
    K_u = (care_K.P @ C_m.T + S) @ la.inv(Rk)
    blocks = closed_loop_blocks(model, F_u, K_u, control_state, measured_output)
    return LqgResult(F_u, K_u, *blocks, care_F, care_K, ranks)


def controlled_noise(model, gains, p, omega, require_stable=True, control_state=1, measured_output=1):
    """Noise budget of the LQG-controlled detector.

    ``gains`` is an :class:`LqgResult` or a pair (F_u, K_u).  The force input is
    converted to strain via F_GW = M L_arm (i w)^2 h; each noise input k
    contributes |Psi_k|^2 / (2 |Psi_h|^2).  Frequencies at poles are flagged.
    """
    if isinstance(gains, LqgResult):
        A_tot, B_tot, C_tot, D_tot = gains.A_tot, gains.B_tot, gains.C_tot, gains.D_tot
    else:
        A_tot, B_tot, C_tot, D_tot = closed_loop_blocks(model, *gains, control_state, measured_output)
    max_re = float(np.max(la.eigvals(A_tot).real))
    if require_stable and max_re >= 0:
        raise ParameterError(f"A_tot is not stable (max Re eig = {max_re:.6g})")
    omega = np.asarray(omega, dtype=float)
    N = A_tot.shape[0]
    contrib = np.full((len(CHANNELS), omega.size), np.nan)
    flags = np.zeros(omega.size, dtype=bool)
    I = np.eye(N)
    eig = la.eigvals(A_tot)
    for k, W in enumerate(omega):
        if W <= 0 or np.min(np.abs(1j * W - eig)) <= 1e-12 * max(1.0, W):
            flags[k] = True
            continue
        M = 1j * W * I - A_tot
        T = (C_tot @ la.solve(M, B_tot) + D_tot)[0]
        psi_h = T[0] * p.M * p.L_arm * (1j * W) ** 2
        contrib[:, k] = np.abs(T[1:]) ** 2 / (2 * np.abs(psi_h) ** 2)
    sql = np.where(omega > 0, _sql(p, np.where(omega > 0, omega, 1.0)), np.nan)
    return NoiseBudget(omega, contrib, sql, flags, {"mode": "controlled", "max_re_eig_A_tot": max_re})


@dataclass
class SweepEntry:
    value: float
    budget: NoiseBudget = None
    lqg: LqgResult = None
    error: str = None


def loss_sweep(p, channel, values, omega):
    """One controlled noise budget per loss value; failures are recorded, not raised."""
    if channel not in SWEEP_CHANNELS:
        raise ParameterError(f"channel must be one of {SWEEP_CHANNELS}")
    out = []
    for v in values:
        if not v > 0:
            raise ParameterError("sweep values must be positive")
        q = p.replace(**{channel: float(v)})
        model = build_full_system(q)
        try:
            lqg = lqg_synthesize(model, q.weights())
            budget = controlled_noise(model, lqg, q, omega)
            out.append(SweepEntry(float(v), budget, lqg))
        except (CareError, RankDeficiencyError, ParameterError, PoleError) as exc:
            out.append(SweepEntry(float(v), None, None, f"{type(exc).__name__}: {exc}"))
    return out


def parse_config(source, unit="angular"):
    """GwParams from flat ``key = value`` text (or a path); unknown keys are errors.

    With ``unit="hertz"`` every rate is multiplied by 2 pi.
    """
    if unit not in ("angular", "hertz"):
        raise ParameterError("unit must be 'angular' or 'hertz'")
    text = source
    if "\n" not in source and "=" not in source and ":" not in source:
        with open(source) as fh:
            text = fh.read()
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string("[params]\n" + text)
    except configparser.Error as exc:
        raise ParameterError(f"cannot parse config: {exc}") from exc
    kw = {}
    for key, raw in cp["params"].items():
        if key not in CONFIG_KEYS:
            raise ParameterError(f"unknown config key {key!r}")
        try:
            value = float(raw)
        except ValueError as exc:
            raise ParameterError(f"value for {key!r} is not a number: {raw!r}") from exc
        name = CONFIG_KEYS[key]
        kw[name] = value * 2 * np.pi if unit == "hertz" and name in RATE_KEYS else value
    return GwParams(**kw)


def write_noise_csv(budget, fh, leading=None):
    """NoiseBudget rows with sqrt spectral densities (17 significant digits).

    ``leading`` is an optional (name, value) pair prepended as the first column.
    """
    wr = csv.writer(fh, lineterminator="\n")
    head = ["omega", "sqrtS_total"] + [f"sqrtS_{c}" for c in CHANNELS] + ["sqrtSQL"]
    if leading is not None:
        head = [leading[0]] + head
    wr.writerow(head)
    total = np.sqrt(budget.total)
    parts = np.sqrt(budget.contributions)
    sql = np.sqrt(budget.sql)
    for k, w in enumerate(budget.omega):
        row = [w, total[k], *parts[:, k], sql[k]]
        row = [f"{x:.17g}" for x in row]
        if leading is not None:
            row = [f"{leading[1]:.17g}"] + row
        wr.writerow(row)
