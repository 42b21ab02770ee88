"""Linear state-space models of the loop-cavity realizations.

A model is ``dx/dt = A x + B u``, ``y = C x + D u`` with complex matrices.
Builders cover the integrator (amplifier + control cavity + loop cavity), the
self-oscillator and the phase-cancelling filter; all use the mode ordering
(a1, a2^dag, a3^dag, a4^dag) where a4 is the loop cavity.
"""

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .errors import InternalConsistencyError, NumericGuardError, ParameterError, PoleError
from .components import _report
from .rational import Polynomial, Port, RationalFunction, TransferMatrix, signature_matrix

C_LIGHT = 3e8
EXPM_GUARD = 50.0

__all__ = [
    "C_LIGHT",
    "StateSpaceModel",
    "LoopCavityParams",
    "Trajectory",
    "freq_response",
    "freq_response_grid",
    "to_transfer_matrix",
    "check_model_commutation",
    "build_integrator_model",
    "integrator_coefficients",
    "integrator_g21",
    "build_self_oscillator",
    "build_phase_filter",
    "phase_filter_coefficients",
    "simulate_mean",
    "quadratures",
    "qubit_readout_mean",
    "write_trajectory_csv",
]


def _labels(given, prefix, n):
    labels = tuple(given) if given else tuple(f"{prefix}{k}" for k in range(n))
    if len(labels) != n or len(set(labels)) != n:
        raise ParameterError(f"need {n} unique {prefix} labels")
    return labels


@dataclass(frozen=True)
class StateSpaceModel:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    state_labels: tuple = ()
    input_labels: tuple = ()
    output_labels: tuple = ()
    input_ports: tuple = ()
    output_ports: tuple = ()

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=complex))
        n = A.shape[0]
        B = np.asarray(self.B, dtype=complex).reshape(n, -1) if n else np.asarray(self.B, dtype=complex)
        C = np.asarray(self.C, dtype=complex)
        D = np.atleast_2d(np.asarray(self.D, dtype=complex))
        p, m = D.shape
        B = B.reshape(n, m)
        C = C.reshape(p, n)
        if A.shape != (n, n):
            raise ParameterError("A must be square")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "state_labels", _labels(self.state_labels, "x", n))
        object.__setattr__(self, "input_labels", _labels(self.input_labels, "u", m))
        object.__setattr__(self, "output_labels", _labels(self.output_labels, "y", p))
        ip = tuple(Port(x) for x in self.input_ports) or (Port.ANNIHILATION,) * m
        op = tuple(Port(x) for x in self.output_ports) or (Port.ANNIHILATION,) * p
        if len(ip) != m or len(op) != p:
            raise ParameterError("port tuples must match input/output counts")
        object.__setattr__(self, "input_ports", ip)
        object.__setattr__(self, "output_ports", op)

    @property
    def n_states(self):
        return self.A.shape[0]

    @property
    def shape(self):
        return self.D.shape


@dataclass(frozen=True)
class LoopCavityParams:
    """Amplifier rates, control-cavity rate and loop length ``L4`` (m).

    The loop couplings g24 = sqrt(c*gamma/L4) and g34 = sqrt(c*kappa/L4) are
    derived, never set directly.
    """

    gamma: float
    lambda_: float
    kappa: float
    L4: float

    def __post_init__(self):
        if not (self.gamma > 0 and self.lambda_ > 0 and self.kappa > 0 and self.L4 > 0):
            raise ParameterError("gamma, lambda_, kappa and L4 must be positive")

    @classmethod
    def from_c_over_L4(cls, gamma, lambda_, kappa, c_over_L4):
        return cls(gamma, lambda_, kappa, C_LIGHT / c_over_L4)

    @property
    def g24(self):
        return np.sqrt(C_LIGHT * self.gamma / self.L4)

    @property
    def g34(self):
        return np.sqrt(C_LIGHT * self.kappa / self.L4)


def freq_response(m, omega):
    """C (i w I - A)^-1 B + D by a linear solve."""
    n = m.n_states
    if n == 0:
        return m.D.copy()
    M = 1j * omega * np.eye(n) - m.A
    sv = la.svdvals(M)
    if sv[-1] <= 1e-13 * max(sv[0], 1e-300):
        raise PoleError(1j * omega, f"i*omega={1j * omega!r} is numerically an eigenvalue of A")
    return m.C @ la.solve(M, m.B) + m.D


def freq_response_grid(m, omegas):
    return np.stack([freq_response(m, w) for w in np.asarray(omegas, dtype=float)])


def check_model_commutation(m, omegas, tol=1e-9):
    """T J_in T^dag = J_out on the direct frequency response of a state-space model."""
    omegas = np.asarray(omegas, dtype=float)
    v = freq_response_grid(m, omegas)
    jin, jout = signature_matrix(m.input_ports), signature_matrix(m.output_ports)
    dev = v @ jin @ np.conj(np.swapaxes(v, -1, -2)) - jout
    return _report({"commutation": np.max(np.abs(dev), axis=(-1, -2))}, omegas, tol)


def _faddeev_leverrier(A):
    """Characteristic coefficients (ascending) and adjugate matrices of (sI - A).

    Works on A / alpha with alpha = max|A_ij| and rescales, which keeps the
    traces in range for large rates.
    """
    n = A.shape[0]
    alpha = float(np.max(np.abs(A))) or 1.0
    As = A / alpha
    c = np.zeros(n + 1, dtype=complex)
    c[n] = 1.0
    Ms = []
    M = np.eye(n, dtype=complex)
    for k in range(1, n + 1):
        if k > 1:
            M = As @ M + c[n - k + 1] * np.eye(n)
        Ms.append(M)
        c[n - k] = -np.trace(As @ M) / k
    char = c * alpha ** (n - np.arange(n + 1))
    adj = [Mk * alpha ** (k - 1) for k, Mk in enumerate(Ms, start=1)]  # coefficient of s^(n-k)
    return char, adj


def to_transfer_matrix(m, verify=True, rtol=1e-8):
    """Rational transfer matrix via the Faddeev-LeVerrier resolvent expansion.

    Every entry shares the characteristic polynomial det(sI - A) as
    denominator.  With ``verify`` the result is checked against
    :func:`freq_response` at 8 pseudo-random frequencies.
    """
    n = m.n_states
    if n > 16:
        raise ParameterError("resolvent expansion limited to n <= 16")
    p, q = m.shape
    if n == 0:
        return TransferMatrix.from_constant(m.D, m.input_ports, m.output_ports)
    char, adj = _faddeev_leverrier(m.A)
    den = Polynomial(char)
    rows = []
    for i in range(p):
        row = []
        for j in range(q):
            coeffs = np.zeros(n + 1, dtype=complex)
            for k, Mk in enumerate(adj, start=1):
                coeffs[n - k] += (m.C[i] @ Mk @ m.B[:, j])
            coeffs += m.D[i, j] * char
            row.append(RationalFunction(coeffs, den))
        rows.append(row)
    tm = TransferMatrix(rows, m.input_ports, m.output_ports)
    if verify:
        scale = float(np.max(np.abs(la.eigvals(m.A)))) or 1.0
        rng = np.random.default_rng(20240611)
        for w in scale * 10 ** rng.uniform(-2, 1, 8):
            try:
                ref = freq_response(m, w)
            except PoleError:
                continue
            got = tm(1j * w)
            if np.max(np.abs(got - ref)) > rtol * max(np.max(np.abs(ref)), 1e-300):
                raise InternalConsistencyError(f"resolvent expansion disagrees with direct solve at omega={w}")
    return tm


_MODES = ("a1", "a2_dag", "a3_dag", "a4_dag")


def _loop_matrix(p, a3_diag):
    g24, g34 = p.g24, p.g34
    return np.array(
        [
            [-p.gamma / 2, p.lambda_, 0, 0],
            [p.lambda_, 0, 0, 1j * g24],
            [0, 0, a3_diag, 1j * g34],
            [0, 1j * g24, 1j * g34, 0],
        ],
        dtype=complex,
    )


def build_integrator_model(p):
    """Amplifier + control cavity + loop cavity; inputs (b1, b4^dag), outputs (b1~, b3~^dag)."""
    A = _loop_matrix(p, -p.kappa / 2)
    B = np.zeros((4, 2), dtype=complex)
    B[0, 0] = -np.sqrt(p.gamma)
    B[2, 1] = -np.sqrt(p.kappa)
    C = np.zeros((2, 4), dtype=complex)
    C[0, 0] = np.sqrt(p.gamma)
    C[1, 2] = np.sqrt(p.kappa)
    return StateSpaceModel(
        A, B, C, np.eye(2), _MODES, ("b1", "b4_dag"), ("b1_out", "b3_dag_out"),
        (Port.ANNIHILATION, Port.CREATION), (Port.ANNIHILATION, Port.CREATION),
    )


def integrator_coefficients(p):
    """alpha0 and (beta3, beta2, beta1, beta0) of G21 = alpha0 / (s^4 + beta3 s^3 + ... + beta0)."""
    g, lam, k = p.gamma, p.lambda_, p.kappa
    g24s, g34s = p.g24 ** 2, p.g34 ** 2
    alpha0 = np.sqrt(g * k) * lam * p.g24 * p.g34
    beta0 = g * k * g24s / 4 - lam ** 2 * g34s
    beta1 = (g * g24s + k * g24s + g * g34s - k * lam ** 2) / 2
    beta2 = g * k / 4 - lam ** 2 + g24s + g34s
    beta3 = (g + k) / 2
    return alpha0, (beta3, beta2, beta1, beta0)


def integrator_g21(p):
    alpha0, (b3, b2, b1, b0) = integrator_coefficients(p)
    return RationalFunction([alpha0], [b0, b1, b2, b3, 1.0])


def build_self_oscillator(p, delta):
    """Mean dynamics with a detuned control cavity; output <b3~^dag> = sqrt(kappa) <a3^dag>."""
    A = _loop_matrix(p, -p.kappa / 2 + 1j * delta)
    C = np.zeros((1, 4), dtype=complex)
    C[0, 2] = np.sqrt(p.kappa)
    return StateSpaceModel(
        A, np.zeros((4, 0)), C, np.zeros((1, 0)), _MODES, (), ("b3_dag_out",), (), (Port.CREATION,)
    )


def phase_filter_coefficients(p):
    """Numerator and denominator coefficients (descending, monic) of Z(s)."""
    g, lam = p.gamma, p.lambda_
    g2 = p.g24 ** 2 + p.g34 ** 2
    b0 = -lam ** 2 * p.g34 ** 2
    alpha = [1.0, -g / 2, g2 - lam ** 2, -g2 * g / 2, b0]
    beta = [1.0, g / 2, g2 - lam ** 2, g2 * g / 2, b0]
    return alpha, beta


def build_phase_filter(p):
    """Single-port filter: the control cavity (rate ``p.kappa``) couples only to
    the loop cavity.  Returns the model and Z(s) = alpha(s)/beta(s)."""
    A = _loop_matrix(p, 0.0)
    B = np.zeros((4, 1), dtype=complex)
    B[0, 0] = -np.sqrt(p.gamma)
    C = np.zeros((1, 4), dtype=complex)
    C[0, 0] = np.sqrt(p.gamma)
    model = StateSpaceModel(A, B, C, np.eye(1), _MODES, ("b_in",), ("b_out",))
    alpha, beta = phase_filter_coefficients(p)
    Z = RationalFunction(alpha[::-1], beta[::-1])
    return model, Z


@dataclass
class Trajectory:
    t: np.ndarray
    states: np.ndarray
    outputs: np.ndarray
    output_labels: tuple = field(default_factory=tuple)


def simulate_mean(m, x0, t_grid):
    """Mean evolution x(t) = exp(A (t - t0)) x0 on an increasing grid.

    Each step uses the scaling-and-squaring Pade matrix exponential; steps with
    ||A||_1 * dt > 50 are refused as ill-conditioned.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or np.any(np.diff(t) <= 0):
        raise ParameterError("t_grid must be a non-empty increasing sequence")
    x = np.asarray(x0, dtype=complex).reshape(m.n_states)
    norm_a = la.norm(m.A, 1)
    states = np.empty((t.size, m.n_states), dtype=complex)
    states[0] = x
    cache = {}
    for k in range(1, t.size):
        dt = t[k] - t[k - 1]
        if norm_a * dt > EXPM_GUARD:
            raise NumericGuardError(f"step dt={dt} gives ||A||*dt={norm_a * dt:.3g} > {EXPM_GUARD}")
        E = cache.get(dt)
        if E is None:
            E = cache[dt] = la.expm(m.A * dt)
        x = E @ x
        states[k] = x
    outputs = states @ m.C.T
    return Trajectory(t, states, outputs, m.output_labels)


def quadratures(y_dag):
    """(q, p) of a field whose creation-operator mean is ``y_dag``."""
    y = np.asarray(y_dag)
    return np.sqrt(2) * y.real, -np.sqrt(2) * y.imag


def qubit_readout_mean(Gamma, kappa, t, sigma_x):
    """Mean output quadratures of the direct (q1) and integrated (q3) qubit readout signal."""
    if not (Gamma > 0 and kappa > 0) or np.any(np.asarray(t) < 0) or sigma_x not in (1, -1):
        raise ParameterError("need Gamma > 0, kappa > 0, t >= 0 and sigma_x = +-1")
    decay = np.exp(-Gamma * np.asarray(t) / 2)
    q1 = np.sqrt(Gamma / 2) * decay * sigma_x
    q3 = kappa * np.sqrt(2 / Gamma) * (1 - decay) * sigma_x
    return q1, q3


def write_trajectory_csv(traj, fh, labels=None):
    """Columns t, then <label>_re, <label>_im per output, 17 significant digits."""
    labels = labels or traj.output_labels
    wr = csv.writer(fh, lineterminator="\n")
    wr.writerow(["t"] + [f"{lab}_{part}" for lab in labels for part in ("re", "im")])
    for k, tk in enumerate(traj.t):
        row = [f"{tk:.17g}"]
        for y in traj.outputs[k]:
            row += [f"{y.real:.17g}", f"{y.imag:.17g}"]
        wr.writerow(row)
