"""Polynomials, rational functions and transfer matrices in the Laplace variable s.

Coefficients are complex doubles stored in ascending degree.  A rational
function is kept as ``gain * prod(num factors) / prod(den factors)`` with monic
factors.  Only factors that are *identical* (same coefficient array) are ever
divided out, which is exact algebra; near pole/zero pairs are never removed
implicitly and need an explicit :meth:`RationalFunction.cancel`.
"""

import enum
from numbers import Number

import numpy as np

from .errors import ParameterError, PoleError, SignatureError, UndefinedRootsError

RESIDUE_RTOL = 1e-13
POLE_ATOL = 1e-300

__all__ = [
    "Polynomial",
    "RationalFunction",
    "TransferMatrix",
    "Port",
    "poly_arith",
    "roots",
    "evaluate",
    "para_conjugate",
    "cancel",
    "signature_matrix",
]


def _trim(a):
    a = np.atleast_1d(np.asarray(a, dtype=complex)).ravel()
    nz = np.nonzero(a)[0]
    if nz.size == 0:
        return np.zeros(1, dtype=complex)
    return a[: nz[-1] + 1].copy()


class Polynomial:
    """Complex polynomial ``sum_k coeffs[k] * s**k``.

    Trailing zero coefficients are removed, so the leading coefficient is
    nonzero unless the polynomial is identically zero.  Addition and
    subtraction zero out coefficients that are pure rounding residue of a
    cancellation (below ``1e-13`` times the operands at that power).
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs):
        if isinstance(coeffs, Polynomial):
            c = coeffs._c
        else:
            c = _trim(coeffs)
            c.setflags(write=False)
        self._c = c

    @classmethod
    def from_roots(cls, rts, lead=1.0):
        rts = np.asarray(rts, dtype=complex)
        if rts.size == 0:
            return cls([lead])
        return cls(lead * np.poly(rts)[::-1])

    @property
    def coeffs(self):
        return self._c

    @property
    def degree(self):
        return self._c.size - 1

    @property
    def is_zero(self):
        return self._c.size == 1 and self._c[0] == 0

    @property
    def lead(self):
        return self._c[-1]

    def __call__(self, s):
        return np.polyval(self._c[::-1], s)

    def roots(self):
        """All complex roots with multiplicity (companion-matrix eigenvalues)."""
        if self.is_zero:
            raise UndefinedRootsError("undefined roots: zero polynomial")
        return np.roots(self._c[::-1]).astype(complex)

    def para_conjugate(self):
        """Coefficients conjugated and s replaced by -s."""
        return Polynomial(np.conj(self._c) * (-1.0) ** np.arange(self._c.size))

    def coefficient_conjugate(self):
        """Coefficients conjugated, argument unchanged."""
        return Polynomial(np.conj(self._c))

    def scale_argument(self, a):
        """Polynomial q(s) = p(a*s)."""
        return Polynomial(self._c * complex(a) ** np.arange(self._c.size))

    def allclose(self, other, rtol=1e-12, atol=0.0):
        other = Polynomial(other)
        n = max(self._c.size, other._c.size)
        a = np.pad(self._c, (0, n - self._c.size))
        b = np.pad(other._c, (0, n - other._c.size))
        scale = max(np.max(np.abs(a)), np.max(np.abs(b)))
        return bool(np.all(np.abs(a - b) <= atol + rtol * scale))

    def _combine(self, other, sign):
        n = max(self._c.size, other._c.size)
        a = np.pad(self._c, (0, n - self._c.size))
        b = sign * np.pad(other._c, (0, n - other._c.size))
        r = a + b
        r[np.abs(r) <= RESIDUE_RTOL * (np.abs(a) + np.abs(b))] = 0
        return Polynomial(r)

    def __add__(self, other):
        other = _as_poly(other)
        return other if other is NotImplemented else self._combine(other, 1.0)

    __radd__ = __add__

    def __sub__(self, other):
        other = _as_poly(other)
        return other if other is NotImplemented else self._combine(other, -1.0)

    def __rsub__(self, other):
        other = _as_poly(other)
        return other if other is NotImplemented else other._combine(self, -1.0)

    def __neg__(self):
        return Polynomial(-self._c)

    def __mul__(self, other):
        other = _as_poly(other)
        if other is NotImplemented:
            return other
        return Polynomial(np.convolve(self._c, other._c))

    __rmul__ = __mul__

    def __pow__(self, k):
        out = Polynomial([1.0])
        for _ in range(int(k)):
            out = out * self
        return out

    def __repr__(self):
        return f"Polynomial({np.array2string(self._c, precision=6)})"


def _as_poly(x):
    if isinstance(x, Polynomial):
        return x
    if isinstance(x, Number) or (isinstance(x, np.ndarray) and x.ndim == 0):
        return Polynomial([complex(x)])
    return NotImplemented


def poly_arith(a, b, op):
    """Apply ``op`` in {"add", "sub", "mul"} to two polynomials."""
    a, b = Polynomial(a), Polynomial(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ParameterError(f"unknown polynomial operation {op!r}")


def roots(p):
    return Polynomial(p).roots()


def _cluster(rts, radius):
    """Group roots closer than ``radius * max(1, |r|)``; return [centroid, count] pairs."""
    rts = list(rts)
    out = []
    while rts:
        group = [rts.pop(0)]
        changed = True
        while changed:
            changed = False
            for r in list(rts):
                if any(abs(r - g) <= radius * max(1.0, abs(g)) for g in group):
                    group.append(r)
                    rts.remove(r)
                    changed = True
        out.append([complex(np.mean(group)), len(group)])
    return out


# ---------------------------------------------------------------- factors

def _key(p):
    return p.coeffs.tobytes()


def _factor_dict(pairs):
    """Normalize (poly, mult) pairs to {key: [monic poly, mult]} and a scalar gain."""
    gain = 1.0 + 0j
    out = {}
    for p, m in pairs:
        if p.is_zero:
            raise ParameterError("zero factor")
        lead = p.lead
        gain *= lead ** m
        if p.degree == 0:
            continue
        monic = Polynomial(p.coeffs / lead)
        k = _key(monic)
        if k in out:
            out[k][1] += m
        else:
            out[k] = [monic, m]
    return gain, out


def _expand(factors):
    out = Polynomial([1.0])
    for p, m in factors:
        out = out * p ** m
    return out


class RationalFunction:
    """``gain * prod(numf) / prod(denf)`` with monic factor polynomials.

    Build from polynomials with ``RationalFunction(num, den)``.  ``num`` and
    ``den`` give the expanded polynomials; evaluation uses the factors.
    """

    __slots__ = ("gain", "numf", "denf", "_num", "_den")

    def __init__(self, num, den=1.0):
        num = num if isinstance(num, Polynomial) else Polynomial(num)
        den = den if isinstance(den, Polynomial) else Polynomial(den)
        if den.is_zero:
            raise ParameterError("denominator is identically zero")
        built = _build(0j if num.is_zero else 1.0, [] if num.is_zero else [(num, 1)], [(den, 1)])
        for name in RationalFunction.__slots__:
            setattr(self, name, getattr(built, name))

    @classmethod
    def constant(cls, value):
        return cls([value], [1.0])

    @classmethod
    def s(cls):
        return cls([0.0, 1.0], [1.0])

    # ---- expanded views
    @property
    def num(self):
        if self._num is None:
            self._num = _expand(self.numf) * self.gain if self.gain != 0 else Polynomial([0.0])
        return self._num

    @property
    def den(self):
        if self._den is None:
            self._den = _expand(self.denf)
        return self._den

    @property
    def is_zero(self):
        return self.gain == 0

    @property
    def num_degree(self):
        return sum(p.degree * m for p, m in self.numf) if not self.is_zero else -1

    @property
    def den_degree(self):
        return sum(p.degree * m for p, m in self.denf)

    @property
    def is_proper(self):
        return self.num_degree <= self.den_degree

    def poles(self):
        rts = [np.repeat(p.roots(), m) for p, m in self.denf]
        return np.concatenate(rts) if rts else np.zeros(0, dtype=complex)

    def zeros(self):
        rts = [np.repeat(p.roots(), m) for p, m in self.numf]
        return np.concatenate(rts) if rts else np.zeros(0, dtype=complex)

    def at_infinity(self):
        """Limit as |s| -> infinity; ``inf`` for improper functions."""
        if self.is_zero or self.num_degree < self.den_degree:
            return 0j
        if self.num_degree == self.den_degree:
            return complex(self.gain)
        return complex(np.inf)

    def __call__(self, s):
        d = np.ones(np.shape(s), dtype=complex)
        for p, m in self.denf:
            d = d * p(s) ** m
        bad = np.abs(d) < POLE_ATOL
        if np.any(bad):
            where = s if np.ndim(s) == 0 else np.asarray(s)[bad][0]
            raise PoleError(where)
        n = np.full(np.shape(s), self.gain, dtype=complex)
        for p, m in self.numf:
            n = n * p(s) ** m
        out = n / d
        return out if np.ndim(s) else complex(out)

    # ---- transforms
    def _map_factors(self, fn, gain_fn):
        num = [(fn(p), m) for p, m in self.numf]
        den = [(fn(p), m) for p, m in self.denf]
        return _build(gain_fn(self.gain), num, den)

    def para_conjugate(self):
        return self._map_factors(Polynomial.para_conjugate, np.conj)

    def coefficient_conjugate(self):
        return self._map_factors(Polynomial.coefficient_conjugate, np.conj)

    def scale_argument(self, a):
        return self._map_factors(lambda p: p.scale_argument(a), lambda g: g)

    def cancel(self, tol=1e-9):
        """Remove (zero, pole) pairs closer than ``tol * max(1, |pole|)``.

        Returns ``(reduced, pairs)``.  Repeated roots are compared by cluster
        centroid, which stays accurate when the individual roots do not.
        """
        if tol <= 0:
            raise ParameterError("tol must be positive")
        if self.is_zero or not self.numf or not self.denf:
            return self, []
        radius = max(1e-4, tol)
        zc = _cluster(self.zeros(), radius)
        pc = _cluster(self.poles(), radius)
        pairs = []
        for p in pc:
            for z in zc:
                if z[1] and p[1] and abs(z[0] - p[0]) <= tol * max(1.0, abs(p[0])):
                    k = min(z[1], p[1])
                    pairs.extend([(z[0], p[0])] * k)
                    z[1] -= k
                    p[1] -= k
        if not pairs:
            return self, []
        zr = [r for r, k in zc for _ in range(k)]
        pr = [r for r, k in pc for _ in range(k)]
        return RationalFunction(Polynomial.from_roots(zr, self.gain), Polynomial.from_roots(pr)), pairs

    # ---- arithmetic
    def __mul__(self, other):
        other = _as_rf(other)
        if other is NotImplemented:
            return other
        if self.is_zero or other.is_zero:
            return _build(0j, [], list(self.denf) + list(other.denf))
        return _build(self.gain * other.gain, list(self.numf) + list(other.numf), list(self.denf) + list(other.denf))

    __rmul__ = __mul__

    def reciprocal(self):
        if self.is_zero:
            raise ZeroDivisionError("reciprocal of the zero function")
        return _build(1 / self.gain, list(self.denf), list(self.numf))

    def __truediv__(self, other):
        other = _as_rf(other)
        if other is NotImplemented:
            return other
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return _as_rf(other) * self.reciprocal()

    def __neg__(self):
        return _build(-self.gain, list(self.numf), list(self.denf))

    def __add__(self, other):
        other = _as_rf(other)
        if other is NotImplemented:
            return other
        da = {_key(p): [p, m] for p, m in self.denf}
        db = {_key(p): [p, m] for p, m in other.denf}
        common = {k: [v[0], max(v[1], db.get(k, [None, 0])[1])] for k, v in da.items()}
        for k, v in db.items():
            common.setdefault(k, list(v))

        def lifted(f, d):
            extra = [(p, m - d.get(k, [None, 0])[1]) for k, (p, m) in common.items()]
            if f.is_zero:
                return Polynomial([0.0])
            return _expand(list(f.numf) + [e for e in extra if e[1] > 0]) * f.gain

        num = lifted(self, da) + lifted(other, db)
        den_pairs = [(p, m) for p, m in common.values()]
        if num.is_zero:
            return _build(0j, [], den_pairs)
        return _build(1.0, [(num, 1)], den_pairs)

    __radd__ = __add__

    def __sub__(self, other):
        other = _as_rf(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __repr__(self):
        return f"RationalFunction(num={self.num!r}, den={self.den!r})"


def _build(gain, num_pairs, den_pairs):
    """Rational function gain * prod(num polys) / prod(den polys) (polys need not be monic)."""
    self = RationalFunction.__new__(RationalFunction)
    if gain == 0:
        _, dd = _factor_dict(den_pairs)
        self.gain = 0j
        self.numf = ()
        self.denf = tuple((p, m) for _, (p, m) in sorted(dd.items()))
        self._num = self._den = None
        return self
    gn, nd = _factor_dict(num_pairs)
    gd, dd = _factor_dict(den_pairs)
    for k in list(nd):
        if k in dd:
            c = min(nd[k][1], dd[k][1])
            nd[k][1] -= c
            dd[k][1] -= c
            if nd[k][1] == 0:
                del nd[k]
            if dd[k][1] == 0:
                del dd[k]
    self.gain = complex(gain) * gn / gd
    self.numf = tuple((p, m) for _, (p, m) in sorted(nd.items()) if m)
    self.denf = tuple((p, m) for _, (p, m) in sorted(dd.items()) if m)
    self._num = self._den = None
    return self


def _as_rf(x):
    if isinstance(x, RationalFunction):
        return x
    if isinstance(x, Polynomial):
        return RationalFunction(x)
    if isinstance(x, Number) or (isinstance(x, np.ndarray) and x.ndim == 0):
        return RationalFunction.constant(complex(x))
    return NotImplemented


def evaluate(r, s):
    return r(s)


def para_conjugate(r):
    return r.para_conjugate()


def cancel(r, tol=1e-9):
    return r.cancel(tol)


class Port(str, enum.Enum):
    """Mode type of a port in the doubled-up representation."""

    ANNIHILATION = "annihilation"
    CREATION = "creation"

    @property
    def sign(self):
        return 1.0 if self is Port.ANNIHILATION else -1.0

    def flipped(self):
        return Port.CREATION if self is Port.ANNIHILATION else Port.ANNIHILATION


def signature_matrix(sig):
    """Diagonal commutator metric: +1 per annihilation port, -1 per creation port."""
    return np.diag([Port(p).sign for p in sig])


class TransferMatrix:
    """Matrix of rational functions with a port signature on each side.

    Indexing is zero-based: ``T[1, 0]`` is the conventional entry (2,1).
    """

    __slots__ = ("entries", "sig_in", "sig_out")

    def __init__(self, entries, sig_in=None, sig_out=None):
        rows = [[_as_rf(e) for e in row] for row in entries]
        if not rows or not rows[0] or any(len(r) != len(rows[0]) for r in rows):
            raise ParameterError("entries must form a non-empty rectangular grid")
        if any(e is NotImplemented for r in rows for e in r):
            raise ParameterError("entries must be rational functions or numbers")
        m, n = len(rows), len(rows[0])
        sig_in = tuple(Port(p) for p in (sig_in or [Port.ANNIHILATION] * n))
        sig_out = tuple(Port(p) for p in (sig_out or [Port.ANNIHILATION] * m))
        if len(sig_in) != n or len(sig_out) != m:
            raise ParameterError("signature lengths must match the matrix shape")
        self.entries = tuple(tuple(r) for r in rows)
        self.sig_in = sig_in
        self.sig_out = sig_out

    @classmethod
    def from_constant(cls, matrix, sig_in=None, sig_out=None):
        matrix = np.atleast_2d(np.asarray(matrix, dtype=complex))
        return cls([[complex(v) for v in row] for row in matrix], sig_in, sig_out)

    @property
    def shape(self):
        return len(self.entries), len(self.entries[0])

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __call__(self, s):
        """Evaluate at scalar or array ``s``; result has shape ``s.shape + (m, n)``."""
        s = np.asarray(s)
        m, n = self.shape
        out = np.empty(s.shape + (m, n), dtype=complex)
        for i in range(m):
            for j in range(n):
                out[..., i, j] = self.entries[i][j](s)
        return out

    def freq_response(self, omegas):
        return self(1j * np.asarray(omegas, dtype=float))

    def map(self, fn):
        return TransferMatrix([[fn(e) for e in row] for row in self.entries], self.sig_in, self.sig_out)

    def para_conjugate(self):
        return self.map(RationalFunction.para_conjugate)

    def conjugate_representation(self):
        """Same system written for the conjugated ports (coefficient conjugation, flipped signature)."""
        return TransferMatrix(
            [[e.coefficient_conjugate() for e in row] for row in self.entries],
            [p.flipped() for p in self.sig_in],
            [p.flipped() for p in self.sig_out],
        )

    def det(self):
        m, n = self.shape
        if m != n:
            raise ParameterError("determinant of a non-square matrix")
        return _det([list(r) for r in self.entries])

    def __matmul__(self, other):
        if not isinstance(other, TransferMatrix):
            return NotImplemented
        if self.shape[1] != other.shape[0]:
            raise ParameterError("inner dimensions differ")
        if self.sig_in != other.sig_out:
            raise SignatureError("output signature of the right factor does not match input of the left")
        m, k, n = self.shape[0], self.shape[1], other.shape[1]
        rows = []
        for i in range(m):
            row = []
            for j in range(n):
                acc = self.entries[i][0] * other.entries[0][j]
                for t in range(1, k):
                    acc = acc + self.entries[i][t] * other.entries[t][j]
                row.append(acc)
            rows.append(row)
        return TransferMatrix(rows, other.sig_in, self.sig_out)

    def __repr__(self):
        m, n = self.shape
        return f"TransferMatrix({m}x{n}, in={[p.value for p in self.sig_in]}, out={[p.value for p in self.sig_out]})"


def _det(rows):
    n = len(rows)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    acc = None
    for j in range(n):
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        term = rows[0][j] * _det(minor)
        acc = term if acc is None else (acc + term if j % 2 == 0 else acc - term)
    return acc
