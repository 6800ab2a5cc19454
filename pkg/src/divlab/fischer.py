"""Modified Fischer inner product on homogeneous polynomials.

For polynomials in ``d`` variables of degree ``k``,

    <p, q> = sum_Q p_Q conj(q_Q) Q! / |Q|!

The weight makes the norm invariant under unitary changes of variables and
submultiplicative; it equals the normalized Gaussian integral
``(pi^d k!)^{-1} int |p|^2 exp(-|x|^2) dV``.
"""
from __future__ import annotations

import cmath
import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, ParameterError
from .series_core import FourierTaylorSeries

__all__ = [
    "HomogeneousPoly",
    "PolyVector",
    "ZPoly",
    "multi_indices",
    "mf_inner",
    "mf_norm",
    "poly_mul",
    "apply_unitary",
    "apply_unitary_vec",
    "random_unitary",
    "symmetric_power_matrix",
    "derivative_family",
    "zpoly_majorant_norm",
    "zpoly_grid_norm",
    "gaussian_norm_check",
]


def multi_indices(d, k):
    """All exponent tuples of length ``d`` summing to ``k``, in lexicographic order (descending)."""
    out = []
    for combo in itertools.combinations_with_replacement(range(d), k):
        Q = [0] * d
        for i in combo:
            Q[i] += 1
        out.append(tuple(Q))
    return out


def _mfact(Q):
    return math.prod(math.factorial(q) for q in Q)


def _weight(Q):
    return _mfact(Q) / math.factorial(sum(Q))


@dataclass(frozen=True)
class HomogeneousPoly:
    """``sum_Q coeffs[Q] x^Q`` with every ``|Q| = degree``."""

    num_vars: int
    degree: int
    coeffs: dict

    def __post_init__(self):
        if self.num_vars < 1 or self.degree < 0:
            raise ParameterError("need num_vars >= 1 and degree >= 0")
        for Q in self.coeffs:
            if len(Q) != self.num_vars or sum(Q) != self.degree or min(Q) < 0:
                raise DimensionMismatchError(f"multi-index {Q} does not fit (d={self.num_vars}, k={self.degree})")

    @classmethod
    def monomial(cls, Q, c=1.0):
        return cls(len(Q), sum(Q), {tuple(Q): complex(c)})

    @classmethod
    def zero(cls, d, k):
        return cls(d, k, {})

    @classmethod
    def random(cls, d, k, rng):
        """Coefficients uniform in the unit disc."""
        out = {}
        for Q in multi_indices(d, k):
            r = math.sqrt(rng.uniform())
            out[Q] = r * cmath.exp(2j * math.pi * rng.uniform())
        return cls(d, k, out)

    def __add__(self, other):
        _check(self, other)
        c = dict(self.coeffs)
        for Q, v in other.coeffs.items():
            c[Q] = c.get(Q, 0) + v
        return HomogeneousPoly(self.num_vars, self.degree, c)

    def scale(self, s):
        return HomogeneousPoly(self.num_vars, self.degree, {Q: s * v for Q, v in self.coeffs.items()})

    def evaluate(self, x):
        """Evaluate at points ``x`` of shape ``(..., d)``."""
        x = np.asarray(x, dtype=complex)
        out = np.zeros(x.shape[:-1], dtype=complex)
        for Q, c in self.coeffs.items():
            out += c * np.prod(x ** np.array(Q), axis=-1)
        return out

    def to_dict(self):
        rows = [list(Q) + [complex(v).real, complex(v).imag] for Q, v in sorted(self.coeffs.items())]
        return {"d": self.num_vars, "deg": self.degree, "coeffs": rows}

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, data):
        d = data["d"]
        c = {tuple(int(q) for q in row[:d]): complex(row[d], row[d + 1]) for row in data["coeffs"]}
        return cls(d, data["deg"], c)


def _check(p, q):
    if p.num_vars != q.num_vars or p.degree != q.degree:
        raise DimensionMismatchError(
            f"arity/degree mismatch: ({p.num_vars}, {p.degree}) vs ({q.num_vars}, {q.degree})"
        )


def mf_inner(p: HomogeneousPoly, q: HomogeneousPoly) -> complex:
    _check(p, q)
    s = 0j
    for Q, a in p.coeffs.items():
        b = q.coeffs.get(Q)
        if b is not None:
            s += a * b.conjugate() * _weight(Q)
    return s


def mf_norm(p) -> float:
    """Norm of a polynomial, or the root sum of squares over a :class:`PolyVector`."""
    if isinstance(p, PolyVector):
        return math.sqrt(sum(mf_norm(e) ** 2 for e in p.entries))
    return math.sqrt(max(mf_inner(p, p).real, 0.0))


def poly_mul(p: HomogeneousPoly, q: HomogeneousPoly) -> HomogeneousPoly:
    if p.num_vars != q.num_vars:
        raise DimensionMismatchError("arity mismatch")
    out = {}
    for P, a in p.coeffs.items():
        for Q, b in q.coeffs.items():
            R = tuple(x + y for x, y in zip(P, Q))
            out[R] = out.get(R, 0) + a * b
    return HomogeneousPoly(p.num_vars, p.degree + q.degree, out)


@dataclass(frozen=True)
class PolyVector:
    entries: tuple

    def __post_init__(self):
        if not self.entries:
            raise ParameterError("empty PolyVector")
        d, k = self.entries[0].num_vars, self.entries[0].degree
        for e in self.entries:
            if e.num_vars != d or e.degree != k:
                raise DimensionMismatchError("entries must share arity and degree")


def _check_unitary(T, tol=1e-12):
    T = np.asarray(T, dtype=complex)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise ParameterError("T must be square")
    err = np.max(np.abs(T @ T.conj().T - np.eye(T.shape[0])))
    if err > tol:
        raise ParameterError(f"T is not unitary (defect {err:.2e})")
    return T


def _linear_form_power(row, k):
    """Coefficients of ``(sum_j row_j x_j)^k`` as a dict."""
    d = len(row)
    out = {(0,) * d: 1.0 + 0j}
    for _ in range(k):
        nxt = {}
        for Q, c in out.items():
            for j in range(d):
                if row[j] == 0:
                    continue
                R = list(Q)
                R[j] += 1
                R = tuple(R)
                nxt[R] = nxt.get(R, 0) + c * row[j]
        out = nxt
    return out


def apply_unitary(T, p: HomogeneousPoly, check=True) -> HomogeneousPoly:
    """``p(T x)``, expanded exactly."""
    T = _check_unitary(T) if check else np.asarray(T, dtype=complex)
    d = p.num_vars
    if T.shape[0] != d:
        raise DimensionMismatchError("matrix size does not match arity")
    cache = {}
    out = {}
    for Q, c in p.coeffs.items():
        term = {(0,) * d: c}
        for i, qi in enumerate(Q):
            if qi == 0:
                continue
            key = (i, qi)
            if key not in cache:
                cache[key] = _linear_form_power(T[i], qi)
            fac = cache[key]
            nxt = {}
            for A, a in term.items():
                for B, b in fac.items():
                    R = tuple(x + y for x, y in zip(A, B))
                    nxt[R] = nxt.get(R, 0) + a * b
            term = nxt
        for R, v in term.items():
            out[R] = out.get(R, 0) + v
    return HomogeneousPoly(d, p.degree, out)


def apply_unitary_vec(T, g: PolyVector) -> PolyVector:
    """Left multiplication of the component vector by ``T``."""
    T = _check_unitary(T)
    if T.shape[0] != len(g.entries):
        raise DimensionMismatchError("matrix size does not match the number of components")
    e0 = g.entries[0]
    rows = []
    for i in range(T.shape[0]):
        acc = HomogeneousPoly.zero(e0.num_vars, e0.degree)
        for j, e in enumerate(g.entries):
            if T[i, j] != 0:
                acc = acc + e.scale(T[i, j])
        rows.append(acc)
    return PolyVector(tuple(rows))


def random_unitary(d, rng):
    """Haar-distributed unitary from the QR factorization of a complex Gaussian matrix."""
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph[None, :]


def symmetric_power_matrix(t, L, orthonormal=True):
    """Matrix of ``p -> p(t x)`` on degree-``L`` polynomials.

    With ``orthonormal=True`` the basis is ``e*_Q = sqrt(|Q|!/Q!) x^Q``,
    orthonormal for the modified Fischer product, so the matrix is unitary
    whenever ``t`` is.
    """
    t = np.asarray(t, dtype=complex)
    d = t.shape[0]
    basis = multi_indices(d, L)
    index = {Q: i for i, Q in enumerate(basis)}
    M = np.zeros((len(basis), len(basis)), dtype=complex)
    for col, Q in enumerate(basis):
        img = apply_unitary(t, HomogeneousPoly.monomial(Q), check=False)
        for P, v in img.coeffs.items():
            M[index[P], col] = v
    if not orthonormal:
        return M, basis
    s = np.array([math.sqrt(1.0 / _weight(Q)) for Q in basis])
    return M * s[None, :] / s[:, None], basis


# ---------------------------------------------------------------------------
# polynomials with h-dependent coefficients


@dataclass(frozen=True)
class ZPoly:
    """Homogeneous polynomial whose coefficients are periodic functions of ``h``.

    Each coefficient is a :class:`FourierTaylorSeries`; only its degree-0 row
    (the ``h``-dependence) is used.
    """

    num_vars: int
    degree: int
    coeffs: dict

    def __post_init__(self):
        for Q in self.coeffs:
            if len(Q) != self.num_vars or sum(Q) != self.degree:
                raise DimensionMismatchError(f"multi-index {Q} does not fit")


def derivative_family(f: ZPoly, P) -> ZPoly:
    """``(1/P!) d_h^P f``, exact on Fourier modes."""
    if isinstance(P, (tuple, list)):
        if len(P) != 1:
            raise DimensionMismatchError("coefficients depend on a single variable h")
        P = P[0]
    if P < 0:
        raise ParameterError("P must be nonnegative")
    fac = math.factorial(P)
    return ZPoly(f.num_vars, f.degree, {Q: c.dh(P).scale(1.0 / fac) for Q, c in f.coeffs.items()})


def _coef_majorant(c: FourierTaylorSeries, delta):
    J = c.J
    w = np.exp(np.abs(np.arange(-J, J + 1)) * delta)
    return float(np.sum(np.abs(c.coeffs[0]) * w))


def zpoly_majorant_norm(f: ZPoly, delta) -> float:
    """``sqrt(sum_Q m_Q^2 Q!/|Q|!)`` with ``m_Q = sum_j |c_{Q,j}| e^{|j| delta}``.

    ``m_Q`` bounds the coefficient on the strip ``|Im h| < delta``, so this
    bounds the strip supremum of the pointwise modified Fischer norm.
    """
    return math.sqrt(sum(_coef_majorant(c, delta) ** 2 * _weight(Q) for Q, c in f.coeffs.items()))


def zpoly_grid_norm(f: ZPoly, delta, n_grid=256) -> float:
    """Largest pointwise modified Fischer norm on the lines ``Im h = +-delta``.

    For periodic coefficients the strip supremum of each coefficient is
    attained on these lines; the grid samples ``n_grid`` points per line.
    """
    x = np.linspace(0, 2 * np.pi, n_grid, endpoint=False)
    best = 0.0
    for y in (delta, -delta):
        h = x + 1j * y
        tot = np.zeros(n_grid)
        for Q, c in f.coeffs.items():
            J = c.J
            vals = np.exp(1j * np.outer(h, np.arange(-J, J + 1))) @ c.coeffs[0]
            tot += np.abs(vals) ** 2 * _weight(Q)
        best = max(best, float(np.sqrt(np.max(tot))))
    return best


def gaussian_norm_check(p: HomogeneousPoly, samples: int, seed: int = 0):
    """``(mf_norm(p)^2, Monte Carlo estimate of (pi^d m!)^{-1} int |p|^2 e^{-|x|^2} dV)``."""
    if samples <= 0:
        raise ParameterError("samples must be positive")
    rng = np.random.default_rng(seed)
    d = p.num_vars
    # density exp(-|x|^2) / pi^d: independent real and imaginary parts of variance 1/2
    x = (rng.normal(size=(samples, d)) + 1j * rng.normal(size=(samples, d))) / math.sqrt(2)
    est = float(np.mean(np.abs(p.evaluate(x)) ** 2)) / math.factorial(p.degree)
    return mf_norm(p) ** 2, est
