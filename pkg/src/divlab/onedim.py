"""One-variable linearization of ``phi(v) = lambda v + sum_{n>=2} a_n v^n``.

We look for ``psi(w) = w + sum_{n>=2} psi_n w^n`` with
``phi(psi(w)) = psi(lambda w)``.  Comparing degree ``n`` gives

    (lambda^n - lambda) psi_n = [sum_{k=2}^{n} a_k psi^k]_n

whose right side only involves ``psi_2 .. psi_{n-1}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OrderError, ParameterError, ResonanceError
from .small_divisors import RESONANCE_THRESHOLD, Multiplier, complex_divisor

__all__ = [
    "Germ1D",
    "Linearizer1D",
    "schroeder_linearize",
    "newton_linearize_1d",
    "radius_estimate",
    "root_test_max",
    "liouville_multiplier",
    "equivalence_with_arnold",
    "compose_1d",
    "revert_1d",
]


@dataclass(frozen=True)
class Germ1D:
    """``phi(v) = lambda v + sum a_n v^n``; ``coeffs[n]`` holds ``a_n`` (entries 0 and 1 unused)."""

    multiplier: Multiplier
    coeffs: np.ndarray
    order: int

    @classmethod
    def from_dict(cls, multiplier, terms, order):
        c = np.zeros(order + 1, dtype=complex)
        for n, a in terms.items():
            if n < 2:
                raise OrderError("germ coefficients start at degree 2")
            if n <= order:
                c[n] = a
        return cls(multiplier, c, order)

    def series(self):
        """Full coefficient vector of ``phi`` (index = degree)."""
        s = np.array(self.coeffs, dtype=complex)
        s[0] = 0
        s[1] = self.multiplier.value
        return s


@dataclass(frozen=True)
class Linearizer1D:
    """``psi(w) = w + sum psi_n w^n``; ``coeffs[n] = psi_n`` with ``coeffs[1] = 1``.

    ``divisors_used[n]`` is ``|lambda^n - lambda|``.  ``order`` is the degree
    through which the coefficients are valid (smaller than requested if the
    recursion hit a nonfinite value).
    """

    coeffs: np.ndarray
    divisors_used: np.ndarray
    order: int
    orders_by_pass: tuple = ()


def _shifted_divisor(lam, n):
    """``lambda^n - lambda = lambda (lambda^{n-1} - 1)``, resonance checked."""
    if lam.kind != "explicit" and lam.is_rational and ((n - 1) * lam.alpha).denominator == 1:
        raise ResonanceError(f"lambda^{n - 1} = 1", n=n, j=0, divisor=0.0, order=n)
    d = complex_divisor(lam, 0j, n - 1, 0)
    if abs(d) < RESONANCE_THRESHOLD:
        raise ResonanceError(f"|lambda^{n - 1} - 1| = {abs(d):.3e}", n=n, j=0, divisor=abs(d), order=n)
    return lam.value * d


def compose_1d(outer, inner, N):
    """Coefficients of ``outer(inner(w))`` through degree ``N``; ``inner[0]`` must be 0."""
    out = np.zeros(N + 1, dtype=complex)
    out[0] = outer[0]
    p = np.zeros(N + 1, dtype=complex)
    p[0] = 1.0
    inner = np.asarray(inner, dtype=complex)[: N + 1]
    for k in range(1, min(len(outer) - 1, N) + 1):
        p = np.convolve(p, inner)[: N + 1]
        out += outer[k] * p
    return out


def revert_1d(s, N):
    """Compositional inverse of ``s = s_1 w + ...`` through degree ``N``."""
    s = np.asarray(s, dtype=complex)
    if s[0] != 0 or s[1] == 0:
        raise ParameterError("series must be tangent to a nonzero linear map")
    r = np.zeros(N + 1, dtype=complex)
    r[1] = 1 / s[1]
    for n in range(2, N + 1):
        c = compose_1d(s, r, n)
        r[n] = -c[n] / s[1]
    return r


def schroeder_linearize(phi: Germ1D, N: int | None = None, convention: str = "phi_psi") -> Linearizer1D:
    """Order-by-order solution of ``phi o psi = psi o (lambda .)``.

    ``convention="inverse"`` returns ``psi^{-1}``, which solves
    ``chi o phi = lambda chi``.  Nonfinite coefficients stop the recursion;
    the returned ``order`` then marks the last finite degree.
    """
    if N is None:
        N = phi.order
    lam = phi.multiplier
    a = np.zeros(N + 1, dtype=complex)
    a[: min(N, phi.order) + 1] = phi.coeffs[: min(N, phi.order) + 1]
    psi = np.zeros(N + 1, dtype=complex)
    psi[1] = 1.0
    divs = np.full(N + 1, np.nan)
    # pw[k][n] = [psi^k]_n, filled column by column
    pw = np.zeros((N + 1, N + 1), dtype=complex)
    pw[0, 0] = 1.0
    pw[1, 1] = 1.0
    for k in range(2, N + 1):
        pw[k, k] = 1.0
    reached = N
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(2, N + 1):
            for k in range(2, n):
                # [psi^k]_n = sum_{i=1}^{n-k+1} psi_i [psi^{k-1}]_{n-i}
                i = np.arange(1, n - k + 2)
                pw[k, n] = np.dot(psi[i], pw[k - 1, n - i])
            rhs = np.dot(a[2 : n + 1], pw[2 : n + 1, n])
            d = _shifted_divisor(lam, n)
            divs[n] = abs(d)
            psi[n] = rhs / d
            pw[1, n] = psi[n]
            if not np.isfinite(psi[n]):
                reached = n - 1
                psi[n:] = np.nan
                break
    if convention == "inverse":
        psi = revert_1d(psi[: reached + 1], reached)
    elif convention != "phi_psi":
        raise ParameterError(f"unknown convention {convention!r}")
    return Linearizer1D(psi, divs, reached)


def newton_linearize_1d(phi: Germ1D, passes: int) -> Linearizer1D:
    """Quadratic scheme: conjugate by polynomials killing whole blocks of degrees.

    The first step removes degree 2; each of the ``passes`` further steps
    doubles the valid order, so the orders reached are ``2, 4, ..., 2^(passes+1)``.
    Every step recomposes ``c^{-1} o F o c`` in full.
    """
    if passes < 0:
        raise ParameterError("passes must be >= 0")
    lam = phi.multiplier
    N = 2 ** (passes + 1)
    F = np.zeros(N + 1, dtype=complex)
    top = min(N, phi.order)
    F[: top + 1] = phi.series()[: top + 1]
    psi = np.zeros(N + 1, dtype=complex)
    psi[1] = 1.0
    divs = np.full(N + 1, np.nan)
    m = 1
    reached = []
    while m < N:
        c = np.zeros(N + 1, dtype=complex)
        c[1] = 1.0
        for k in range(m + 1, 2 * m + 1):
            d = _shifted_divisor(lam, k)
            divs[k] = abs(d)
            c[k] = F[k] / d
        if np.any(c[m + 1 : 2 * m + 1]):
            F = compose_1d(revert_1d(c, N), compose_1d(F, c, N), N)
            psi = compose_1d(psi, c, N)
        m *= 2
        reached.append(m)
    return Linearizer1D(psi, divs, N, tuple(reached))


def radius_estimate(psi: Linearizer1D, window) -> float:
    """Root-test radius ``1 / max_{n0 <= n <= n1} |psi_n|^(1/n)``.

    Returns ``inf`` when the window holds only zeros and 0 when it holds a
    nonfinite coefficient.
    """
    n0, n1 = window
    if n0 > n1 or n0 < 1:
        raise ParameterError("empty window")
    if n1 > psi.order:
        raise OrderError(f"window ends at {n1} but psi is valid through {psi.order}")
    c = psi.coeffs[n0 : n1 + 1]
    if not np.all(np.isfinite(c)):
        return 0.0
    mags = np.abs(c)
    if not np.any(mags):
        return math.inf
    n = np.arange(n0, n1 + 1)
    with np.errstate(divide="ignore"):
        roots = np.where(mags > 0, np.exp(np.log(np.where(mags > 0, mags, 1.0)) / n), 0.0)
    return float(1.0 / np.max(roots))


def root_test_max(psi: Linearizer1D, n_max: int, n_min: int = 2) -> float:
    """``max_{n_min <= n <= n_max} |psi_n|^(1/n)`` (inf if a coefficient is nonfinite)."""
    c = psi.coeffs[n_min : min(n_max, psi.order) + 1]
    if not np.all(np.isfinite(c)):
        return math.inf
    mags = np.abs(c)
    n = np.arange(n_min, n_min + len(c))
    with np.errstate(divide="ignore"):
        return float(np.max(np.exp(np.log(mags) / n)))


def liouville_multiplier(cf_entries) -> Multiplier:
    """``exp(2 pi i alpha)`` for ``alpha = [0; e_1, e_2, ...]`` (exact rational)."""
    return Multiplier.from_continued_fraction(cf_entries)


@dataclass(frozen=True)
class EquivalenceReport:
    max_defect: float
    passed: bool
    order: int
    psi: np.ndarray
    g_vertical: np.ndarray


def equivalence_with_arnold(multiplier, omega, terms: dict, N: int, tol: float = 1e-10) -> EquivalenceReport:
    """Compare the torus-model vertical change with the one-variable ``psi``.

    ``terms`` gives ``phi(v) = lambda v + sum terms[n] v^n``.  The torus model
    glued by ``(h + 2 omega, phi(v))`` is linearized vertically and the
    ``v``-part of ``g`` is compared with ``psi`` coefficient by coefficient,
    relative to ``|psi_n|`` (absolutely where ``psi_n = 0``).
    """
    from . import arnold_model
    from .series_core import DomainSpec

    dom = DomainSpec(1.0, 1.0, N, 0)
    nbhd = arnold_model.from_vertical_germ(multiplier, omega, terms, dom)
    res = arnold_model.vertical_linearize(nbhd, N)
    gv = np.array(res.g.v_perturbation.coeffs[:, 0])
    gv[1] += 1.0
    psi = schroeder_linearize(Germ1D.from_dict(multiplier, terms, N), N).coeffs
    den = np.where(np.abs(psi[1:]) > 0, np.abs(psi[1:]), 1.0)
    defect = float(np.max(np.abs(gv[1:] - psi[1:]) / den))
    return EquivalenceReport(defect, defect < tol, N, psi, gv)
