"""Majorant recursions and the implicit equations they are dominated by.

Power series are real coefficient arrays indexed by degree.  The two
functional equations are solved degree by degree: the right side at degree
``m`` only involves ``A_2 .. A_{m-1}``, so each coefficient is obtained by
evaluating the right side with the known lower part.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

__all__ = [
    "EtaSequence",
    "MajorantParams",
    "MajorantSeries",
    "eta_sequence",
    "growth_fit",
    "series_power",
    "vertical_rhs",
    "full_rhs",
    "solve_vertical_majorant",
    "solve_full_majorant",
    "replay_defect",
    "radius_lower_bound",
    "domination_check",
    "arnold_level_norms",
    "arnold_domination",
]


# ---------------------------------------------------------------------------
# eta recursion


@dataclass(frozen=True)
class EtaSequence:
    """``eta[m]`` for ``1 <= m <= M`` (index 0 unused); ``K[m]`` the inputs."""

    K: tuple
    eta: tuple
    M: int


def _partition_max(eta, m):
    # best[j]: largest product of eta over parts < m filling at most j units
    best = [1] * (m + 1)
    for j in range(1, m + 1):
        b = best[j - 1]
        for i in range(1, min(j, m - 1) + 1):
            cand = eta[i] * best[j - i]
            if cand > b:
                b = cand
        best[j] = b
    return best[m]


def eta_sequence(K, M) -> EtaSequence:
    """``eta_1 = 1``, ``eta_m = K_m * max prod eta_{m_i}`` over ``m_1 + ... + m_p + s = m``.

    The parts satisfy ``1 <= m_i < m`` and ``s >= 0``; the empty product is 1.
    ``K`` is indexable by ``m`` (a sequence with ``K[m]`` for ``2 <= m <= M``
    or a callable).  Arithmetic is generic, so exact inputs give exact output.
    """
    Kf = K if callable(K) else (lambda m: K[m])
    eta = [None, 1]
    Ks = [None, None]
    for m in range(2, M + 1):
        k = Kf(m)
        if k < 0:
            raise ParameterError(f"K_{m} is negative")
        Ks.append(k)
        eta.append(k * _partition_max(eta, m))
    return EtaSequence(tuple(Ks), tuple(eta[: M + 1]), M)


@dataclass(frozen=True)
class GrowthFit:
    L0: float
    L: float
    verdict: str  # "geometric" or "superexponential"


def growth_fit(eta: EtaSequence) -> GrowthFit:
    """Fit ``eta_m <= L0 L^m``.

    ``L`` comes from a least-squares fit of ``log eta_m`` on the tail half and
    ``L0`` is then inflated so that the bound holds over the whole range.  If
    ``log eta_m / m`` keeps growing at a logarithmic rate (it rises by more
    than ``log(2)/2`` from ``M/2`` to ``M``) the verdict is superexponential.
    """
    M = eta.M
    if M < 4:
        raise ParameterError("need at least 4 terms")
    m = np.arange(1, M + 1)
    le = np.array([math.log(float(e)) for e in eta.eta[1:]])
    r = le / m
    half = M // 2
    if r[-1] - r[half - 1] > 0.5 * math.log(2):
        return GrowthFit(math.inf, math.inf, "superexponential")
    tail = slice(half - 1, M)
    slope = np.polyfit(m[tail], le[tail], 1)[0] if M - half + 1 >= 2 else 0.0
    L = math.exp(slope)
    L0 = float(np.max(np.exp(le - m * slope)))
    return GrowthFit(L0, L, "geometric")


# ---------------------------------------------------------------------------
# series helpers


def series_power(u, alpha, N):
    """``u(t)^alpha`` through degree ``N`` for ``u_0 > 0``.

    Uses the recursion from ``u w' = alpha u' w``:
    ``w_n = (n u_0)^{-1} sum_{k=1}^{n} ((alpha + 1) k - n) u_k w_{n-k}``.
    """
    u = np.asarray(u, dtype=float)
    if not u[0] > 0:
        raise ParameterError("series power needs a positive constant term")
    uu = np.zeros(N + 1)
    uu[: min(len(u), N + 1)] = u[: N + 1]
    w = np.zeros(N + 1)
    w[0] = uu[0] ** alpha
    for n in range(1, N + 1):
        k = np.arange(1, n + 1)
        w[n] = np.dot(((alpha + 1) * k - n) * uu[1 : n + 1], w[n - k]) / (n * uu[0])
    return w


def _mul(a, b, N):
    return np.convolve(a, b)[: N + 1]


@dataclass(frozen=True)
class MajorantParams:
    """Constants of the majorant equations (defaults ``M = M_tilde = C0 = 1``)."""

    R: float
    M: float = 1.0
    M_tilde: float = 1.0
    n: int = 1
    d: int = 1
    C0: float = 1.0

    def __post_init__(self):
        if self.R < 0 or not self.M > 0 or not self.M_tilde > 0 or self.C0 < 0:
            raise ParameterError("need R >= 0, M > 0, M_tilde > 0, C0 >= 0")
        if self.n < 1 or self.d < 1:
            raise ParameterError("dimensions n, d must be positive")


@dataclass(frozen=True)
class MajorantSeries:
    """``A(t) = sum_{m >= 2} A[m] t^m`` (entries 0 and 1 are zero)."""

    A: np.ndarray
    kind: str
    params: MajorantParams

    @property
    def length(self):
        return len(self.A) - 1


def _check_radius(s, g_like, p, radius, m):
    if radius is None:
        return
    powers = radius ** np.arange(len(s))
    if 1.0 - float(np.dot(s, powers)) <= 0:
        raise ParameterError(f"1 - R(t + A(t)) is not positive at t = {radius} (order {m})")
    if g_like is not None and p.M - float(np.dot(g_like, powers)) <= 0:
        raise ParameterError(f"M - g(t) is not positive at t = {radius} (order {m})")


def _g_of(A, p, N):
    """``s = R (t + A)`` and ``g = (1 - s)^{-d} - d s - 1``."""
    s = p.R * np.asarray(A, dtype=float)[: N + 1].copy()
    s[1] += p.R
    one_minus = -s
    one_minus[0] += 1.0
    g = series_power(one_minus, -p.d, N) - p.d * s
    g[0] -= 1.0
    return s, g


def vertical_rhs(A, p: MajorantParams, N):
    """``M_tilde (g + A ((M / (M - g))^n - 1))`` through degree ``N``."""
    s, g = _g_of(A, p, N)
    q = -g / p.M
    q[0] += 1.0
    qn = series_power(q, -p.n, N)
    qn[0] -= 1.0
    return p.M_tilde * (g + _mul(np.asarray(A, dtype=float)[: N + 1], qn, N)), s, g


def full_rhs(A, p: MajorantParams, N):
    """``M_tilde (C0 [(1 - A/M)^{-n} - 1 - n A/M] + (1 - A/M)^{-n} G)`` with
    ``G = (1 - (R t + R A))^{-d} - 1 - d (R t + R A)``."""
    A = np.asarray(A, dtype=float)[: N + 1]
    s, G = _g_of(A, p, N)
    u = -A / p.M
    u[0] += 1.0
    un = series_power(u, -p.n, N)
    first = un.copy()
    first[0] -= 1.0
    first -= p.n * A / p.M
    return p.M_tilde * (p.C0 * first + _mul(un, G, N)), s, None


def _solve(kind, p, N, radius):
    rhs_fn = vertical_rhs if kind == "vertical" else full_rhs
    A = np.zeros(N + 1)
    for m in range(2, N + 1):
        rhs, s, g = rhs_fn(A[: m + 1], p, m)
        _check_radius(s, g, p, radius, m)
        A[m] = rhs[m]
    A.setflags(write=False)
    return MajorantSeries(A, kind, p)


def solve_vertical_majorant(p: MajorantParams, N: int, radius: float | None = None) -> MajorantSeries:
    """Formal solution of ``A = M_tilde (g + A ((M/(M - g))^n - 1))``, ``A = O(t^2)``.

    With ``radius`` given, the truncated ``1 - R(t + A)`` and ``M - g`` are
    required to stay positive at ``t = radius`` for every truncation order.
    """
    return _solve("vertical", p, N, radius)


def solve_full_majorant(p: MajorantParams, N: int, radius: float | None = None) -> MajorantSeries:
    """Formal solution of the full-linearization majorant equation, ``A = O(t^2)``."""
    return _solve("full", p, N, radius)


def replay_defect(A: MajorantSeries) -> float:
    """Largest ``|rhs_m - A_m| / max(|A_m|, tiny)`` after substituting the whole series."""
    N = A.length
    rhs_fn = vertical_rhs if A.kind == "vertical" else full_rhs
    rhs = rhs_fn(A.A, A.params, N)[0]
    den = np.maximum(np.abs(A.A), 1e-300)
    return float(np.max(np.abs(rhs[2:] - A.A[2:]) / den[2:])) if N >= 2 else 0.0


def radius_lower_bound(A: MajorantSeries) -> float:
    """``1 / max A_m^{1/m}`` over the tail half of the computed orders (inf if zero)."""
    N = A.length
    if N < 10:
        raise ParameterError("need at least 10 coefficients")
    tail = A.A[N // 2 : N + 1]
    m = np.arange(N // 2, N + 1)
    if not np.any(tail > 0):
        return math.inf
    with np.errstate(divide="ignore"):
        roots = np.where(tail > 0, np.exp(np.log(np.where(tail > 0, tail, 1.0)) / m), 0.0)
    return float(1.0 / np.max(roots))


@dataclass(frozen=True)
class DominationVerdict:
    passed: bool
    first_violation: int | None
    worst_ratio: float


def domination_check(f_norms, eta: EtaSequence, A: MajorantSeries) -> DominationVerdict:
    """``f_norms[m] <= eta_m A_m`` for every ``m >= 2`` present in all three inputs."""
    top = min(len(f_norms) - 1, eta.M, A.length)
    worst = 0.0
    first = None
    for m in range(2, top + 1):
        f = float(f_norms[m])
        cap = float(eta.eta[m]) * float(A.A[m])
        ratio = f / cap if cap > 0 else (math.inf if f > 0 else 0.0)
        worst = max(worst, ratio)
        if f > cap and first is None:
            first = m
    return DominationVerdict(first is None, first, worst)


# ---------------------------------------------------------------------------
# torus-model domination run


def arnold_level_norms(result, delta):
    """``norms[m]``: strip bound of the degree-``m`` vertical coefficient met at level ``m - 1``."""
    top = max((rec.n for rec in result.per_level), default=0) + 1
    out = np.zeros(top + 1)
    for rec in result.per_level:
        J = rec.rhs_A.J
        w = np.exp(np.abs(np.arange(-J, J + 1)) * delta)
        out[rec.n + 1] = float(np.sum(np.abs(rec.rhs_A.coeffs[0]) * w)) * abs(result.multiplier)
    return out


def _dilate(nbhd, eps):
    """Neighborhood after ``v -> eps v``: degree-``n`` coefficients scale by ``eps^n``."""
    from . import arnold_model
    from .series_core import FourierTaylorSeries

    sc = eps ** np.arange(nbhd.domain.taylor_order + 1)
    a = FourierTaylorSeries(nbhd.domain, nbhd.a.coeffs * sc[:, None], 1)
    b = FourierTaylorSeries(nbhd.domain, nbhd.b.coeffs * sc[:, None], 1)
    return arnold_model.build(nbhd.multiplier, nbhd.omega, a, b, nbhd.domain)


@dataclass(frozen=True)
class ArnoldDomination:
    epsilon: float
    verdict: DominationVerdict
    f_norms: np.ndarray
    eta: EtaSequence
    A: MajorantSeries


def arnold_domination(nbhd, N, params: MajorantParams, C=1.0, delta=0.5, iters=40):
    """Largest dilation ``eps`` in ``(0, 1]`` (by bisection) for which the vertical
    levels of the dilated neighborhood are dominated by ``eta_m A_m``.

    The degree-``m`` vertical coefficient is removed at level ``m - 1``, so
    ``K_m = C / |lambda^{m-1} - 1|``.
    """
    from . import arnold_model
    from .small_divisors import divisor

    lam = nbhd.multiplier

    def K(m):
        return C / divisor(lam, 0j, m - 1, 0)

    eta = eta_sequence(K, N)
    A = solve_vertical_majorant(params, N)

    def run(eps):
        res = arnold_model.vertical_linearize(_dilate(nbhd, eps), N)
        f = arnold_level_norms(res, delta)
        return domination_check(f, eta, A), f

    v, f = run(1.0)
    if v.passed:
        return ArnoldDomination(1.0, v, f, eta, A)
    lo, hi = 0.0, 1.0
    best = None
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        v, f = run(mid)
        if v.passed:
            lo, best = mid, (v, f)
        else:
            hi = mid
    if best is None:
        v, f = run(lo) if lo > 0 else (v, f)
        return ArnoldDomination(lo, v, f, eta, A)
    return ArnoldDomination(lo, best[0], best[1], eta, A)
