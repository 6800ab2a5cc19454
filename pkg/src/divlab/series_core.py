"""Truncated Fourier-Taylor series on a strip x disc.

A :class:`FourierTaylorSeries` stores coefficients ``c[n, j]`` of

    u(h, v) = sum_{n <= N, |j| <= J} c[n, j] v**n exp(i j h)

as a complex array of shape ``(N + 1, 2 J + 1)``; column ``J + j`` holds
Fourier mode ``j``.  Products drop modes with ``|j| > J`` (no wrapping).

Map germs fixing ``{v = 0}`` are represented by :class:`MapGerm`::

    (h, v) -> (h + shift + hp(h, v), multiplier * v + vp(h, v))

with ``hp = O(v)`` and ``vp = O(v**2)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ._kernels import mul_truncated, substitute_rows
from .errors import DimensionMismatchError, OrderError

ZERO_TOL = 1e-300

__all__ = [
    "DomainSpec",
    "FourierTaylorSeries",
    "MapGerm",
    "VerticalVectorField",
    "fts_add",
    "fts_mul",
    "jet",
    "compose_into",
    "coeff_sup_bound",
    "compose_maps",
    "invert_map",
    "flow_time_one",
    "log_of_map",
]


@dataclass(frozen=True)
class DomainSpec:
    """Strip ``|Im h| < strip_halfwidth`` times disc ``|v| < disc_radius``,
    with truncation orders ``taylor_order`` (N) and ``fourier_band`` (J)."""

    strip_halfwidth: float
    disc_radius: float
    taylor_order: int
    fourier_band: int

    def __post_init__(self):
        if not self.strip_halfwidth > 0:
            raise ValueError("strip_halfwidth must be positive")
        if not self.disc_radius > 0:
            raise ValueError("disc_radius must be positive")
        if int(self.taylor_order) != self.taylor_order or self.taylor_order < 1:
            raise ValueError("taylor_order must be an integer >= 1")
        if int(self.fourier_band) != self.fourier_band or self.fourier_band < 0:
            raise ValueError("fourier_band must be an integer >= 0")

    @property
    def shape(self):
        return (self.taylor_order + 1, 2 * self.fourier_band + 1)

    def with_orders(self, taylor_order=None, fourier_band=None):
        return DomainSpec(
            self.strip_halfwidth,
            self.disc_radius,
            self.taylor_order if taylor_order is None else taylor_order,
            self.fourier_band if fourier_band is None else fourier_band,
        )


class FourierTaylorSeries:
    """Immutable truncated series ``sum c[n, j] v^n e^{ijh}``."""

    __slots__ = ("domain", "coeffs", "min_order")

    def __init__(self, domain: DomainSpec, coeffs, min_order: int = 0):
        arr = np.array(coeffs, dtype=complex)
        if arr.shape != domain.shape:
            raise DimensionMismatchError(
                f"coefficient array has shape {arr.shape}, domain expects {domain.shape}"
            )
        if min_order < 0:
            raise OrderError("min_order must be nonnegative")
        lead = arr[: min(min_order, arr.shape[0])]
        if lead.size and np.any(np.abs(lead) >= ZERO_TOL):
            n_bad = int(np.nonzero(np.any(np.abs(lead) >= ZERO_TOL, axis=1))[0][0])
            raise OrderError(
                f"declared min_order {min_order} but degree {n_bad} is nonzero"
            )
        arr.setflags(write=False)
        self.domain = domain
        self.coeffs = arr
        self.min_order = int(min_order)

    # -- constructors -------------------------------------------------
    @classmethod
    def zeros(cls, domain, min_order=0):
        return cls(domain, np.zeros(domain.shape, dtype=complex), min_order)

    @classmethod
    def from_terms(cls, domain, terms, min_order=None):
        """Build from a mapping ``{(n, j): value}``.  Out-of-range indices raise."""
        arr = np.zeros(domain.shape, dtype=complex)
        J = domain.fourier_band
        for (n, j), c in terms.items():
            if not (0 <= n <= domain.taylor_order and -J <= j <= J):
                raise DimensionMismatchError(f"term ({n}, {j}) outside (N, J) bounds")
            arr[n, J + j] += c
        if min_order is None:
            min_order = _actual_order(arr)
        return cls(domain, arr, min_order)

    @classmethod
    def from_row(cls, domain, row, n=0):
        """Place a Fourier vector (length ``2J+1``) at degree ``n``."""
        arr = np.zeros(domain.shape, dtype=complex)
        arr[n] = row
        return cls(domain, arr, n if np.any(row) else 0)

    # -- basic properties ---------------------------------------------
    @property
    def N(self):
        return self.domain.taylor_order

    @property
    def J(self):
        return self.domain.fourier_band

    def __getitem__(self, nj):
        n, j = nj
        if not (0 <= n <= self.N and -self.J <= j <= self.J):
            return 0j
        return complex(self.coeffs[n, self.J + j])

    def __repr__(self):
        nz = int(np.count_nonzero(self.coeffs))
        return f"FourierTaylorSeries(N={self.N}, J={self.J}, min_order={self.min_order}, nnz={nz})"

    def actual_order(self):
        """Lowest degree with a nonzero coefficient (``N + 1`` for the zero series)."""
        return _actual_order(self.coeffs)

    def occupied_band(self):
        """Largest ``|j|`` carrying a nonzero coefficient (0 for the zero series)."""
        cols = np.nonzero(np.any(np.abs(self.coeffs) >= ZERO_TOL, axis=0))[0]
        if cols.size == 0:
            return 0
        return int(np.max(np.abs(cols - self.J)))

    def max_abs(self):
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0

    def is_zero(self, tol=0.0):
        return bool(np.all(np.abs(self.coeffs) <= tol))

    def _like(self, arr, min_order):
        return FourierTaylorSeries(self.domain, arr, min_order)

    def _check_compatible(self, other):
        if not isinstance(other, FourierTaylorSeries):
            raise TypeError(f"expected FourierTaylorSeries, got {type(other).__name__}")
        if self.domain.shape != other.domain.shape:
            raise DimensionMismatchError(
                f"incompatible bounds (N, J) = ({self.N}, {self.J}) vs ({other.N}, {other.J})"
            )

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other):
        return fts_add(self, other)

    def __neg__(self):
        return self._like(-self.coeffs, self.min_order)

    def __sub__(self, other):
        return fts_add(self, -other)

    def scale(self, c):
        """Multiply by a scalar; ``c = 0`` keeps the declared order."""
        return self._like(self.coeffs * c, self.min_order)

    def __mul__(self, other):
        if isinstance(other, FourierTaylorSeries):
            return fts_mul(self, other, self.N)
        return self.scale(other)

    __rmul__ = scale

    def truncate(self, order):
        """Zero every degree above ``order``."""
        arr = self.coeffs.copy()
        arr[order + 1 :] = 0
        return self._like(arr, self.min_order)

    def reband(self, domain):
        """Copy into another (N, J) frame; degrees/modes that do not fit are dropped."""
        arr = np.zeros(domain.shape, dtype=complex)
        n_keep = min(self.N, domain.taylor_order) + 1
        j_keep = min(self.J, domain.fourier_band)
        src = self.coeffs[:n_keep, self.J - j_keep : self.J + j_keep + 1]
        arr[:n_keep, domain.fourier_band - j_keep : domain.fourier_band + j_keep + 1] = src
        return FourierTaylorSeries(domain, arr, min(self.min_order, domain.taylor_order + 1))

    def shift_h(self, c):
        """``u(h + c, v)``: mode ``j`` picks up ``exp(i j c)``."""
        if c == 0:
            return self
        j = np.arange(-self.J, self.J + 1)
        return self._like(self.coeffs * np.exp(1j * j * c)[None, :], self.min_order)

    def dh(self, p=1):
        """``d^p/dh^p`` exactly: mode ``j`` is multiplied by ``(ij)^p``."""
        if p == 0:
            return self
        j = np.arange(-self.J, self.J + 1)
        return self._like(self.coeffs * ((1j * j) ** p)[None, :], self.min_order)

    def dv(self):
        """``d/dv``; the top degree of the result is zero."""
        arr = np.zeros_like(self.coeffs)
        n = np.arange(1, self.N + 1)
        arr[:-1] = self.coeffs[1:] * n[:, None]
        return self._like(arr, max(self.min_order - 1, 0))

    def mul_v_power(self, k):
        """Multiply by ``v**k`` (truncating at N)."""
        arr = np.zeros_like(self.coeffs)
        if k <= self.N:
            arr[k:] = self.coeffs[: self.N + 1 - k]
        return self._like(arr, min(self.min_order + k, self.N + 1))

    def degree(self, n):
        """Fourier vector of the degree-``n`` coefficient."""
        return self.coeffs[n].copy()

    def evaluate(self, h, v):
        """Point evaluation (numpy broadcasting over ``h`` and ``v``)."""
        h = np.asarray(h, dtype=complex)
        v = np.asarray(v, dtype=complex)
        j = np.arange(-self.J, self.J + 1)
        modes = np.exp(1j * np.multiply.outer(h, j))
        rows = modes @ self.coeffs.T
        powers = np.power.outer(v, np.arange(self.N + 1))
        return np.sum(rows * powers, axis=-1)

    # -- serialization ------------------------------------------------
    def to_dict(self):
        entries = []
        for n, col in zip(*np.nonzero(self.coeffs)):
            c = self.coeffs[n, col]
            entries.append([int(n), int(col - self.J), float(c.real), float(c.imag)])
        entries.sort(key=lambda e: (e[0], e[1]))
        return {"N": self.N, "J": self.J, "min_order": self.min_order, "coeffs": entries}

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, data, strip_halfwidth=1.0, disc_radius=1.0):
        dom = DomainSpec(strip_halfwidth, disc_radius, int(data["N"]), int(data["J"]))
        arr = np.zeros(dom.shape, dtype=complex)
        for n, j, re, im in data["coeffs"]:
            arr[int(n), dom.fourier_band + int(j)] = complex(re, im)
        return cls(dom, arr, int(data.get("min_order", 0)))

    @classmethod
    def from_json(cls, text, **kw):
        return cls.from_dict(json.loads(text), **kw)

    def __eq__(self, other):
        if not isinstance(other, FourierTaylorSeries):
            return NotImplemented
        return (
            self.domain.shape == other.domain.shape
            and self.min_order == other.min_order
            and np.array_equal(self.coeffs, other.coeffs)
        )

    __hash__ = None


def _actual_order(arr):
    rows = np.nonzero(np.any(np.abs(arr) >= ZERO_TOL, axis=1))[0]
    return int(rows[0]) if rows.size else arr.shape[0]


def _support(arr):
    """Row range and column range of the nonzero block (inclusive), or None."""
    mask = np.abs(arr) >= ZERO_TOL
    rows = np.nonzero(np.any(mask, axis=1))[0]
    if rows.size == 0:
        return None
    cols = np.nonzero(np.any(mask, axis=0))[0]
    return rows[0], rows[-1], cols[0], cols[-1]


def _mul_arrays(a, b, out_order, J):
    """Cauchy product in v and linear convolution in j, truncated."""
    return mul_truncated(np.ascontiguousarray(a), np.ascontiguousarray(b), out_order, J)


def fts_add(a: FourierTaylorSeries, b: FourierTaylorSeries) -> FourierTaylorSeries:
    a._check_compatible(b)
    return FourierTaylorSeries(a.domain, a.coeffs + b.coeffs, min(a.min_order, b.min_order))


def fts_mul(a: FourierTaylorSeries, b: FourierTaylorSeries, out_order: int | None = None):
    """Product truncated at Taylor degree ``out_order`` and Fourier band J.

    Modes with ``|j| > J`` are dropped, never wrapped.
    """
    a._check_compatible(b)
    if out_order is None:
        out_order = a.N
    if not 0 <= out_order <= a.N:
        raise OrderError(f"out_order {out_order} outside [0, {a.N}]")
    arr = _mul_arrays(a.coeffs, b.coeffs, out_order, a.J)
    return FourierTaylorSeries(a.domain, arr, min(a.min_order + b.min_order, out_order + 1))


def jet(u: FourierTaylorSeries, m: int, mode: str = "up_to") -> FourierTaylorSeries:
    """Degree-``m`` part (``exact_degree``), ``u^{<=m}`` (``up_to``) or ``u^{>m}`` (``above``)."""
    if not 0 <= m <= u.N:
        raise OrderError(f"jet order {m} outside [0, {u.N}]")
    arr = np.zeros_like(u.coeffs)
    if mode == "exact_degree":
        arr[m] = u.coeffs[m]
        return FourierTaylorSeries(u.domain, arr, m if np.any(arr[m]) else 0)
    if mode == "up_to":
        arr[: m + 1] = u.coeffs[: m + 1]
        return FourierTaylorSeries(u.domain, arr, min(u.min_order, m + 1))
    if mode == "above":
        arr[m + 1 :] = u.coeffs[m + 1 :]
        return FourierTaylorSeries(u.domain, arr, max(u.min_order, m + 1))
    raise ValueError(f"unknown jet mode {mode!r}")


def _powers(s, kmax, out_order):
    """Stack of s^0, s^1, ..., s^kmax truncated at out_order (s^0 = 1)."""
    pw = np.zeros((kmax + 1,) + s.coeffs.shape, dtype=complex)
    pw[0, 0, s.J] = 1.0
    for k in range(1, kmax + 1):
        pw[k] = _mul_arrays(pw[k - 1], s.coeffs, out_order, s.J)
    return pw


def compose_into(outer, h_sub, v_sub, out_order=None):
    """``outer(h + h_sub(h, v), v_sub(h, v))`` truncated at ``out_order``.

    The h-shift is expanded by the finite Taylor formula
    ``sum_P (1/P!) d_h^P outer . h_sub^P``; the sum stops because
    ``h_sub = O(v)``.

    Every intermediate product is cut to band ``J`` like :func:`fts_mul`, so
    the result equals the band-``J`` truncation of the exact composition only
    when the powers of ``h_sub`` and ``v_sub`` stay inside the band.  Callers
    that need exactness size ``J`` accordingly (the Arnold solvers do).
    """
    outer._check_compatible(h_sub)
    outer._check_compatible(v_sub)
    if out_order is None:
        out_order = outer.N
    if not 0 <= out_order <= outer.N:
        raise OrderError(f"out_order {out_order} outside [0, {outer.N}]")
    if h_sub.min_order < 1 and not h_sub.is_zero():
        raise OrderError("h_sub must vanish at v = 0 (min_order >= 1)")
    if v_sub.min_order < 1 and not v_sub.is_zero():
        raise OrderError("v_sub must vanish at v = 0 (min_order >= 1)")
    J = outer.J
    vmin = max(v_sub.actual_order(), 1)
    hmin = max(h_sub.actual_order(), 1)
    n_lo = outer.min_order
    if n_lo * vmin > out_order:
        return FourierTaylorSeries.zeros(outer.domain, out_order + 1)
    # degrees of outer that can still reach out_order
    nmax = min(out_order // vmin, outer.N)
    vpow = _powers(v_sub, nmax, out_order)
    result = substitute_rows(outer.coeffs, vpow, n_lo, out_order, J)
    if not h_sub.is_zero():
        jj = np.arange(-J, J + 1)
        hp = h_sub.coeffs
        hpow = hp
        fact = 1.0
        P = 1
        while P * hmin + n_lo * vmin <= out_order:
            fact *= P
            if P > 1:
                hpow = _mul_arrays(hpow, hp, out_order - n_lo * vmin, J)
            d = outer.coeffs * ((1j * jj) ** P)[None, :] / fact
            term = substitute_rows(d, vpow, n_lo, out_order - P * hmin, J)
            result += _mul_arrays(term, hpow, out_order, J)
            P += 1
    result[out_order + 1 :] = 0
    mo = min(n_lo * vmin, out_order + 1)
    return FourierTaylorSeries(outer.domain, result, mo)


def coeff_sup_bound(u: FourierTaylorSeries, delta: float, rho: float) -> float:
    """Coefficient majorant ``sum |c_{n,j}| e^{|j| delta} rho^n``.

    An upper bound for ``sup |u|`` on ``{|Im h| < delta, |v| < rho}``.
    """
    if delta > u.domain.strip_halfwidth * (1 + 1e-12) or rho > u.domain.disc_radius * (1 + 1e-12):
        raise ValueError("evaluation domain exceeds the series domain")
    j = np.abs(np.arange(-u.J, u.J + 1))
    w = np.exp(j * delta)
    rpow = rho ** np.arange(u.N + 1)
    return float(np.sum(np.abs(u.coeffs) * w[None, :] * rpow[:, None]))


# ---------------------------------------------------------------------------
# map germs


@dataclass(frozen=True)
class MapGerm:
    """``(h, v) -> (h + horizontal_shift + hp, multiplier * v + vp)``."""

    horizontal_shift: complex
    multiplier: complex
    h_perturbation: FourierTaylorSeries
    v_perturbation: FourierTaylorSeries

    def __post_init__(self):
        if abs(self.multiplier) == 0:
            raise ValueError("multiplier must be nonzero")
        self.h_perturbation._check_compatible(self.v_perturbation)
        if self.h_perturbation.min_order < 1 and not self.h_perturbation.is_zero():
            raise OrderError("h_perturbation must have min_order >= 1")
        if self.v_perturbation.min_order < 2 and not self.v_perturbation.is_zero():
            raise OrderError("v_perturbation must have min_order >= 2")

    @classmethod
    def identity(cls, domain):
        return cls(0j, 1 + 0j, FourierTaylorSeries.zeros(domain, 1), FourierTaylorSeries.zeros(domain, 2))

    @classmethod
    def linear(cls, domain, shift, multiplier):
        return cls(complex(shift), complex(multiplier),
                   FourierTaylorSeries.zeros(domain, 1), FourierTaylorSeries.zeros(domain, 2))

    @property
    def domain(self):
        return self.h_perturbation.domain

    def v_component(self):
        """The full vertical component ``multiplier * v + vp`` as a series."""
        arr = self.v_perturbation.coeffs.copy()
        arr[1, self.domain.fourier_band] += self.multiplier
        return FourierTaylorSeries(self.domain, arr, 1)

    def linear_part(self):
        return MapGerm.linear(self.domain, self.horizontal_shift, self.multiplier)

    def truncate(self, order):
        return MapGerm(self.horizontal_shift, self.multiplier,
                       self.h_perturbation.truncate(order), self.v_perturbation.truncate(order))

    def max_abs_difference(self, other):
        return max(
            abs(self.horizontal_shift - other.horizontal_shift),
            abs(self.multiplier - other.multiplier),
            float(np.max(np.abs(self.h_perturbation.coeffs - other.h_perturbation.coeffs))),
            float(np.max(np.abs(self.v_perturbation.coeffs - other.v_perturbation.coeffs))),
        )

    def evaluate(self, h, v):
        hh = h + self.horizontal_shift + self.h_perturbation.evaluate(h, v)
        vv = self.multiplier * v + self.v_perturbation.evaluate(h, v)
        return hh, vv

    def to_dict(self):
        s, m = complex(self.horizontal_shift), complex(self.multiplier)
        return {
            "horizontal_shift": [s.real, s.imag],
            "multiplier": [m.real, m.imag],
            "h_perturbation": self.h_perturbation.to_dict(),
            "v_perturbation": self.v_perturbation.to_dict(),
        }

    @classmethod
    def from_dict(cls, data, **kw):
        s = complex(*data["horizontal_shift"])
        m = complex(*data["multiplier"])
        return cls(s, m, FourierTaylorSeries.from_dict(data["h_perturbation"], **kw),
                   FourierTaylorSeries.from_dict(data["v_perturbation"], **kw))


def compose_maps(F: MapGerm, G: MapGerm, out_order=None) -> MapGerm:
    """``F o G`` through degree ``out_order``."""
    if out_order is None:
        out_order = F.domain.taylor_order
    gv = G.v_component()
    hp_F = F.h_perturbation.shift_h(G.horizontal_shift)
    vp_F = F.v_perturbation.shift_h(G.horizontal_shift)
    h_new = G.h_perturbation + compose_into(hp_F, G.h_perturbation, gv, out_order)
    v_new = G.v_perturbation.scale(F.multiplier) + compose_into(vp_F, G.h_perturbation, gv, out_order)
    h_new = FourierTaylorSeries(h_new.domain, _trunc(h_new.coeffs, out_order), 1)
    v_new = FourierTaylorSeries(v_new.domain, _trunc(v_new.coeffs, out_order), 2)
    return MapGerm(F.horizontal_shift + G.horizontal_shift, F.multiplier * G.multiplier, h_new, v_new)


def _trunc(arr, order):
    arr = arr.copy()
    arr[order + 1 :] = 0
    return arr


def invert_map(G: MapGerm, out_order=None, max_iter=None) -> MapGerm:
    """Compositional inverse of ``G`` through ``out_order`` by fixed-point iteration.

    Each sweep fixes at least one more degree; the working order grows with
    the number of degrees already known to be correct.
    """
    dom = G.domain
    if out_order is None:
        out_order = dom.taylor_order
    s, mu = G.horizontal_shift, G.multiplier
    # inverse (h, v) -> (h - s + P, v/mu + Q);  G(inverse) = id gives
    # P = -hp_G(h - s + P, v/mu + Q),  Q = -vp_G(...)/mu
    hp = G.h_perturbation.shift_h(-s)
    vp = G.v_perturbation.shift_h(-s)
    P = FourierTaylorSeries.zeros(dom, 1)
    Q = FourierTaylorSeries.zeros(dom, 2)
    lin = np.zeros(dom.shape, dtype=complex)
    lin[1, dom.fourier_band] = 1.0 / mu
    a = G.h_perturbation.actual_order()
    b = G.v_perturbation.actual_order()
    # lowest degree at which P and Q may still be wrong
    eP, eQ = 1, 2
    sweeps = 0
    while min(eP, eQ - 1) <= out_order:
        if max_iter is not None and sweeps >= max_iter:
            break
        order = min(out_order, max(eP, eQ) + max(a, b))
        vsub = FourierTaylorSeries(dom, lin + Q.coeffs, 1)
        P_new = -compose_into(hp, P, vsub, order)
        Q_new = compose_into(vp, P, vsub, order).scale(-1.0 / mu)
        P = FourierTaylorSeries(dom, P_new.coeffs, 1)
        Q = FourierTaylorSeries(dom, Q_new.coeffs, 2)
        eP, eQ = min(a + eP, a - 1 + eQ), min(b + eP, b - 1 + eQ)
        sweeps += 1
    return MapGerm(-s, 1.0 / mu, P, Q)


# ---------------------------------------------------------------------------
# vector fields and time-one maps


@dataclass(frozen=True)
class VerticalVectorField:
    """``Y = Y_h d/dh + Y_v d/dv`` with both components ``O(v^2)``."""

    h_component: FourierTaylorSeries
    v_component: FourierTaylorSeries

    def __post_init__(self):
        self.h_component._check_compatible(self.v_component)
        for c in (self.h_component, self.v_component):
            if c.min_order < 2 and not c.is_zero():
                raise OrderError("vector field components must vanish to order >= 2")

    @property
    def domain(self):
        return self.h_component.domain

    def lie(self, u, out_order):
        """Lie derivative ``Y_h u_h + Y_v u_v``."""
        a = fts_mul(self.h_component, u.dh(), out_order)
        b = fts_mul(self.v_component, u.dv(), out_order)
        return a + b


def flow_time_one(Y: VerticalVectorField, out_order=None) -> MapGerm:
    """Time-one map of ``Y`` as a formal series (Lie series ``sum L_Y^k / k!``).

    ``L_Y`` raises the v-degree by at least one, so the series stops after
    ``out_order`` terms.
    """
    dom = Y.domain
    if out_order is None:
        out_order = dom.taylor_order
    h_acc = np.zeros(dom.shape, dtype=complex)
    v_acc = np.zeros(dom.shape, dtype=complex)
    # coordinate functions h and v are not periodic series; their first Lie
    # derivatives are the field components themselves
    th, tv = Y.h_component, Y.v_component
    k = 1
    fact = 1.0
    while k <= out_order and not (th.is_zero() and tv.is_zero()):
        fact *= k
        h_acc += th.coeffs / fact
        v_acc += tv.coeffs / fact
        th = Y.lie(th, out_order)
        tv = Y.lie(tv, out_order)
        k += 1
    h_acc[out_order + 1 :] = 0
    v_acc[out_order + 1 :] = 0
    return MapGerm(0j, 1 + 0j, FourierTaylorSeries(dom, h_acc, 1), FourierTaylorSeries(dom, v_acc, 2))


def log_of_map(F: MapGerm, out_order=None) -> VerticalVectorField:
    """Inverse of :func:`flow_time_one` for germs tangent to the identity.

    Built degree by degree: the degree-``m`` part of the field is the
    degree-``m`` defect between ``F`` and the flow of the lower-degree field.
    """
    dom = F.domain
    if out_order is None:
        out_order = dom.taylor_order
    if F.horizontal_shift != 0 or F.multiplier != 1:
        raise OrderError("log_of_map needs multiplier 1 and zero horizontal shift")
    if F.h_perturbation.actual_order() < 2 or F.v_perturbation.actual_order() < 2:
        raise OrderError("log_of_map needs both perturbations to vanish to order >= 2")
    yh = np.zeros(dom.shape, dtype=complex)
    yv = np.zeros(dom.shape, dtype=complex)
    for m in range(2, out_order + 1):
        Y = VerticalVectorField(FourierTaylorSeries(dom, yh, 2), FourierTaylorSeries(dom, yv, 2))
        G = flow_time_one(Y, m)
        yh[m] = F.h_perturbation.coeffs[m] - G.h_perturbation.coeffs[m]
        yv[m] = F.v_perturbation.coeffs[m] - G.v_perturbation.coeffs[m]
    return VerticalVectorField(FourierTaylorSeries(dom, yh, 2), FourierTaylorSeries(dom, yv, 2))
