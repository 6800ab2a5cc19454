"""Multipliers and small-divisor quantities.

A rotation multiplier ``lambda = exp(2 pi i alpha)`` keeps ``alpha`` in high
precision (an exact :class:`fractions.Fraction` or an mpmath number carrying
at least 128 bits).  Powers are never formed by repeated multiplication:
``n alpha mod 1`` is reduced first and only the reduced angle is rounded to
double precision.
"""
from __future__ import annotations

import cmath
import csv
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .errors import ParameterError, ResonanceError

RESONANCE_THRESHOLD = 1e-13
_CHUNK_BITS = 26
_N_CHUNKS = 4
_EXACT_BITS = 256

__all__ = [
    "Multiplier",
    "SmallDivisorTable",
    "DstarSequence",
    "DoninSum",
    "golden_mean",
    "parse_multiplier",
    "complex_divisor",
    "divisor",
    "build_divisor_table",
    "min_divisor_profile",
    "siegel_check",
    "bruno_partial_sums",
    "donin_bruno_sum",
    "arnold_comparability",
    "build_arnold_constants",
]


def _to_mpf(alpha):
    with mpmath.workprec(_EXACT_BITS):
        if isinstance(alpha, Fraction):
            return mpmath.mpf(alpha.numerator) / alpha.denominator
        return mpmath.mpf(alpha)


def _chunks(alpha):
    """Integer chunks c_k with frac(alpha) ~ sum c_k 2^(-26 k)."""
    with mpmath.workprec(_EXACT_BITS):
        x = _to_mpf(alpha)
        x = x - mpmath.floor(x)
        out = []
        for _ in range(_N_CHUNKS):
            x = x * 2**_CHUNK_BITS
            c = mpmath.floor(x)
            out.append(int(c))
            x = x - c
    return out


@dataclass(frozen=True)
class Multiplier:
    """A multiplier ``lambda`` of kind ``root_of_unity``, ``rotation`` or ``explicit``.

    Parameters
    ----------
    kind : str
    value : complex
        Double-precision value of ``lambda``.
    alpha : Fraction or mpmath.mpf or None
        Rotation number for the first two kinds.
    label : str
    """

    kind: str
    value: complex
    alpha: object = None
    label: str = ""
    _chunk_cache: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in ("root_of_unity", "rotation", "explicit"):
            raise ParameterError(f"unknown multiplier kind {self.kind!r}")
        if self.kind != "explicit":
            if self.alpha is None:
                raise ParameterError("rotation multipliers need alpha")
            if abs(abs(self.value) - 1.0) > 1e-14:
                raise ParameterError("rotation multiplier must lie on the unit circle")
            if not isinstance(self.alpha, (Fraction, mpmath.mpf)):
                raise ParameterError("alpha must be a Fraction or an mpmath number")
            object.__setattr__(self, "_chunk_cache", tuple(_chunks(self.alpha)))
        elif self.value == 0:
            raise ParameterError("multiplier must be nonzero")

    # constructors -------------------------------------------------------
    @classmethod
    def root_of_unity(cls, p, q):
        if q <= 0:
            raise ParameterError("q must be positive")
        a = Fraction(p, q)
        return cls("root_of_unity", cmath.exp(2j * math.pi * float(a % 1)), a, f"root:{p}/{q}")

    @classmethod
    def rotation(cls, alpha, label=None):
        """``exp(2 pi i alpha)``; floats are converted exactly, strings as decimals."""
        if isinstance(alpha, str):
            alpha = Fraction(alpha)
        elif isinstance(alpha, (int, float)):
            alpha = Fraction(alpha)
        elif not isinstance(alpha, (Fraction, mpmath.mpf)):
            raise ParameterError(f"cannot use {type(alpha).__name__} as rotation number")
        if isinstance(alpha, Fraction):
            theta = float(alpha % 1)
        else:
            with mpmath.workprec(_EXACT_BITS):
                theta = float(alpha - mpmath.floor(alpha))
        return cls("rotation", cmath.exp(2j * math.pi * theta), alpha, label or f"alpha:{alpha}")

    @classmethod
    def from_continued_fraction(cls, entries, a0=0, label=None):
        """Rotation number ``[a0; e1, e2, ...]`` (exact rational)."""
        entries = [int(e) for e in entries]
        if any(e < 1 for e in entries):
            raise ParameterError("continued fraction entries must be >= 1")
        x = Fraction(0)
        for e in reversed(entries):
            x = 1 / (e + x)
        alpha = a0 + x
        text = "cf:[%d;%s]" % (a0, ",".join(map(str, entries)))
        return cls.rotation(alpha, label or text)

    @classmethod
    def explicit(cls, z):
        return cls("explicit", complex(z), None, f"explicit:{complex(z)}")

    # arithmetic -------------------------------------------------------------
    @property
    def is_rational(self):
        return isinstance(self.alpha, Fraction)

    def reduced_angle(self, n):
        """``n alpha`` reduced to ``[-1/2, 1/2)``, as floats (scalar or array)."""
        if self.kind == "explicit":
            raise ParameterError("explicit multipliers have no rotation number")
        scalar = np.ndim(n) == 0
        ns = np.atleast_1d(np.asarray(n, dtype=np.int64))
        if self.is_rational and ns.size <= 1 << 16:
            p, q = self.alpha.numerator, self.alpha.denominator
            th = np.array([((int(k) * p) % q) / q for k in ns])
        else:
            th = self._chunked(ns)
            if self.is_rational and self.alpha.denominator < 1 << 62:
                th = np.where(ns % self.alpha.denominator == 0, 0.0, th)
        th = np.where(th >= 0.5, th - 1.0, th)
        return float(th[0]) if scalar else th

    def _chunked(self, ns):
        if ns.size and np.max(np.abs(ns)) >= 2**_CHUNK_BITS:
            # chunk products would no longer be exact
            with mpmath.workprec(_EXACT_BITS):
                a = _to_mpf(self.alpha)
                return np.array([float(mpmath.frac(int(k) * a)) for k in ns])
        ns = ns.astype(np.int64)
        total = np.zeros(ns.shape)
        for k, c in enumerate(self._chunk_cache, start=1):
            scale = 2.0 ** (-_CHUNK_BITS * k)
            if k <= 2:
                # integer product < 2^52, its fractional part after scaling is exact
                prod = (ns * c) % (1 << (_CHUNK_BITS * k))
                total += prod * scale
            else:
                total += (ns * float(c)) * scale
        return np.mod(total, 1.0)

    def log_power(self, n):
        """A logarithm of ``lambda**n`` (``2 pi i`` times the reduced angle for rotations)."""
        if self.kind == "explicit":
            return n * cmath.log(self.value)
        return 2j * math.pi * self.reduced_angle(n)

    def power(self, n):
        return cmath.exp(self.log_power(n))

    def is_root_of_unity_power(self, n):
        """Exact for rational rotation numbers, thresholded otherwise."""
        if self.is_rational:
            return (n * self.alpha).denominator == 1
        return divisor(self, 0j, n, 0) < RESONANCE_THRESHOLD

    def to_spec(self):
        return self.label


def golden_mean(bits=_EXACT_BITS):
    """``(sqrt 5 - 1)/2`` as an mpmath number with ``bits`` of precision."""
    with mpmath.workprec(bits):
        return (mpmath.sqrt(5) - 1) / 2


_CF_RE = re.compile(r"^cf:\[\s*(-?\d+)\s*;\s*([\d\s,]*)\]$")


def parse_multiplier(spec: str) -> Multiplier:
    """Parse a textual multiplier spec.

    Accepted forms: ``golden``, ``cf:[a0;e1,e2,...]``, ``root:p/q``,
    ``p/q`` or a decimal string (rotation number), ``explicit:re,im``.
    """
    s = spec.strip().strip('"').strip("'")
    if s == "golden":
        return Multiplier.rotation(golden_mean(), label="golden")
    m = _CF_RE.match(s)
    if m:
        entries = [int(e) for e in m.group(2).replace(" ", "").split(",") if e]
        return Multiplier.from_continued_fraction(entries, int(m.group(1)), label=s)
    if s.startswith("root:"):
        p, q = s[5:].split("/")
        return Multiplier.root_of_unity(int(p), int(q))
    if s.startswith("explicit:"):
        re_, im_ = s[9:].split(",")
        return Multiplier.explicit(complex(float(re_), float(im_)))
    if s.startswith("alpha:"):
        s = s[6:]
    try:
        return Multiplier.rotation(Fraction(s), label=spec.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParameterError(f"cannot parse multiplier spec {spec!r}") from exc


# ---------------------------------------------------------------------------
# divisors


def _em1(w):
    """``exp(w) - 1`` without cancellation near ``w = 0``."""
    x, y = w.real, w.imag
    re_ = math.expm1(x) * math.cos(y) - 2.0 * math.sin(y / 2) ** 2
    im_ = math.exp(x) * math.sin(y)
    return complex(re_, im_)


def complex_divisor(lam: Multiplier, omega: complex, n: int, j: int) -> complex:
    """``lambda**n * exp(2 i omega j) - 1``."""
    return _em1(lam.log_power(n) + 2j * omega * j)


def divisor(lam: Multiplier, omega: complex, n: int, j: int) -> float:
    """``|lambda**n exp(2 i omega j) - 1|``; for ``j = 0`` this is ``|lambda**n - 1|``."""
    return abs(complex_divisor(lam, omega, n, j))


def _divisor_scale(lam, omega, n, j):
    return math.exp((lam.log_power(n) + 2j * omega * j).real)


def check_resonance(lam, omega, n, j, threshold=RESONANCE_THRESHOLD):
    """Raise :class:`ResonanceError` if the ``(n, j)`` divisor is resonant."""
    if j == 0 and lam.kind != "explicit" and lam.is_rational:
        if (n * lam.alpha).denominator == 1:
            raise ResonanceError(f"lambda^{n} = 1", n=n, j=0, divisor=0.0, order=n)
        return
    d = divisor(lam, omega, n, j)
    if d < threshold * max(1.0, _divisor_scale(lam, omega, n, j)):
        raise ResonanceError(f"divisor at (n={n}, j={j}) is {d:.3e}", n=n, j=j, divisor=d, order=n)


@dataclass(frozen=True)
class SmallDivisorTable:
    """Cached ``|lambda**n exp(2 i omega j) - 1|`` for ``0 <= n <= max_n``, ``|j| <= max_j``.

    ``entries[n, max_j + j]`` holds the modulus, ``values`` the complex divisor.
    """

    multiplier: Multiplier
    omega: complex
    max_n: int
    max_j: int
    entries: np.ndarray
    values: np.ndarray = None

    def __post_init__(self):
        if not self.omega.imag > 0:
            raise ParameterError("Im omega must be positive")
        if self.entries.shape != (self.max_n + 1, 2 * self.max_j + 1):
            raise ParameterError("entries shape does not match (max_n, max_j)")
        if np.any(self.entries < 0):
            raise ParameterError("divisor moduli must be nonnegative")
        self.entries.setflags(write=False)

    def entry(self, n, j):
        return float(self.entries[n, self.max_j + j])

    def row(self, n):
        return self.entries[n]

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "j", "divisor"])
            for n in range(1, self.max_n + 1):
                for j in range(-self.max_j, self.max_j + 1):
                    w.writerow([n, j, repr(self.entry(n, j))])


def build_divisor_table(lam: Multiplier, omega: complex, max_n: int, max_j: int) -> SmallDivisorTable:
    omega = complex(omega)
    if not omega.imag > 0:
        raise ParameterError("Im omega must be positive")
    vals = np.empty((max_n + 1, 2 * max_j + 1), dtype=complex)
    for n in range(max_n + 1):
        ln = lam.log_power(n)
        for j in range(-max_j, max_j + 1):
            vals[n, max_j + j] = _em1(ln + 2j * omega * j)
    vals.setflags(write=False)
    return SmallDivisorTable(lam, omega, max_n, max_j, np.abs(vals), vals)


def _abs_divisors_1d(lam, ns):
    """``|lambda**n - 1|`` for an integer array ``ns``."""
    if lam.kind == "explicit":
        return np.array([abs(_em1(lam.log_power(int(k)))) for k in ns])
    return 2.0 * np.abs(np.sin(np.pi * lam.reduced_angle(ns)))


def min_divisor_profile(lam: Multiplier, m_max: int) -> np.ndarray:
    """``profile[m] = min_{2 <= j <= m} |lambda**j - 1|``; entries 0 and 1 are NaN."""
    if m_max < 2:
        raise ParameterError("m_max must be at least 2")
    js = np.arange(2, m_max + 1)
    d = _abs_divisors_1d(lam, js)
    if lam.kind != "explicit" and lam.is_rational:
        q = lam.alpha.denominator
        d = np.where(js % q == 0, 0.0, d)
    out = np.full(m_max + 1, np.nan)
    out[2:] = np.minimum.accumulate(d)
    return out


@dataclass(frozen=True)
class SiegelVerdict:
    passed: bool
    worst_n: int
    worst_ratio: float
    resonant_n: int | None = None


def siegel_check(lam: Multiplier, C: float, tau: float, n_max: int) -> SiegelVerdict:
    """Check ``|lambda**n - 1| >= C n**(-tau)`` for ``1 <= n <= n_max``.

    ``worst_ratio`` is the smallest ``|lambda**n - 1| / (C n**-tau)``.
    """
    if not C > 0 or tau < 0:
        raise ParameterError("need C > 0 and tau >= 0")
    ns = np.arange(1, n_max + 1)
    d = _abs_divisors_1d(lam, ns)
    if lam.kind != "explicit" and lam.is_rational:
        d = np.where(ns % lam.alpha.denominator == 0, 0.0, d)
    zero = np.nonzero(d == 0)[0]
    ratio = d / (C * ns ** (-float(tau)))
    k = int(np.argmin(ratio))
    if zero.size:
        n0 = int(ns[zero[0]])
        return SiegelVerdict(False, n0, 0.0, n0)
    return SiegelVerdict(bool(ratio[k] >= 1.0), int(ns[k]), float(ratio[k]))


def bruno_partial_sums(lam: Multiplier, K: int) -> np.ndarray:
    """``S_k = sum_{i <= k} 2^-i log max_{2 <= j <= 2^i} |lambda**j - 1|^-1`` for ``k = 1..K``."""
    prof = min_divisor_profile(lam, 2**K)
    out = np.empty(K)
    s = 0.0
    for k in range(1, K + 1):
        mn = prof[2**k]
        if mn < RESONANCE_THRESHOLD:
            js = np.arange(2, 2**k + 1)
            d = _abs_divisors_1d(lam, js)
            if lam.kind != "explicit" and lam.is_rational:
                d = np.where(js % lam.alpha.denominator == 0, 0.0, d)
            order = int(js[np.argmin(d)])
            raise ResonanceError(f"lambda^{order} = 1 within threshold", n=order, j=0,
                                 divisor=float(mn), order=order)
        s += -math.log(mn) / 2**k
        out[k - 1] = s
    return out


# ---------------------------------------------------------------------------
# D* sequences


class DstarSequence:
    """A nondecreasing sequence ``m -> D*(m) >= 1`` stored through ``log D*``.

    Either a table on ``m = 1..len`` or a closed form ``log_fn``; closed forms
    are monotonized over the dyadic points below ``m``.  Values such as
    ``exp(m)`` overflow doubles, so consumers should use :meth:`log_value`.
    """

    def __init__(self, log_fn=None, table=None, tau=0.0, label=""):
        if (log_fn is None) == (table is None):
            raise ParameterError("give exactly one of log_fn and table")
        self.tau = float(tau)
        self.label = label
        self._fn = log_fn
        self._cache = {}
        self._floored = False
        if table is not None:
            t = np.log(np.maximum(np.asarray(table, dtype=float), 1.0))
            self._table = np.maximum.accumulate(t)
            self._table.setflags(write=False)
        else:
            self._table = None

    @classmethod
    def power(cls, tau, C=1.0):
        """``D*(m) = max(1, C m**tau)``."""
        return cls(lambda m: math.log(C) + tau * math.log(m), tau=tau, label=f"power:{C}*m^{tau}")

    @classmethod
    def exponential(cls):
        return cls(lambda m: float(m), tau=0.0, label="exp")

    @classmethod
    def constant(cls, value=1.0):
        return cls(lambda m: math.log(value), label=f"const:{value}")

    @property
    def length(self):
        return None if self._table is None else len(self._table)

    def log_value(self, m):
        m = int(m)
        if m < 1:
            raise ParameterError("D* is indexed from m = 1")
        if self._table is not None:
            if m > len(self._table):
                raise ParameterError(f"D* table ends at m = {len(self._table)}, asked for {m}")
            return float(self._table[m - 1])
        hit = self._cache.get(m)
        if hit is not None:
            return hit
        best = max(0.0, self._fn(m))
        k = 1
        while k < m:
            best = max(best, self._fn(k))
            k *= 2
        self._cache[m] = best
        return best

    def value(self, m):
        lv = self.log_value(m)
        return math.exp(lv) if lv < 700 else math.inf

    def with_floor(self):
        """``max(D*(k), k)``."""
        if self._floored:
            return self
        base = self

        def fn(m):
            return max(base.log_value(m), math.log(m))

        out = DstarSequence(log_fn=fn, tau=self.tau, label=f"floor({self.label})")
        out._floored = True
        return out

    def __call__(self, m):
        return self.value(m)


@dataclass(frozen=True)
class DoninSum:
    terms: np.ndarray
    partial_sums: np.ndarray
    verdict: str

    @property
    def value(self):
        return float(self.partial_sums[-1])


def donin_bruno_sum(D: DstarSequence, K: int) -> DoninSum:
    """Partial sums of ``sum_{k >= 1} log D*(2^{k+1}) / 2^k`` for ``k <= K``.

    ``verdict`` is ``converged`` once the last increment drops below 1e-12,
    ``diverged`` if the increments stopped decreasing over the second half,
    ``undecided`` otherwise.
    """
    terms = np.array([D.log_value(2 ** (k + 1)) / 2**k for k in range(1, K + 1)])
    if np.any(terms < 0):
        raise ParameterError("D* must be >= 1")
    sums = np.cumsum(terms)
    if terms[-1] < 1e-12:
        verdict = "converged"
    else:
        tail = terms[K // 2 :]
        verdict = "diverged" if tail.size > 1 and np.all(np.diff(tail) >= -1e-15 * np.abs(tail[1:])) else "undecided"
    return DoninSum(terms, sums, verdict)


@dataclass(frozen=True)
class ComparabilityVerdict:
    passed: bool
    worst_pair: tuple
    c_effective: float


def arnold_comparability(lam: Multiplier, omega: complex, c: float, n_max: int, j_max: int):
    """Check ``|lambda**n exp(2 i omega j) - 1| >= c |lambda**n - 1|`` on the scanned range.

    ``c_effective`` is the smallest ratio over pairs with a nonzero right side.
    """
    if not c > 0:
        raise ParameterError("c must be positive")
    tab = build_divisor_table(lam, omega, n_max, j_max)
    worst = (None, None)
    best_ratio = math.inf
    for n in range(1, n_max + 1):
        base = tab.entry(n, 0)
        if lam.kind != "explicit" and lam.is_rational and (n * lam.alpha).denominator == 1:
            base = 0.0
        if base == 0.0:
            continue
        r = tab.row(n) / base
        k = int(np.argmin(r))
        if r[k] < best_ratio:
            best_ratio = float(r[k])
            worst = (n, k - j_max)
    return ComparabilityVerdict(bool(best_ratio >= c), worst, best_ratio)


def build_arnold_constants(table: SmallDivisorTable, C: float = 1.0, c: float = 1.0):
    """K-sequence and D*-sequence of the torus model.

    Returns
    -------
    K : ndarray
        ``K[n] = C / |lambda**n - 1|`` for ``1 <= n <= max_n`` (``K[0]`` is NaN).
    Dstar : DstarSequence
        Table of ``D*(2m) = 1 + max_{2 <= l <= 2m} (1 + c K_{l-1}) D_l`` with
        ``D_l = C / |lambda**l - 1|``, odd arguments taking the next even value,
        monotonized.
    """
    d = table.entries[:, table.max_j].astype(float).copy()
    lam = table.multiplier
    if lam.kind != "explicit" and lam.is_rational:
        for n in range(1, table.max_n + 1):
            if (n * lam.alpha).denominator == 1:
                d[n] = 0.0
    for n in range(1, table.max_n + 1):
        if d[n] < RESONANCE_THRESHOLD:
            raise ResonanceError(f"lambda^{n} = 1 within threshold", n=n, j=0, divisor=float(d[n]), order=n)
    K = np.full(table.max_n + 1, np.nan)
    K[1:] = C / d[1:]
    Dl = K  # same expression, kept separate in the formula for readability
    top = table.max_n - table.max_n % 2
    if top < 2:
        raise ParameterError("need max_n >= 2 for D*")
    vals = np.empty(top)
    run = -math.inf
    for l in range(2, top + 1):
        run = max(run, (1 + c * K[l - 1]) * Dl[l])
        if l % 2 == 0:
            vals[l - 1] = 1 + run
            vals[l - 2] = 1 + run
    vals[0] = vals[1]
    return K, DstarSequence(table=vals, label=f"arnold:C={C},c={c}")
