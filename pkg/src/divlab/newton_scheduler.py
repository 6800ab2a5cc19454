"""Parameter schedule of the quadratic (Newton) scheme.

At step ``l`` the scheme works at order ``m_l = 2^(l0 + l)`` and shrinks the
domain by ``theta_l = 1 - delta_l`` with

    delta_l = C* log D*(m_{l+2}) / m_{l+2},     r_{l+1} = theta_l^7 r_l.

The domains must not collapse: ``r_inf = prod theta_l^7`` has to stay above
a prescribed ``r_star``.  The infinite product is certified by the computed
partial product together with an explicit bound on the tail of
``sum delta_l``, never by truncation alone.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, ScheduleError
from .small_divisors import DstarSequence, donin_bruno_sum

__all__ = [
    "NewtonSchedule",
    "CheckItem",
    "Certificate",
    "ErrorTrace",
    "siegel_floor",
    "make_schedule",
    "tail_delta_bound",
    "verify_schedule",
    "find_l0",
    "simulate_errors",
]

# dyadic terms summed explicitly past the end of a schedule before the
# affine-growth remainder takes over
_TAIL_WINDOW = 40


def siegel_floor(tau) -> DstarSequence:
    """``D*(m) = max(m, m^tau)``."""
    return DstarSequence.power(tau).with_floor()


@dataclass(frozen=True)
class NewtonSchedule:
    C_star: float
    tau: float
    l0: int
    r_star: float
    L: int
    m: np.ndarray
    delta: np.ndarray
    theta: np.ndarray
    r: np.ndarray  # length L + 1, r[0] = 1
    Dstar: DstarSequence

    def log_r_partial(self):
        """``7 sum_{l < L} log theta_l``."""
        return float(7.0 * np.sum(np.log1p(-self.delta)))


def _delta(D, C_star, m):
    return C_star * D.log_value(m) / m


def make_schedule(D: DstarSequence, C_star, l0, L, r_star=0.5) -> NewtonSchedule:
    """Arrays ``m_l, delta_l, theta_l, r_l`` for ``0 <= l < L``.

    ``D`` is replaced by ``max(D*(k), k)``.  Raises :class:`ScheduleError`
    when some ``delta_l >= 1`` (``l0`` too small).
    """
    if L < 1 or l0 < 0:
        raise ParameterError("need L >= 1 and l0 >= 0")
    if not 0 < r_star < 1:
        raise ParameterError("r_star must lie in (0, 1)")
    Df = D.with_floor()
    m = np.array([2 ** (l0 + l) for l in range(L)], dtype=float)
    delta = np.array([_delta(Df, C_star, 2 ** (l0 + l + 2)) for l in range(L)])
    bad = np.nonzero(delta >= 1)[0]
    if bad.size:
        l = int(bad[0])
        raise ScheduleError(
            f"delta_{l} = {delta[l]:.4g} >= 1; l0 = {l0} is too small",
            diagnostics={"l0": l0, "index": l, "delta": float(delta[l])},
        )
    theta = 1.0 - delta
    r = np.concatenate([[1.0], np.cumprod(theta**7)])
    for a in (m, delta, theta, r):
        a.setflags(write=False)
    return NewtonSchedule(float(C_star), Df.tau, int(l0), float(r_star), int(L), m, delta, theta, r, Df)


def tail_delta_bound(s: NewtonSchedule):
    """Upper bound for ``sum_{l >= L} delta_l``, or ``inf`` if it cannot be certified.

    With ``p = l0 + l + 2`` the tail is ``C* sum_{p >= P} log D*(2^p) / 2^p``.
    The Donin terms ``log D*(2^{k+1}) / 2^k`` cover ``P <= p <= Q`` explicitly;
    beyond ``Q`` the bound assumes ``log D*(2^p)`` grows at most affinely with
    the last observed increment ``beta``.  The increments over the window
    must be nonincreasing (power laws give constant ones); a growing trend
    such as ``D* = e^m`` yields ``inf``.  The remainder sums to
    ``(log D*(2^Q) + 2 beta) / 2^Q``.
    """
    D = s.Dstar
    P = s.l0 + s.L + 2
    Q = P + _TAIL_WINDOW
    donin = donin_bruno_sum(D, Q - 1)
    # term index k - 1 holds log D*(2^{k+1}) / 2^k, i.e. p = k + 1
    explicit = 0.5 * float(np.sum(donin.terms[P - 2 : Q - 1]))
    logs = np.array([D.log_value(2**p) for p in range(P, Q + 1)])
    inc = np.diff(logs)
    beta = float(inc[-1])
    if np.any(np.diff(inc) > 1e-12 * (1 + np.abs(inc[1:]))):
        return math.inf
    remainder = (logs[-1] + 2 * beta) / 2.0**Q
    return s.C_star * (explicit + remainder)


@dataclass(frozen=True)
class CheckItem:
    name: str
    index: int | None
    lhs: float
    rhs: float
    margin: float
    passed: bool

    def to_dict(self):
        return {
            "name": self.name,
            "index": self.index,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class Certificate:
    """Every inequality with its margin; ``informational`` items do not gate ``passed``."""

    checks: tuple
    informational: tuple
    passed: bool
    log_r_lower: float
    constants: dict = field(default_factory=dict)

    def failed(self):
        return [c for c in self.checks if not c.passed]

    def to_dict(self):
        return {
            "passed": self.passed,
            "log_r_lower": self.log_r_lower,
            "constants": dict(self.constants),
            "checks": [c.to_dict() for c in self.checks],
            "informational": [c.to_dict() for c in self.informational],
        }


def _item(name, index, lhs, rhs, strict_greater=True):
    margin = lhs - rhs if strict_greater else rhs - lhs
    return CheckItem(name, index, float(lhs), float(rhs), float(margin), bool(margin > 0))


def verify_schedule(s: NewtonSchedule, C2=10.0) -> Certificate:
    """Check the inequality chain of a schedule.

    (i) ``m_{l+2} > 24``; (ii) ``C* > 12`` and ``C* > 24 tau + 12``;
    (iii) ``log(C2 D*(m_{l+2}) (1 - delta_l)^{2 m_l - 6} / delta_{l+1}^{2 tau + 1}) < 0``;
    (iv) ``log r_inf >= 7 sum_{l<L} log theta_l - 7 S/(1 - S) >= log r_star`` where
    ``S`` bounds ``sum_{l >= L} delta_l`` (each such ``delta_l <= S``, so
    ``-log(1 - delta_l) <= delta_l / (1 - S)``).

    The bound ``log prod theta_l^7 >= -(7 C*/2) sum log D*(m_{l+2}) / m_{l+2}``
    is reported as an informational item: since ``log(1 - x) < -x`` it can
    never hold, so it is kept out of the verdict.
    """
    D = s.Dstar
    checks = []
    for l in range(s.L):
        checks.append(_item("m_{l+2} > 24", l, 4 * s.m[l], 24))
    checks.append(_item("C* > 12", None, s.C_star, 12))
    checks.append(_item("C* > 24 tau + 12", None, s.C_star, 24 * s.tau + 12))
    for l in range(s.L - 1):
        m2 = 4 * s.m[l]
        val = (
            math.log(C2)
            + D.log_value(int(m2))
            + (2 * s.m[l] - 6) * math.log1p(-s.delta[l])
            - (2 * s.tau + 1) * math.log(s.delta[l + 1])
        )
        checks.append(_item("per-step contraction < 0", l, val, 0.0, strict_greater=False))
    partial = s.log_r_partial()
    S = tail_delta_bound(s)
    if S < 1:
        lower = partial - 7 * S / (1 - S)
    else:
        lower = -math.inf
    checks.append(_item("prod theta^7 (partial) >= r_star", None, partial, math.log(s.r_star)))
    checks.append(_item("log r_inf lower bound >= log r_star", None, lower, math.log(s.r_star)))

    # the literal exponential bound, evaluated with the same tail estimate
    full_sum = float(np.sum(s.delta)) + (S if math.isfinite(S) else math.inf)
    literal_rhs = -3.5 * full_sum
    informational = (_item("prod theta^7 >= exp(-(7 C*/2) sum log D*/m)", None, partial, literal_rhs),)
    passed = all(c.passed for c in checks)
    return Certificate(
        tuple(checks),
        informational,
        passed,
        float(lower),
        {"C_star": s.C_star, "tau": s.tau, "l0": s.l0, "L": s.L, "r_star": s.r_star, "C2": float(C2)},
    )


def find_l0(D: DstarSequence, C_star, r_star, l_max, L=20, C2=10.0):
    """Least ``l0 <= l_max`` whose schedule passes :func:`verify_schedule`.

    Returns ``(l0, schedule, certificate)``; raises :class:`ScheduleError`
    carrying the diagnostics of the last attempt.
    """
    last = {}
    for l0 in range(l_max + 1):
        try:
            s = make_schedule(D, C_star, l0, L, r_star)
        except ScheduleError as e:
            last = dict(e.diagnostics)
            continue
        cert = verify_schedule(s, C2)
        if cert.passed:
            return l0, s, cert
        last = {"l0": l0, "failed": [c.to_dict() for c in cert.failed()][:10]}
    raise ScheduleError(f"no l0 <= {l_max} passes", diagnostics=last)


@dataclass(frozen=True)
class ErrorTrace:
    """Modeled ``eps_l`` together with the gate margins.

    ``failure_index`` is the first step whose gate failed (None if all
    passed); ``required_eps0`` is the largest ``eps0`` that passes the gate at
    step 0.
    """

    eps: np.ndarray
    log_eps: np.ndarray
    gate_lhs: np.ndarray
    gate_rhs: np.ndarray
    failure_index: int | None
    required_eps0: float

    @property
    def gate_margins(self):
        return self.gate_rhs - self.gate_lhs

    def loglog_slope(self, l_max=8, l_min=0):
        """Least-squares slope of ``log log(1/eps_l)`` over ``l_min <= l <= l_max``."""
        le = self.log_eps[l_min : l_max + 1]
        if le.size < 2 or not np.all(np.isfinite(le)) or np.any(le >= 0):
            return math.nan
        y = np.log(-le)
        return float(np.polyfit(np.arange(l_min, l_min + le.size), y, 1)[0])


def simulate_errors(s: NewtonSchedule, eps0, C0=10.0, C1=10.0) -> ErrorTrace:
    """Iterate the modeled error recursion along a schedule.

    Gate at step ``l``: ``C1 D*(2 m_l) eps_l / (r_l - theta_l^2 r_l)^{2 tau} <= (1 - theta_l) r_l / C0``.
    After a passed gate ``eps_{l+1} = theta_l^{2 m_l + 1} (1 - theta_l) r_l / C0``.
    A zero error stays zero.  The trace stops at the first failed gate.
    """
    if eps0 < 0:
        raise ParameterError("eps0 must be >= 0")
    D = s.Dstar

    def gate_factor(l):
        # log of C1 D*(2 m) / (r - theta^2 r)^{2 tau}
        r, th = s.r[l], s.theta[l]
        return math.log(C1) + D.log_value(int(2 * s.m[l])) - 2 * s.tau * math.log(r * (1 - th * th))

    def cap(l):
        return (1 - s.theta[l]) * s.r[l] / C0

    required = math.exp(math.log(cap(0)) - gate_factor(0))
    logs = [math.log(eps0) if eps0 > 0 else -math.inf]
    lhs, rhs = [], []
    fail = None
    for l in range(s.L):
        le = logs[-1]
        gl = math.exp(gate_factor(l) + le) if le > -math.inf else 0.0
        lhs.append(gl)
        rhs.append(cap(l))
        if gl > cap(l):
            fail = l
            break
        if le == -math.inf:
            logs.append(-math.inf)
            continue
        logs.append((2 * s.m[l] + 1) * math.log(s.theta[l]) + math.log(cap(l)))
    log_eps = np.array(logs)
    return ErrorTrace(np.exp(log_eps), log_eps, np.array(lhs), np.array(rhs), fail, required)
