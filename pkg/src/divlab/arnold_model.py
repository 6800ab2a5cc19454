"""Neighborhoods of an elliptic curve generated by a single germ.

The curve is ``C / (2 pi Z + 2 omega Z)`` and the neighborhood is glued by

    f(h, v) = (h + 2 omega + b(h, v), lambda v (1 + a(h, v)))

where the stored series ``a`` and ``b`` both vanish at ``v = 0`` (``a`` is
``v`` times the usual ``a(h, v)``).  Linearizing the neighborhood amounts to
finding ``g`` tangent to the identity with ``g^{-1} o f o g`` equal to the
linear model ``(h + 2 omega, lambda v)``.

Level ``n`` of the order-by-order scheme conjugates by
``c = (h + v^n B(h), v + v^{n+1} A(h))``.  With ``F`` the current conjugated
map, the degree-``n`` horizontal and degree-``n+1`` vertical parts change by
``B - lambda^n B(h + 2 omega)`` and ``lambda (A - lambda^n A(h + 2 omega))``,
so both unknowns solve

    lambda^n X(h + 2 omega) - X(h) = rhs(h),   X_j = rhs_j / (lambda^n e^{2 i omega j} - 1)

mode by mode.  The accumulated change is updated as ``g <- g o c``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import BandOverflowError, OrderError, ParameterError, ResonanceError
from .series_core import (
    DomainSpec,
    FourierTaylorSeries,
    MapGerm,
    compose_maps,
    invert_map,
)
from .small_divisors import RESONANCE_THRESHOLD, Multiplier, complex_divisor

TRANSITION_LABELS = (
    "Phi120", "Phi121", "Phi430", "Phi431", "Phi14",
    "Phi23", "Phi130", "Phi131", "Phi420", "Phi421",
)

# (lhs, first, second): lhs = first o second on a triple overlap.
# "Phi41" is the inverse of Phi14.
COCYCLE_RELATIONS = (
    ("Phi121", "Phi14", "Phi421"),
    ("Phi131", "Phi121", "Phi23"),
    ("Phi431", "Phi421", "Phi23"),
    ("Phi431", "Phi41", "Phi131"),
    ("Phi120", "Phi14", "Phi420"),
    ("Phi130", "Phi120", "Phi23"),
    ("Phi430", "Phi420", "Phi23"),
    ("Phi430", "Phi41", "Phi130"),
)


@dataclass(frozen=True)
class TorusNeighborhood:
    """Data of the gluing germ ``f``.

    Parameters
    ----------
    multiplier : Multiplier
    omega : complex
        Half the second period; ``Im omega > 0``.
    a, b : FourierTaylorSeries
        Vertical factor and horizontal perturbation, both ``O(v)``.
    domain : DomainSpec
    v_only : bool
        True when ``a`` and ``b`` carry only the mode ``j = 0``.
    """

    multiplier: Multiplier
    omega: complex
    a: FourierTaylorSeries
    b: FourierTaylorSeries
    domain: DomainSpec
    v_only: bool = False

    @property
    def input_band(self):
        return max(self.a.occupied_band(), self.b.occupied_band())

    @property
    def input_scale(self):
        """Largest input coefficient (1 for the linear model)."""
        s = max(self.a.max_abs(), self.b.max_abs())
        return s if s > 0 else 1.0

    def transition_map(self) -> MapGerm:
        lam = self.multiplier.value
        vp = self.a.mul_v_power(1).scale(lam)
        return MapGerm(2 * self.omega, lam, self.b, vp)

    def linear_model(self) -> MapGerm:
        return MapGerm.linear(self.domain, 2 * self.omega, self.multiplier.value)

    def required_band(self, order):
        return self.input_band * order


def build(multiplier, omega, a, b=None, domain=None) -> TorusNeighborhood:
    """Validate the data of a torus neighborhood.

    ``b`` defaults to zero.  Raises :class:`ParameterError` for ``Im omega <= 0``.
    """
    omega = complex(omega)
    if not omega.imag > 0:
        raise ParameterError("Im omega must be positive")
    if not isinstance(multiplier, Multiplier):
        raise ParameterError("multiplier must be a Multiplier")
    if domain is None:
        domain = a.domain
    if b is None:
        b = FourierTaylorSeries.zeros(domain, 1)
    for name, s in (("a", a), ("b", b)):
        if s.domain.shape != domain.shape:
            raise BandOverflowError(f"series {name} has shape {s.domain.shape}, domain wants {domain.shape}")
        if s.actual_order() < 1:
            raise OrderError(f"series {name} must vanish at v = 0")
    a = FourierTaylorSeries(domain, a.coeffs, 1)
    b = FourierTaylorSeries(domain, b.coeffs, 1)
    v_only = a.occupied_band() == 0 and b.occupied_band() == 0
    return TorusNeighborhood(multiplier, omega, a, b, domain, v_only)


def from_vertical_germ(multiplier, omega, coeffs, domain):
    """Neighborhood whose vertical map is the one-variable germ ``lambda v + sum coeffs[n] v^n``.

    ``coeffs`` maps degree ``n >= 2`` to a coefficient; ``b = 0``.
    """
    lam = multiplier.value
    arr = np.zeros(domain.shape, dtype=complex)
    J = domain.fourier_band
    for n, c in coeffs.items():
        if n < 2:
            raise OrderError("germ coefficients start at degree 2")
        if n - 1 <= domain.taylor_order:
            arr[n - 1, J] = c / lam
    return build(multiplier, omega, FourierTaylorSeries(domain, arr, 1), None, domain)


# ---------------------------------------------------------------------------
# covering


def random_neighborhood(multiplier, omega, N, J0, amplitude, rng, v_only=False, with_b=True):
    """Neighborhood with random ``a`` (and ``b``) supported on modes ``|j| <= J0``.

    Coefficients are uniform in the disc of radius ``amplitude``; the domain
    has Taylor order ``N`` and band ``J0 N``, enough for an order-``N`` run.
    """
    J0 = 0 if v_only else J0
    dom = DomainSpec(1.0, 1.0, N, max(J0 * N, 0))
    J = dom.fourier_band

    def draw():
        arr = np.zeros(dom.shape, dtype=complex)
        k = 2 * J0 + 1
        rad = amplitude * np.sqrt(rng.random((N, k)))
        ang = 2 * np.pi * rng.random((N, k))
        arr[1:, J - J0 : J + J0 + 1] = rad * np.exp(1j * ang)
        return FourierTaylorSeries(dom, arr, 1)

    a = draw()
    b = draw() if with_b else None
    return build(multiplier, omega, a, b, dom)


def transitions(nbhd: TorusNeighborhood) -> dict:
    """The ten transition germs of the four-chart covering."""
    f = nbhd.transition_map()
    ident = MapGerm.identity(nbhd.domain)
    return {lab: (f if lab.endswith("1") and len(lab) == 6 else ident) for lab in TRANSITION_LABELS}


@dataclass(frozen=True)
class CocycleReport:
    max_defect: float
    defects: dict
    order: int


def verify_cocycle(nbhd: TorusNeighborhood, order: int, maps: dict | None = None) -> CocycleReport:
    """Check ``Phi_ki o Phi_ij = Phi_kj`` on the triple overlaps through ``order``.

    ``maps`` overrides the generated transitions (to test a corrupted covering).
    """
    if not 0 <= order <= nbhd.domain.taylor_order:
        raise OrderError(f"order {order} outside [0, {nbhd.domain.taylor_order}]")
    tr = transitions(nbhd)
    if maps:
        tr.update(maps)
    tr["Phi41"] = invert_map(tr["Phi14"], order)
    defects = {}
    for lhs, first, second in COCYCLE_RELATIONS:
        comp = compose_maps(tr[first], tr[second], order)
        target = tr[lhs].truncate(order)
        d = comp.truncate(order).max_abs_difference(target)
        defects[f"{lhs}={first}o{second}"] = d
    return CocycleReport(max(defects.values()), defects, order)


# ---------------------------------------------------------------------------
# level equations


def _divisor_row(nbhd, n):
    J = nbhd.domain.fourier_band
    return np.array([complex_divisor(nbhd.multiplier, nbhd.omega, n, j) for j in range(-J, J + 1)])


def _scale_row(nbhd, n):
    J = nbhd.domain.fourier_band
    base = nbhd.multiplier.log_power(n).real
    return np.exp(base - 2 * nbhd.omega.imag * np.arange(-J, J + 1))


def _solve_modes(nbhd, n, coeffs, threshold):
    """Divide every column ``j`` of ``coeffs`` by ``lambda^n e^{2 i omega j} - 1``."""
    J = nbhd.domain.fourier_band
    occupied = np.nonzero(np.any(coeffs != 0, axis=0))[0]
    if occupied.size == 0:
        return np.zeros_like(coeffs), np.inf
    div = _divisor_row(nbhd, n)
    mod = np.abs(div)
    lam = nbhd.multiplier
    scale = np.maximum(1.0, _scale_row(nbhd, n))
    for col in occupied:
        j = int(col) - J
        exact_zero = j == 0 and lam.kind != "explicit" and lam.is_rational and (n * lam.alpha).denominator == 1
        if exact_zero or mod[col] < threshold * scale[col]:
            d = 0.0 if exact_zero else float(mod[col])
            raise ResonanceError(f"resonant divisor at (n={n}, j={j}): {d:.3e}", n=n, j=j, divisor=d, order=n)
    out = np.zeros_like(coeffs)
    out[:, occupied] = coeffs[:, occupied] / div[occupied][None, :]
    return out, float(np.min(mod[occupied]))


def solve_level(nbhd: TorusNeighborhood, n: int, rhs_A, rhs_B=None, threshold=RESONANCE_THRESHOLD):
    """Solve ``lambda^n X(h + 2 omega) - X(h) = rhs(h)`` for the A and B unknowns.

    Each right side may be a :class:`FourierTaylorSeries` (divided mode by mode
    wherever it is stored) or ``None``.  Returns ``(A, B, min_divisor)``.
    """
    if n < 1:
        raise OrderError("levels start at n = 1")
    outs = []
    dmin = np.inf
    for rhs in (rhs_A, rhs_B):
        if rhs is None:
            outs.append(None)
            continue
        arr, d = _solve_modes(nbhd, n, rhs.coeffs, threshold)
        dmin = min(dmin, d)
        outs.append(FourierTaylorSeries(rhs.domain, arr, rhs.min_order))
    return outs[0], outs[1], dmin


# ---------------------------------------------------------------------------
# linearization


@dataclass(frozen=True)
class LevelRecord:
    n: int
    A: FourierTaylorSeries  # function of h stored at degree 0
    B: FourierTaylorSeries | None
    rhs_A: FourierTaylorSeries
    rhs_B: FourierTaylorSeries | None
    min_divisor: float


@dataclass(frozen=True)
class LinearizationResult:
    """Outcome of a linearization run.

    ``residual`` is the conjugated germ ``g^{-1} o f o g``; its perturbation
    series are the deviation from the linear model.
    """

    g: MapGerm
    order_achieved: int
    residual: MapGerm
    per_level: tuple
    mode: str
    scheme: str
    input_scale: float
    omega: complex = 0j
    multiplier: complex = 1 + 0j
    notes: dict = field(default_factory=dict)

    @property
    def residual_h(self):
        return self.residual.h_perturbation

    @property
    def residual_v(self):
        return self.residual.v_perturbation


def _check_band(nbhd, N):
    if N < 1 or N > nbhd.domain.taylor_order:
        raise OrderError(f"order {N} outside [1, {nbhd.domain.taylor_order}]")
    need = nbhd.required_band(N)
    if need > nbhd.domain.fourier_band:
        raise BandOverflowError(
            f"band {nbhd.domain.fourier_band} too small: order {N} needs {need}", required_band=need
        )


def _correction(dom, pieces):
    """``(h + sum v^n B_n, v + sum v^{n+1} A_n)`` from ``[(n, A_row, B_row)]``."""
    hp = np.zeros(dom.shape, dtype=complex)
    vp = np.zeros(dom.shape, dtype=complex)
    for n, A_row, B_row in pieces:
        if B_row is not None and n <= dom.taylor_order:
            hp[n] += B_row
        if A_row is not None and n + 1 <= dom.taylor_order:
            vp[n + 1] += A_row
    return MapGerm(0j, 1 + 0j, FourierTaylorSeries(dom, hp, 1), FourierTaylorSeries(dom, vp, 2))


def _conjugate(F, c, N):
    """``c^{-1} o F o c`` through degree ``N``."""
    return compose_maps(invert_map(c, N), compose_maps(F, c, N), N)


def _levels(nbhd, F, levels, N, full, threshold):
    """Solve the listed levels against the same conjugated map ``F``."""
    dom = nbhd.domain
    lam = nbhd.multiplier.value
    pieces, records = [], []
    for n in levels:
        A_row = B_row = None
        rA = rB = None
        stack = []
        if n + 1 <= N:
            rA = FourierTaylorSeries.from_row(dom, F.v_perturbation.coeffs[n + 1] / lam, 0)
        if full and n <= N:
            rB = FourierTaylorSeries.from_row(dom, F.h_perturbation.coeffs[n], 0)
        A, B, dmin = solve_level(nbhd, n, rA, rB, threshold)
        if A is not None:
            A_row = A.coeffs[0]
            stack.append(A)
        if B is not None:
            B_row = B.coeffs[0]
        if A is None and B is None:
            continue
        pieces.append((n, A_row, B_row))
        zero = FourierTaylorSeries.zeros(dom, 0)
        records.append(LevelRecord(n, A if A is not None else zero, B, rA if rA is not None else zero, rB, dmin))
    return pieces, records


def _linearize(nbhd, N, full, scheme, threshold):
    _check_band(nbhd, N)
    dom = nbhd.domain
    F = nbhd.transition_map().truncate(N)
    g = MapGerm.identity(dom)
    records = []
    top = N if full else N - 1
    if scheme == "obo":
        batches = [[n] for n in range(1, top + 1)]
    elif scheme == "newton":
        batches = []
        m = 1
        while m <= top:
            batches.append(list(range(m, min(2 * m - 1, top) + 1)))
            m *= 2
    else:
        raise ParameterError(f"unknown scheme {scheme!r}")
    for batch in batches:
        pieces, recs = _levels(nbhd, F, batch, N, full, threshold)
        records.extend(recs)
        if not pieces:
            continue
        c = _correction(dom, pieces)
        if c.h_perturbation.is_zero() and c.v_perturbation.is_zero():
            continue
        F = _conjugate(F, c, N)
        g = compose_maps(g, c, N)
    return LinearizationResult(
        g=g,
        order_achieved=N,
        residual=F,
        per_level=tuple(records),
        mode="full" if full else "vertical",
        scheme=scheme,
        input_scale=nbhd.input_scale,
        omega=nbhd.omega,
        multiplier=nbhd.multiplier.value,
    )


def vertical_linearize(nbhd: TorusNeighborhood, N: int, threshold=RESONANCE_THRESHOLD) -> LinearizationResult:
    """Make the vertical component of the gluing map linear through degree ``N``.

    Only vertical corrections ``(h, v + v^{n+1} A_n(h))`` are used; the
    horizontal residual is reported but left alone.
    """
    return _linearize(nbhd, N, False, "obo", threshold)


def full_linearize(nbhd: TorusNeighborhood, N: int, mode: str = "order_by_order",
                   threshold=RESONANCE_THRESHOLD) -> LinearizationResult:
    """Conjugate the gluing map to the linear model through degree ``N``.

    ``mode="order_by_order"`` solves one level per conjugation,
    ``mode="newton_doubling"`` solves levels ``m .. 2m-1`` together, which
    takes a residual of orders ``(m, m+1)`` to ``(2m, 2m+1)``.
    """
    scheme = {"order_by_order": "obo", "obo": "obo", "newton_doubling": "newton", "newton": "newton"}.get(mode)
    if scheme is None:
        raise ParameterError(f"unknown mode {mode!r}")
    return _linearize(nbhd, N, True, scheme, threshold)


def residual_order(result: LinearizationResult, tol: float = 1e-9) -> int:
    """Largest ``m`` such that the residual vanishes through degree ``m``.

    A coefficient counts as zero below ``tol * input_scale``.  In vertical
    mode only the vertical residual is inspected.
    """
    cut = tol * result.input_scale
    comps = [result.residual_v] if result.mode == "vertical" else [result.residual_v, result.residual_h]
    N = result.residual.domain.taylor_order
    for n in range(N + 1):
        if any(np.max(np.abs(c.coeffs[n])) >= cut for c in comps):
            return n - 1
    return N


@dataclass(frozen=True)
class FoliationReport:
    foliated: bool
    offending: tuple
    holonomy: np.ndarray  # coefficients of v -> lambda v + ..., index = degree
    order: int


def foliation_extract(result: LinearizationResult, tol: float = 1e-9) -> FoliationReport:
    """Check that the conjugated vertical map depends on ``v`` only.

    Every mode ``j != 0`` of every vertical coefficient must be below
    ``tol * input_scale``; offending ``(n, j)`` pairs are listed otherwise.
    The leaves are the level sets ``v = const`` and the holonomy generator is
    the ``j = 0`` part of the vertical map.
    """
    F = result.residual
    dom = F.domain
    J = dom.fourier_band
    cut = tol * result.input_scale
    arr = np.array(F.v_perturbation.coeffs)
    arr[1, J] += F.multiplier
    bad = []
    for n in range(dom.taylor_order + 1):
        for j in range(-J, J + 1):
            if j != 0 and abs(arr[n, J + j]) >= cut:
                bad.append((n, j))
    return FoliationReport(not bad, tuple(bad), arr[:, J].copy(), result.order_achieved)


def with_residual(result: LinearizationResult, residual: MapGerm) -> LinearizationResult:
    """Copy of ``result`` carrying a different residual germ."""
    return replace(result, residual=residual)


@dataclass(frozen=True)
class LevelDecay:
    n: int
    C_fit: float
    worst_j: int
    input_norm: float
    bound: float
    passed: bool
    rate: float
    input_rate: float
    spike: bool = False

    @property
    def amplification(self):
        return self.C_fit / self.input_norm if self.input_norm > 0 else 0.0


def _decay_rate(row, J):
    """Least-squares exponential decay rate of ``|row_j|`` in ``|j|`` (inf if undetermined)."""
    j = np.abs(np.arange(-J, J + 1))
    mask = np.abs(row) > 0
    if np.ptp(j[mask]) == 0 if np.any(mask) else True:
        return np.inf
    slope = np.polyfit(j[mask].astype(float), np.log(np.abs(row[mask])), 1)[0]
    return float(-slope)


def decay_check(result: LinearizationResult, delta: float, delta_prime: float,
                c: float = 1.0, spike_factor: float = 10.0):
    """Mode decay of the level solutions ``A_n``.

    ``C_fit = max_j |A_{n,j}| e^{|j| delta'}`` is compared with
    ``norm_n / (c |lambda^n - 1|)``, where ``norm_n = sum_j |rhs_{n,j}| e^{|j| delta}``
    bounds the level input on the strip of half-width ``delta``.  Levels whose
    amplification ``C_fit / norm_n`` exceeds ``spike_factor`` times the median
    amplification are flagged.
    """
    if not 0 <= delta_prime < delta:
        raise ParameterError("need 0 <= delta' < delta")
    lam = result.multiplier
    out = []
    for rec in result.per_level:
        J = rec.A.J
        row = rec.A.coeffs[0]
        rhs = rec.rhs_A.coeffs[0]
        j = np.abs(np.arange(-J, J + 1))
        norm = float(np.sum(np.abs(rhs) * np.exp(j * delta)))
        if not np.any(row):
            out.append(LevelDecay(rec.n, 0.0, 0, norm, 0.0, True, np.inf, np.inf))
            continue
        w = np.abs(row) * np.exp(j * delta_prime)
        k = int(np.argmax(w))
        bound = norm / (c * abs(lam**rec.n - 1))
        out.append(LevelDecay(rec.n, float(w[k]), k - J, norm, bound, bool(w[k] <= bound * (1 + 1e-12)),
                              _decay_rate(row, J), _decay_rate(rhs, J)))
    amps = [d.amplification for d in out if d.amplification > 0]
    if amps:
        med = float(np.median(amps))
        out = [replace(d, spike=bool(d.amplification > spike_factor * med)) for d in out]
    return tuple(out)
