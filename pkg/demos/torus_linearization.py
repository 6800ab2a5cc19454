"""Linearize a random neighborhood of an elliptic curve in the torus model.

A neighborhood is glued by ``(h, v) -> (h + 2 omega + b, lambda v (1 + a))``.
We remove the vertical perturbation order by order, then the horizontal one,
and look at what is left: the vertical part is exactly ``lambda v`` and the
horizontal residual only depends on ``v`` when ``a`` does.

Run with ``python3 demos/torus_linearization.py``.
"""
import numpy as np

from divlab.arnold_model import (
    build,
    decay_check,
    foliation_extract,
    full_linearize,
    random_neighborhood,
    vertical_linearize,
)
from divlab.series_core import DomainSpec, FourierTaylorSeries
from divlab.small_divisors import Multiplier, arnold_comparability, golden_mean

lam = Multiplier.rotation(golden_mean(), label="golden")
omega = 0.3 + 1j
N, J0 = 14, 3

nb = random_neighborhood(lam, omega, N, J0, 0.05, np.random.default_rng(7))
print(f"random neighborhood: order {N}, band {nb.domain.fourier_band}, max input {nb.input_scale:.3g}")

vert = vertical_linearize(nb, N)
print(f"vertical pass: residual_v max {vert.residual_v.max_abs():.2e}, "
      f"residual_h max {vert.residual_h.max_abs():.2e}")

# same germ, both schemes
obo = full_linearize(nb, N, "order_by_order")
newton = full_linearize(nb, N, "newton_doubling")
print(f"full pass: residual max {max(obo.residual_v.max_abs(), obo.residual_h.max_abs()):.2e}")
print(f"order-by-order vs doubling, max |g diff|: {obo.g.max_abs_difference(newton.g):.2e}")

# The Fourier decay of each level solution is compared with a divisor bound.
# The torus divisors can be smaller than |lambda^n - 1|, by the factor below.
comp = arnold_comparability(lam, omega, 1.0, N, nb.domain.fourier_band)
print(f"smallest |lambda^n e^(2 i omega j) - 1| / |lambda^n - 1|: {comp.c_effective:.3f} at {comp.worst_pair}")
levels = decay_check(vert, 0.5, 0.25, c=comp.c_effective)
print("level  C_fit      bound      ok")
for d in levels[:8]:
    print(f"{d.n:5d}  {d.C_fit:9.2e}  {d.bound:9.2e}  {d.passed}")

# a = a(v) stays foliated after the vertical pass
dom = DomainSpec(1.0, 1.0, 12, 3)
a = FourierTaylorSeries.from_terms(dom, {(1, 0): 0.4, (2, 0): -0.2})
rep = foliation_extract(vertical_linearize(build(lam, omega, a, None, dom), 12))
print(f"a = a(v): horizontal residual independent of h: {rep.foliated}, offending modes {rep.offending}")
