"""How the arithmetic of lambda controls the Schroeder series.

For ``phi(v) = lambda v + v^2`` the linearizing ``psi`` has coefficients
divided by ``lambda^n - lambda``.  A golden rotation keeps the root test
bounded and the radius estimate stable across windows.  A Liouville-type
rotation with huge partial quotients produces bursts whose size depends on
how close ``lambda^q`` comes to 1 within the computed orders.

Run with ``python3 demos/divergence.py``.
"""
import numpy as np

from divlab.onedim import Germ1D, liouville_multiplier, radius_estimate, root_test_max, schroeder_linearize
from divlab.small_divisors import (
    DstarSequence,
    Multiplier,
    bruno_partial_sums,
    donin_bruno_sum,
    golden_mean,
    min_divisor_profile,
)

golden = Multiplier.rotation(golden_mean(), label="golden")
psi = schroeder_linearize(Germ1D.from_dict(golden, {2: 1.0}, 200))
print("golden rotation")
print(f"  root test max over n <= 150: {root_test_max(psi, 150):.3f}")
for w in [(50, 150), (100, 200)]:
    print(f"  radius estimate on {w}: {radius_estimate(psi, w):.4f}")
print(f"  Bruno partial sums, k = 1..8: {np.round(bruno_partial_sums(golden, 8), 4)}")

for cf in ([10, 100, 10**4, 10**8], [3, 10**6, 10**12]):
    lam = liouville_multiplier(cf)
    prof = min_divisor_profile(lam, 200)
    psi = schroeder_linearize(Germ1D.from_dict(lam, {2: 1.0}, 200))
    print(f"continued fraction {cf}")
    print(f"  smallest |lambda^j - 1|, j <= 200: {prof[200]:.3e}")
    print(f"  root test max over n <= 150: {root_test_max(psi, 150):.3f}, order reached {psi.order}")

# closed form of the dyadic sum for D*(m) = m^2
print(f"sum log D*(2^(k+1)) / 2^k for D* = m^2: {donin_bruno_sum(DstarSequence.power(2.0), 60).value:.12f}"
      f" (6 log 2 = {6 * np.log(2):.12f})")
