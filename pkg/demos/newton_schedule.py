"""Certify a Newton schedule and follow the modeled errors.

Each step of the quadratic scheme doubles the order and shrinks the domain
by ``theta_l^7``.  ``find_l0`` picks the first starting level for which every
inequality of the chain holds, including a certified tail of the infinite
product.  The modeled errors then fall superexponentially.

Run with ``python3 demos/newton_schedule.py``.
"""
import numpy as np

from divlab.newton_scheduler import find_l0, siegel_floor, simulate_errors

D = siegel_floor(2.0)
l0, s, cert = find_l0(D, 61.0, 0.5, 40)
print(f"l0 = {l0}, certified log r_inf >= {cert.log_r_lower:.4f} (log r_star = {np.log(0.5):.4f})")
worst = min(cert.checks, key=lambda c: c.margin)
print(f"{len(cert.checks)} checks, tightest: {worst.name} (index {worst.index}) margin {worst.margin:.3g}")
for c in cert.informational:
    print(f"informational: {c.name}: {c.lhs:.4f} vs {c.rhs:.4f} -> {c.passed}")

eps0 = 0.5 * simulate_errors(s, 1.0).required_eps0
tr = simulate_errors(s, eps0)
print(f"eps0 = {eps0:.3e}")
print(" l   log10 eps_l   log log(1/eps_l)")
for l in range(9):
    le = tr.log_eps[l]
    print(f"{l:2d}   {le / np.log(10):11.2f}   {np.log(-le):8.3f}")
print(f"slope of log log(1/eps) over l <= 8: {tr.loglog_slope(8):.3f}")
