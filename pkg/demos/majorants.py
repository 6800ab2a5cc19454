"""Majorant series and the eta recursion.

``eta_m = K_m max prod eta_{m_i}`` over multisets of smaller orders summing
to at most ``m``.  Constant ``K`` gives geometric growth; ``K_m = m`` grows
faster than any geometric sequence.  The two implicit majorant equations are
solved by fixed-point iteration and their radius of convergence estimated.

Run with ``python3 demos/majorants.py``.
"""
from fractions import Fraction

from divlab.majorant import (
    MajorantParams,
    eta_sequence,
    growth_fit,
    radius_lower_bound,
    replay_defect,
    solve_full_majorant,
    solve_vertical_majorant,
)

for label, K in [("K = 2", lambda m: 2), ("K = m", lambda m: m), ("K = 3/2", lambda m: Fraction(3, 2))]:
    e = eta_sequence(K, 30)
    fit = growth_fit(e)
    print(f"{label:8s} eta_10 = {e.eta[10]}, fit L = {fit.L:.3f}, {fit.verdict}")

for R in (0.05, 0.2, 1.0):
    p = MajorantParams(R=R)
    for solve in (solve_vertical_majorant, solve_full_majorant):
        A = solve(p, 60)
        print(f"R = {R:4.2f} {A.kind:8s} A_2..A_5 = {A.A[2:6].round(4)}, "
              f"radius >= {radius_lower_bound(A):.4f}, replay {replay_defect(A):.1e}")
