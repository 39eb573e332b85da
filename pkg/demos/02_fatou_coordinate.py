"""Fatou coordinates of Q_alpha(z) = e^{2 pi i alpha} z + (27/16) e^{4 pi i alpha} z^2.

For small alpha the fixed points 0 and sigma are close, and orbits pass
slowly between them through a "gate".  The Fatou coordinate Phi straightens
this passage: Phi(f(z)) = Phi(z) + 1, normalized by Phi(cp) = 0.
"""

import numpy as np

from para_renorm.fatou import build_fatou, grid_residual, petal_width_probe, spiral_probe
from para_renorm.maps import MapSpec, fixed_point_data

alpha = 0.05 - 0.01j
m = MapSpec.quadratic(alpha)
fp = fixed_point_data(m)
print(f"alpha = {alpha}: sigma = {fp.sigma:.5f}, beta = {fp.beta:.5f}")
print(f"holomorphic index over {{0, sigma}}: {abs(fp.index):.1e} (the two finite fixed points of a quadratic carry total index 0)")

fa = build_fatou(m)
print(f"solver {fa.solver}, polynomial degree {fa.fit.degree}")
print(f"Phi(cp) = {abs(fa.phi(fa.critical_point)):.1e}, Phi(cv) - 1 = {abs(fa.phi(fa.critical_value) - 1):.1e}")
g = grid_residual(fa)
print(f"|Phi(f z) - Phi(z) - 1| on a 20x20 petal grid: max {g.max:.1e}, mean {g.mean:.1e}")

model = build_fatou(m, mode="model")
print(f"the closed-form two-ended model alone leaves {grid_residual(model).max:.2f}")

w = petal_width_probe(fa)
print(f"petal width {w:.2f} against Re(1/alpha) = {(1 / alpha).real:.2f}")

sp = spiral_probe(fa, 1.0, 60.0)
print(f"arg Phi^-1(1 + i t) + 2 pi t Im(alpha) settles to {sp.limit:.4f} (c_f = {sp.c_f:.3f}, bound {sp.bound:.2f})")

# a real rotation: extrapolate from alpha +- i eps
fr = build_fatou(MapSpec.quadratic(0.1))
z = np.array([fr.inverse(0.5 + 0.3j)])
rc = fr.richardson_check(z)
print(f"real alpha 0.1: grid residual {grid_residual(fr).max:.1e}; the two order-2 extrapolants differ by "
      f"{rc['extrapolant_diff']:.1e} against an error estimate {rc['error_estimate']:.1e}")
