"""Near-parabolic renormalization.

Going once through the gate and projecting the Fatou plane by
ex(w) = (-4/27) e^{2 pi i w} gives a new map R(f) near 0.  Its rotation is
the Gauss step of alpha: R(f)'(0) = e^{-2 pi i/alpha}.  The bottom variant
does the same at sigma and follows beta.
"""

import cmath
import math

from para_renorm.fatou import build_fatou
from para_renorm.maps import MapSpec
from para_renorm.renorm import (SampledRenorm, commutation_check, renorm_rotation_top,
                                renorm_sample, two_path_check)

for alpha in (0.05 - 0.01j, 0.08 - 0.03j, 0.05 + 0.02j):
    fa = build_fatou(MapSpec.quadratic(alpha))
    top = renorm_sample(fa)
    bot = renorm_sample(fa, end="bottom")
    print(f"alpha = {alpha}")
    print(f"  horn map: two paths agree to {two_path_check(fa):.1e}, E(w+1) - E(w) - 1 = {commutation_check(fa):.1e}")
    print(f"  top:    R'(0) rel. error vs e^(-2 pi i/alpha) {top.rel_error:.1e}, k <= {top.k_iterates}")
    print(f"  bottom: R'(0) rel. error vs e^(-2 pi i/beta)  {bot.rel_error:.1e}")

# the renormalized map is itself a map with a rotation number to renormalize
a1 = 1 / (7.12 - 0.02j)
R = SampledRenorm(build_fatou(MapSpec.quadratic(a1)))
print(f"alpha_1 = {a1:.6f}: rotation of R(f) {R.alpha:.6f}, Gauss step {renorm_rotation_top(a1):.6f}")
print(f"R(f)'(0) = {R.lam:.6f} = e^(2 pi i alpha_2) = {cmath.exp(2j * math.pi * R.alpha):.6f}")
