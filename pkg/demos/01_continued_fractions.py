"""Signed continued fractions and the Gauss map.

Every rational in [-1/2, 1/2] has a closest-integer expansion
x = eps_1/(b_1 + eps_2/(b_2 + ...)) with b_i >= 2, and the Gauss map
G(z) = -1/z - [Re(-1/z)] strips the first pair.  Around each expansion sits a
round cylinder ball that G^n maps onto B(0, 1/2).
"""

from fractions import Fraction

from para_renorm.gauss_dynamics import cone_check, cylinder_ball, gauss_orbit, qg_disk_check
from para_renorm.mcf import RationalSeq, convergents, expand, qg_check

x = Fraction(5, 13)
cf = expand(x)
print(f"{x} = {cf.compact()}")
cv = convergents(cf)
print(f"convergent denominators {cv.q}, numerators {cv.p}")

orbit = gauss_orbit(x)
print("Gauss orbit:", " -> ".join(str(p) for p in orbit.points))
prod = Fraction(1)
for p in orbit.points[:-1]:
    prod *= abs(p)
print(f"product of |G^i x| = {prod} = 1/{x.denominator}")

# the ball of parameters sharing the first two pairs with 2/7
ball = cylinder_ball(expand(Fraction(2, 7)))
print(f"cylinder of {expand(Fraction(2, 7)).compact()}: center {ball.center:.6f}, radius {ball.radius:.6f}")
rep = cone_check(expand(Fraction(2, 7)), 256)
print(f"orbit of its boundary stays in the pi/4 cone: {rep.ok}, worst cone margin {rep.worst_cone_margin:.3f}")

# a sequence of rationals whose entries square from block to block
seq = RationalSeq((((20, 1),), ((400, 1),), ((160000, 1),)))
print(f"quadratic growth with N = 20: {bool(qg_check(seq, 20))}")
for k in (1, 2, 3):
    r = qg_disk_check(seq, k, 0.2, samples=64, interior=16)
    print(f"  block {k}: {r.n_samples} samples of its disk, max |G^n| after the block {r.max_modulus_b:.4f}")
