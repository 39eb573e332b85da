"""Renormalization towers and the Cantor structure of their parameters.

Repeating the rotation recursion alpha -> G(alpha) (top) or alpha -> G(beta)
(bottom) along a type sequence gives a tower; the parameters whose tower
stays in the sector A(r) to depth n form nested intervals that shrink
geometrically.
"""

from fractions import Fraction

from para_renorm.mcf import RationalSeq
from para_renorm.tower import ALPHA_STAR, cantor_bisect, qg_inclusion_check, tower_run

st = tower_run(ALPHA_STAR, "t", 50, "exact", 0.15)
print(f"alpha* = {ALPHA_STAR} ~ {float(ALPHA_STAR):.6f}: {st.status}, every level equal: "
      f"{all(lv.alpha == ALPHA_STAR for lv in st.levels)}")
st = tower_run(Fraction(1, 7), None, 5, "exact", 0.15)
print(f"1/7: {[str(a) for a in st.alphas]} ({st.status})")
st = tower_run(0.1 + 0.05j, "t", 3, "exact", 0.15)
print(f"0.1+0.05i: {st.status} at {st.levels[-1].alpha}")

levels = cantor_bisect(None, 4, 0.15)
prev = None
for lv in levels:
    d = float(lv.diameter)
    print(f"depth {lv.depth}: [{float(lv.lo):+.9f}, {float(lv.hi):+.9f}] diameter {d:.3e}"
          + (f" ratio {d / prev:.4f}" if prev else ""))
    prev = d

seq = RationalSeq((((20, 1),), ((400, 1),), ((160000, 1),)))
st = tower_run(seq, None, 3, "ply-disk", 0.2)
print(f"PLY-disk tower of the growth sequence: {st.status}, in sector {[lv.in_sector for lv in st.levels]}")
rep = qg_inclusion_check(seq, 20, 3, r3_proxy=0.2, r5_proxy=0.2)
print(f"inclusion pipeline at r = 0.2: B1 = {rep.index_bound.B1:.3f}, blocks {[b['ok'] for b in rep.blocks]}")
w = rep.blocks[0]["gate_witness"]
print(f"  block 1 gate witness: beta {complex(*w['beta']):.4f} gives alpha {complex(*w['alpha']):.4f}, "
      "just outside the cone")

st = tower_run(1 / (7.12 - 0.02j), "ttt", 3, "analytic", 0.2)
for lv in st.levels:
    print(f"analytic level {lv.n}: alpha {complex(lv.alpha):.5f}, in sector {lv.in_sector}")
print(f"status {st.status}")
