"""
Field arithmetic and the nine-cycle multiplier
==============================================

Elements of GF(2^233) and GF(2^283) are bit vectors. The multiplier splits
each operand into four 71-bit segments and needs nine partial products, one
per clock cycle, folding each into a running accumulator.
"""

import numpy as np

from hccalab.gf2m import FieldElement, FieldId, invert, mul_classical, square
from hccalab.karatsuba import default_plan, mul_karatsuba, segment

rng = np.random.default_rng(1)
a = FieldElement.random(FieldId.B233, rng)
b = FieldElement.random(FieldId.B233, rng)
print("a =", a.hex())
print("b =", b.hex())

# The reference product: carry-less multiply, then reduce by t^233 + t^74 + 1.
print("a*b   =", mul_classical(a, b).hex())

# Same product through the segmented multiplier; every cycle is recorded.
product, states = mul_karatsuba(a, b)
assert product == mul_classical(a, b)
print("segments of a:", [hex(s) for s in segment(a).segments])
print(default_plan().to_text(), end="")
for st in states:
    print(f"cycle {st.cycle_index}: partial product has {st.partial_product.bit_count():3d} ones,"
          f" accumulator has {st.accumulator.bits.bit_count():3d}")

# Squaring is linear over GF(2): spread the bits, then reduce.
assert square(a) == mul_classical(a, a)
assert mul_classical(a, invert(a)) == FieldElement.one(FieldId.B233)
print("square and inverse agree with the classical multiplier")
