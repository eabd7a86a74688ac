"""Dimensions sharing a number field, and how they nest.

Run with ``python tutorials/02_dimension_towers.py``.
"""
from sicnum import dimension_sequence, dimension_towers, pell_fundamental, sic_discriminant
from sicnum.number_theory import pell_scan

# Every d >= 4 determines a square-free discriminant.
for d in (4, 5, 7, 8, 19):
    print(d, "->", sic_discriminant(d).D)

# The smallest dimension for D comes from the fundamental Pell solution,
# which continued fractions find at once even when brute force is hopeless.
D = 5
d1, m1 = pell_fundamental(D)
print(f"D={D}: first dimension {d1}, m={m1}, scan agrees: {pell_scan(D, m1) == (d1, m1)}")
print("D=193 needs m =", pell_fundamental(193)[1])

seq = dimension_sequence(D, 12)
print("dimensions:", seq.terms)
for tower in dimension_towers(seq):
    print("  " + " | ".join(map(str, tower.chain)))
