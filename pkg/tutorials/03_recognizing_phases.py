"""Turn high-precision overlap phases into exact minimal polynomials.

Run with ``python tutorials/03_recognizing_phases.py`` (about a second).
"""
from collections import Counter

from sicnum import RecognitionConfig, compute_overlaps, make_context, polish, recognize_overlap_phases, search
from sicnum.fiducial_search import SearchConfig

d = 4
coarse = search(make_context(d, 53), SearchConfig(rng_seed=1))

# Lattice reduction needs many more digits than the polynomial degree, and a
# second, independent table at higher precision guards against false hits.
tables = {}
for bits in (512, 1024):
    f = polish(make_context(d, bits), coarse, bits)
    tables[bits] = compute_overlaps(f.context(), f)

cfg = RecognitionConfig(max_degree=16, precision_bits=512)
report = recognize_overlap_phases(make_context(d, 512), tables[512], cfg, reference=tables[1024])
print(report.summary)

counts = Counter(e.polynomial.coefficients for e in report.entries if e.polynomial is not None)
for coeffs, n in counts.most_common():
    print(f"{n:3d} phases share the polynomial with coefficients {coeffs}")
