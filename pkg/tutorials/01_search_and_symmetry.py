"""Find a fiducial, sharpen it, and look at what it is invariant under.

Run with ``python tutorials/01_search_and_symmetry.py``.
"""
from sicnum import compute_overlaps, make_context, overlap_orbit_partition, polish, search, stability_group
from sicnum.fiducial_search import SearchConfig, frame_potential

d = 5

# A double-precision search restricted to the Zauner eigenspace is cheap and
# lands on a solution within a handful of restarts.
coarse = search(make_context(d, 53), SearchConfig(rng_seed=1))
print(f"coarse residual {float(coarse.residual):.2e} after restart {coarse.seed}")

# Newton refinement carries the same vector to 256 bits.
fine = polish(make_context(d, 256), coarse, 256)
ctx = fine.context()
print("polished residual", ctx.mp.nstr(fine.residual, 5))
print("frame potential", ctx.mp.nstr(frame_potential(ctx, list(fine.vector)), 20), "target", 2 * d / (d + 1))

table = compute_overlaps(ctx, fine)
sample = next(iter(table.indices()))
print(f"|overlap|^2 at {sample} is", ctx.mp.nstr(abs(table.overlap(sample)) ** 2, 12), "vs", 1 / (d + 1))

# The symmetry group acts on displacement labels; equal overlaps along its
# orbits is a cheap consistency check on the numbers.
report = stability_group(ctx, fine)
print(f"stabilizer order {report.order} (operators {report.operator_order}), cyclic: {report.is_cyclic()}")
parts = overlap_orbit_partition(ctx, table)
print(f"{len(parts.parts)} orbits, {len(parts.violations)} violations")
