"""Distance-ring bookkeeping of wavelet indices and the local Whitney bound.

Level-j indices are grouped by how many level-j cells their support cube
sits away from the singular vertex.  For a point singularity the innermost
rings hold a level-independent number of indices - the combinatorial fact
behind the weighted-to-adaptivity-scale embedding - and every interior
coefficient is controlled by |I|^(m/d + 1/2 - 1/p) rho_I^(a-m) mu_I with a
level-stable constant."""

import numpy as np

from besovlab import WaveletSystem, dwt_forward, singular_field, wedge
from besovlab.approx import ring_decompose, whitney_ring_check

geom = wedge(1.5 * np.pi)
field = singular_field(geom, 10)

tree = dwt_forward(field, WaveletSystem(4))
rd = ring_decompose(tree, geom)
print("level | #rings 0+1 | #boundary bucket | max ring index (cap 2^j)")
for j in range(3, 10):
    c = rd.counts(j)
    near = c.get(0, 0) + c.get(1, 0)
    print(f"{j:5d} | {near:10d} | {rd.boundary_count(j):16d} | {max(c) if c else 0} vs {2**j}")

tree2 = dwt_forward(field, WaveletSystem(2))
rep = whitney_ring_check(tree2, field, geom, m=2, a=1.0, levels=[5, 6, 7, 8])
print("\nWhitney max ratio per level (order-2 analysis, m = 2, a = 1):")
for j, v in sorted(rep.max_ratio_per_level.items()):
    print(f"  level {j}: {v:.4f}")
vals = [v for v in rep.max_ratio_per_level.values() if v > 0]
print(f"spread across levels: {max(vals) / min(vals):.2f}x")
