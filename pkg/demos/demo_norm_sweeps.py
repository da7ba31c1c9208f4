"""Smoothness and weighted-norm sweeps on a corner-singular profile.

The r^(2/3) profile on the 270-degree wedge is the canonical reentrant
corner function: its Sobolev smoothness caps just below 5/3 while the
adaptivity-scale smoothness reaches far higher, and the weighted-norm
refinement stability flips at the weight a* = 5/3."""

import numpy as np

from besovlab import (
    BesovSpec,
    KondratievSpec,
    WaveletSystem,
    adaptivity_tau,
    besov_norm_wavelet,
    dwt_forward,
    kondratiev_norm,
    refinement_stability,
    singular_field,
    wedge,
)

geom = wedge(1.5 * np.pi, r0=1.0, eps=0.8)
fields = {lev: singular_field(geom, lev) for lev in (7, 8, 9, 10)}
tree = dwt_forward(fields[10], WaveletSystem(4))

print("=== Sobolev-type sweep (p = q = 2): stability flips near s = 5/3 ===")
for s in (1.0, 1.4, 1.6, 1.8, 2.2):
    rep = besov_norm_wavelet(tree, BesovSpec(s, 2.0, 2.0))
    print(f"  s={s:.1f}: level growth {rep.growth_exponent:+.3f} -> {rep.flag}")

print("\n=== adaptivity-scale sweep (1/tau = s/2 + 1/2): stable far beyond ===")
for s in (1.5, 2.0, 2.5, 3.0, 3.5):
    tau = adaptivity_tau(s, 2, 2.0)
    rep = besov_norm_wavelet(tree, BesovSpec(s, tau, tau))
    print(f"  s={s:.1f} (tau={tau:.3f}): level growth {rep.growth_exponent:+.3f} -> {rep.flag}")

print("\n=== weighted-norm refinement stability: flip at a* = 5/3 ===")
for a in (1.3, 1.5, 1.65, 1.8, 2.0):
    vals = {lev: kondratiev_norm(f, geom, KondratievSpec(1, 2.0, a)).value
            for lev, f in fields.items()}
    stable, slope = refinement_stability(vals)
    tag = "stable" if stable else "divergent"
    print(f"  a={a:.2f}: values over levels 7-10 "
          f"{[f'{vals[l]:.3f}' for l in sorted(vals)]} -> {tag} (slope {slope:+.3f})")
