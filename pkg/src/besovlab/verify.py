"""Verification suites behind `besovlab verify`.

Each check returns (suite, name, passed, detail); failures never abort the
suite.  The mis-scaled-weight fault hook couples the distance weight to the
field values inside the Kondratiev evaluation, which breaks absolute
1-homogeneity and must be caught by the homogeneity check.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["SUITES", "run_suites"]


def _pencil_checks(fault=None):
    from .pencil import admissible_weight_range, cap_eigenvalues, pencil_pair, wedge_delta

    out = []
    lam = cap_eigenvalues(math.pi / 2, 1)
    lp = pencil_pair(float(lam[0]))[1]
    out.append(("cap-90deg-first-pencil-eigenvalue", abs(lp - 1.0) <= 1e-8,
                f"lambda+ = {lp!r}"))
    lp5 = pencil_pair(float(cap_eigenvalues(math.radians(5), 1)[0]))[1]
    out.append(("cap-5deg-first-pencil-eigenvalue", lp5 > 27.0, f"lambda+ = {lp5!r}"))
    out.append(("wedge-strip-halfwidth-2pi", wedge_delta(2 * math.pi) == 0.5,
                f"delta = {wedge_delta(2 * math.pi)!r}"))
    out.append(("wedge-strip-halfwidth-pi-over-4", wedge_delta(math.pi / 4) == 4.0,
                f"delta = {wedge_delta(math.pi / 4)!r}"))
    r1 = admissible_weight_range(1, 0, [2 * math.pi])
    out.append(("weight-range-2pi", r1.as_tuple() == (-1.0, -0.5) and r1.feasible,
                f"a in {r1.as_tuple()}"))
    r2 = admissible_weight_range(1, 1, [math.pi / 4])
    out.append(("weight-range-pi-over-4", r2.as_tuple() == (-1.0, 1.0) and r2.feasible,
                f"a in {r2.as_tuple()}"))
    r3 = admissible_weight_range(1, 1, [2 * math.pi])
    out.append(("weight-range-2pi-gm1-infeasible", not r3.feasible,
                f"feasible = {r3.feasible}"))
    return out


def _norms_checks(fault=None):
    from .field import sample
    from .geometry import wedge
    from .norms import BesovSpec, KondratievSpec, besov_norm_modulus, besov_norm_wavelet, kondratiev_norm, sobolev_norm
    from .profiles import bump_field, singular_field
    from .wavelet import WaveletSystem, dwt_forward

    out = []
    geom = wedge(1.5 * math.pi)
    f = singular_field(geom, 7)
    spec = KondratievSpec(1, 2.0, 0.5)

    def knorm(fld):
        if fault == "mis-scaled-weight":
            return _misweighted_kondratiev(fld, geom, spec)
        return kondratiev_norm(fld, geom, spec).value

    n1 = knorm(f)
    n2 = knorm(f.with_values(2.375 * f.values))
    hom_ok = abs(n2 - 2.375 * n1) <= 1e-10 * max(n2, 1.0)
    out.append(("absolute-1-homogeneity", hom_ok,
                f"N(c f) = {n2!r} vs c N(f) = {2.375 * n1!r}"))

    b = bump_field(geom, 7, center=(-0.35, 0.35), radius=0.25)
    tree = dwt_forward(b, WaveletSystem(4))
    bw = besov_norm_wavelet(tree, BesovSpec(1.3, 2.0, 2.0)).value
    bm = besov_norm_modulus(b, BesovSpec(1.3, 2.0, 2.0)).value
    ratio = bm / bw
    out.append(("besov-route-equivalence", 0.02 < ratio < 50.0,
                f"modulus/wavelet = {ratio!r}"))

    from .geometry import Box, polygon

    sq = polygon([(0, 0), (1, 0), (1, 1), (0, 1)], box=Box((0.0, 0.0), 1.0))
    fx = sample(sq, lambda X, Y: X, 6)
    v = sobolev_norm(fx, 1, 2.0)
    target = math.sqrt(4.0 / 3.0)
    out.append(("sobolev-closed-form", abs(v - target) < 5e-4,
                f"W^1_2(x_1) = {v!r} vs {target!r}"))
    return out


def _misweighted_kondratiev(f, geom, spec):
    """Fault hook: weight polluted by the field values (not a valid weight)."""
    from .field import partial_derivative
    from .geometry import weight_values

    X, Y = f.centers()
    rho = weight_values(geom, X, Y) + 0.1 * np.abs(f.values)
    h = f.cell
    total = 0.0
    for m_ord in range(spec.m + 1):
        for a1 in range(m_ord + 1):
            vals, ok = partial_derivative(f, (a1, m_ord - a1))
            power = spec.p * (m_ord - spec.a)
            with np.errstate(divide="ignore"):
                w = np.where(rho > 0, rho**power, 0.0)
            total += h * h * float(np.sum(w[ok] * np.abs(vals[ok]) ** spec.p))
    return total ** (1.0 / spec.p)


def _rates_checks(fault=None):
    from .approx import fit_rate, ring_decompose, sigma_n, uniform_error
    from .geometry import wedge
    from .profiles import singular_field
    from .wavelet import WaveletSystem, dwt_forward

    out = []
    alpha, _ = fit_rate([(n, n**-1.0) for n in range(2, 65)])
    out.append(("fit-rate-exact-power-law", abs(alpha - 1.0) <= 1e-10, f"alpha = {alpha!r}"))

    geom = wedge(1.5 * math.pi)
    f = singular_field(geom, 8)
    tree = dwt_forward(f, WaveletSystem(4))
    sigmas = [sigma_n(tree, N) for N in (0, 8, 64, 512)]
    mono = all(a >= b for a, b in zip(sigmas, sigmas[1:]))
    out.append(("sigma-nonincreasing", mono, f"sigma = {[f'{s:.3e}' for s in sigmas]}"))
    dom = True
    for j in tree.detail_levels:
        N, e = uniform_error(tree, j)
        if sigma_n(tree, N) > e:
            dom = False
    out.append(("nonlinear-beats-uniform-at-equal-N", dom, "checked all level truncations"))
    rd = ring_decompose(tree, geom)
    parts = all(
        sum(rd.counts(j).values()) + rd.boundary_count(j) == rd.total_count(j)
        for j in tree.detail_levels
    )
    out.append(("ring-buckets-partition", parts, "counts sum to level totals"))
    return out


def _picard_checks(fault=None):
    from .geometry import Box, polygon
    from .parabolic import SolverConfig, max_epsilon, picard_semilinear

    out = []
    bound, branch = max_epsilon(1.0, 1.0, 2, 2.0, 1.0)
    out.append(("epsilon-budget-anchor", abs(bound - 1.0 / 16.0) <= 1e-14,
                f"bound = {bound!r} ({branch})"))

    sq = polygon([(0, 0), (1, 0), (1, 1), (0, 1)], box=Box((0.0, 0.0), 1.0))
    forcing = "sin(3.14159265358979324*t)*exp(-((x-0.5)**2+(y-0.5)**2)/0.02)"
    cfg = SolverConfig(geom=sq, level=5, dt=1.0 / 32, T=0.5, forcing=forcing, eps=0.0, M=2)
    traj, trace = picard_semilinear(cfg)
    out.append(("picard-linear-limit", trace.converged and len(trace.residuals) == 1
                and trace.residuals[0] == 0.0,
                f"status = {trace.status}, residuals = {trace.residuals}"))

    cfg2 = SolverConfig(geom=sq, level=5, dt=1.0 / 32, T=0.5, forcing=forcing,
                        eps=0.0, M=2, tol=1e-10)
    _, trace2 = picard_semilinear(cfg2)
    eps_small = 0.1 * trace2.eps_bound
    cfg3 = SolverConfig(geom=sq, level=5, dt=1.0 / 32, T=0.5, forcing=forcing,
                        eps=eps_small, M=2, tol=1e-10)
    _, trace3 = picard_semilinear(cfg3, invnorm=trace2.invnorm)
    out.append(("picard-contraction-at-small-eps",
                trace3.converged and trace3.q_estimate < 1.0,
                f"q = {trace3.q_estimate!r} after {len(trace3.residuals)} iterations"))
    return out


SUITES = {
    "pencil": _pencil_checks,
    "norms": _norms_checks,
    "rates": _rates_checks,
    "picard": _picard_checks,
}


def run_suites(names, fault=None):
    results = []
    for name in names:
        for check, ok, detail in SUITES[name](fault=fault):
            results.append((name, check, bool(ok), detail))
    return results
