"""Test-field generators: corner-singular profiles, smooth bumps, wavelet
atoms, and manufactured solutions with symbolically derived forcing."""

from __future__ import annotations

import math

import numpy as np

from .field import SampledField, sample
from .geometry import DomainGeometry
from .wavelet import WaveletIndex, WaveletSystem, dwt_inverse, unit_tree

__all__ = [
    "boundary_layer_field",
    "bump_field",
    "manufactured_pair",
    "singular_field",
    "smooth_bump",
    "wavelet_atom_field",
]


def smooth_bump(cx: float, cy: float, radius: float):
    """C-infinity bump, exactly 1 at the center, supported in the radius."""

    def fn(X, Y):
        s2 = ((X - cx) ** 2 + (Y - cy) ** 2) / radius**2
        out = np.zeros_like(X)
        inside = s2 < 1.0
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - s2[inside]))
        return out

    return fn


def bump_field(geom: DomainGeometry, level: int, center=None, radius: float = 0.3) -> SampledField:
    if center is None:
        c = geom.box
        center = (c.lo[0] + 0.5 * c.side, c.lo[1] + 0.5 * c.side)
    return sample(geom, smooth_bump(center[0], center[1], radius), level)


def singular_field(geom: DomainGeometry, level: int, lam: float | None = None) -> SampledField:
    """phi(x) * r^lam * sin(lam * angle) around the primary singular vertex.

    For a wedge the angle is measured from the first edge, so the profile
    vanishes on both edges when lam = pi/theta (and for lam = 2/3 on the
    3*pi/2 wedge).  For polygons the same polar profile is used around the
    primary singular vertex with the wedge angle of that corner.
    """
    if geom.kind == "wedge2d":
        theta = geom.theta
        v = geom.singular_vertices[0]
        rot = 0.0
    elif geom.kind == "polygon2d":
        v = geom.singular_vertices[0]
        theta, rot = _corner_opening(geom, v)
    else:
        raise ValueError("singular profiles need a 2D domain")
    if lam is None:
        lam = math.pi / theta
    cut = geom.cutoff()

    def fn(X, Y):
        r = np.hypot(X - v[0], Y - v[1])
        ang = np.mod(np.arctan2(Y - v[1], X - v[0]) - rot, 2.0 * math.pi)
        return cut(X, Y) * np.where(r > 0, r, 0.0) ** lam * np.sin(lam * np.clip(ang, 0.0, theta))

    return sample(geom, fn, level)


def _corner_opening(geom: DomainGeometry, v):
    """Interior opening angle and edge rotation at a polygon vertex."""
    verts = geom.vertices
    n = len(verts)
    i = int(np.argmin([np.hypot(p[0] - v[0], p[1] - v[1]) for p in verts]))
    prev_v = verts[(i - 1) % n]
    next_v = verts[(i + 1) % n]
    a_next = math.atan2(next_v[1] - v[1], next_v[0] - v[0])
    a_prev = math.atan2(prev_v[1] - v[1], prev_v[0] - v[0])
    opening = (a_prev - a_next) % (2.0 * math.pi)
    return opening, a_next


def boundary_layer_field(geom: DomainGeometry, level: int, exponent: float) -> SampledField:
    """dist(x, boundary)^exponent, the Lipschitz-mode test profile."""
    from .geometry import weight_values

    def fn(X, Y):
        return weight_values(geom, X, Y, mode="boundary") ** exponent

    return sample(geom, fn, level)


def wavelet_atom_field(
    geom: DomainGeometry, level: int, index: WaveletIndex, order: int = 4
) -> SampledField:
    """Single synthesized basis function on the domain's grid (full-box mask)."""
    tree = unit_tree(geom.box, level, level, order, index)
    return dwt_inverse(tree, WaveletSystem(order))


def manufactured_pair(T: float, center=(0.0, 0.0), radius: float = 0.5):
    """(exact solution u*, forcing f) with u* = sin(pi t / T) * w(x), w a
    polynomial bump (1 - s^2)^4 inside the radius; f = du*/dt - Lap(u*)
    is derived symbolically."""
    import sympy

    x, y, t = sympy.symbols("x y t")
    s2 = ((x - center[0]) ** 2 + (y - center[1]) ** 2) / radius**2
    w = sympy.Piecewise(((1 - s2) ** 4, s2 < 1), (0, True))
    u = sympy.sin(sympy.pi * t / T) * w
    f = sympy.diff(u, t) - sympy.diff(u, x, 2) - sympy.diff(u, y, 2)
    ufun = sympy.lambdify((x, y, t), u, "numpy")
    ffun = sympy.lambdify((x, y, t), f, "numpy")

    def u_np(X, Y, tt):
        return np.asarray(ufun(X, Y, tt), dtype=float)

    def f_np(X, Y, tt):
        return np.asarray(ffun(X, Y, tt), dtype=float)

    return u_np, f_np
