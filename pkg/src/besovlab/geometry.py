"""Desk-scale domains: wedges, polygons, spherical-cap cone metadata.

A domain carries its singular vertex set, a distance weight rho with values
in [0, 1], and a radial cutoff profile that is identically 1 near the
singular vertex and vanishes before the truncation radius.  All objects are
immutable after construction and all operations are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Box",
    "CutoffProfile",
    "DomainError",
    "DomainGeometry",
    "GridTooLargeError",
    "cutoff_eval",
    "distance_weight",
    "l_shape",
    "load_geometry",
    "polygon",
    "rasterize",
    "save_geometry",
    "wedge",
    "cap_cone",
]

MAX_GRID_LEVEL = 12

# Cap blend: rho equals the raw distance below CAP_LO and is exactly 1 from
# distance 1 on; the quadratic joint on [CAP_LO, 1] is continuous with zero
# slope at 1 and slope 2 at CAP_LO (within the 2-Lipschitz weight contract).
CAP_LO = 0.75
CAP_HI = 1.0


class DomainError(ValueError):
    pass


class GridTooLargeError(MemoryError):
    pass


@dataclass(frozen=True)
class Box:
    """Axis-aligned square bounding box."""

    lo: tuple[float, float]
    side: float

    def cell_size(self, level: int) -> float:
        return self.side * 2.0 ** (-level)

    def centers(self, level: int):
        """Cell-center coordinate arrays (X, Y), each of shape (n, n)."""
        n = 1 << level
        h = self.cell_size(level)
        c = np.arange(n) * h + 0.5 * h
        x = self.lo[0] + c
        y = self.lo[1] + c
        return np.meshgrid(x, y, indexing="ij")

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        hi0 = self.lo[0] + self.side
        hi1 = self.lo[1] + self.side
        return (
            (pts[:, 0] >= self.lo[0])
            & (pts[:, 0] <= hi0)
            & (pts[:, 1] >= self.lo[1])
            & (pts[:, 1] <= hi1)
        )


@dataclass(frozen=True)
class CutoffProfile:
    """Radial plateau profile: 1 on r < r0-eps, 0 on r > r0-eps/2.

    The transition uses a smoothstep polynomial; degree 5 gives a C^2 joint,
    degree 3 a C^1 joint.  Values on the plateau are exactly 1.0.
    """

    r0: float
    eps: float
    degree: int = 5
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not (0.0 < self.eps < self.r0):
            raise DomainError("cutoff requires 0 < eps < r0")
        if self.degree not in (3, 5):
            raise DomainError("blend degree must be 3 or 5")

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r = np.hypot(x - self.center[0], y - self.center[1])
        lo = self.r0 - self.eps
        hi = self.r0 - 0.5 * self.eps
        out = np.ones_like(r)
        out[r >= hi] = 0.0
        band = (r > lo) & (r < hi)
        if np.any(band):
            s = (r[band] - lo) / (hi - lo)
            if self.degree == 5:
                step = s * s * s * (10.0 + s * (-15.0 + 6.0 * s))
            else:
                step = s * s * (3.0 - 2.0 * s)
            out[band] = 1.0 - step
        return out if out.ndim else float(out)


def cutoff_eval(profile: CutoffProfile, x) -> float:
    """Evaluate the cutoff at a single point (2-vector)."""
    x = np.asarray(x, dtype=float)
    return float(profile(x[0], x[1]))


@dataclass(frozen=True)
class DomainGeometry:
    """A 2D wedge or polygon, or spherical-cap cone metadata.

    kind is one of "wedge2d", "polygon2d", "cap-cone3d-meta".  For wedges,
    theta in (0, 2pi] is the opening angle, the vertex sits at the origin and
    the domain is the truncated sector {0 < angle < theta, |x| < r0}.  For
    polygons, vertices is an (n, 2) array in order (closed implicitly).  For
    cap cones only theta0 (half-angle) is kept; there are no 3D grids.
    """

    kind: str
    box: Box
    r0: float
    eps: float
    theta: float | None = None
    theta0: float | None = None
    vertices: np.ndarray | None = None
    singular_vertices: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.kind not in ("wedge2d", "polygon2d", "cap-cone3d-meta"):
            raise DomainError(f"unknown domain kind {self.kind!r}")
        if not (0.0 < self.eps < self.r0):
            raise DomainError("require 0 < eps < r0")
        if self.kind == "wedge2d":
            if self.theta is None or not (0.0 < self.theta <= 2.0 * math.pi):
                raise DomainError("wedge angle must lie in (0, 2*pi]")
            if self.singular_vertices is None:
                object.__setattr__(self, "singular_vertices", np.zeros((1, 2)))
        elif self.kind == "polygon2d":
            v = np.asarray(self.vertices, dtype=float)
            if v.ndim != 2 or v.shape[0] < 3 or v.shape[1] != 2:
                raise DomainError("polygon needs >= 3 vertices of shape (n, 2)")
            object.__setattr__(self, "vertices", v)
            _check_simple(v)
            if self.singular_vertices is None:
                object.__setattr__(self, "singular_vertices", v.copy())
            else:
                sv = np.atleast_2d(np.asarray(self.singular_vertices, dtype=float))
                object.__setattr__(self, "singular_vertices", sv)
                for p in sv:
                    if _dist_to_polyline(p, v) > 1e-9:
                        raise DomainError("singular vertices must lie on the boundary")
        else:
            if self.theta0 is None or not (0.0 < self.theta0 < math.pi):
                raise DomainError("cap half-angle must lie in (0, pi)")
            if self.singular_vertices is None:
                object.__setattr__(self, "singular_vertices", np.zeros((1, 2)))
        sv = self.singular_vertices
        if sv is not None:
            object.__setattr__(self, "singular_vertices", np.atleast_2d(np.asarray(sv, float)))

    # -- membership ---------------------------------------------------------

    def contains(self, pts: np.ndarray) -> np.ndarray:
        """Boolean inside test for an (n, 2) array of points."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if self.kind == "wedge2d":
            r = np.hypot(pts[:, 0], pts[:, 1])
            ang = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2.0 * math.pi)
            return (r > 0.0) & (r < self.r0) & (ang > 0.0) & (ang < self.theta)
        if self.kind == "polygon2d":
            return _points_in_polygon(pts, self.vertices)
        raise DomainError("cap-cone metadata has no 2D point membership")

    def cutoff(self, degree: int = 5) -> CutoffProfile:
        """Radial cutoff centered on the primary singular vertex."""
        c = tuple(self.singular_vertices[0])
        return CutoffProfile(self.r0, self.eps, degree=degree, center=c)

    def boundary_segments(self) -> np.ndarray:
        """(n, 2, 2) array of boundary segments (polygon and wedge)."""
        if self.kind == "polygon2d":
            v = self.vertices
            return np.stack([v, np.roll(v, -1, axis=0)], axis=1)
        if self.kind == "wedge2d":
            a = np.array([[0.0, 0.0], [self.r0, 0.0]])
            e = self.r0 * np.array([math.cos(self.theta), math.sin(self.theta)])
            b = np.array([[0.0, 0.0], e])
            return np.stack([a, b], axis=0)
        raise DomainError("cap-cone metadata has no 2D boundary")


def wedge(theta: float, r0: float = 1.0, eps: float = 0.25, box: Box | None = None) -> DomainGeometry:
    if box is None:
        box = Box((-r0, -r0), 2.0 * r0)
    return DomainGeometry("wedge2d", box=box, r0=r0, eps=eps, theta=theta)


def polygon(vertices, singular=None, r0: float = 0.45, eps: float = 0.15, box: Box | None = None) -> DomainGeometry:
    v = np.asarray(vertices, dtype=float)
    if box is None:
        lo = v.min(axis=0)
        side = float((v.max(axis=0) - lo).max())
        box = Box((float(lo[0]), float(lo[1])), side)
    return DomainGeometry(
        "polygon2d", box=box, r0=r0, eps=eps, vertices=v, singular_vertices=singular
    )


def l_shape(singular_only_reentrant: bool = False) -> DomainGeometry:
    """Unit square minus its upper-right quadrant; reentrant vertex at (1/2, 1/2)."""
    v = [(0, 0), (1, 0), (1, 0.5), (0.5, 0.5), (0.5, 1), (0, 1)]
    singular = [(0.5, 0.5)] if singular_only_reentrant else None
    return polygon(v, singular=singular, box=Box((0.0, 0.0), 1.0))


def cap_cone(theta0: float, r0: float = 1.0, eps: float = 0.25) -> DomainGeometry:
    return DomainGeometry(
        "cap-cone3d-meta", box=Box((-r0, -r0), 2.0 * r0), r0=r0, eps=eps, theta0=theta0
    )


# -- distance weight ---------------------------------------------------------


def _cap_blend(t: np.ndarray) -> np.ndarray:
    out = np.asarray(t, dtype=float).copy()
    band = (out > CAP_LO) & (out < CAP_HI)
    out[band] = 1.0 - (CAP_HI - out[band]) ** 2 / (CAP_HI - CAP_LO)
    out[out >= CAP_HI] = 1.0
    return out if out.ndim else np.float64(out)


def weight_values(geom: DomainGeometry, x, y, mode: str = "singular") -> np.ndarray:
    """Vectorized rho over arbitrary points, no inside check.

    mode "singular": distance to the singular vertex set (polyhedral weight).
    mode "boundary": distance to the full boundary (Lipschitz weight).
    Both are capped at 1 through the quadratic blend.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if mode == "singular":
        d = np.full(np.broadcast(x, y).shape, np.inf)
        for v in geom.singular_vertices:
            d = np.minimum(d, np.hypot(x - v[0], y - v[1]))
    elif mode == "boundary":
        segs = geom.boundary_segments()
        d = np.full(np.broadcast(x, y).shape, np.inf)
        for a, b in segs:
            d = np.minimum(d, _point_segment_distance(x, y, a, b))
    else:
        raise DomainError(f"unknown weight mode {mode!r}")
    return _cap_blend(d)


def distance_weight(geom: DomainGeometry, x, mode: str = "singular") -> float:
    """rho(x) in [0, 1] for a single point; errors if x is outside the domain."""
    p = np.asarray(x, dtype=float)
    if not bool(geom.contains(p.reshape(1, 2))[0]):
        # points of the singular set itself count as admissible (rho = 0 there)
        sv = geom.singular_vertices
        on_sing = np.any(np.hypot(sv[:, 0] - p[0], sv[:, 1] - p[1]) < 1e-12)
        if not on_sing:
            raise DomainError("outside-domain")
    return float(weight_values(geom, p[0], p[1], mode=mode))


# -- rasterization -----------------------------------------------------------


def rasterize(geom: DomainGeometry, level: int):
    """Inside/outside mask on the dyadic cell-center grid of the bounding box.

    Returns a SampledField with zero values; cells whose center lies inside
    the domain are marked inside.
    """
    from .field import SampledField

    if level < 0:
        raise DomainError("level must be >= 0")
    if level > MAX_GRID_LEVEL:
        raise GridTooLargeError("grid-too-large")
    X, Y = geom.box.centers(level)
    pts = np.column_stack([X.ravel(), Y.ravel()])
    mask = geom.contains(pts).reshape(X.shape)
    return SampledField(values=np.zeros_like(X), mask=mask, box=geom.box, level=level)


# -- geometry spec files -----------------------------------------------------


def save_geometry(geom: DomainGeometry, path) -> None:
    lines = [f"kind={geom.kind}"]
    if geom.kind == "wedge2d":
        lines.append(f"theta={float(geom.theta)!r}")
    elif geom.kind == "polygon2d":
        vs = ";".join(f"{float(p[0])!r},{float(p[1])!r}" for p in geom.vertices)
        lines.append(f"vertices={vs}")
        sv = ";".join(f"{float(p[0])!r},{float(p[1])!r}" for p in geom.singular_vertices)
        lines.append(f"singular={sv}")
    else:
        lines.append(f"theta0={float(geom.theta0)!r}")
    lines.append(f"r0={float(geom.r0)!r}")
    lines.append(f"eps={float(geom.eps)!r}")
    lines.append(f"box={float(geom.box.lo[0])!r},{float(geom.box.lo[1])!r},{float(geom.box.side)!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_geometry(path) -> DomainGeometry:
    kv = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition("=")
            kv[key.strip()] = val.strip()
    kind = kv["kind"]
    box = None
    if "box" in kv:
        x0, y0, side = (float(t) for t in kv["box"].split(","))
        box = Box((x0, y0), side)
    r0 = float(kv.get("r0", 1.0))
    eps = float(kv.get("eps", 0.25))
    if kind == "wedge2d":
        return wedge(float(kv["theta"]), r0=r0, eps=eps, box=box)
    if kind == "polygon2d":
        verts = [tuple(float(t) for t in pair.split(",")) for pair in kv["vertices"].split(";")]
        singular = None
        if kv.get("singular"):
            singular = [tuple(float(t) for t in pair.split(",")) for pair in kv["singular"].split(";")]
        return polygon(verts, singular=singular, r0=r0, eps=eps, box=box)
    if kind == "cap-cone3d-meta":
        return cap_cone(float(kv["theta0"]), r0=r0, eps=eps)
    raise DomainError(f"unknown domain kind {kind!r}")


# -- small geometric helpers -------------------------------------------------


def _points_in_polygon(pts: np.ndarray, verts: np.ndarray) -> np.ndarray:
    """Even-odd rule, vectorized over points."""
    x, y = pts[:, 0], pts[:, 1]
    inside = np.zeros(len(pts), dtype=bool)
    n = len(verts)
    for i in range(n):
        x0, y0 = verts[i]
        x1, y1 = verts[(i + 1) % n]
        crosses = (y0 > y) != (y1 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xin = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
        hit = crosses & (x < xin)
        inside[hit] = ~inside[hit]
    return inside


def _point_segment_distance(x, y, a, b) -> np.ndarray:
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    den = dx * dx + dy * dy
    if den == 0.0:
        return np.hypot(x - ax, y - ay)
    t = np.clip(((x - ax) * dx + (y - ay) * dy) / den, 0.0, 1.0)
    return np.hypot(x - (ax + t * dx), y - (ay + t * dy))


def _dist_to_polyline(p, verts) -> float:
    n = len(verts)
    best = math.inf
    for i in range(n):
        d = _point_segment_distance(
            np.asarray(p[0]), np.asarray(p[1]), verts[i], verts[(i + 1) % n]
        )
        best = min(best, float(d))
    return best


def _segments_intersect(p1, p2, p3, p4) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1 = orient(p3, p4, p1)
    d2 = orient(p3, p4, p2)
    d3 = orient(p1, p2, p3)
    d4 = orient(p1, p2, p4)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))


def _check_simple(verts: np.ndarray) -> None:
    n = len(verts)
    for i in range(n):
        a1, a2 = verts[i], verts[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            b1, b2 = verts[j], verts[(j + 1) % n]
            if _segments_intersect(a1, a2, b1, b2):
                raise DomainError("polygon is not simple")
