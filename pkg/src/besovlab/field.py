"""Sampled fields on dyadic cell-center grids with an inside-domain mask.

The field is the zero extension of the domain values to the full bounding
box; norms integrate with the composite midpoint rule (cell size squared per
cell in 2D).  Snapshot files use the PSNP binary layout: magic b"PSNP",
u32 grid level, f64 time tag, then the row-major f64 value grid, all
little-endian.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace

import numpy as np

from .geometry import Box

__all__ = ["SampledField", "read_snapshot", "write_snapshot", "differentiate", "partial_derivative"]


@dataclass(frozen=True)
class SampledField:
    values: np.ndarray
    mask: np.ndarray
    box: Box
    level: int
    t: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        m = np.asarray(self.mask, dtype=bool)
        if v.shape != m.shape or v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError("values and mask must be equal square 2D arrays")
        n = 1 << self.level
        if v.shape[0] != n:
            raise ValueError(f"grid level {self.level} needs {n}x{n} samples")
        v = v.copy()
        v[~m] = 0.0
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "mask", m.copy())

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def cell(self) -> float:
        return self.box.cell_size(self.level)

    def centers(self):
        return self.box.centers(self.level)

    def with_values(self, values: np.ndarray, t: float | None = None) -> "SampledField":
        return replace(self, values=values, t=self.t if t is None else t)

    def lp_norm(self, p: float) -> float:
        """L_p norm of the zero-extended field over the box (midpoint rule)."""
        if p == np.inf:
            return float(np.max(np.abs(self.values))) if self.values.size else 0.0
        h = self.cell
        return float((h * h * np.sum(np.abs(self.values) ** p)) ** (1.0 / p))

    def l2_norm(self) -> float:
        return self.lp_norm(2.0)

    def apply_cutoff(self, profile) -> "SampledField":
        X, Y = self.centers()
        return self.with_values(self.values * profile(X, Y))


def sample(geom, func, level: int, t: float = 0.0) -> SampledField:
    """Sample func(X, Y) on the domain's grid, zero outside."""
    from .geometry import rasterize

    base = rasterize(geom, level)
    X, Y = base.centers()
    vals = np.where(base.mask, func(X, Y), 0.0)
    return SampledField(values=vals, mask=base.mask, box=geom.box, level=level, t=t)


# -- finite differences ------------------------------------------------------


def differentiate(f: SampledField, axis: int) -> SampledField:
    """First partial along axis, central with one-sided 2nd-order fallback.

    Output values live on the same grid; cells where no stencil fits inside
    the mask are dropped from the output mask.
    """
    vals, ok = _diff_once(f.values, f.mask, axis, f.cell)
    return SampledField(values=vals, mask=ok, box=f.box, level=f.level, t=f.t)


def _shift(a: np.ndarray, k: int, axis: int, fill=0.0) -> np.ndarray:
    """a evaluated at index + k along axis, filled at the rolled-in edge."""
    out = np.full_like(a, fill)
    n = a.shape[axis]
    if abs(k) >= n:
        return out
    src = [slice(None)] * a.ndim
    dst = [slice(None)] * a.ndim
    if k >= 0:
        src[axis] = slice(k, n)
        dst[axis] = slice(0, n - k)
    else:
        src[axis] = slice(0, n + k)
        dst[axis] = slice(-k, n)
    out[tuple(dst)] = a[tuple(src)]
    return out


def _diff_once(v: np.ndarray, m: np.ndarray, axis: int, h: float):
    vp = _shift(v, +1, axis)
    vm = _shift(v, -1, axis)
    vpp = _shift(v, +2, axis)
    vmm = _shift(v, -2, axis)
    mp = _shift(m, +1, axis, fill=False)
    mm = _shift(m, -1, axis, fill=False)
    mpp = _shift(m, +2, axis, fill=False)
    mmm = _shift(m, -2, axis, fill=False)

    central_ok = m & mp & mm
    fwd_ok = m & mp & mpp & ~central_ok
    bwd_ok = m & mm & mmm & ~central_ok & ~fwd_ok

    out = np.zeros_like(v)
    out[central_ok] = (vp[central_ok] - vm[central_ok]) / (2.0 * h)
    out[fwd_ok] = (-3.0 * v[fwd_ok] + 4.0 * vp[fwd_ok] - vpp[fwd_ok]) / (2.0 * h)
    out[bwd_ok] = (3.0 * v[bwd_ok] - 4.0 * vm[bwd_ok] + vmm[bwd_ok]) / (2.0 * h)
    ok = central_ok | fwd_ok | bwd_ok
    return out, ok


def partial_derivative(f: SampledField, alpha: tuple[int, int]):
    """D^alpha f by iterated first differences; returns (values, valid mask)."""
    v, m = f.values, f.mask
    h = f.cell
    for axis, order in enumerate(alpha):
        for _ in range(order):
            v, m = _diff_once(v, m, axis, h)
    return v, m


# -- snapshot IO -------------------------------------------------------------

_MAGIC = b"PSNP"


def write_snapshot(f: SampledField, path) -> None:
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", f.level))
        fh.write(struct.pack("<d", f.t))
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def read_snapshot(path, geom=None, box: Box | None = None) -> SampledField:
    """Read a PSNP file.  Pass geom to restore the inside mask, else all-true."""
    from .geometry import rasterize

    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise ValueError("not a PSNP snapshot")
        (level,) = struct.unpack("<I", fh.read(4))
        (t,) = struct.unpack("<d", fh.read(8))
        n = 1 << level
        raw = np.frombuffer(fh.read(n * n * 8), dtype="<f8").reshape(n, n)
    if geom is not None:
        base = rasterize(geom, level)
        return SampledField(values=raw.copy(), mask=base.mask, box=geom.box, level=level, t=t)
    if box is None:
        box = Box((0.0, 0.0), 1.0)
    return SampledField(values=raw.copy(), mask=np.ones((n, n), bool), box=box, level=level, t=t)
