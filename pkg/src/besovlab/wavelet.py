"""Orthonormal compactly supported tensor-product wavelet analysis.

Filters are Daubechies scaling/wavelet pairs with `order` vanishing moments
(filter length 2*order), computed once per order by spectral factorization of
the binomial half-band polynomial at 60-digit precision and cached.  The 2D
transform is separable and operates on zero-extended fields: sequences are
treated on all of Z^2, so subbands grow by the filter length at each level
and the map is exactly orthogonal (perfect reconstruction and Parseval hold
to machine precision in exact arithmetic).

Coefficient trees index entries by (level j, translation k, type), where
level is the absolute dyadic scale relative to the bounding box (level j
cubes have side box.side * 2^-j), type is one of "lh", "hl", "hh" for the
mother types and "father" for the coarsest scaling block.

Dump formats:
  CSV    columns level,j_k1,j_k2,type,coeff (17 significant digits)
  binary magic b"CTRE", u32 d, u32 J, then records
         (i32 level, i32 k1, i32 k2, u8 type code, f64 coeff), little-endian;
         type codes: 0 father, 1 lh, 2 hl, 3 hh
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .field import SampledField
from .geometry import Box

__all__ = [
    "CoeffTree",
    "InsufficientResolutionError",
    "WaveletIndex",
    "WaveletSystem",
    "daubechies_filter",
    "dwt_forward",
    "dwt_inverse",
    "empty_tree",
    "support_cube",
    "unit_tree",
    "load_tree_binary",
    "load_tree_csv",
    "save_tree_binary",
    "save_tree_csv",
]

MOTHER_TYPES = ("lh", "hl", "hh")
TYPE_CODES = {"father": 0, "lh": 1, "hl": 2, "hh": 3}
CODE_TYPES = {v: k for k, v in TYPE_CODES.items()}


class InsufficientResolutionError(ValueError):
    pass


@lru_cache(maxsize=None)
def daubechies_filter(order: int) -> np.ndarray:
    """Scaling (lowpass) filter with `order` vanishing moments, length 2*order."""
    if not 2 <= order <= 10:
        raise ValueError("wavelet order must lie in 2..10")
    import mpmath as mp

    with mp.workdps(60):
        def polymul(a, b):
            out = [mp.mpf(0)] * (len(a) + len(b) - 1)
            for i, ai in enumerate(a):
                for j, bj in enumerate(b):
                    out[i + j] += ai * bj
            return out

        # z^(order-1) * P(y(z)) with y*z = (-z^2 + 2z - 1)/(-4): ascending coeffs
        yz = [mp.mpf(-1) / 4, mp.mpf(1) / 2, mp.mpf(-1) / 4]
        poly = [mp.mpf(0)] * (2 * order - 1)
        acc = [mp.mpf(1)]
        for k in range(order):
            c = mp.binomial(order - 1 + k, k)
            shift = order - 1 - k
            for i, ai in enumerate(acc):
                poly[i + shift] += c * ai
            acc = polymul(acc, yz)
        roots = mp.polyroots(list(reversed(poly)), maxsteps=200, extraprec=200)
        inside = [z for z in roots if abs(z) < 1]
        hpoly = [mp.mpf(1)]
        for _ in range(order):
            hpoly = polymul(hpoly, [mp.mpf(1) / 2, mp.mpf(1) / 2])
        for zi in inside:
            hpoly = polymul(hpoly, [-zi / (1 - zi), 1 / (1 - zi)])
        h = [mp.re(mp.sqrt(2) * c) for c in hpoly]
    return np.array([float(c) for c in h])


@dataclass(frozen=True)
class WaveletSystem:
    """Filter pair plus support bookkeeping for one Daubechies order."""

    order: int

    @property
    def h(self) -> np.ndarray:
        return daubechies_filter(self.order)

    @property
    def g(self) -> np.ndarray:
        h = self.h
        L = len(h)
        return np.array([(-1) ** n * h[L - 1 - n] for n in range(L)])

    @property
    def length(self) -> int:
        return 2 * self.order

    @property
    def support_radius(self) -> int:
        """N with supp psi, supp phi contained in [0, 2N+1] (= filter length - 1)."""
        return self.order - 1

    def validate(self, tol: float = 1e-12) -> None:
        """Quadrature-mirror orthonormality and discrete vanishing moments."""
        h, g = self.h, self.g
        L = len(h)
        if abs(h.sum() - np.sqrt(2.0)) > tol:
            raise AssertionError("lowpass filter does not sum to sqrt(2)")
        for k in range(self.order):
            ip = float(np.dot(h[: L - 2 * k], h[2 * k :]))
            if abs(ip - (1.0 if k == 0 else 0.0)) > tol:
                raise AssertionError(f"orthonormality defect at shift {2 * k}")
        # centered/scaled abscissae keep the cancellation benign at high order
        n = (np.arange(L) - (L - 1) / 2.0) / max(L / 2.0, 1.0)
        for mo in range(self.order):
            if abs(float(np.sum(n**mo * g))) > 1e-10:
                raise AssertionError(f"vanishing moment defect at order {mo}")


@dataclass(frozen=True)
class WaveletIndex:
    level: int
    k: tuple[int, int]
    type: str

    def __post_init__(self):
        if self.type not in TYPE_CODES:
            raise ValueError(f"unknown wavelet type {self.type!r}")


def support_cube(index: WaveletIndex, sys: WaveletSystem, box: Box):
    """Physical cube Q(I) containing supp psi_I: corner and side length."""
    scale = box.side * 2.0 ** (-index.level)
    corner = np.array([box.lo[0] + scale * index.k[0], box.lo[1] + scale * index.k[1]])
    side = scale * (2 * sys.support_radius + 1)
    return corner, side


# -- 1D primitives (operate on 2D arrays along an axis, tracking offsets) ----


def _filter_full(arr: np.ndarray, filt: np.ndarray, axis: int) -> np.ndarray:
    """Full correlation y[k] = sum_n arr[k+n] filt[n] along axis, via zero pad."""
    L = len(filt)
    pad = [(0, 0), (0, 0)]
    pad[axis] = (L - 1, L - 1)
    padded = np.pad(arr, pad)
    win = sliding_window_view(padded, L, axis=axis)
    return win @ filt


def _analyze_axis(arr: np.ndarray, off: int, sysf: np.ndarray, axis: int):
    """Downsampled filter output and the global offset of its first entry."""
    full = _filter_full(arr, sysf, axis)
    gstart = off - (len(sysf) - 1)
    if gstart % 2 == 0:
        sl, new_off = slice(0, None, 2), gstart // 2
    else:
        sl, new_off = slice(1, None, 2), (gstart + 1) // 2
    idx = [slice(None), slice(None)]
    idx[axis] = sl
    return full[tuple(idx)], new_off


def _synth_axis(s, s_off, d, d_off, h, g, axis):
    """Upsample-and-filter both branches, summed on the union support."""
    mo = min(s_off, d_off)
    hi = max(s_off + s.shape[axis], d_off + d.shape[axis])

    def branch(band, boff, filt):
        m = hi - mo
        shape = list(band.shape)
        shape[axis] = 2 * m - 1
        z = np.zeros(shape)
        idx = [slice(None), slice(None)]
        idx[axis] = slice(2 * (boff - mo), 2 * (boff - mo) + 2 * band.shape[axis], 2)
        z[tuple(idx)] = band
        return _filter_full(z, filt[::-1], axis)

    out = branch(s, s_off, h) + branch(d, d_off, g)
    # correlation with the reversed filter on the zero-padded upsampled band
    # realizes the convolution sum x_k = sum_m band_m filt[k - 2m]; its first
    # entry sits at global index 2*mo
    return out, 2 * mo


def _crop_axis(arr, off, lo, hi, axis):
    """Restrict to global index range [lo, hi) along axis, zero-padding if short."""
    n = hi - lo
    shape = list(arr.shape)
    shape[axis] = n
    out = np.zeros(shape)
    a0 = max(lo, off)
    a1 = min(hi, off + arr.shape[axis])
    if a1 > a0:
        src = [slice(None), slice(None)]
        dst = [slice(None), slice(None)]
        src[axis] = slice(a0 - off, a1 - off)
        dst[axis] = slice(a0 - lo, a1 - lo)
        out[tuple(dst)] = arr[tuple(src)]
    return out


# -- coefficient tree ---------------------------------------------------------


@dataclass
class CoeffTree:
    """Per-level subbands of wavelet coefficients plus the father block.

    levels[j][type] = (offset (k1_0, k2_0), data array); data[i1, i2] is the
    coefficient at translation (k1_0 + i1, k2_0 + i2).  Immutable by
    convention once built.
    """

    box: Box
    grid_level: int
    nlev: int
    order: int
    levels: dict
    father: tuple  # (level, offset, data)
    d: int = 2
    t: float = 0.0

    @property
    def father_level(self) -> int:
        return self.grid_level - self.nlev

    @property
    def detail_levels(self):
        return sorted(self.levels.keys())

    def n_coefficients(self) -> int:
        n = self.father[2].size
        for bands in self.levels.values():
            for _, data in bands.values():
                n += data.size
        return n

    def total_l2(self) -> float:
        s = float(np.sum(self.father[2] ** 2))
        for bands in self.levels.values():
            for _, data in bands.values():
                s += float(np.sum(data**2))
        return float(np.sqrt(s))

    def level_values(self, level: int) -> np.ndarray:
        """All mother coefficients of one level as a flat array."""
        bands = self.levels.get(level)
        if not bands:
            return np.zeros(0)
        return np.concatenate([bands[t][1].ravel() for t in MOTHER_TYPES if t in bands])

    def all_entries(self):
        """(levels, k1, k2, typecodes, values) flat arrays over every entry."""
        Ls, K1, K2, Tc, V = [], [], [], [], []

        def push(level, off, data, code):
            n1, n2 = data.shape
            k1 = off[0] + np.arange(n1)
            k2 = off[1] + np.arange(n2)
            kk1, kk2 = np.meshgrid(k1, k2, indexing="ij")
            Ls.append(np.full(data.size, level, dtype=np.int64))
            K1.append(kk1.ravel())
            K2.append(kk2.ravel())
            Tc.append(np.full(data.size, code, dtype=np.int64))
            V.append(data.ravel())

        flev, foff, fdata = self.father
        push(flev, foff, fdata, 0)
        for level in self.detail_levels:
            for t in MOTHER_TYPES:
                if t in self.levels[level]:
                    off, data = self.levels[level][t]
                    push(level, off, data, TYPE_CODES[t])
        return (
            np.concatenate(Ls),
            np.concatenate(K1),
            np.concatenate(K2),
            np.concatenate(Tc),
            np.concatenate(V),
        )

    def map_values(self, fn) -> "CoeffTree":
        """Structure-preserving copy with fn applied to every data array."""
        new_levels = {
            lev: {t: (off, fn(data.copy())) for t, (off, data) in bands.items()}
            for lev, bands in self.levels.items()
        }
        flev, foff, fdata = self.father
        return CoeffTree(
            box=self.box,
            grid_level=self.grid_level,
            nlev=self.nlev,
            order=self.order,
            levels=new_levels,
            father=(flev, foff, fn(fdata.copy())),
            d=self.d,
            t=self.t,
        )


def empty_tree(box: Box, grid_level: int, nlev: int, order: int) -> CoeffTree:
    """Tree with the canonical subband shapes of dwt_forward, all zeros."""
    f = SampledField(
        values=np.zeros((1 << grid_level, 1 << grid_level)),
        mask=np.ones((1 << grid_level, 1 << grid_level), bool),
        box=box,
        level=grid_level,
    )
    tree = dwt_forward(f, WaveletSystem(order), nlev)
    return tree


def unit_tree(box: Box, grid_level: int, nlev: int, order: int, index: WaveletIndex) -> CoeffTree:
    """Tree holding a single unit coefficient at the given index."""
    tree = empty_tree(box, grid_level, nlev, order)
    if index.type == "father":
        lev, off, data = tree.father
        if lev != index.level:
            raise ValueError(f"father entries live at level {lev}")
        data[index.k[0] - off[0], index.k[1] - off[1]] = 1.0
    else:
        off, data = tree.levels[index.level][index.type]
        data[index.k[0] - off[0], index.k[1] - off[1]] = 1.0
    return tree


# -- forward / inverse transform ----------------------------------------------


def dwt_forward(field: SampledField, sys: WaveletSystem, nlev: int | None = None) -> CoeffTree:
    """Analyze a sampled field into a coefficient tree.

    nlev cascade steps are taken (default: the full grid level), producing
    mother coefficients at absolute levels grid_level-nlev .. grid_level-1
    and a father block at level grid_level-nlev.  Coefficients are physical
    inner products: the squared total equals the squared midpoint L2 norm of
    the zero-extended field.
    """
    if nlev is None:
        nlev = field.level
    if nlev > field.level:
        raise InsufficientResolutionError("insufficient-resolution")
    if nlev < 1:
        raise ValueError("need at least one decomposition level")
    h, g = sys.h, sys.g
    s = field.values * field.cell  # h^(d/2) with d = 2
    off = (0, 0)
    levels: dict = {}
    for step in range(1, nlev + 1):
        lev = field.level - step
        sL, o0 = _analyze_axis(s, off[0], h, axis=0)
        sH, _ = _analyze_axis(s, off[0], g, axis=0)
        LL, o1 = _analyze_axis(sL, off[1], h, axis=1)
        LH, _ = _analyze_axis(sL, off[1], g, axis=1)
        HL, _ = _analyze_axis(sH, off[1], h, axis=1)
        HH, _ = _analyze_axis(sH, off[1], g, axis=1)
        levels[lev] = {
            "lh": ((o0, o1), LH),
            "hl": ((o0, o1), HL),
            "hh": ((o0, o1), HH),
        }
        s, off = LL, (o0, o1)
    return CoeffTree(
        box=field.box,
        grid_level=field.level,
        nlev=nlev,
        order=sys.order,
        levels=levels,
        father=(field.level - nlev, off, s),
        t=field.t,
    )


def dwt_inverse(tree: CoeffTree, sys: WaveletSystem) -> SampledField:
    """Synthesize back to the grid.  Mask is the full box (synthesis may
    spill outside the original domain); values reproduce the analyzed
    zero-extended field to machine precision."""
    if sys.order != tree.order:
        raise ValueError("wavelet order mismatch with tree")
    h, g = sys.h, sys.g
    flev, off, s = tree.father
    s = s.copy()
    n = 1 << tree.grid_level
    for lev in range(flev, tree.grid_level):
        bands = tree.levels[lev]
        (doff, LH) = bands["lh"]
        (_, HL) = bands["hl"]
        (_, HH) = bands["hh"]
        # axis 1 first: (LL, LH) -> L-band rows, (HL, HH) -> H-band rows
        Lrow, l_off1 = _synth_axis(s, off[1], LH, doff[1], h, g, axis=1)
        Hrow, h_off1 = _synth_axis(HL, doff[1], HH, doff[1], h, g, axis=1)
        lo1 = min(l_off1, h_off1)
        hi1 = max(l_off1 + Lrow.shape[1], h_off1 + Hrow.shape[1])
        Lrow = _crop_axis(Lrow, l_off1, lo1, hi1, axis=1)
        Hrow = _crop_axis(Hrow, h_off1, lo1, hi1, axis=1)
        s, off0 = _synth_axis(Lrow, off[0], Hrow, doff[0], h, g, axis=0)
        off = (off0, lo1)
        # restrict to the support the analyzed band had at this scale;
        # entries outside it are zeros of the orthogonal transform
        if lev + 1 < tree.grid_level:
            toff, tdata = tree.levels[lev + 1]["lh"]
            s = _crop_axis(s, off[0], toff[0], toff[0] + tdata.shape[0], axis=0)
            s = _crop_axis(s, off[1], toff[1], toff[1] + tdata.shape[1], axis=1)
            off = toff
    out = _crop_axis(_crop_axis(s, off[0], 0, n, axis=0), off[1], 0, n, axis=1)
    return SampledField(
        values=out / tree.box.cell_size(tree.grid_level),
        mask=np.ones((n, n), bool),
        box=tree.box,
        level=tree.grid_level,
        t=tree.t,
    )


# -- dumps --------------------------------------------------------------------


def save_tree_csv(tree: CoeffTree, path) -> None:
    import csv

    Ls, K1, K2, Tc, V = tree.all_entries()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["level", "j_k1", "j_k2", "type", "coeff"])
        for lev, k1, k2, tc, v in zip(Ls, K1, K2, Tc, V):
            w.writerow([int(lev), int(k1), int(k2), CODE_TYPES[int(tc)], f"{v:.17g}"])


def save_tree_binary(tree: CoeffTree, path) -> None:
    Ls, K1, K2, Tc, V = tree.all_entries()
    with open(path, "wb") as fh:
        fh.write(b"CTRE")
        fh.write(struct.pack("<II", tree.d, tree.grid_level))
        rec = np.zeros(
            len(V), dtype=[("level", "<i4"), ("k1", "<i4"), ("k2", "<i4"), ("type", "u1"), ("coeff", "<f8")]
        )
        rec["level"], rec["k1"], rec["k2"] = Ls, K1, K2
        rec["type"], rec["coeff"] = Tc, V
        fh.write(rec.tobytes())


def _rebuild_tree(box, grid_level, order, Ls, K1, K2, Tc, V) -> CoeffTree:
    father_level = int(Ls[Tc == 0].min()) if np.any(Tc == 0) else int(Ls.min())
    nlev = grid_level - father_level
    tree = empty_tree(box, grid_level, nlev, order)
    for lev, k1, k2, tc, v in zip(Ls, K1, K2, Tc, V):
        typ = CODE_TYPES[int(tc)]
        if typ == "father":
            _, off, data = tree.father
        else:
            off, data = tree.levels[int(lev)][typ]
        data[int(k1) - off[0], int(k2) - off[1]] = v
    return tree


def load_tree_binary(path, box: Box, order: int) -> CoeffTree:
    with open(path, "rb") as fh:
        if fh.read(4) != b"CTRE":
            raise ValueError("not a CTRE dump")
        d, grid_level = struct.unpack("<II", fh.read(8))
        if d != 2:
            raise ValueError("only d = 2 trees are supported")
        rec = np.frombuffer(
            fh.read(), dtype=[("level", "<i4"), ("k1", "<i4"), ("k2", "<i4"), ("type", "u1"), ("coeff", "<f8")]
        )
    return _rebuild_tree(box, grid_level, order, rec["level"], rec["k1"], rec["k2"], rec["type"], rec["coeff"])


def load_tree_csv(path, box: Box, grid_level: int, order: int) -> CoeffTree:
    import csv

    Ls, K1, K2, Tc, V = [], [], [], [], []
    with open(path) as fh:
        rd = csv.reader(fh)
        next(rd)
        for row in rd:
            Ls.append(int(row[0]))
            K1.append(int(row[1]))
            K2.append(int(row[2]))
            Tc.append(TYPE_CODES[row[3]])
            V.append(float(row[4]))
    return _rebuild_tree(
        box, grid_level, order, np.array(Ls), np.array(K1), np.array(K2), np.array(Tc), np.array(V)
    )
