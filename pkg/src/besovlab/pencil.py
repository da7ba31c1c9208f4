"""Operator-pencil eigenvalue strips for the heat operator on cones.

For a wedge of opening theta the eigenvalue-free strip around the edge has
half-width pi/theta (heat operator, order m = 1).  For a rotationally
symmetric cone whose cross-section is the spherical cap of half-angle
theta0, the vertex pencil eigenvalues come in pairs

    lambda_pm = -1/2 +- sqrt(Lam + 1/4),

where Lam runs over the Dirichlet eigenvalues of the Laplace-Beltrami
operator on the cap.  Only the axisymmetric (zonal) branch is computed:
Lam = nu (nu + 1) with P_nu(cos theta0) = 0 for the Legendre function of
real degree nu.  That branch carries the smallest Dirichlet eigenvalue, so
the first pair is exact; azimuthal branches would only add larger
eigenvalues and are omitted.

The admissible Kondratiev weight calculator intersects the edge-strip
conditions

    -delta_k < a + 2m(gamma_m - i) + m < delta_k,   i = 0..gamma_m,

with the box |a| < m, all inequalities strict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "PencilSpec",
    "WeightRange",
    "admissible_weight_range",
    "besov_smoothness_bound",
    "cap_eigenvalues",
    "cap_pencil",
    "gamma_m",
    "legendre_p",
    "pencil_pair",
    "strip_free",
    "strip_free_weights",
    "wedge_delta",
    "wedge_pencil",
]

BORDERLINE_TOL = 1e-8


def wedge_delta(theta: float) -> float:
    """Half-width pi/theta of the eigenvalue-free strip at a wedge edge."""
    if not 0.0 < theta <= 2.0 * math.pi:
        raise ValueError("opening angle must lie in (0, 2*pi]")
    return math.pi / theta


def legendre_p(nu: float, x: float, tol: float = 1e-14, max_terms: int = 200000) -> float:
    """Legendre function P_nu(x) of real degree via the hypergeometric series
    about x = 1: sum_k prod_{i<k} (i - nu)(nu + 1 + i)/(i + 1)^2 * ((1-x)/2)^k.

    Converges for x > -1; term recursion stops at relative size `tol`.  The
    series cancels catastrophically when nu*sqrt((1-x)/2) is large; in that
    regime the same recursion runs in mpmath with precision sized to the
    predicted cancellation.
    """
    if x <= -1.0:
        raise ValueError("series requires x > -1")
    w = 0.5 * (1.0 - x)
    # largest term is ~ exp(2 nu sqrt(w)); digits lost ~ that / ln 10
    cancel = 2.0 * nu * math.sqrt(max(w, 0.0))
    if cancel > 23.0:
        import mpmath as mp

        with mp.workdps(25 + int(cancel / 2.3)):
            wm = mp.mpf(0.5) * (1 - mp.mpf(x))
            num = mp.mpf(nu)
            term = mp.mpf(1)
            total = mp.mpf(1)
            for k in range(max_terms):
                term *= (k - num) * (k + num + 1) / mp.mpf((k + 1) ** 2) * wm
                total += term
                if abs(term) < mp.mpf(tol) * max(1, abs(total)) and k > cancel:
                    return float(total)
        raise RuntimeError("Legendre series did not converge")
    term = 1.0
    total = 1.0
    for k in range(max_terms):
        term *= (k - nu) * (k + nu + 1.0) / ((k + 1.0) ** 2) * w
        total += term
        if abs(term) < tol * max(1.0, abs(total)) and k > nu * math.sqrt(max(w, 1e-30)):
            return total
    raise RuntimeError("Legendre series did not converge")


class BracketingError(RuntimeError):
    def __init__(self, lo, hi, count_found, count_wanted):
        super().__init__(
            f"bracketing-failed: found {count_found}/{count_wanted} roots in "
            f"degree interval [{lo}, {hi}]"
        )
        self.interval = (lo, hi)


def cap_eigenvalues(theta0: float, count: int = 1) -> np.ndarray:
    """First Dirichlet Laplace-Beltrami eigenvalues on the spherical cap.

    Axisymmetric branch: Lam = nu(nu+1) with P_nu(cos theta0) = 0, roots
    found by scanning for sign changes over nu in [0.01, 400] and polishing
    each bracket to 1e-10.
    """
    if not 0.0 < theta0 < math.pi:
        raise ValueError("cap half-angle must lie in (0, pi)")
    if count < 1:
        raise ValueError("count must be >= 1")
    x = math.cos(theta0)
    lo, hi = 0.01, 400.0
    # root spacing is ~ pi/theta0 on the zonal branch; scan well below it
    step = min(0.5, 0.25 * math.pi / theta0)
    roots = []
    nu_prev = lo
    f_prev = legendre_p(nu_prev, x)
    nu = lo
    while nu < hi and len(roots) < count:
        nu = min(nu + step, hi)
        f = legendre_p(nu, x)
        if f_prev == 0.0:
            roots.append(nu_prev)
        elif f_prev * f < 0.0:
            roots.append(brentq(lambda t: legendre_p(t, x), nu_prev, nu, xtol=1e-12, rtol=1e-13))
        nu_prev, f_prev = nu, f
    if len(roots) < count:
        raise BracketingError(lo, hi, len(roots), count)
    nus = np.array(roots[:count])
    return nus * (nus + 1.0)


def pencil_pair(lam_beltrami: float) -> tuple[float, float]:
    """(lambda_minus, lambda_plus) = -1/2 -+ sqrt(Lam + 1/4)."""
    if lam_beltrami < 0.0:
        raise ValueError("Beltrami eigenvalue must be >= 0")
    root = math.sqrt(lam_beltrami + 0.25)
    return (-0.5 - root, -0.5 + root)


@dataclass(frozen=True)
class PencilSpec:
    """Cone opening data plus the pencil eigenvalues kept for strip tests."""

    kind: str  # "wedge" or "cap"
    m: int = 1
    thetas: tuple = ()
    theta0: float | None = None
    eigenvalues: tuple = ()
    time_independent: bool = True

    def __post_init__(self):
        if self.kind not in ("wedge", "cap"):
            raise ValueError("kind must be 'wedge' or 'cap'")
        ev = tuple(sorted(self.eigenvalues))
        object.__setattr__(self, "eigenvalues", ev)

    @property
    def deltas(self) -> tuple:
        if self.kind != "wedge":
            raise ValueError("edge strips exist only for wedges")
        return tuple(wedge_delta(t) for t in self.thetas)


def wedge_pencil(thetas, m: int = 1) -> PencilSpec:
    return PencilSpec(kind="wedge", m=m, thetas=tuple(thetas))


def cap_pencil(theta0: float, count: int = 5, m: int = 1) -> PencilSpec:
    lams = cap_eigenvalues(theta0, count)
    eigs = []
    for L in lams:
        eigs.extend(pencil_pair(float(L)))
    return PencilSpec(kind="cap", m=m, theta0=theta0, eigenvalues=tuple(sorted(eigs)))


def strip_free(spec: PencilSpec, lo: float, hi: float, tol: float = BORDERLINE_TOL) -> bool:
    """True iff no stored eigenvalue real part lies in the closed strip [lo, hi].

    Eigenvalues within `tol` of the strip boundary count as inside
    (conservative closed-strip reading).
    """
    if lo > hi:
        raise ValueError("need lo <= hi")
    for ev in spec.eigenvalues:
        if lo - tol <= ev <= hi + tol:
            return False
    return True


def borderline_eigenvalues(spec: PencilSpec, lo: float, hi: float, tol: float = BORDERLINE_TOL):
    """Eigenvalues within tol of the strip boundary (flagging aid)."""
    out = []
    for ev in spec.eigenvalues:
        if abs(ev - lo) <= tol or abs(ev - hi) <= tol:
            out.append(ev)
    return out


def strip_free_weights(spec: PencilSpec, b: float, b_prime: float, m: int | None = None) -> bool:
    """Strip test in weight coordinates: the strip between Re lambda =
    b + 2m - 3/2 and b' + 2m - 3/2 must be eigenvalue free."""
    mm = spec.m if m is None else m
    lo = min(b, b_prime) + 2 * mm - 1.5
    hi = max(b, b_prime) + 2 * mm - 1.5
    return strip_free(spec, lo, hi)


def gamma_m(gamma: int, m: int) -> int:
    """floor((gamma - 1) / (2m)) for gamma >= 2m >= 2."""
    if m < 1 or gamma < 2 * m:
        raise ValueError("need gamma >= 2m >= 2")
    return (gamma - 1) // (2 * m)


def besov_smoothness_bound(gamma: int, m: int) -> float:
    """Supremum min(gamma, 3m) of admissible spatial Besov smoothness."""
    if gamma < 2 * m:
        raise ValueError("need gamma >= 2m")
    return float(min(gamma, 3 * m))


@dataclass(frozen=True)
class WeightRange:
    lower: float
    upper: float
    lower_open: bool = True
    upper_open: bool = True
    feasible: bool = True
    binding_lower: str = "a-box"
    binding_upper: str = "edge-strip"

    def contains(self, a: float) -> bool:
        if not self.feasible:
            return False
        lo_ok = a > self.lower if self.lower_open else a >= self.lower
        hi_ok = a < self.upper if self.upper_open else a <= self.upper
        return lo_ok and hi_ok

    def as_tuple(self):
        return (self.lower, self.upper)


def admissible_weight_range(m: int, gm: int, thetas, deltas=None) -> WeightRange:
    """Admissible Kondratiev weight interval for the parabolic regularity
    statement: intersection over i = 0..gamma_m and all edges of

        -delta_k - m - 2m(gamma_m - i) < a < delta_k - m - 2m(gamma_m - i)

    with the box -m < a < m.  For m = 1 the heat values delta_k = pi/theta_k
    are used; for higher order pass explicit strip half-widths.
    """
    if m < 1 or gm < 0:
        raise ValueError("need m >= 1 and gamma_m >= 0")
    thetas = tuple(thetas)
    if deltas is None:
        if m != 1:
            raise ValueError("pi/theta strip half-widths hold for m = 1; pass deltas")
        deltas = tuple(wedge_delta(t) for t in thetas)
    lower, upper = -float(m), float(m)
    b_lo, b_hi = "a-box", "a-box"
    for dk in deltas:
        for i in range(gm + 1):
            shift = 2 * m * (gm - i) + m
            lo_k = -dk - shift
            hi_k = dk - shift
            if lo_k > lower:
                lower, b_lo = lo_k, "edge-strip"
            if hi_k < upper:
                upper, b_hi = hi_k, "edge-strip"
    feasible = lower < upper
    return WeightRange(
        lower=lower,
        upper=upper,
        feasible=feasible,
        binding_lower=b_lo,
        binding_upper=b_hi,
    )
