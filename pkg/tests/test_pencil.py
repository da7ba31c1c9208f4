import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import lpmv

from besovlab.pencil import (
    BracketingError,
    PencilSpec,
    admissible_weight_range,
    besov_smoothness_bound,
    borderline_eigenvalues,
    cap_eigenvalues,
    cap_pencil,
    gamma_m,
    legendre_p,
    pencil_pair,
    strip_free,
    strip_free_weights,
    wedge_delta,
    wedge_pencil,
)


# -- wedge strips -------------------------------------------------------------


def test_wedge_delta_anchors():
    assert wedge_delta(2 * math.pi) == 0.5
    assert wedge_delta(math.pi) == 1.0
    assert wedge_delta(math.pi / 4) == 4.0


def test_wedge_delta_range_check():
    with pytest.raises(ValueError):
        wedge_delta(0.0)
    with pytest.raises(ValueError):
        wedge_delta(2 * math.pi + 0.1)


def test_wedge_convexity_dichotomy():
    for theta in np.linspace(0.1, 2 * math.pi, 24):
        d = wedge_delta(theta)
        assert (d >= 1.0) == (theta <= math.pi)


# -- Legendre function ---------------------------------------------------------


def test_legendre_integer_degrees_match_polynomials():
    xs = np.linspace(-0.9, 0.999, 13)
    for x in xs:
        assert legendre_p(1.0, x) == pytest.approx(x, abs=1e-13)
        assert legendre_p(2.0, x) == pytest.approx(0.5 * (3 * x * x - 1), abs=1e-12)


@pytest.mark.parametrize("nu", [0.5, 1.7, 12.3, 41.0])
@pytest.mark.parametrize("x", [-0.9, -0.5, 0.0, 0.77, 0.996])
def test_legendre_vs_scipy_oracle(nu, x):
    assert legendre_p(nu, x) == pytest.approx(lpmv(0, nu, x), abs=1e-8, rel=1e-8)


# -- cap eigenvalues ------------------------------------------------------------


def test_cap_90deg_anchor():
    lam = cap_eigenvalues(math.pi / 2, 1)
    assert lam[0] == pytest.approx(2.0, abs=1e-8)  # nu = 1 since P_1(0) = 0
    lm, lp = pencil_pair(float(lam[0]))
    assert lp == pytest.approx(1.0, abs=1e-8)


def test_cap_5deg_anchor():
    lam = cap_eigenvalues(math.radians(5.0), 1)
    _, lp = pencil_pair(float(lam[0]))
    assert lp > 27.0


def test_cap_count_and_ordering():
    lams = cap_eigenvalues(math.radians(60.0), 5)
    assert len(lams) == 5
    assert np.all(np.diff(lams) > 0)


def test_cap_monotone_in_angle():
    grid = np.linspace(math.radians(10), math.radians(170), 10)
    l1 = [float(cap_eigenvalues(t, 1)[0]) for t in grid]
    assert all(a > b for a, b in zip(l1, l1[1:]))


def test_cap_angle_validation():
    with pytest.raises(ValueError):
        cap_eigenvalues(0.0, 1)
    with pytest.raises(ValueError):
        cap_eigenvalues(math.pi, 1)


def test_bracketing_failure_reports_interval():
    with pytest.raises(BracketingError) as exc:
        cap_eigenvalues(math.radians(0.2), 3)  # roots beyond the scan ceiling
    assert exc.value.interval == (0.01, 400.0)


# -- pencil pairs -----------------------------------------------------------------


def test_pencil_pair_values():
    assert pencil_pair(0.0) == pytest.approx((-1.0, 0.0))
    assert pencil_pair(2.0) == pytest.approx((-2.0, 1.0))
    assert pencil_pair(6.0) == pytest.approx((-3.0, 2.0))


@settings(max_examples=60, deadline=None, derandomize=True)
@given(lam=st.floats(0.0, 1e6))
def test_pencil_pair_identities(lam):
    lm, lp = pencil_pair(lam)
    assert lm + lp == pytest.approx(-1.0, abs=1e-12)
    assert lm * lp == pytest.approx(-lam, rel=1e-12, abs=1e-12)
    if lam > 0:
        assert not (-1.0 < lm < 0.0) and not (-1.0 < lp < 0.0)


# -- strips -----------------------------------------------------------------------


def test_strip_free_cap90():
    spec = cap_pencil(math.pi / 2, 5)
    assert strip_free(spec, -0.9, -0.1)
    assert not strip_free(spec, 0.5, 1.5)  # contains lambda_1^+ = 1
    assert strip_free(spec, -1.0 + 1e-6, -1e-6)


def test_strip_free_empty_spec():
    spec = PencilSpec(kind="cap", theta0=1.0, eigenvalues=())
    assert strip_free(spec, -10.0, 10.0)


def test_strip_closed_and_borderline():
    spec = PencilSpec(kind="cap", theta0=1.0, eigenvalues=(1.0,))
    assert not strip_free(spec, 1.0, 2.0)  # closed endpoint counts
    assert not strip_free(spec, 1.0 + 5e-9, 2.0)  # within the 1e-8 cushion
    assert strip_free(spec, 1.0 + 1e-6, 2.0)
    assert borderline_eigenvalues(spec, 1.0 + 5e-9, 2.0) == [1.0]


def test_strip_free_weight_wrapper():
    spec = cap_pencil(math.pi / 2, 3)
    # b = a + 2m gamma_m, b' = -m shifts by 2m - 3/2; m = 1: strip between
    # b + 1/2 and b' + 1/2
    assert strip_free_weights(spec, b=-0.75, b_prime=-1.0, m=1)
    assert not strip_free_weights(spec, b=0.6, b_prime=-1.0, m=1)


# -- bookkeeping -------------------------------------------------------------------


def test_gamma_m_values():
    assert gamma_m(2, 1) == 0
    assert gamma_m(4, 1) == 1
    assert gamma_m(9, 2) == 2
    with pytest.raises(ValueError):
        gamma_m(1, 1)


def test_besov_smoothness_bound():
    assert besov_smoothness_bound(6, 1) == 3.0
    assert besov_smoothness_bound(4, 2) == 4.0
    assert besov_smoothness_bound(2, 1) == 2.0


# -- admissible weight ranges -------------------------------------------------------


def test_weight_range_anchor_2pi():
    r = admissible_weight_range(1, 0, [2 * math.pi])
    assert r.feasible
    assert r.as_tuple() == (-1.0, -0.5)
    assert r.lower_open and r.upper_open
    assert r.binding_lower == "a-box" and r.binding_upper == "edge-strip"


def test_weight_range_anchor_pi_over_4():
    r = admissible_weight_range(1, 1, [math.pi / 4])
    assert r.feasible
    assert r.as_tuple() == (-1.0, 1.0)


def test_weight_range_infeasible_2pi_gm1():
    r = admissible_weight_range(1, 1, [2 * math.pi])
    assert not r.feasible


def test_weight_range_contains():
    r = admissible_weight_range(1, 0, [2 * math.pi])
    assert r.contains(-0.75)
    assert not r.contains(-1.0)  # open endpoint
    assert not r.contains(-0.5)


def test_weight_range_antitone_in_gamma_m():
    widths = []
    for gm in range(4):
        r = admissible_weight_range(1, gm, [math.pi / 3])
        widths.append(r.upper - r.lower if r.feasible else 0.0)
    assert all(a >= b for a, b in zip(widths, widths[1:]))


def test_weight_range_multiple_edges():
    r = admissible_weight_range(1, 0, [math.pi / 2, 1.5 * math.pi])
    # the widest edge (most反 singular) binds
    r_single = admissible_weight_range(1, 0, [1.5 * math.pi])
    assert r.upper == r_single.upper


def test_weight_range_general_m_needs_deltas():
    with pytest.raises(ValueError):
        admissible_weight_range(2, 0, [math.pi])
    r = admissible_weight_range(2, 0, [math.pi], deltas=[1.0])
    assert r.feasible


def test_wedge_pencil_deltas():
    spec = wedge_pencil([math.pi / 2, 2 * math.pi])
    assert spec.deltas == (2.0, 0.5)
