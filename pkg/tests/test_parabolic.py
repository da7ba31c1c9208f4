import copy
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import besovlab as bl
from besovlab.parabolic import max_epsilon, solution_defect


FORCING = "sin(3.14159265358979324*t)*exp(-((x-0.5)**2+(y-0.5)**2)/0.02)"


@pytest.fixture(scope="module")
def square():
    return bl.polygon([(0, 0), (1, 0), (1, 1), (0, 1)], box=bl.Box((0.0, 0.0), 1.0))


@pytest.fixture(scope="module")
def base_cfg(square):
    return bl.SolverConfig(geom=square, level=5, dt=1.0 / 32, T=0.5,
                           forcing=FORCING, tol=1e-10)


def test_zero_forcing_zero_solution(square):
    cfg = bl.SolverConfig(geom=square, level=4, dt=1.0 / 16, T=0.25,
                          forcing=lambda X, Y, t: np.zeros_like(X))
    traj = bl.linear_solve(cfg, store="full")
    assert np.max(np.abs(traj.full)) == 0.0


def test_manufactured_convergence_order(square):
    u_exact, forcing = bl.manufactured_pair(T=0.25, center=(0.5, 0.5), radius=0.35)
    errs = []
    for lev, nt in ((4, 8), (5, 16), (6, 32)):
        cfg = bl.SolverConfig(geom=square, level=lev, dt=0.25 / nt, T=0.25,
                              forcing=forcing, ramp="off")
        traj = bl.linear_solve(cfg, snapshot_times=(0.25,), store="snapshots")
        f = traj.field_at(0.25)
        X, Y = f.centers()
        ue = np.where(f.mask, u_exact(X, Y, 0.25), 0.0)
        errs.append(float(np.sqrt(f.cell**2 * np.sum((f.values - ue) ** 2))))
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert all(o >= 1.8 for o in orders)


def test_forcing_ramp_warns(square):
    cfg = bl.SolverConfig(geom=square, level=4, dt=1.0 / 16, T=0.25,
                          forcing="exp(-((x-0.5)**2+(y-0.5)**2)/0.05)")
    with pytest.warns(UserWarning, match="ramping"):
        bl.linear_solve(cfg, store="snapshots")


def test_time_step_accuracy_warning(square):
    cfg = bl.SolverConfig(geom=square, level=5, dt=0.5, T=1.0, forcing=FORCING)
    with pytest.warns(UserWarning, match="4h"):
        bl.linear_solve(cfg, store="snapshots")


def test_energy_decay_after_forcing_stops(square):
    # forcing supported in t < 0.2, then free decay
    cfg = bl.SolverConfig(
        geom=square, level=5, dt=1.0 / 64, T=0.5,
        forcing="exp(-((x-0.5)**2+(y-0.5)**2)/0.02)*t*exp(-40*t*t)",
    )
    traj = bl.linear_solve(cfg, store="full")
    norms = np.linalg.norm(traj.full, axis=1)
    tail = norms[int(0.3 / cfg.dt):]
    assert np.all(np.diff(tail) <= 1e-14)


def test_maximum_principle_surrogate(square):
    cfg = bl.SolverConfig(geom=square, level=5, dt=1.0 / 64, T=0.25,
                          forcing="t*exp(-((x-0.4)**2+(y-0.6)**2)/0.03)")
    traj = bl.linear_solve(cfg, store="full")
    floor = -10 * 1e-13 * np.max(np.abs(traj.full))
    assert traj.full.min() >= floor


def test_step_operator_preserves_symmetry(square):
    """Symmetric field on the symmetric domain stays symmetric through the
    march (x <-> y reflection)."""
    cfg = bl.SolverConfig(geom=square, level=5, dt=1.0 / 32, T=0.25,
                          forcing="t*exp(-((x-0.5)**2+(y-0.5)**2)/0.04)")
    traj = bl.linear_solve(cfg, snapshot_times=(0.25,), store="snapshots")
    f = traj.field_at(0.25)
    assert np.max(np.abs(f.values - f.values.T)) <= 1e-10


def test_corner_gradient_exponent(lshape_heat_9):
    """Radial log-log fit of mean |grad u| near the reentrant corner:
    exponent lambda - 1 = -1/3 within the stated band.  Only the innermost
    annuli are asymptotic; farther out the forcing-driven bulk steepens the
    profile."""
    from besovlab.field import differentiate

    f = lshape_heat_9.field_at(0.25)
    gx = differentiate(f, 0)
    gy = differentiate(f, 1)
    mag = np.hypot(gx.values, gy.values)
    X, Y = f.centers()
    r = np.hypot(X - 0.5, Y - 0.5)
    ok = gx.mask & gy.mask
    rs, gs = [], []
    for k in np.arange(5.5, 7.5, 0.5):
        lo, hi = 2.0 ** -(k + 0.5), 2.0 ** -k
        sel = ok & (r >= lo) & (r < hi)
        if np.any(sel):
            rs.append(math.sqrt(lo * hi))
            gs.append(mag[sel].mean())
    slope = np.polyfit(np.log(rs), np.log(gs), 1)[0]
    assert -0.40 <= slope <= -0.27


# -- inverse norm -------------------------------------------------------------


def test_inverse_norm_deterministic(base_cfg):
    v1 = bl.estimate_inverse_norm(base_cfg, iterations=6, seed=5)
    v2 = bl.estimate_inverse_norm(base_cfg, iterations=6, seed=5)
    assert v1 == v2


def test_inverse_norm_monotone_in_T(square):
    vals = []
    for T in (0.125, 0.25, 0.5):
        cfg = bl.SolverConfig(geom=square, level=4, dt=1.0 / 64, T=T, forcing=FORCING)
        vals.append(bl.estimate_inverse_norm(cfg, iterations=12, seed=11))
    assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))


def test_inverse_norm_lower_bound_property(square):
    """The estimate dominates the Rayleigh quotient of the starting probe."""
    cfg = bl.SolverConfig(geom=square, level=4, dt=1.0 / 32, T=0.25, forcing=FORCING)
    est1 = bl.estimate_inverse_norm(cfg, iterations=1, seed=3)
    est20 = bl.estimate_inverse_norm(cfg, iterations=20, seed=3)
    assert est20 >= est1 - 1e-13


# -- epsilon budget -----------------------------------------------------------


def test_max_epsilon_m1_collapse():
    bound, branch = max_epsilon(2.0, 0.5, 1, 2.0, 1.0)
    assert bound == pytest.approx((2.0 - 1.0) / (2.0 * 0.5))
    bound2, _ = max_epsilon(0.1, 0.5, 1, 2.0, 1.0)
    assert bound2 == pytest.approx(1.0)  # same collapse on the other branch


def test_max_epsilon_anchor():
    bound, branch = max_epsilon(1.0, 1.0, 2, 2.0, 1.0)
    assert bound == pytest.approx(1.0 / 16.0)
    assert branch == "large-data"


@settings(max_examples=40, deadline=None, derandomize=True)
@given(
    eta=st.floats(1.0, 10.0),
    inv=st.floats(0.5, 5.0),
    M=st.integers(2, 5),
    r0=st.floats(1.2, 4.0),
)
def test_max_epsilon_monotone(eta, inv, M, r0):
    if r0 * inv * eta <= 1.0:
        return
    b0, br = max_epsilon(eta, inv, M, r0)
    b1, _ = max_epsilon(eta, inv, M + 1, r0)
    b2, _ = max_epsilon(eta * 1.5, inv, M, r0)
    assert br == "large-data"
    assert b1 < b0
    assert b2 < b0


def test_max_epsilon_validation():
    with pytest.raises(ValueError):
        max_epsilon(1.0, 1.0, 2, 1.0)


# -- picard ---------------------------------------------------------------------


def test_picard_eps_zero_identity(base_cfg):
    traj, trace = bl.picard_semilinear(base_cfg)
    assert trace.converged
    assert trace.status == "converged"
    assert len(trace.residuals) == 1 and trace.residuals[0] == 0.0


def test_picard_contraction_and_uniqueness(square, base_cfg):
    _, t0 = bl.picard_semilinear(base_cfg)
    eps = 0.1 * t0.eps_bound
    cfg = bl.SolverConfig(geom=square, level=5, dt=1.0 / 32, T=0.5,
                          forcing=FORCING, eps=eps, M=2, tol=1e-10)
    lin = bl.linear_solve(base_cfg, store="full")
    t1, tr1 = bl.picard_semilinear(cfg, invnorm=t0.invnorm)
    assert tr1.converged and tr1.q_estimate < 1.0
    # geometric residual decay once below the budget
    res = tr1.residuals
    for k in range(1, len(res) - 1):
        if res[k] > 0:
            assert res[k + 1] / res[k] <= tr1.q_estimate + 0.05

    pert = copy.deepcopy(lin)
    rng = np.random.default_rng(3)
    pert.full = pert.full + 1e-3 * np.abs(pert.full).max() * rng.standard_normal(pert.full.shape)
    t2, tr2 = bl.picard_semilinear(cfg, invnorm=t0.invnorm, start=pert)
    assert tr2.converged
    assert t1.spacetime_l2(t2) <= 1e-8

    defect = solution_defect(t1)
    assert defect <= 10 * cfg.tol

    # iterates stay inside the reported ball around the linear solution
    assert tr1.distance_from_linear <= tr1.ball_radius + 1e-12


def test_picard_divergence_reported(square, base_cfg):
    _, t0 = bl.picard_semilinear(base_cfg)
    cfg = bl.SolverConfig(geom=square, level=5, dt=1.0 / 32, T=0.5, forcing=FORCING,
                          eps=1e6 * t0.eps_bound, M=2, tol=1e-10, max_iter=30)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        _, trace = bl.picard_semilinear(cfg, invnorm=t0.invnorm)
    assert trace.status == "contraction-failed"
    assert not trace.converged
    assert trace.q_estimate >= 1.0


# -- trajectory & snapshots -------------------------------------------------------


def test_trajectory_field_access(base_cfg):
    traj = bl.linear_solve(base_cfg, snapshot_times=(0.25,), store="snapshots")
    f = traj.field_at(0.25)
    assert f.t == pytest.approx(0.25)
    with pytest.raises(KeyError):
        traj.field_at(0.3671875)


def test_snapshot_analysis_zero_trajectory(square):
    cfg = bl.SolverConfig(geom=square, level=5, dt=1.0 / 16, T=0.25,
                          forcing=lambda X, Y, t: np.zeros_like(X))
    traj = bl.linear_solve(cfg, store="full")
    rep = bl.snapshot_analysis(traj, 0.25, square, s_grid=(1.0, 2.0), a_grid=(0.5,))
    assert all(v == 0.0 for v, _, _ in rep.besov_levels.values())
    assert rep.kondratiev_by_a[0.5] == 0.0


def test_hoelder_in_time_quotient(lshape, lshape_heat_8):
    """sup over snapshot pairs of ||u(t) - u(s)||_B / |t-s|^(1/2) is finite
    and stable under halving the snapshot spacing (within 2x)."""
    from besovlab.norms import BesovSpec, besov_norm_wavelet

    cfg = lshape_heat_8.config
    traj = bl.linear_solve(cfg, snapshot_times=tuple(np.arange(1, 8) * 0.0625),
                           store="full")
    cut = lshape.cutoff()
    sysw = bl.WaveletSystem(4)
    spec = BesovSpec(1.5, 1.0, math.inf)

    def quotient(times):
        best = 0.0
        fields = {t: traj.field_at(t).apply_cutoff(cut) for t in times}
        for i, t1 in enumerate(times):
            for t2 in times[i + 1:]:
                diff = fields[t1].with_values(fields[t1].values - fields[t2].values)
                nrm = besov_norm_wavelet(bl.dwt_forward(diff, sysw), spec).value
                best = max(best, nrm / math.sqrt(abs(t2 - t1)))
        return best

    coarse = quotient([0.125, 0.25, 0.375])
    fine = quotient([0.0625, 0.125, 0.1875, 0.25, 0.3125, 0.375])
    assert math.isfinite(coarse) and math.isfinite(fine)
    assert fine / coarse < 2.0


def test_grid_refinement_consistency(lshape_heat_8, lshape_heat_9, lshape):
    """Halving h moves the estimated adaptivity smoothness by less than 0.2."""
    s_grid = np.arange(0.6, 3.8, 0.2)
    r8 = bl.snapshot_analysis(lshape_heat_8, 0.25, lshape, s_grid=s_grid)
    r9 = bl.snapshot_analysis(lshape_heat_9, 0.25, lshape, s_grid=s_grid)
    assert abs(r8.eta_hat - r9.eta_hat) < 0.2


def test_snapshot_file_roundtrip(tmp_path, base_cfg, square):
    from besovlab.field import read_snapshot, write_snapshot

    traj = bl.linear_solve(base_cfg, snapshot_times=(0.25,), store="snapshots")
    f = traj.field_at(0.25)
    path = tmp_path / "snap.psnp"
    write_snapshot(f, path)
    with open(path, "rb") as fh:
        assert fh.read(4) == b"PSNP"
    back = read_snapshot(path, geom=square)
    assert back.t == f.t and back.level == f.level
    assert np.array_equal(back.values, f.values)
