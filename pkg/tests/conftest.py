import numpy as np
import pytest

import besovlab as bl


@pytest.fixture(scope="session")
def wedge_geom():
    return bl.wedge(1.5 * np.pi, r0=1.0)


@pytest.fixture(scope="session")
def unit_square():
    return bl.polygon([(0, 0), (1, 0), (1, 1), (0, 1)], box=bl.Box((0.0, 0.0), 1.0))


@pytest.fixture(scope="session")
def lshape():
    return bl.l_shape(singular_only_reentrant=True)


@pytest.fixture(scope="session")
def wedge_singular_10(wedge_geom):
    """phi * r^(2/3) profile on the reentrant wedge, level-10 grid + tree."""
    f = bl.singular_field(wedge_geom, 10)
    tree = bl.dwt_forward(f, bl.WaveletSystem(4))
    return f, tree


@pytest.fixture(scope="session")
def lshape_heat_9(lshape):
    """Level-9 L-shape heat solve; the half-time snapshot drives the
    adaptivity-gap and N-term ordering criteria."""
    T = 0.5
    cfg = bl.SolverConfig(
        geom=lshape, level=9, dt=T / 256, T=T,
        forcing="t*exp(-((x-0.55)**2+(y-0.55)**2)/0.08)",
    )
    traj = bl.linear_solve(cfg, snapshot_times=(T / 2,), store="snapshots")
    return traj


@pytest.fixture(scope="session")
def lshape_heat_8(lshape):
    T = 0.5
    cfg = bl.SolverConfig(
        geom=lshape, level=8, dt=T / 128, T=T,
        forcing="t*exp(-((x-0.55)**2+(y-0.55)**2)/0.08)",
    )
    return bl.linear_solve(cfg, snapshot_times=(T / 2,), store="snapshots")
