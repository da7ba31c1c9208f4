"""Numerical laboratory for Besov/Kondratiev regularity on corner domains:
wavelet coefficient trees, weighted and smoothness norms, operator-pencil
eigenvalue strips, best-N-term rates, and a corner-singular heat solver
with a semilinear fixed-point loop."""

from .approx import (
    djp_consistency,
    embedding_check,
    fit_rate,
    rate_experiment,
    ring_decompose,
    sigma_n,
    uniform_error,
    uniform_rate_experiment,
    whitney_ring_check,
)
from .field import SampledField, read_snapshot, sample, write_snapshot
from .geometry import (
    Box,
    CutoffProfile,
    DomainGeometry,
    cap_cone,
    cutoff_eval,
    distance_weight,
    l_shape,
    load_geometry,
    polygon,
    rasterize,
    save_geometry,
    wedge,
)
from .norms import (
    AdaptivityPoint,
    BesovSpec,
    KondratievSpec,
    NormReport,
    adaptivity_tau,
    besov_norm_modulus,
    besov_norm_wavelet,
    kondratiev_norm,
    modulus_of_smoothness,
    refinement_stability,
    sobolev_norm,
)
from .parabolic import (
    PicardTrace,
    SolverConfig,
    Trajectory,
    estimate_inverse_norm,
    linear_solve,
    max_epsilon,
    picard_semilinear,
    snapshot_analysis,
    solution_defect,
)
from .pencil import (
    PencilSpec,
    WeightRange,
    admissible_weight_range,
    besov_smoothness_bound,
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
from .profiles import (
    boundary_layer_field,
    bump_field,
    manufactured_pair,
    singular_field,
    wavelet_atom_field,
)
from .wavelet import (
    CoeffTree,
    WaveletIndex,
    WaveletSystem,
    dwt_forward,
    dwt_inverse,
    support_cube,
)

__version__ = "0.1.0"
