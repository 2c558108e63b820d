"""Numerical toolkit for hyperbolic prescribed-curvature graph surfaces.

Implements the curvature operator and its linearization, Lorentzian
causal geometry on grids, foliated lens domains, an explicit linearized
Cauchy solver with energy monitoring, Newton iteration for the nonlinear
problem, the double-null instability experiment, and kernel-orthogonality
localization checks.
"""

from ._kernels import BACKEND, NUMBA_ENABLED
from .errors import (
    CFLViolation,
    DimensionError,
    EmptyDomain,
    GridTooSmall,
    NegcurvError,
    NotLorentzian,
    NotSpacelike,
    SignatureLost,
    SingularHessian,
    SingularMetric,
    StepTooLarge,
    SupportTouchesBoundary,
    UnknownCheck,
)
from .grid import (
    GridSpec,
    ScalarField,
    SymmetricMatrixField,
    VectorField,
    read_field_csv,
    write_field_csv,
    write_mask_csv,
)
from .surfaces import (
    GraphSurface,
    PerturbedParaboloid,
    QuadraticForm,
    SeparableBump,
    bump_profile,
    hyperbolic_paraboloid,
    poly_bump_profile,
)
from .geometry import (
    Signature,
    apply_box,
    apply_linearized,
    box_coefficients,
    classify_signature,
    conformal_factor,
    first_order_coeffs_n2,
    lorentzian_metric,
    psi,
    signature_summary,
    volume_density,
)
from .foliation import (
    CausalMask,
    Direction,
    FoliatedDomain,
    SpacelikeReport,
    build_slab_domain,
    causal_cone,
    causal_diamond,
    char_speeds,
    normal_field,
    validate_spacelike,
)
from .linear_solver import (
    CauchyData,
    EnergyTrace,
    LinearSolveReport,
    energy,
    solve_linear,
    verify_energy_estimate,
)
from .nonlinear_solver import (
    IterationReport,
    NonlinearProblem,
    newton_step,
    residual,
    solve_nonlinear,
)
from .instability import (
    CutoffSpec,
    NullGrid,
    TXResample,
    cutoff_chi,
    solve_double_null,
    to_txcoords,
    verify_growth_bound,
)
from .localization import (
    PairingResult,
    check_support_localization,
    kernel_family,
    kernel_sample,
    pairing,
    pairing_table,
    tautological_eta,
)

__version__ = "0.1.0"
