"""Spectral analysis of Sturm-Liouville problems with two symmetric interior
discontinuities and an eigenparameter-dependent boundary condition."""

__version__ = "0.1.0"

from .errors import NumericalError, SlmsError, ValidationError
from .green import (
    GreenEval,
    ResolventInput,
    ResolventOutput,
    eigenfunction_expansion_check,
    green_function,
    green_matrix,
    resolvent_apply,
)
from .numerics import (
    Grid,
    GridFunction,
    HVector,
    build_grid,
    derivative_of_analytic,
    inner_product_H,
    integrate_piecewise,
    refine_root,
)
from .problem import (
    IntervalGeometry,
    PerPieceConstant,
    PerPiecePolynomial,
    Piece,
    ProblemSpec,
    Tabulated,
    ValidatedProblem,
    ZeroPotential,
    eval_potential,
    load_problem,
    problem_from_dict,
    problem_to_dict,
    reference_problem,
    validate,
)
from .sampling import (
    ReconstructionReport,
    TransformSamples,
    TransformSpec,
    g_preset,
    reconstruct,
    reconstruction_report,
    sample_at_spectrum,
    transform_direct,
    transform_via_green,
)
from .solver import (
    ShotSolution,
    boundary_forms,
    omega,
    omega_scaled,
    shoot_chi,
    shoot_phi,
    volterra_residual,
    wronskian_at,
)
from .spectrum import (
    EigenRecord,
    EigenVectorH,
    ScanOptions,
    Spectrum,
    canonical_product,
    coupling_constant,
    find_eigenvalues,
    norm_squared,
    orthogonality_matrix,
    predict_sqrt_eigenvalue,
)
