"""Bicomplex proportional fractional calculus with weighted Cauchy-Riemann
operators, verified at desk scale by quadrature."""

from .errors import (
    BcfracError,
    ConfigError,
    DomainError,
    EmptyProbesError,
    NotInvertibleError,
    QuadratureError,
    StepError,
    UnsupportedWeightsError,
    WOnBoundaryError,
    ZeroDivisorError,
    ZeroError,
)
from .hypercomplex import (
    BicomplexNumber,
    HyperbolicNumber,
    bc_from_cartesian,
    bc_from_text,
    bc_inner_k,
    bc_invert,
    bc_mod_k,
    bc_mul,
    bc_star,
    bc_to_cartesian,
    bc_to_text,
    d_leq,
)
from .fracops1d import (
    DEFAULT_CONTROL,
    FracSpec,
    ProportionalControl,
    Quadrature1D,
    ScalarWeightFn,
    hausdorff_derivative,
    integral_rule,
    prop_derivative,
    prop_frac_derivative,
    prop_frac_integral,
    tabulate,
)
from .weighted_cr import (
    CauchyKernel,
    PlaneFunction,
    ProductFunction,
    WeightPair,
    apply_cr_weighted,
    boundary_measure,
    cauchy_kernel,
    check_orthogonality,
    inner_c,
    weight_divergence,
)
from .frac_cr_bicomplex import (
    FracParams,
    LambdaWeights,
    Phi4,
    RectDomain,
    dphi,
    factorization_check,
    frac_cr_apply,
    frac_cr_apply_sigma_free,
    inversion_check,
    lambda_for_constant_weights,
    lambda_residual,
    remainder_R,
    trace_derivative,
    trace_integral,
    trace_sum,
)
from .quadrature_verify import (
    IDENTITIES,
    Resolution,
    ResidualReport,
    SurfacePatch,
    VerificationSetup,
    bg_gauss_residual,
    borel_pompeiu_classical,
    contour_integral,
    convergence_study,
    frac_bp_reconstruct,
    frac_gauss_residual,
    gauss_residual,
    run_identity,
    surface_integral,
)

__version__ = "0.1.0"
