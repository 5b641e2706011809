"""Exponential-integrator phi-functions by numerical inversion of sectorial Laplace transforms."""

from .contour import (
    ContourParams,
    QuadConfig,
    QuadratureRule,
    SectorBound,
    build_rule,
    error_bound,
    hyperbola_point,
    invert,
    select_params_basic,
    select_params_eps,
)
from .integrators import (
    ExpRKTableau,
    PhiCombo,
    builtin_tableaus,
    exprk_integrate,
    exprk_step,
    multistep_integrate,
    multistep_step,
)
from .operator_phi import (
    OperatorSet,
    assemble_phi,
    oracle_operator,
    precompute_multistep_ops,
    precompute_rk_ops,
    shifted_solve,
)
from .problems import Problem, laplacian, make_ex1_cp, make_ex1_ho, make_ex2_ho
from .scalar_phi import ScalarEvalConfig, g_scalar, oracle_phi, phi_multistep_scalar, phi_quad, phi_rk_scalar
from .transforms import PhiSpec, RationalTransform, gstar_transform, multistep_transform, poly_transform, rk_transform

__version__ = "0.1.0"
