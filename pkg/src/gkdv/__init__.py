"""Stationary KdV hierarchy toolkit.

Exact differential-polynomial algebra for the Lax operators and curve
coefficients, the birational map between jets and divisors, generating
functions of the auxiliary functions, and floating-point integration of the
commuting flows, the w-function and the eigenfunction.
"""

from .diffpoly import DiffPoly, NotExact, MissingSymbol, dp_add, dp_mul, dp_ddx, dp_eval, dp_weight, dp_antiderivative
from .spectral import CurveSpec, PoleAtZero, eval_mu, mu_from_a, a_from_mu, resultant, singular_count
from .lenard import lenard_step, r_poly, stationary_rhs, reduce_stationary
from .jetspace import (
    JetPoint,
    IndexOutOfRange,
    ZeroScale,
    theta,
    theta_reduced,
    mu_poly,
    mu_from_jet,
    u_values,
    x_flow,
    t_flow,
    rescale,
)
from .operators import (
    DiffOperator,
    GenusMismatch,
    ConstructionFailed,
    op_compose,
    op_adjoint,
    op_commutator,
    build_L,
    build_A,
    build_calA,
    build_U,
    build_U_of_L,
    check_relation,
)
from .genfun import LaurentPoly, BiPoly, bop, bop_k, translate, d_coeff, d_op, hirota, p_bivariate, p_matrix
from .divisor import (
    Divisor,
    DegenerateLeading,
    RepeatedRoots,
    PointOffCurve,
    random_float_jet,
    random_rational_divisor,
    upsilon,
    upsilon_inv,
)
from .waveplane import (
    Trajectory,
    WGrid,
    StepFailure,
    PathInconsistency,
    OffCurve,
    ZeroDenominator,
    integrate_flow,
    w_on_axis,
    w_grid,
    phi_eigen,
    phi_zero_energy,
    phi_kflow_check,
    elliptic_jet,
)

__version__ = "0.1.0"
