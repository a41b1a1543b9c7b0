"""Sharp large deviations for q-norms of random vectors on l_p^n spheres and balls."""
from .errors import (
    ComplexKappa,
    DegenerateTilt,
    DomainViolation,
    InvalidParameter,
    LpSldError,
    MaxIterations,
    NegativeBracket,
    NotAdmissible,
    NumericalBreakdown,
    QuadratureError,
    RegimeViolation,
    ZeroGradient,
)
from .gengauss import PqParams, m_pq, moment_Mp
from .legendre import RatePoint, legendre_transform, rate_norm, solve_tau
from .montecarlo import McEstimate, compare, mc_intersection, mc_tail_ball, mc_tail_cone
from .sld import SldEstimate, ball_constants, gamma, intersection_volume, kappa, projection_tail, tail_ball, tail_cone, xi

__version__ = "0.1.0"
