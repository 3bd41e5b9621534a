"""Risk-averse conditioning of random vectors on finite scenario spaces."""

from .core import (
    RandomVector,
    ScenarioSpace,
    cond_expectation,
    discrete_partition,
    expectation,
    trivial_partition,
)
from .featureset import FullSpace, L1Ball, VarianceBall, dykstra_project, phi_relative_cond_exp
from .risk import CompositeRisk, Quadratic, QuadraticLoss, moreau_extension
from .solver import (
    RiskPerspective,
    SolveResult,
    fbs_solve,
    lambda_from_tilde,
    lambda_sweep,
    reparameterize,
    sublinear_limit_solve,
)
from .splitting import SolverConfig

__version__ = "0.1.0"
