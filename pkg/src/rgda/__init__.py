"""Riemannian gradient descent ascent for nonconvex-strongly-concave minimax problems."""
from .errors import ConfigError, ContractError, DomainError, NumericError, RGDAError, ShapeError, UnsupportedError
from .manifolds import Euclidean, Product, Sphere, Stiefel, manifold_from_spec
from .problems import (DRO, MinimaxProblem, ProblemConstants, QuadraticSaddle, RobustRegression, make_dro,
                       make_quadratic_saddle, make_robust_regression)
from .sets import ConvexSet
from .solvers import (RunResult, SolverConfig, run, run_mvr_rsgda, run_rgda, run_rsgda, schedule_eta,
                      select_output, validate_config)

__version__ = "0.1.0"
