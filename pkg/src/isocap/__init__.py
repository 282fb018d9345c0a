"""Numerical p-capacity, p-Hawking mass and isocapacitary mass on radial asymptotically flat 3-manifolds."""

from . import errors, flow, metricspace, potential, specfun, variational, verify
from .errors import IsocapError
from .metricspace import MetricProfile, from_spec
from .potential import PotentialSolution, SolverOptions, solve_radial
from .verify import InequalityReport

__all__ = [
    "errors", "flow", "metricspace", "potential", "specfun", "variational", "verify",
    "IsocapError", "MetricProfile", "from_spec", "PotentialSolution", "SolverOptions",
    "solve_radial", "InequalityReport",
]
__version__ = "0.1.0"
