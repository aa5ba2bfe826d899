"""Multi-element hyperbolicity-preserving stochastic Galerkin DG for the Euler equations."""
from .euler import AIR, GasModel, InadmissibleStateError, is_admissible, limiter_theta
from .field import DiscreteSpace, SGDGField
from .scenarios import Scenario, build_problem, dmr_scenario, manufactured_scenario, sod_scenario

__version__ = "0.1.0"

__all__ = [
    "AIR", "GasModel", "InadmissibleStateError", "is_admissible", "limiter_theta",
    "DiscreteSpace", "SGDGField", "Scenario", "build_problem",
    "dmr_scenario", "manufactured_scenario", "sod_scenario",
]
