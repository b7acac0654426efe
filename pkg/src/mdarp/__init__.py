"""Approximation algorithms, exact oracles and certificates for metric
multi-vehicle dial-a-ride."""

from .errors import *  # noqa: F401,F403
from .metric import (Instance, MetricSpace, RequestSpec, induced_submetric, line_metric, load_instance,
                     normalize_vehicles, save_instance, validate_metric)
from .routing import (FeasibilityReport, LowerBoundReport, Route, Solution, Stop, empirical_ratio,
                      flow_lower_bound, load_solution, lower_bounds, save_solution, steiner_lower_bounds,
                      verify_solution)
from .solve import ALGORITHMS, solve

__version__ = "0.1.0"
