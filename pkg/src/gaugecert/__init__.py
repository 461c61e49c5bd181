"""Gauge barriers, sampled subdifferentials and convexity certificates in R^n."""

from .barrier import (Barrier, BarrierFunction, barrier_eval,
                      barrier_subgradient, level_lipschitz,
                      reciprocal_convexity_slack)
from .bodies import (ConvexBody, GaugeValue, HalfspacePolytope, NormBall,
                     SegmentTube, body_from_spec, contains, gauge,
                     gauge_subgradient, radius_bounds, tube_body)
from .certify import (CertificationReport, MintyResult, MonotonicityReport,
                      certify_convexity, envelope, minty_test,
                      monotonicity_check)
from .errors import (ConvergenceWarning, EmptyGraphError, InvalidInputError,
                     OutOfDomainError, PreconditionError)
from .functions import make_function, parse_expression, registry_names
from .subdiff import (FunctionOracle, SubgradientGraph, box_grid,
                      check_stability, fenchel_membership,
                      proximal_subgradient, sample_graph)
from .variational import (EkelandResult, TraceRecord, body_grid, ekeland,
                          lemma_trace)

__version__ = "0.1.0"
