"""Conformal metrics of constant curvature on the upper half-plane with
constant Neumann data on the two boundary half-lines.

Modules: :mod:`moebius` (sphere geometry), :mod:`canonical` (explicit
solutions), :mod:`schwarzian`, :mod:`developing`, :mod:`verification`,
:mod:`polygons` and the :mod:`cli`.
"""

__version__ = "0.1.0"

from .canonical import (  # noqa: E402
    CanonicalParams,
    boundary_constants,
    closed_form_developing_map,
    evaluate_density,
    existence,
    synthesize,
    validate_params,
)
from .developing import (  # noqa: E402
    LogForm,
    NumericMap,
    PowerForm,
    SpiralForm,
    SymmetricFactor,
    construct_case,
    developing_map_numeric,
    solve_global,
)
from .errors import LiouvilleError  # noqa: E402
from .moebius import GeneralizedCircle, Mobius, cross_ratio  # noqa: E402
from .schwarzian import SchwarzianSpec, eval_Q, schwarzian, validate_spec  # noqa: E402
from .verification import MetricField, area, field_from_params, metric_from_dev  # noqa: E402

__all__ = [
    "CanonicalParams",
    "GeneralizedCircle",
    "LiouvilleError",
    "LogForm",
    "MetricField",
    "Mobius",
    "NumericMap",
    "PowerForm",
    "SchwarzianSpec",
    "SpiralForm",
    "SymmetricFactor",
    "area",
    "boundary_constants",
    "closed_form_developing_map",
    "construct_case",
    "cross_ratio",
    "developing_map_numeric",
    "eval_Q",
    "evaluate_density",
    "existence",
    "field_from_params",
    "metric_from_dev",
    "schwarzian",
    "solve_global",
    "synthesize",
    "validate_params",
    "validate_spec",
]
