"""High-order PCP finite difference WENO schemes for special relativistic hydrodynamics."""

from .config import RunConfig, parse_config
from .errors import (
    AdmissibilityError,
    CflViolationError,
    ConfigError,
    ConvergenceError,
    DegenerateGridError,
    DomainError,
    OutputError,
    PcpError,
)
from .flux import LimiterFloors, limit_fluxes, line_fluxes, llf_flux, llf_split, pcp_limit, viscosity_alpha
from .grid import BoundaryKind, FieldGrid, SchemeConfig, SolidBlock
from .problems import ProblemSpec, list_problems, preset
from .state import (
    ConservedState,
    EosParams,
    PrimitiveState,
    cons_to_prim,
    conserved_from_primitive,
    is_admissible,
    prim_to_cons,
    primitive_from_conserved,
    q_value,
)
from .timestep import Solver, StepControls
from .weno import weno_left, weno_right

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityError", "BoundaryKind", "CflViolationError", "ConfigError", "ConservedState",
    "ConvergenceError", "DegenerateGridError", "DomainError", "EosParams", "FieldGrid",
    "LimiterFloors", "OutputError", "PcpError", "PrimitiveState", "ProblemSpec", "RunConfig",
    "SchemeConfig", "SolidBlock", "Solver", "StepControls", "cons_to_prim",
    "conserved_from_primitive", "is_admissible", "limit_fluxes", "line_fluxes", "list_problems",
    "llf_flux", "llf_split", "parse_config", "pcp_limit", "preset", "prim_to_cons",
    "primitive_from_conserved", "q_value", "viscosity_alpha", "weno_left", "weno_right",
]
