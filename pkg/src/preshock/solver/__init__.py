"""Time integration of the azimuthal system together with its characteristic flows."""

from .evolve import (
    SolverConfig,
    StopRule,
    compose,
    duhamel_residuals,
    duhamel_terms,
    evolve_until,
    flow_derivative_closed_form,
    make_scheme,
    step,
    transport_residual,
)
from .state import ALONG, INTEGRALS, FlowState, LabelState, Snapshot, Trajectory

__all__ = [
    "ALONG", "INTEGRALS", "FlowState", "LabelState", "Snapshot", "SolverConfig", "StopRule",
    "Trajectory", "compose", "duhamel_residuals", "duhamel_terms", "evolve_until",
    "flow_derivative_closed_form", "make_scheme", "step", "transport_residual",
]
