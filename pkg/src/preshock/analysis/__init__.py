"""Blowup detection, cusp expansion and Hoelder estimates on finished runs."""

from .blowup import (
    BlowupReport,
    Check,
    StructureReport,
    TailFit,
    detect_blowup,
    eta_x_structure_check,
    fit_tail,
    refine_argmin,
    snapshot_minimum,
)
from .cusp import (
    CuspExpansion,
    ErrorProfile,
    IllConditionedFit,
    fit_cusp,
    fractional_coefficients,
    reconstruct_and_compare,
)
from .estimators import BlowupDetector, HolderEstimator
from .holder import HolderEstimate, cusp_holder, holder_exponent
from .scaling import scaling_slopes

__all__ = [
    "BlowupDetector", "BlowupReport", "Check", "CuspExpansion", "ErrorProfile",
    "HolderEstimate", "HolderEstimator", "IllConditionedFit", "StructureReport", "TailFit",
    "cusp_holder", "detect_blowup", "eta_x_structure_check", "fit_cusp", "fit_tail",
    "fractional_coefficients", "holder_exponent", "reconstruct_and_compare", "refine_argmin",
    "scaling_slopes", "snapshot_minimum",
]
