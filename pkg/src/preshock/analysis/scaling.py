"""Power-law slopes of blowup time and label across a sweep in eps."""

from __future__ import annotations

import numpy as np


def scaling_slopes(eps, T_star, x_star) -> dict:
    """Least-squares slopes of ``log|T*|`` and ``log|x*|`` against ``log eps``."""
    eps = np.asarray(eps, dtype=float)
    if eps.size < 3 or np.unique(eps).size < 3:
        raise ValueError("scaling slopes need at least three distinct eps values")
    le = np.log(eps)
    out = {}
    for key, vals in (("T_star", T_star), ("x_star", x_star)):
        v = np.abs(np.asarray(vals, dtype=float))
        if np.any(v == 0):
            raise ValueError(f"{key} vanishes for some eps; log slope undefined")
        slope, intercept = np.polyfit(le, np.log(v), 1)
        out[key] = {"slope": float(slope), "prefactor": float(np.exp(intercept))}
    return out
