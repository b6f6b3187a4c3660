"""Local Hoelder exponent of a profile at a point from log-log slopes."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .. import spectral
from ..solver.labels import field_at
from ..solver.state import Trajectory
from .blowup import BlowupReport, snapshot_minimum


@dataclass
class HolderEstimate:
    exponent: float
    left: float
    right: float
    r_lo: float
    r_hi: float
    points: tuple[int, int]
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _slope(r: np.ndarray, df: np.ndarray) -> float:
    return float(np.polyfit(np.log(r), np.log(df), 1)[0])


def holder_exponent(profile, xi: float, f_xi: float, r_lo: float, r_hi: float,
                    points: int = 40, min_points: int = 10) -> HolderEstimate:
    """Slopes of ``log|f(theta) - f(xi)|`` against ``log|theta - xi|`` on each side.

    ``profile`` is either a callable of angle arrays or a pair ``(theta, values)``
    of samples; with samples only those with ``r_lo <= |theta - xi| <= r_hi``
    are used.  The estimate is the mean of the two one-sided slopes.
    """
    if not 0 < r_lo < r_hi:
        raise ValueError("need 0 < r_lo < r_hi")
    slopes, counts = [], []
    for sign in (-1.0, 1.0):
        if callable(profile):
            r = np.geomspace(r_lo, r_hi, points)
            vals = np.asarray(profile(xi + sign * r), dtype=float)
        else:
            theta, values = (np.asarray(v, dtype=float) for v in profile)
            off = sign * (theta - xi)
            keep = (off >= r_lo) & (off <= r_hi)
            r, vals = off[keep], values[keep]
        df = np.abs(vals - f_xi)
        good = df > 0
        r, df = r[good], df[good]
        if r.size < min_points:
            side = "left" if sign < 0 else "right"
            raise ValueError(f"only {r.size} usable points {side} of xi; need {min_points}")
        slopes.append(_slope(r, df))
        counts.append(int(r.size))
    return HolderEstimate(0.5 * (slopes[0] + slopes[1]), slopes[0], slopes[1],
                          float(r_lo), float(r_hi), (counts[0], counts[1]))


def crossover_scale(min_eta_x: float, a3: float) -> float:
    """Angle below which ``eta_x > 0`` still smooths the cusp: ``min_eta_x^1.5 / sqrt(a3)``."""
    return float(min_eta_x ** 1.5 / np.sqrt(a3))


def cusp_holder(trajectory: Trajectory, report: BlowupReport | None = None, name: str = "w",
                outer: float = 10.0, points: int = 40, snapshot: int = -1) -> HolderEstimate:
    """Hoelder exponent of a field at the cusp of one snapshot (default the last).

    The fitted decade is centred at the geometric mean of the smoothing
    crossover and the outer scale ``outer * eps^3`` beyond which higher-order
    terms take over; ``report`` is accepted for symmetry with the other
    analyses but the centre comes from the snapshot itself.
    """
    snap = trajectory.snapshots[snapshot]
    ls = snap.lagrangian()
    m = snapshot_minimum(ls)
    x = m.x
    eta_x = spectral.evaluate(ls.eta_x, np.array([x]))[0]
    a3 = spectral.evaluate(ls.eta_x, np.array([x]), 2)[0] / 6.0
    if a3 <= 0:
        raise ValueError("eta_x has no convex minimum; not near a cusp")
    params = trajectory.params
    eps = params.eps if params is not None and trajectory.mode == "full" else a3 ** (-1.0 / 3.0)
    inner = crossover_scale(eta_x, a3)
    center = np.sqrt(inner * outer * eps ** 3)
    r_lo, r_hi = center / np.sqrt(10.0), center * np.sqrt(10.0)
    f_xi = spectral.evaluate(ls.field(name), np.array([x]))[0]
    if snap.labels is not None:
        def profile(theta):
            return field_at(snap.labels, theta, (name,))[name]
    else:
        values = getattr(snap.eulerian(), name)

        def profile(theta):
            return spectral.evaluate(values, theta)
    est = holder_exponent(profile, m.xi, f_xi, r_lo, r_hi, points=points)
    est.detail = {"t": snap.t, "xi": m.xi, "min_eta_x": float(eta_x), "a3": float(a3),
                  "crossover": inner, "outer": outer * eps ** 3, "field": name}
    return est
