"""Residuals of exact identities and a-priori envelopes evaluated over a run."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .analysis.blowup import Check, _check
from .euler_core import Params
from .solver.evolve import duhamel_residuals, transport_residual
from .solver.state import ROW, FlowState, Trajectory


class InsufficientCadence(ValueError):
    """Not enough equally spaced snapshots for centred time differences."""


@dataclass
class IdentityResidual:
    name: str
    times: np.ndarray
    series: np.ndarray
    slope: float | None = None
    detail: dict = field(default_factory=dict)

    @property
    def sup(self) -> float:
        return float(np.max(self.series)) if self.series.size else 0.0

    def to_dict(self) -> dict:
        return {"name": self.name, "times": [float(t) for t in self.times],
                "series": [float(v) for v in self.series], "sup": self.sup,
                "slope": self.slope, "detail": self.detail}


# {{{ refinement slopes


def refinement_slope(resolutions, residuals, floor: float = 1e-11) -> float | None:
    """Convergence order from residuals at three or more resolutions.

    Least-squares slope of ``-log r`` against ``log N``.  Residuals already at
    the round-off ``floor`` only enter at the coarsest resolution where it is
    reached, so a series that drops to round-off is not penalised for
    stalling there; if every residual sits at the floor the order is infinite.
    """
    n = np.asarray(resolutions, dtype=float)
    r = np.asarray(residuals, dtype=float)
    if n.size < 3:
        return None
    order = np.argsort(n)
    n, r = n[order], r[order]
    keep = r > floor
    first_floor = np.flatnonzero(~keep)
    if first_floor.size:
        keep[first_floor[0]] = True
        r = np.maximum(r, floor)
    n, r = n[keep], r[keep]
    if n.size < 2:
        return float("inf")
    return float(-np.polyfit(np.log(n), np.log(r), 1)[0])


def attach_slopes(resolutions, runs: list[list[IdentityResidual]], floor: float = 1e-11):
    """Set ``slope`` on the finest run's residuals from the sup over each run."""
    finest = runs[int(np.argmax(resolutions))]
    for res in finest:
        sups = [next(x.sup for x in run if x.name == res.name) for run in runs]
        res.slope = refinement_slope(resolutions, sups, floor)
        res.detail["refinement"] = {"N": [int(n) for n in resolutions], "sup": sups}
    return finest


# }}}

# {{{ time differences of compositions


def centred_windows(times: np.ndarray, rtol: float = 1e-6) -> list[int]:
    """Indices whose two neighbours on each side are equally spaced."""
    out = []
    for i in range(2, len(times) - 2):
        h = np.diff(times[i - 2:i + 3])
        if np.all(np.abs(h - h[0]) <= rtol * h[0]) and h[0] > 0:
            out.append(i)
    return out


def time_derivative(values: np.ndarray, times: np.ndarray, i: int) -> np.ndarray:
    """Fourth-order centred difference at snapshot ``i``."""
    h = times[i + 1] - times[i]
    return (values[i - 2] - 8.0 * values[i - 1] + 8.0 * values[i + 1] - values[i + 2]) / (12.0 * h)


def _along(fl: FlowState, flow: str) -> dict[str, np.ndarray]:
    rows = fl.along[flow]
    out = {name: rows[ROW[name]] for name in ROW}
    out["c"] = 0.5 * (out["w"] - out["z"])
    out["dc"] = 0.5 * (out["dw"] - out["dz"])
    return out


# each identity: flow, composed quantity f, and the right side of -3/2 d_t (f o flow)
IDENTITIES = {
    "c along psi": ("psi", lambda v: v["c"], lambda v: (v["dw"] + 4.0 * v["a"]) * v["c"]),
    "k along psi": ("psi", lambda v: v["k"], lambda v: v["c"] * v["dk"]),
    "z along psi": ("psi", lambda v: v["z"], lambda v: 4.0 * v["a"] * v["z"] - 0.25 * v["c"] ** 2 * v["dk"]),
    "a along psi": ("psi", lambda v: v["a"],
                    lambda v: (v["da"] * v["c"] + 2.0 * v["a"] ** 2 - v["c"] ** 2
                               - 4.0 * v["c"] * v["z"] - 2.0 * v["z"] ** 2)),
    "c along phi": ("phi", lambda v: v["c"],
                    lambda v: 4.0 * v["a"] * v["c"] + v["c"] * v["dc"] + v["c"] * v["dz"]),
    "k_theta along phi": ("phi", lambda v: v["dk"], lambda v: v["dk"] * (v["dw"] + v["dz"])),
    "c along eta": ("eta", lambda v: v["c"], lambda v: (v["dz"] + 4.0 * v["a"]) * v["c"]),
    "k along eta": ("eta", lambda v: v["k"], lambda v: -v["c"] * v["dk"]),
}
DEFAULT_IDENTITIES = ("c along psi", "k along psi", "c along phi", "c along eta", "k along eta")


def _differenced(trajectory: Trajectory, flow: str, quantity, rhs, relative: bool):
    times = trajectory.times
    idx = centred_windows(times)
    if not idx:
        raise InsufficientCadence("need five equally spaced snapshots for centred time differences")
    vals = {}
    out = []
    for i in sorted({j + o for j in idx for o in range(-2, 3)}):
        vals[i] = quantity(_along(trajectory.snapshots[i].flows, flow))
    for i in idx:
        lhs = -1.5 * time_derivative(vals, times, i)
        r = rhs(_along(trajectory.snapshots[i].flows, flow))
        res = float(np.max(np.abs(lhs - r)))
        if relative:
            res /= max(float(np.max(np.abs(lhs))), float(np.max(np.abs(r))), 1e-300)
        out.append(res)
    return times[idx], np.array(out)


def appendix_identity_residuals(trajectory: Trajectory, names=DEFAULT_IDENTITIES,
                                relative: bool = True) -> list[IdentityResidual]:
    """Residual of ``-3/2 d_t(f o flow) = rhs o flow`` at every centred snapshot.

    ``names="all"`` evaluates every identity in :data:`IDENTITIES`; those
    needing second angular derivatives are not available because flows only
    carry first derivatives.
    """
    if trajectory.mode != "full":
        raise ValueError("identities need the full system")
    if names == "all":
        names = tuple(IDENTITIES)
    out = []
    for name in names:
        flow, quantity, rhs = IDENTITIES[name]
        t, series = _differenced(trajectory, flow, quantity, rhs, relative)
        out.append(IdentityResidual(name, t, series, detail={"flow": flow, "relative": relative}))
    return out


# }}}

# {{{ vorticity


def _varpi(v: dict[str, np.ndarray]) -> np.ndarray:
    return 4.0 * (v["w"] + v["z"] - v["da"]) * np.exp(v["k"]) / v["c"] ** 2


def vorticity_checks(trajectory: Trajectory, relative: bool = True) -> tuple[IdentityResidual, IdentityResidual]:
    """Transport of specific vorticity along ``phi``, in differential and Duhamel form."""
    if trajectory.mode != "full":
        raise ValueError("vorticity needs the full system")
    for s in trajectory.snapshots:
        if np.any(_along(s.flows, "phi")["c"] <= 0):
            raise ValueError(f"degenerate sound speed at t={s.t:.6g}")

    def source(v):
        return (8.0 / 3.0) * v["a"] * _varpi(v) + (4.0 / 3.0) * np.exp(v["k"]) * v["dk"]

    # the differential form is -3/2 d_t(...) = -3/2 (source) in the shared helper
    t, series = _differenced(trajectory, "phi", _varpi, lambda v: -1.5 * source(v), relative)
    evolution = IdentityResidual("vorticity along phi", t, series, detail={"relative": relative})

    v0 = _along(trajectory.initial.flows, "phi")
    varpi0 = _varpi(v0)
    weight = (4.0 / 3.0) * v0["dk"] * np.exp(v0["k"]) / v0["c"] ** 2
    res = []
    for s in trajectory.snapshots:
        fl = s.flows
        lhs = _varpi(_along(fl, "phi"))
        rhs = fl.Ifrak * (varpi0 + weight * fl.integrals["D44"])
        r = float(np.max(np.abs(lhs - rhs)))
        if relative:
            r /= max(float(np.max(np.abs(lhs))), float(np.max(np.abs(varpi0))), 1e-300)
        res.append(r)
    duhamel = IdentityResidual("vorticity Duhamel", trajectory.times, np.array(res),
                               detail={"relative": relative})
    return evolution, duhamel


# }}}

# {{{ solver identities


def solver_identity_residuals(trajectory: Trajectory) -> list[IdentityResidual]:
    """Duhamel identities for both Riemann slopes and ``eta_x``, plus transport of ``k``."""
    t = trajectory.times
    out = [IdentityResidual(f"Duhamel {key}", t, v, detail={"relative": True})
           for key, v in duhamel_residuals(trajectory).items()]
    out.append(IdentityResidual("k o phi = k0", t, transport_residual(trajectory),
                                detail={"relative": False}))
    return out


def identity_suite(trajectory: Trajectory, names=DEFAULT_IDENTITIES) -> list[IdentityResidual]:
    return (solver_identity_residuals(trajectory) + list(vorticity_checks(trajectory))
            + appendix_identity_residuals(trajectory, names))


# }}}

# {{{ envelopes


@dataclass
class EnvelopeReport:
    checks: dict[str, Check]
    slack: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    @property
    def failed(self) -> list[str]:
        return [k for k, c in self.checks.items() if not c.passed]

    def to_dict(self) -> dict:
        return {"slack": self.slack, "passed": self.passed,
                "checks": {k: {**asdict(c), "margin": c.margin} for k, c in self.checks.items()}}


def _two_sided(lo: float, hi: float, ref_lo: float, ref_hi: float, slack: float, what: str) -> Check:
    """``ref_lo/slack <= lo`` and ``hi <= slack*ref_hi`` folded into one ratio <= 1."""
    ratio = max(ref_lo / (slack * lo) if lo > 0 else np.inf, hi / (slack * ref_hi))
    return _check(ratio, 1.0, f"{what} in [{ref_lo / slack:.4g}, {slack * ref_hi:.4g}], seen [{lo:.4g}, {hi:.4g}]")


def estimate_envelopes(trajectory: Trajectory, params: Params | None = None, slack: float = 4.0,
                       integral_const: float = 1.0, speed_gap: float = 1.0 / 3.0) -> EnvelopeReport:
    """Check the a-priori bounds of the pre-blowup regime on every snapshot.

    Two-sided bounds ``f ~ 1`` compare against the initial range widened by
    ``slack``; ``eta_x`` bounds add ``slack``; the integral of ``|w_theta|``
    along ``phi`` is compared with ``slack * integral_const / speed_gap *
    (eps + t) / eps``.
    """
    params = params if params is not None else trajectory.params
    if trajectory.mode != "full" or params is None:
        raise ValueError("envelopes need a full-system run with parameters")
    eps = params.eps
    snaps = trajectory.snapshots
    ls0 = snaps[0].lagrangian()
    c0 = 0.5 * (ls0.w - ls0.z)
    fl0 = snaps[0].flows
    dz0 = float(np.max(np.abs(fl0.composed("eta", "dz"))))
    t0 = snaps[0].t

    lo = {k: np.inf for k in ("w", "c", "psi_x", "phi_x")}
    hi = {k: -np.inf for k in ("w", "c", "psi_x", "phi_x")}
    eta_x_max = qw_max = qz_max = lw_ratio = 0.0
    for s in snaps:
        ls = s.lagrangian()
        fl = s.flows
        vals = {"w": ls.w, "c": 0.5 * (ls.w - ls.z), "psi_x": fl.psi_x, "phi_x": fl.phi_x}
        for k, v in vals.items():
            lo[k] = min(lo[k], float(v.min()))
            hi[k] = max(hi[k], float(v.max()))
        eta_x_max = max(eta_x_max, float(ls.eta_x.max()))
        e = _along(fl, "eta")
        qw = e["dw"] - 0.25 * e["c"] * e["dk"]
        qw_max = max(qw_max, float(np.max(fl.eta_x * np.abs(qw))))
        p = _along(fl, "psi")
        qz_max = max(qz_max, float(np.max(np.abs(p["dz"] + 0.25 * p["c"] * p["dk"]))))
        if s.t > t0:
            bound = integral_const / speed_gap * (eps + s.t) / eps
            lw_ratio = max(lw_ratio, float(np.max(fl.integrals["Lw_phi"])) / bound)

    checks = {
        "w ~ 1": _two_sided(lo["w"], hi["w"], float(ls0.w.min()), float(ls0.w.max()), slack, "w"),
        "c ~ 1": _two_sided(lo["c"], hi["c"], float(c0.min()), float(c0.max()), slack, "c"),
        "phi_x ~ 1": _two_sided(lo["phi_x"], hi["phi_x"], 1.0, 1.0, slack, "phi_x"),
        "psi_x ~ 1": _two_sided(lo["psi_x"], hi["psi_x"], 1.0, 1.0, slack, "psi_x"),
        "eta_x <= 4": _check(eta_x_max, 4.0 + slack),
        "eta_x |q^w o eta| <= 2/eps": _check(qw_max, 2.0 / eps * (1.0 + slack)),
        "|q^z| <~ |z0'|": _check(qz_max, slack * max(2.0 * dz0, eps)),
        "int |w_theta o phi| <~ (eps+t)/eps": _check(lw_ratio, slack),
    }
    return EnvelopeReport(checks, slack)


# }}}
