"""Time integration driver, compositions and closed-form checks along flows."""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass

import numpy as np

from .. import spectral
from ..errors import EstimateViolation, SolverBreakdown
from ..euler_core import DegenerateStateError, Params, StateField
from .common import rk4
from .eulerian import EulerianScheme
from .labels import LabelScheme
from .state import ROW, FlowState, Snapshot, Trajectory

log = logging.getLogger(__name__)


@dataclass
class StopRule:
    """When to end a run.

    ``eta_x_min`` is the main rule; ``tail_max`` stops an angular-grid run
    once the top third of the spectrum carries that share of amplitude.
    ``marks`` are extra ``min eta_x`` levels: the first step at or below
    each one is kept as a snapshot, so it equals the final snapshot of a
    run stopped at that level.
    """

    eta_x_min: float = 1e-2
    marks: tuple[float, ...] = ()
    t_max: float | None = None
    max_steps: int = 2_000_000
    tail_max: float | None = None
    wall_seconds: float | None = None


@dataclass
class SolverConfig:
    scheme: str = "labels"          # labels | eulerian
    mode: str = "full"              # full | burgers
    cfl: float = 0.4
    interp: str = "fast"            # fast | exact
    max_flow_labels: int = 2048
    snapshot_dt: float | None = None    # default eps/20
    dense_dt: float | None = None       # default eps/400
    dense_below: float = 0.1
    t0: float | None = None             # default -eps (full), 0 (burgers)
    envelope_slack: float | None = 4.0
    dealias: bool = True

    def to_dict(self) -> dict:
        return asdict(self)


def make_scheme(n: int, config: SolverConfig):
    stride = max(1, -(-n // config.max_flow_labels))
    while n % stride:
        stride += 1
    if config.mode == "burgers" or config.scheme == "eulerian":
        return EulerianScheme(n, mode=config.mode, stride=stride, interp=config.interp,
                              dealias=config.dealias)
    if config.scheme == "labels":
        return LabelScheme(n, stride=stride, interp=config.interp)
    raise ValueError(f"unknown scheme {config.scheme!r}")


# {{{ single step (angular-grid scheme)


def step(state: StateField, flows: FlowState, dt: float, mode: str = "full",
         interp: str = "fast") -> tuple[StateField, FlowState]:
    """Advance state and flows by one RK4 step of the angular-grid scheme.

    ``dt`` may be negative (used for reversibility checks).
    """
    n = state.n
    stride = max(1, n // flows.labels.size)
    scheme = EulerianScheme(n, mode=mode, stride=stride, interp=interp)
    if flows.labels.size != scheme.m or not np.allclose(flows.labels, scheme.labels):
        raise ValueError("flow labels must be every stride-th node of the state grid")
    if mode == "full":
        state.check_hyperbolic()
        if not flows.integrals:
            flows.integrals = FlowState.identity(flows.labels).integrals
    y = scheme.pack(state, flows)
    y1 = rk4(scheme.tendency, state.t, y, dt)
    if not np.all(np.isfinite(y1)):
        raise SolverBreakdown(f"non-finite values after step t={state.t:.6g} dt={dt:.3g}")
    return scheme.unpack(state.t + dt, y1)


# }}}

# {{{ envelopes used as a sanity abort


class _Sanity:
    def __init__(self, data: StateField, params: Params | None, slack: float | None, mode: str):
        self.on = slack is not None and mode == "full" and params is not None
        if not self.on:
            return
        self.slack = slack
        eps = params.eps
        c0 = data.c
        self.w_lo, self.w_hi = data.w.min() / slack, data.w.max() * slack
        self.c_lo, self.c_hi = c0.min() / slack, c0.max() * slack
        self.a_hi = slack * (np.abs(data.a).max() + eps)
        self.z_hi = slack * (np.abs(data.z).max() + eps)
        self.k_hi = slack * max(np.abs(spectral.derivative(data.k)).max(), eps ** 2)

    def check(self, m: dict) -> None:
        if not self.on:
            return
        t = m["t"]
        checks = [
            ("w ~ 1", self.w_lo <= m["min_w"] and m["max_w"] <= self.w_hi),
            ("c ~ 1", self.c_lo <= m["min_c"] and m["max_c"] <= self.c_hi),
            ("|a| <= |a0| + O(eps)", m["max_a"] <= self.a_hi),
            ("|z| <= |z0| + O(eps)", m["max_z"] <= self.z_hi),
            ("|k_theta| <~ |k0'|", m["dk"] <= self.k_hi),
        ]
        for name, ok in checks:
            if not ok:
                raise EstimateViolation(f"estimate violation at t={t:.6g}: {name}", t=t, check=name)


# }}}


def evolve_until(data: StateField, params: Params | None, stop: StopRule | None = None,
                 config: SolverConfig | None = None) -> Trajectory:
    """Integrate from the data time until ``stop`` fires; returns the trajectory.

    Snapshots are taken every ``snapshot_dt`` and every ``dense_dt`` once
    ``min eta_x <= dense_below``; steps are shortened to land on them.
    """
    stop = stop or StopRule()
    config = config or SolverConfig()
    eps = params.eps if params is not None else 1.0
    n = data.n
    scheme = make_scheme(n, config)
    t0 = config.t0 if config.t0 is not None else (0.0 if config.mode == "burgers" else -eps)
    base_dt = config.snapshot_dt or eps / 20.0
    dense_dt = config.dense_dt or eps / 400.0
    t_max = stop.t_max if stop.t_max is not None else t0 + (4.0 if config.mode == "burgers" else 3.0 * eps)
    sanity = _Sanity(data, params, config.envelope_slack, config.mode)

    data = StateField(t0, data.w, data.z, data.k, data.a)
    y = scheme.initial(data)
    t = t0
    snaps = [scheme.snapshot(t, y)]
    mon = [scheme.monitors(t, y)]
    dts = []
    next_snap = t + base_dt
    marks = sorted((m for m in stop.marks if m > stop.eta_x_min), reverse=True)
    reason = "t_max"
    started = time.monotonic()
    steps = 0
    while True:
        if steps >= stop.max_steps:
            reason = "max_steps"
            break
        if stop.wall_seconds is not None and time.monotonic() - started > stop.wall_seconds:
            reason = "wall_time"
            break
        dt = scheme.max_dt(y, config.cfl)
        landing = False
        if t + dt >= next_snap - 1e-14 * max(1.0, abs(t)):
            dt = next_snap - t
            landing = True
        if t + dt > t_max:
            dt = t_max - t
            landing = True
        try:
            y_new = scheme.post_step(rk4(scheme.tendency, t, y, dt))
        except DegenerateStateError as exc:
            raise SolverBreakdown(f"degenerate state at t={t:.6g}: {exc}") from exc
        if not np.all(np.isfinite(y_new)):
            raise SolverBreakdown(f"non-finite values at t={t:.6g} (step {steps}, dt={dt:.3g})")
        t = next_snap if landing and abs(t + dt - next_snap) < 1e-12 * max(1.0, abs(t)) else t + dt
        y = y_new
        steps += 1
        dts.append(dt)
        m = scheme.monitors(t, y)
        mon.append(m)
        sanity.check(m)
        if m["min_eta_x"] <= stop.eta_x_min:
            reason = "eta_x"
            snaps.append(scheme.snapshot(t, y))
            break
        if stop.tail_max is not None and m["tail"] > stop.tail_max:
            reason = "resolution"
            snaps.append(scheme.snapshot(t, y))
            break
        if t >= t_max - 1e-15:
            snaps.append(scheme.snapshot(t, y))
            break
        marked = False
        while marks and m["min_eta_x"] <= marks[0]:
            marks.pop(0)
            marked = True
        if landing or marked:
            snaps.append(scheme.snapshot(t, y))
        if landing:
            cadence = dense_dt if m["min_eta_x"] <= config.dense_below else base_dt
            next_snap = t + cadence
    monitors = {key: np.array([row[key] for row in mon]) for key in mon[0]}
    log.info("run stopped (%s) at t=%.6g after %d steps", reason, t, steps)
    return Trajectory(snapshots=snaps, monitors=monitors, params=params, mode=config.mode,
                      scheme=scheme.name, stop_reason=reason, dt_history=np.array(dts),
                      config={"solver": config.to_dict(), "stop": asdict(stop), "n_grid": n})


# {{{ compositions and closed forms


def compose(field: np.ndarray, flow_samples: np.ndarray) -> np.ndarray:
    """``field o flow`` by exact trigonometric interpolation of periodic samples."""
    return spectral.evaluate(np.asarray(field, dtype=float), np.asarray(flow_samples, dtype=float))


def _cumulative(t: np.ndarray, vals: np.ndarray) -> np.ndarray:
    """Running trapezoid along the first axis."""
    out = np.zeros_like(vals)
    if len(t) > 1:
        inc = 0.5 * (vals[1:] + vals[:-1]) * np.diff(t)[:, None]
        out[1:] = np.cumsum(inc, axis=0)
    return out


def flow_derivative_closed_form(trajectory: Trajectory, which: str, form: str = "integral"):
    """``psi_x`` or ``phi_x`` at every snapshot from their closed forms.

    ``form="integral"`` uses the co-integrated exponents; ``form="vorticity"``
    (``phi`` only) uses ``c0^2 Ifrak^-2 (c o phi)^-2``;  ``form="snapshots"``
    recomputes the exponent by trapezoid quadrature over snapshot compositions.
    """
    if trajectory.mode != "full":
        raise ValueError("closed forms need the full system")
    snaps = trajectory.snapshots
    first = snaps[0].flows
    out = []
    if which == "psi":
        c0 = 0.5 * (first.composed("psi", "w") - first.composed("psi", "z"))
        if form == "snapshots":
            t = trajectory.times
            integrand = np.array([s.flows.composed("psi", "dz") - (4.0 / 3.0) * s.flows.composed("psi", "a")
                                  for s in snaps])
            expo = _cumulative(t, integrand)
        for i, s in enumerate(snaps):
            fl = s.flows
            c = 0.5 * (fl.composed("psi", "w") - fl.composed("psi", "z"))
            e = expo[i] if form == "snapshots" else fl.integrals["Jpsi"]
            out.append(np.sqrt(c0 / c) * np.exp(e))
        return np.array(out)
    if which == "phi":
        c0 = 0.5 * (first.composed("phi", "w") - first.composed("phi", "z"))
        if form == "snapshots":
            t = trajectory.times
            expo = _cumulative(t, np.array([s.flows.composed("phi", "a") for s in snaps]))
        for i, s in enumerate(snaps):
            fl = s.flows
            c = 0.5 * (fl.composed("phi", "w") - fl.composed("phi", "z"))
            if form == "vorticity":
                out.append(c0 ** 2 * fl.Ifrak ** -2 * c ** -2)
            else:
                e = expo[i] if form == "snapshots" else fl.integrals["Ia_phi"]
                out.append((c0 / c) ** 2 * np.exp(-(16.0 / 3.0) * e))
        return np.array(out)
    raise ValueError(f"which must be 'psi' or 'phi', got {which!r}")


def _initial_slopes(trajectory: Trajectory):
    """``w0', z0', k0'`` at the labels and ``c0, k0`` there."""
    fl = trajectory.initial.flows
    e = fl.along["eta"]
    return {
        "w": e[ROW["w"]], "z": e[ROW["z"]], "k": e[ROW["k"]],
        "dw": e[ROW["dw"]], "dz": e[ROW["dz"]], "dk": e[ROW["dk"]],
        "c": 0.5 * (e[ROW["w"]] - e[ROW["z"]]),
    }


def duhamel_terms(trajectory: Trajectory, snap: Snapshot) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Both sides of each Duhamel identity at one snapshot."""
    d0 = _initial_slopes(trajectory)
    fl = snap.flows
    ints = fl.integrals
    e = fl.along["eta"]
    c = 0.5 * (e[ROW["w"]] - e[ROW["z"]])
    qw = e[ROW["dw"]] - 0.25 * c * e[ROW["dk"]]
    lhs38 = fl.eta_x * qw
    rhs38 = fl.I * ((d0["dw"] - 0.25 * d0["c"] * d0["dk"]) * np.exp(-d0["k"] / 8.0)
                    + ints["J38_qz"] / 12.0 - (8.0 / 3.0) * ints["J38_wa"])
    # eta_x from the positions, independent of the co-integrated derivative
    lhs39 = 1.0 + spectral.derivative(fl.eta - fl.labels)
    rhs39 = 1.0 + ints["J39_qw"] + 0.25 * ints["J39_kc"] + ints["J39_z"] / 3.0
    p = fl.along["psi"]
    pc = 0.5 * (p[ROW["w"]] - p[ROW["z"]])
    qz = p[ROW["dz"]] + 0.25 * pc * p[ROW["dk"]]
    lhs310 = qz * fl.psi_x
    rhs310 = np.exp(-ints["G_psi"]) * ((d0["dz"] + 0.25 * d0["c"] * d0["dk"])
                                       - ints["J310_qw"] / 12.0 - (8.0 / 3.0) * ints["J310_az"])
    return {"3.8": (lhs38, rhs38), "3.9": (lhs39, rhs39), "3.10": (lhs310, rhs310)}


def duhamel_residuals(trajectory: Trajectory, relative: bool = True) -> dict[str, np.ndarray]:
    """Sup-norm residual of each Duhamel identity at every snapshot.

    Relative residuals divide by the sup norm of the left side (floored at
    the sup norm of its initial value).
    """
    if trajectory.mode != "full":
        raise ValueError("Duhamel identities need the full system")
    out: dict[str, list] = {"3.8": [], "3.9": [], "3.10": []}
    scale0 = {k: np.max(np.abs(v[0])) for k, v in duhamel_terms(trajectory, trajectory.initial).items()}
    for s in trajectory.snapshots:
        for key, (lhs, rhs) in duhamel_terms(trajectory, s).items():
            r = float(np.max(np.abs(lhs - rhs)))
            if relative:
                r /= max(float(np.max(np.abs(lhs))), scale0[key], 1e-300)
            out[key].append(r)
    return {k: np.array(v) for k, v in out.items()}


def transport_residual(trajectory: Trajectory) -> np.ndarray:
    """``sup |k o phi - k0|`` at every snapshot."""
    k0 = trajectory.initial.flows.composed("eta", "k")
    return np.array([float(np.max(np.abs(s.flows.composed("phi", "k") - k0)))
                     for s in trajectory.snapshots])


# }}}
