"""Blowup time and label from the tail of a run, and the shape of ``eta_x`` near it."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .. import spectral
from ..errors import AmbiguousBlowup
from ..solver.state import LabelState, Trajectory


@dataclass
class Check:
    passed: bool
    value: float
    bound: float
    detail: str = ""

    @property
    def margin(self) -> float:
        return self.bound - self.value


def _check(value, bound, detail="") -> Check:
    return Check(bool(value <= bound), float(value), float(bound), detail)


# {{{ minimum of eta_x on one snapshot


@dataclass
class SnapshotMinimum:
    t: float
    x: float            # refined argmin label
    value: float        # eta_x there
    xi: float           # eta there
    margin: float       # second-lowest local minimum minus the lowest


def local_minima(values: np.ndarray) -> np.ndarray:
    """Indices of periodic local minima (plateaus report their left end)."""
    left = np.roll(values, 1)
    right = np.roll(values, -1)
    return np.flatnonzero((values < left) & (values <= right))


def uniqueness_margin(values: np.ndarray) -> float:
    idx = local_minima(values)
    if idx.size < 2:
        return float(values.max() - values.min())
    v = np.sort(values[idx])
    return float(v[1] - v[0])


def refine_argmin(values: np.ndarray, newton: int = 20) -> tuple[float, float]:
    """Argmin of the trigonometric interpolant of periodic samples on ``grid(n)``.

    A three-point parabola gives the first correction; Newton on the
    interpolant's derivative finishes it.  Ties go to the leftmost sample.
    """
    n = values.size
    h = spectral.TWO_PI / n
    x = spectral.grid(n)
    i = int(np.argmin(values))
    fm, f0, fp = values[i - 1], values[i], values[(i + 1) % n]
    curv = fm - 2.0 * f0 + fp
    off = 0.5 * (fm - fp) / curv if curv > 0 else 0.0
    xm = x[i] + float(np.clip(off, -0.5, 0.5)) * h
    for _ in range(newton):
        d1 = spectral.evaluate(values, np.array([xm]), 1)[0]
        d2 = spectral.evaluate(values, np.array([xm]), 2)[0]
        if d2 <= 0:
            break
        step = d1 / d2
        xm_new = float(np.clip(xm - step, x[i] - h, x[i] + h))
        if abs(xm_new - xm) < 1e-15:
            xm = xm_new
            break
        xm = xm_new
    return xm, float(spectral.evaluate(values, np.array([xm]))[0])


def snapshot_minimum(ls: LabelState) -> SnapshotMinimum:
    x, v = refine_argmin(ls.eta_x)
    d = spectral.evaluate(ls.d, np.array([x]))[0]
    return SnapshotMinimum(ls.t, x, v, x + d, uniqueness_margin(ls.eta_x))


# }}}

# {{{ detection


@dataclass
class BlowupReport:
    T_star: float
    x_star: float
    xi_star: float
    t_stop: float
    fit: dict
    checks: dict[str, Check]
    eps: float | None = None
    mu: float | None = None
    tail: dict = field(default_factory=dict, repr=False)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def to_dict(self) -> dict:
        out = {k: v for k, v in asdict(self).items() if k not in ("checks", "tail")}
        out["checks"] = {k: {**asdict(c), "margin": c.margin} for k, c in self.checks.items()}
        out["passed"] = self.passed
        return out


def _dense_tail(trajectory: Trajectory, dense_below: float | None):
    if dense_below is None:
        dense_below = trajectory.config.get("solver", {}).get("dense_below", 0.1)
    pairs = [(s, snapshot_minimum(s.lagrangian())) for s in trajectory.snapshots]
    return [p for p in pairs if p[1].value <= dense_below]


def _root_near(coef: np.ndarray, guess: float) -> float:
    roots = np.roots(coef)
    real = roots[np.abs(roots.imag) < 1e-9 * max(1.0, abs(guess))].real
    real = real[real > 0]
    if real.size == 0:
        raise AmbiguousBlowup("extrapolated min eta_x never reaches zero")
    return float(real[np.argmin(np.abs(real - guess))])


@dataclass
class TailFit:
    coef: np.ndarray        # polynomial in t - t_ref, highest power first
    linear: np.ndarray      # straight line through the last min_tail points
    root: float             # zero crossing, relative to t_ref
    residual: float         # rms residual over the range of the data

    def at(self, s) -> np.ndarray:
        return np.polyval(self.coef, s)


def fit_tail(s: np.ndarray, v: np.ndarray, degree: int = 4, min_tail: int = 8,
             residual_tol: float = 1e-3) -> TailFit:
    """Polynomial fit of a decreasing series and its zero crossing nearest the straight-line guess."""
    s = np.asarray(s, dtype=float)
    v = np.asarray(v, dtype=float)
    if s.size < max(min_tail, degree + 1):
        raise AmbiguousBlowup(f"only {s.size} densified snapshots; need {max(min_tail, degree + 1)}")
    if np.any(np.diff(v) >= 0):
        raise AmbiguousBlowup("min eta_x is not decreasing over the densified tail")
    lin = np.polyfit(s[-min_tail:], v[-min_tail:], 1)
    guess = -lin[1] / lin[0]
    coef = np.polyfit(s, v, degree)
    resid = v - np.polyval(coef, s)
    rel = float(np.sqrt(np.mean(resid ** 2)) / max(np.ptp(v), 1e-300))
    if rel > residual_tol:
        raise AmbiguousBlowup(f"tail fit residual {rel:.3g} above {residual_tol:.3g}")
    root = guess if degree == 1 else _root_near(coef, guess)
    return TailFit(coef, lin, float(root), rel)


def detect_blowup(trajectory: Trajectory, params=None, degree: int = 4, min_tail: int = 8,
                  dense_below: float | None = None, residual_tol: float = 1e-3,
                  scale_const: float = 10.0, eta_xx_tol: float = 1e-3,
                  margin_tol: float = 1e-6) -> BlowupReport:
    """Extrapolate ``min eta_x`` over the densified tail to zero.

    The tail fit is a polynomial of ``degree`` in ``t``; the same fit carries
    the refined argmin label and its image to ``T*``.  Raises
    :class:`AmbiguousBlowup` when the tail is not monotone, the fit is poor,
    or another local minimum of ``eta_x`` competes with the lowest one.
    """
    params = params if params is not None else trajectory.params
    pairs = _dense_tail(trajectory, dense_below)
    tail = [m for _, m in pairs]
    if len(tail) < min_tail:
        raise AmbiguousBlowup(f"only {len(tail)} densified snapshots; need {min_tail}")
    t = np.array([m.t for m in tail])
    v = np.array([m.value for m in tail])
    xs = np.array([m.x for m in tail])
    xis = np.array([m.xi for m in tail])
    t_stop = float(trajectory.t_stop)
    s = t - t_stop
    tf = fit_tail(s, v, degree, min_tail, residual_tol)
    coef, lin, ds, rel = tf.coef, tf.linear, tf.root, tf.residual
    guess = -lin[1] / lin[0]
    T = t_stop + ds
    x_star = float(np.polyval(np.polyfit(s, xs, degree), ds))
    xi_star = float(np.polyval(np.polyfit(s, xis, degree), ds))
    margin = tail[-1].margin
    if margin <= margin_tol:
        raise AmbiguousBlowup(f"competing minima of eta_x: margin {margin:.3g}")

    slope = float(np.polyval(np.polyder(coef), ds))
    fit = {"degree": degree, "coefficients": [float(c) for c in coef], "slope": slope,
           "intercept": float(np.polyval(coef, 0.0)), "residual": rel,
           "linear": {"slope": float(lin[0]), "intercept": float(lin[1]),
                      "T_star": t_stop + float(guess)}}

    checks = {"T* > t_stop": Check(bool(T > t_stop), T - t_stop, 0.0, "extrapolation gap"),
              "unique minimum": Check(bool(margin > margin_tol), -margin, -margin_tol,
                                      "second-lowest local minimum gap at t_stop")}
    eps = mu = None
    if params is not None and trajectory.mode == "full":
        eps, mu = params.eps, params.mu
        checks["|T*| <~ eps^(1+mu)"] = _check(abs(T) / eps ** (1 + mu), scale_const)
        checks["|x*| <~ eps^(2+mu)"] = _check(abs(x_star) / eps ** (2 + mu), scale_const)
        # eta_xx at the fixed label x*, carried to T* by the same tail fit
        exx = np.array([spectral.evaluate(sn.lagrangian().eta_x, np.array([x_star]), 1)[0]
                        for sn, _ in pairs])
        exx_T = float(np.polyval(np.polyfit(s, exx, degree), ds))
        checks["eta_xx(x*,T*) ~ 0"] = _check(abs(exx_T) * eps ** 2, eta_xx_tol)
    return BlowupReport(T, x_star, xi_star, t_stop, fit, checks, eps, mu,
                        tail={"t": t, "min_eta_x": v, "x": xs, "xi": xis})


# }}}

# {{{ structure of eta_x near the blowup label


@dataclass
class StructureReport:
    c: float
    C: float
    A: float
    center_ok: bool
    lower_bounds: dict[str, float]
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def eta_x_structure_check(trajectory: Trajectory, report: BlowupReport, eps: float | None = None,
                          mu: float | None = None, samples: int = 81,
                          lower_floor: float = 0.05) -> StructureReport:
    """Fit the two-sided bound on ``eta_x`` for ``|x - x*| <= eps^2`` over the run.

    ``c`` is the largest constant for which the lower bound holds at every
    sample and ``C`` the smallest for the upper bound; both must come out
    positive.  Lower bounds on ``eta_x`` away from the blowup label are
    reported as ``min eta_x / scale`` for three band/scale pairings.
    """
    params = trajectory.params
    eps = eps if eps is not None else (params.eps if params is not None else 1.0)
    mu = mu if mu is not None else (params.mu if params is not None else 0.0)
    T, xs = report.T_star, report.x_star
    t0 = trajectory.initial.t
    s = np.linspace(-1.0, 1.0, samples)
    x = xs + eps ** 2 * s
    off = np.abs(s) > 0
    c_vals, C_vals, A_vals = [], [], []
    center_ok = True
    lows = {"eps^(mu/2) on eps^2<=|x|<=eps^1.5": np.inf,
            "eps on eps^2<=|x|<=eps^1.5": np.inf,
            "eps^(mu/2) on |x|>=eps^1.5": np.inf}
    for snap in trajectory.snapshots:
        t = snap.t
        if t >= T:
            break
        ls = snap.lagrangian()
        e = spectral.evaluate(ls.eta_x, x)
        base_lo = (T - t) / (2.0 * eps)
        base_hi = 3.0 * (T - t) / (2.0 * eps)
        i0 = samples // 2
        center_ok &= bool(base_lo <= e[i0] <= base_hi)
        q = (x[off] - xs) ** 2
        if t > t0:
            c_vals.append(np.min((e[off] - base_lo) / ((t - t0) * eps ** -4 * q)))
        C_vals.append(np.max((e[off] - base_hi) / (eps ** -3 * q)))
        exx = spectral.evaluate(ls.eta_x, np.array([xs]), 1)[0]
        A_vals.append(abs(exx) * eps ** 2 / (T - t))
        if t >= -0.5 * eps or params is None:
            lab = ls.x
            band = (np.abs(lab) >= eps ** 2) & (np.abs(lab) <= eps ** 1.5)
            outer = np.abs(lab) >= eps ** 1.5
            if band.any():
                m = ls.eta_x[band].min()
                lows["eps^(mu/2) on eps^2<=|x|<=eps^1.5"] = min(lows["eps^(mu/2) on eps^2<=|x|<=eps^1.5"], m / eps ** (mu / 2))
                lows["eps on eps^2<=|x|<=eps^1.5"] = min(lows["eps on eps^2<=|x|<=eps^1.5"], m / eps)
            if outer.any():
                m = ls.eta_x[outer].min()
                lows["eps^(mu/2) on |x|>=eps^1.5"] = min(lows["eps^(mu/2) on |x|>=eps^1.5"], m / eps ** (mu / 2))
    c = float(min(c_vals)) if c_vals else float("nan")
    C = float(max(max(C_vals), 0.0)) if C_vals else float("nan")
    A = float(max(A_vals)) if A_vals else float("nan")
    lows = {k: float(v) for k, v in lows.items()}
    passed = bool(center_ok and c > 0 and np.isfinite(C))
    detail = {"lower_floor": lower_floor,
              "lower_passed": {k: bool(v >= lower_floor) for k, v in lows.items()}}
    return StructureReport(c, C, A, center_ok, lows, passed, detail)


# }}}
