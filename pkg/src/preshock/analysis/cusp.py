"""Fractional expansion of the fields at the blowup time.

Everything is fitted on the label side, where ``f o eta`` and ``eta`` are
polynomials in ``x - x*`` to high order, and only then pushed to the angle
through the cubic-root inversion of ``eta``.
"""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field

import numpy as np

from .. import spectral
from ..solver.state import LabelState, Trajectory
from .blowup import BlowupReport, snapshot_minimum

FIELDS = ("w", "z", "k", "a", "varpi")
# powers of (theta - xi*)^(1/3) carried by each expansion
POWERS = {"w": (0, 1, 2), "z": (0, 3, 4), "k": (0, 3, 4), "a": (0, 3, 4), "varpi": (0, 3)}


def label_profiles(ls: LabelState, x: np.ndarray) -> dict[str, np.ndarray]:
    """``eta`` and ``f o eta`` at labels ``x`` (specific vorticity included)."""
    d = spectral.evaluate(ls.d, x)
    w, z, k, a = (spectral.evaluate(ls.field(n), x) for n in ("w", "z", "k", "a"))
    ax = spectral.evaluate(ls.a, x, 1)
    e = spectral.evaluate(ls.eta_x, x)
    c = 0.5 * (w - z)
    varpi = 4.0 * (w + z - ax / e) * np.exp(k) / c ** 2
    return {"eta": x + d, "w": w, "z": z, "k": k, "a": a, "varpi": varpi}


def fractional_coefficients(taylor: dict[str, list[float]], a3: float, a4: float) -> dict[str, dict[str, float]]:
    """Coefficients of the expansions in ``(theta - xi*)^(j/3)`` from label Taylor data."""
    r = np.cbrt(a3)
    out = {}
    B = taylor["w"]
    out["w"] = {"0": B[0], "1": B[1] / r, "2": B[2] / r ** 2 - a4 * B[1] / (3.0 * r ** 5)}
    for name in ("z", "k", "a"):
        B = taylor[name]
        out[name] = {"0": B[0], "3": B[3] / a3, "4": B[4] / r ** 4 - a4 * B[3] / r ** 7}
    B = taylor["varpi"]
    out["varpi"] = {"0": B[0], "3": B[3] / a3}
    return {k: {j: float(v) for j, v in d.items()} for k, d in out.items()}


@dataclass
class CuspExpansion:
    a3: float
    a4: float
    a5: float
    taylor: dict[str, list[float]]
    frac: dict[str, dict[str, float]]
    window: float
    T_star: float
    x_star: float
    xi_star: float
    eps: float
    mu: float
    gamma2: float
    label_radius: float
    diagnostics: dict = field(default_factory=dict)

    def evaluate(self, name: str, u) -> np.ndarray:
        """Truncated expansion of field ``name`` at ``u = theta - xi*``."""
        u = np.asarray(u, dtype=float)
        r = np.cbrt(u)
        a = self.frac[name]
        total = np.zeros_like(u)
        for j in POWERS[name]:
            total = total + a[str(j)] * r ** j
        return total

    def remainder_scale(self, name: str, u) -> np.ndarray:
        """Size of the neglected terms (up to a constant) at ``u = theta - xi*``."""
        au = np.abs(np.asarray(u, dtype=float))
        eps, mu = self.eps, self.mu
        if name == "w":
            return au / eps
        if name == "z":
            return eps ** (mu - 2.0) * au ** (5.0 / 3.0)
        if name == "k":
            return eps ** (min(self.gamma2, mu) - 1.0) * au ** (5.0 / 3.0)
        if name == "a":
            return au ** (5.0 / 3.0) / eps
        if name == "varpi":
            return au ** (4.0 / 3.0) / eps
        raise KeyError(name)

    def magnitude_ratios(self) -> dict[str, float]:
        """``|coefficient| / stated size`` for each bounded coefficient."""
        eps, mu = self.eps, self.mu
        sizes = {("w", "0"): 1.0, ("w", "1"): 1.0, ("w", "2"): 1.0,
                 ("z", "0"): 1.0, ("z", "3"): eps ** (mu - 1), ("z", "4"): eps ** (mu - 1),
                 ("k", "0"): 1.0, ("k", "3"): eps ** mu,
                 ("a", "0"): 1.0, ("a", "3"): 1.0, ("a", "4"): 1.0,
                 ("varpi", "0"): 1.0, ("varpi", "3"): 1.0 / eps}
        return {f"{f}_{j}": abs(self.frac[f][j]) / s for (f, j), s in sizes.items()}

    def to_dict(self) -> dict:
        out = asdict(self)
        out["magnitude_ratios"] = self.magnitude_ratios()
        return out


class IllConditionedFit(ValueError):
    pass


def _fit_snapshot(ls: LabelState, x0: float, radius: float, degree: int, nodes: int, cond_cap: float):
    s = np.cos(np.pi * (np.arange(nodes) + 0.5) / nodes)
    V = np.vander(s, degree + 1, increasing=True)
    cond = float(np.linalg.cond(V))
    if cond > cond_cap:
        raise IllConditionedFit(f"fit condition number {cond:.3g} above {cond_cap:.3g}")
    prof = label_profiles(ls, x0 + radius * s)
    scale = radius ** np.arange(degree + 1)
    coef, resid = {}, {}
    for name, vals in prof.items():
        c, *_ = np.linalg.lstsq(V, vals, rcond=None)
        resid[name] = float(np.max(np.abs(V @ c - vals)))
        coef[name] = c / scale
    return coef, resid, cond


def _extrapolate(times: np.ndarray, values: np.ndarray, t: float, degree: int) -> np.ndarray:
    deg = min(degree, len(times) - 1)
    p = np.polyfit(times - t, values, deg)
    return p[-1]


def fit_cusp(trajectory: Trajectory, report: BlowupReport, n_snapshots: int = 8,
             degree: int = 9, nodes: int = 48, window_scale: float = 1.0,
             extrap_degree: int = 3, cond_cap: float = 1e6) -> CuspExpansion:
    """Taylor data of ``eta`` and ``f o eta`` at ``T*`` and the fractional coefficients.

    For each of the last ``n_snapshots`` tail snapshots the label profiles are
    fitted by least squares on ``|x - x*(t)| <= window_scale * eps^2``; each
    coefficient is then carried to ``T*`` by a polynomial in time.
    """
    params = trajectory.params
    if params is None:
        raise ValueError("cusp fitting needs the run parameters")
    eps, mu = params.eps, params.mu
    snaps = [s for s in trajectory.snapshots if s.t <= report.T_star][-n_snapshots:]
    radius = window_scale * eps ** 2

    def run(radius):
        rows, resid, conds, times = [], [], [], []
        for snap in snaps:
            ls = snap.lagrangian()
            m = snapshot_minimum(ls)
            c, r, cond = _fit_snapshot(ls, m.x, radius, degree, nodes, cond_cap)
            rows.append(c)
            resid.append(r)
            conds.append(cond)
            times.append(snap.t)
        return rows, resid, conds, np.array(times)

    try:
        rows, resid, conds, times = run(radius)
    except IllConditionedFit:
        # one retry on a wider window before giving up
        radius *= 2.0
        rows, resid, conds, times = run(radius)

    at_T = {}
    for name in rows[0]:
        stack = np.array([r[name] for r in rows])
        at_T[name] = _extrapolate(times, stack, report.T_star, extrap_degree)
    eta = at_T["eta"]
    a3, a4, a5 = float(eta[3]), float(eta[4]), float(eta[5])
    taylor = {name: [float(v) for v in at_T[name][:5]] for name in FIELDS}
    frac = fractional_coefficients(taylor, a3, a4)

    # the same Taylor data straight from spectral derivatives at the last snapshot
    last = snaps[-1].lagrangian()
    xm = snapshot_minimum(last).x
    fact = np.array([1.0, 1.0, 2.0, 6.0, 24.0])
    spec_eta = np.array([spectral.evaluate(last.d, np.array([xm]), j)[0] for j in range(5)]) / fact
    fit_eta = np.array([r["eta"] for r in rows])[-1][:5].copy()
    fit_eta[0] -= xm
    fit_eta[1] -= 1.0
    spectral_gap = float(np.max(np.abs(fit_eta[2:] - spec_eta[2:]) / np.abs(spec_eta[3])))

    hi = a3 * radius ** 3 + a4 * radius ** 4
    lo = a3 * radius ** 3 - a4 * radius ** 4
    window = float(min(abs(hi), abs(lo)))
    B = {name: at_T[name] for name in ("z", "k", "a", "varpi")}
    low_order = {f"{n}_{j}": float(abs(B[n][j]) * radius ** j / max(abs(B[n][3]) * radius ** 3, 1e-300))
                 for n in B for j in (1, 2)}
    diagnostics = {
        "condition": float(max(conds)), "fit_residual": {k: max(r[k] for r in resid) for k in resid[0]},
        "eta_low_order": {"b1": float(eta[1]), "b2": float(eta[2])},
        "low_order_relative": low_order, "spectral_gap_eta": spectral_gap,
        "snapshot_times": times.tolist(), "extrap_degree": extrap_degree,
    }
    return CuspExpansion(a3, a4, a5, taylor, frac, window, report.T_star,
                         float(_extrapolate(times, np.array([snapshot_minimum(s.lagrangian()).x for s in snaps]),
                                            report.T_star, extrap_degree)),
                         float(eta[0]), eps, mu, float(params.k_decay[2]), radius, diagnostics)


# {{{ reconstruction against the solver


def label_state_at(trajectory: Trajectory, t: float, n_snapshots: int = 8, degree: int = 3) -> LabelState:
    """Label arrays carried to time ``t`` by a per-label polynomial in time."""
    snaps = [s for s in trajectory.snapshots if s.t <= t][-n_snapshots:]
    states = [s.lagrangian() for s in snaps]
    times = np.array([s.t for s in states])
    out = {}
    for name in ("d", "eta_x", "w", "z", "k", "a"):
        stack = np.array([ls.field(name) for ls in states])
        out[name] = _extrapolate(times, stack, t, degree)
    return LabelState(t, states[-1].x.copy(), out["d"], out["eta_x"], out["w"], out["z"], out["k"], out["a"])


def profiles_at(trajectory: Trajectory, t: float, x: np.ndarray, n_snapshots: int = 8,
                degree: int = 3) -> dict[str, np.ndarray]:
    """:func:`label_profiles` at fixed labels, carried to time ``t``.

    Extrapolating the composed profiles (rather than their ingredients)
    keeps the specific vorticity well conditioned where ``eta_x`` vanishes.
    """
    snaps = [s for s in trajectory.snapshots if s.t <= t][-n_snapshots:]
    times = np.array([s.t for s in snaps])
    rows = [label_profiles(s.lagrangian(), x) for s in snaps]
    return {name: _extrapolate(times, np.array([r[name] for r in rows]), t, degree) for name in rows[0]}


@dataclass
class ErrorProfile:
    theta: np.ndarray
    u: np.ndarray
    fields: dict[str, dict[str, np.ndarray]]
    summary: dict[str, dict[str, float]]

    def to_dict(self) -> dict:
        return {"summary": self.summary, "points": int(self.theta.size)}

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["theta", "field", "solver", "reconstruction", "remainder", "normalized"])
            for name, d in self.fields.items():
                for i in range(self.theta.size):
                    out.writerow([f"{self.theta[i]:.17g}", name, f"{d['solver'][i]:.17g}",
                                  f"{d['recon'][i]:.17g}", f"{d['remainder'][i]:.17g}",
                                  f"{d['normalized'][i]:.17g}"])


def reconstruct_and_compare(expansion: CuspExpansion, trajectory: Trajectory, report: BlowupReport,
                            samples: int = 40, inner: float = 0.05, min_cells: int = 8) -> ErrorProfile:
    """Expansion versus the solver fields at ``T*`` across the window.

    Points are placed at labels ``x* + r s`` with ``inner <= |s| <= 1`` on both
    sides, so ``theta = eta(x, T*)`` needs no inversion.  Solver values at
    ``T*`` come from :func:`profiles_at`.
    """
    h = spectral.TWO_PI / trajectory.final.lagrangian().n
    r = expansion.label_radius
    if 2.0 * r < min_cells * h:
        raise ValueError(f"window of {2 * r / h:.1f} label cells is smaller than {min_cells}")
    s = np.logspace(np.log10(inner), 0.0, samples)
    s = np.concatenate([-s[::-1], s])
    prof = profiles_at(trajectory, expansion.T_star, expansion.x_star + r * s)
    theta = prof["eta"]
    u = theta - expansion.xi_star
    fields, summary = {}, {}
    for name in FIELDS:
        recon = expansion.evaluate(name, u)
        rem = prof[name] - recon
        norm = np.abs(rem) / expansion.remainder_scale(name, u)
        fields[name] = {"solver": prof[name], "recon": recon, "remainder": rem, "normalized": norm}
        summary[name] = {"max_remainder": float(np.max(np.abs(rem))),
                         "max_normalized": float(np.max(norm))}
    return ErrorProfile(theta, u, fields, summary)


# }}}
