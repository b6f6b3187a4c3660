"""Characteristic-label scheme: everything is carried along the fast flow ``eta``.

Unknowns on a uniform label grid are the displacement ``d = eta - x`` and
``W, Z, K, A = (w, z, k, a) o eta``.  Composing the system with ``eta`` gives

    d_t = W + Z/3
    W_t = -8/3 A W + (W - Z)^2 K_x / (24 E)
    Z_t = 2/3 (W - Z) Z_x / E - 8/3 A Z + (W - Z)^2 K_x / (24 E)
    K_t = 1/3 (W - Z) K_x / E
    A_t = 1/3 (W - Z) A_x / E - 4/3 A^2 + (W + Z)^2/3 - (W - Z)^2/6

with ``E = eta_x = 1 + d_x``.  These label functions stay smooth up to the
first time ``E`` vanishes, while angular gradients diverge there.  The slow
and middle flows are tracked through the ``eta``-label ``Y`` they currently
sit on: ``Y_t = (lambda - lambda_3) o eta(Y) / E(Y)``.
"""

from __future__ import annotations

import numpy as np

from .. import spectral
from ..euler_core import DegenerateStateError, StateField, source_terms
from .common import Layout, evaluator, integral_rates, speeds_and_slopes
from .state import INTEGRALS, FlowState, LabelState, Snapshot

LABEL_FIELDS = ("d", "W", "Z", "K", "A")


class LabelScheme:
    name = "labels"

    def __init__(self, n: int, stride: int = 1, interp: str = "fast",
                 filter_strength: float = 36.0, filter_order: int = 36):
        self.n = n
        self.mode = "full"
        self.stride = stride
        self.interp = interp
        self.x = spectral.grid(n)
        self.idx = np.arange(stride - 1, n, stride)
        self.labels = self.x[self.idx]
        m = self.labels.size
        self.m = m
        ik = 1j * spectral.wavenumbers(n)
        ik[-1] = 0.0
        self.ik = ik
        self.sigma = spectral.exponential_filter(n, filter_strength, filter_order)
        blocks = [(name, n) for name in LABEL_FIELDS]
        blocks += [("Ypsi", m), ("Yphi", m), ("psi_x", m), ("phi_x", m)]
        blocks += [(name, m) for name in INTEGRALS]
        self.layout = Layout(blocks)

    def initial(self, data: StateField) -> np.ndarray:
        if data.n != self.n:
            raise ValueError(f"data has {data.n} samples, scheme expects {self.n}")
        data.check_hyperbolic()
        flows = FlowState.identity(self.labels)
        parts = {"d": np.zeros(self.n), "W": data.w, "Z": data.z, "K": data.k, "A": data.a,
                 "Ypsi": flows.psi, "Yphi": flows.phi, "psi_x": flows.psi_x,
                 "phi_x": flows.phi_x}
        parts.update(flows.integrals)
        return self.layout.pack(parts)

    # {{{ tendency

    def _fields(self, v):
        u = np.stack([v[name] for name in LABEL_FIELDS])
        du = np.fft.irfft(np.fft.rfft(u, axis=-1) * self.ik, n=self.n, axis=-1)
        return u, du

    @staticmethod
    def _rows(W, Z, K, A, Wx, Zx, Kx, Ax, E):
        return np.stack([W, Z, K, A, Wx / E, Zx / E, Kx / E, Ax / E])

    def tendency(self, t: float, y: np.ndarray) -> np.ndarray:
        v = self.layout.view(y)
        u, du = self._fields(v)
        _, W, Z, K, A = u
        dx, Wx, Zx, Kx, Ax = du
        E = 1.0 + dx
        jump = W - Z
        if np.any(~(jump > 0)):
            i = int(np.flatnonzero(~(jump > 0))[0])
            raise DegenerateStateError(i, 0.5 * float(jump[i]))
        kth = Kx / E
        sw, sz, sa = source_terms(W, Z, kth, A)
        out = np.empty_like(y)
        o = self.layout.view(out)
        o["d"][:] = W + Z / 3.0
        o["W"][:] = sw
        o["Z"][:] = (2.0 / 3.0) * jump * Zx / E + sz
        o["K"][:] = (1.0 / 3.0) * jump * kth
        o["A"][:] = (1.0 / 3.0) * jump * Ax / E + sa

        s = self.idx
        e = self._rows(W[s], Z[s], K[s], A[s], Wx[s], Zx[s], Kx[s], Ax[s], E[s])
        ev = evaluator(np.stack([W, Z, K, A, Wx, Zx, Kx, Ax, E]), self.interp)
        pv, fv = ev(v["Ypsi"]), ev(v["Yphi"])
        p = self._rows(*pv)
        f = self._rows(*fv)
        o["Ypsi"][:] = -(2.0 / 3.0) * (pv[0] - pv[1]) / pv[8]
        o["Yphi"][:] = -(1.0 / 3.0) * (fv[0] - fv[1]) / fv[8]
        _, p_dl = speeds_and_slopes(p)
        _, f_dl = speeds_and_slopes(f)
        o["psi_x"][:] = p_dl[0] * v["psi_x"]
        o["phi_x"][:] = f_dl[1] * v["phi_x"]
        rates = integral_rates(e, p, f, v, E[s])
        for name in INTEGRALS:
            o[name][:] = rates[name]
        return out

    # }}}

    def post_step(self, y: np.ndarray) -> np.ndarray:
        v = self.layout.view(y)
        u = np.stack([v[name] for name in LABEL_FIELDS])
        u = np.fft.irfft(np.fft.rfft(u, axis=-1) * self.sigma, n=self.n, axis=-1)
        for name, arr in zip(LABEL_FIELDS, u):
            v[name][:] = arr
        return y

    def max_dt(self, y: np.ndarray, cfl: float) -> float:
        v = self.layout.view(y)
        u, du = self._fields(v)
        E = 1.0 + du[0]
        speed = np.max((2.0 / 3.0) * np.abs(u[1] - u[2]) / E)
        slope = np.max(np.abs(du[1] + du[2] / 3.0) / E)
        h = spectral.TWO_PI / self.n
        dt = cfl * h / max(speed, 1e-300)
        if slope > 0:
            dt = min(dt, 0.5 / slope)
        return float(dt)

    def min_eta_x(self, y: np.ndarray) -> tuple[float, float]:
        v = self.layout.view(y)
        E = 1.0 + spectral.derivative(v["d"])
        i = int(np.argmin(E))
        return float(E[i]), float(self.x[i])

    def monitors(self, t: float, y: np.ndarray) -> dict[str, float]:
        v = self.layout.view(y)
        u, du = self._fields(v)
        E = 1.0 + du[0]
        i = int(np.argmin(E))
        c = 0.5 * (u[1] - u[2])
        return {
            "t": t, "min_eta_x": float(E[i]), "argmin": float(self.x[i]),
            "dw": float(np.max(np.abs(du[1] / E))), "dz": float(np.max(np.abs(du[2] / E))),
            "dk": float(np.max(np.abs(du[3] / E))), "da": float(np.max(np.abs(du[4] / E))),
            "min_c": float(c.min()), "gap": float(u[2].max() - u[1].min()),
            "max_w": float(u[1].max()), "min_w": float(u[1].min()), "max_c": float(c.max()),
            "max_a": float(np.abs(u[4]).max()), "max_z": float(np.abs(u[2]).max()),
            "tail": max(spectral.tail_energy(u[j]) for j in range(5)),
        }

    def snapshot(self, t: float, y: np.ndarray) -> Snapshot:
        v = self.layout.view(y)
        u, du = self._fields(v)
        d, W, Z, K, A = (arr.copy() for arr in u)
        dx, Wx, Zx, Kx, Ax = du
        E = 1.0 + dx
        labels = LabelState(t, self.x.copy(), d, E.copy(), W, Z, K, A)
        s = self.idx
        ev = evaluator(np.stack([W, Z, K, A, Wx, Zx, Kx, Ax, E, d]), self.interp)
        Ypsi, Yphi = v["Ypsi"].copy(), v["Yphi"].copy()
        pv, fv = ev(Ypsi), ev(Yphi)
        flows = FlowState(
            labels=self.labels.copy(),
            eta=self.labels + d[s],
            eta_x=E[s].copy(),
            psi=Ypsi + pv[9],
            phi=Yphi + fv[9],
            psi_x=v["psi_x"].copy(),
            phi_x=v["phi_x"].copy(),
            integrals={name: v[name].copy() for name in INTEGRALS},
            along={
                "eta": self._rows(W[s], Z[s], K[s], A[s], Wx[s], Zx[s], Kx[s], Ax[s], E[s]),
                "psi": self._rows(*pv[:9]),
                "phi": self._rows(*fv[:9]),
            },
        )
        flows.integrals["Ypsi"] = Ypsi
        flows.integrals["Yphi"] = Yphi
        return Snapshot(t, flows, labels=labels)


# {{{ inversion of eta


class EtaInverse:
    """Solve ``eta(y) = theta`` for the label ``y`` (``eta`` strictly increasing)."""

    def __init__(self, ls: LabelState, factor: int = 8, p: int = 8):
        n = ls.n
        self.h = spectral.TWO_PI / n
        self.x0 = spectral.origin(n)
        e = 1.0 + spectral.derivative(ls.d)
        self.interp = spectral.PeriodicInterpolant(np.stack([ls.d, e]), factor=factor, p=p)
        m = n * factor
        self.hf = spectral.TWO_PI / m
        self.yf = self.x0 + np.arange(m + 1) * self.hf
        df = self.interp.fine[0]
        self.etaf = self.yf + np.append(df, df[0])
        if np.any(np.diff(self.etaf) <= 0):
            raise ValueError("eta is not monotone on the oversampled label grid")

    def eta(self, y):
        d, e = self.interp(y)
        return y + d, e

    def __call__(self, theta, iterations: int = 60) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        base = self.etaf[0]
        tq = base + np.mod(theta - base, spectral.TWO_PI)
        j = np.clip(np.searchsorted(self.etaf, tq, side="right") - 1, 0, self.yf.size - 2)
        lo = self.yf[j].copy()
        hi = self.yf[j + 1].copy()
        frac = (tq - self.etaf[j]) / (self.etaf[j + 1] - self.etaf[j])
        y = lo + frac * (hi - lo)
        for _ in range(iterations):
            g, e = self.eta(y)
            g = g - tq
            # keep the bracket so Newton cannot escape near vanishing slope
            lo = np.where(g < 0, y, lo)
            hi = np.where(g > 0, y, hi)
            step = g / e
            y_new = y - step
            bad = (y_new <= lo) | (y_new >= hi) | ~np.isfinite(y_new)
            y_new = np.where(bad, 0.5 * (lo + hi), y_new)
            if np.max(np.abs(y_new - y)) < 1e-15:
                y = y_new
                break
            y = y_new
        # shift back so that eta(y) equals theta on the cover
        return y + (theta - tq)


def reconstruct_eulerian(ls: LabelState, theta: np.ndarray) -> StateField:
    """Angular samples of ``(w, z, k, a)`` at ``theta`` from label data."""
    inv = EtaInverse(ls)
    y = inv(theta)
    vals = spectral.PeriodicInterpolant(np.stack([ls.w, ls.z, ls.k, ls.a]), factor=8, p=8)(y)
    return StateField(ls.t, *vals)


def field_at(ls: LabelState, theta: np.ndarray, names=("w", "z", "k", "a")) -> dict[str, np.ndarray]:
    """Evaluate label fields at angles ``theta`` (any points, not only a grid)."""
    y = EtaInverse(ls)(theta)
    vals = spectral.PeriodicInterpolant(np.stack([ls.field(k) for k in names]), factor=8, p=8)(y)
    return dict(zip(names, vals))


# }}}
