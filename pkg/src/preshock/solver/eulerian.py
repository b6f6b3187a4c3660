"""Pseudo-spectral scheme on the angular grid with co-integrated characteristic flows."""

from __future__ import annotations

import numpy as np

from .. import spectral
from ..euler_core import DegenerateStateError, StateField, source_terms
from .common import Layout, evaluator, integral_rates, speeds_and_slopes
from .state import INTEGRALS, FlowState, Snapshot


class EulerianScheme:
    """``(w, z, k, a)`` on ``grid(n)`` plus flows on every ``stride``-th node.

    ``mode="burgers"`` replaces the system by ``u_t + u u_theta = 0`` (``u``
    stored in the ``w`` slot) and tracks only the fast flow ``eta``.
    """

    name = "eulerian"

    def __init__(self, n: int, mode: str = "full", stride: int = 1, interp: str = "fast",
                 dealias: bool = True):
        if mode not in ("full", "burgers"):
            raise ValueError(f"unknown mode {mode!r}")
        self.n = n
        self.mode = mode
        self.stride = stride
        self.interp = interp
        self.dealias = dealias
        self.x = spectral.grid(n)
        self.labels = self.x[stride - 1::stride]
        m = self.labels.size
        self.m = m
        self.mask = spectral.two_thirds_mask(n)
        ik = 1j * spectral.wavenumbers(n)
        ik[-1] = 0.0
        self.ik = ik
        blocks = [("w", n), ("z", n), ("k", n), ("a", n), ("eta", m), ("eta_x", m)]
        if mode == "full":
            blocks += [("psi", m), ("phi", m), ("psi_x", m), ("phi_x", m)]
            blocks += [(name, m) for name in INTEGRALS]
        self.layout = Layout(blocks)

    # {{{ packing

    def pack(self, state: StateField, flows: FlowState) -> np.ndarray:
        parts = {"w": state.w, "z": state.z, "k": state.k, "a": state.a,
                 "eta": flows.eta, "eta_x": flows.eta_x}
        if self.mode == "full":
            parts.update(psi=flows.psi, phi=flows.phi, psi_x=flows.psi_x, phi_x=flows.phi_x)
            parts.update(flows.integrals)
        return self.layout.pack(parts)

    def initial(self, data: StateField) -> np.ndarray:
        flows = FlowState.identity(self.labels, burgers=self.mode == "burgers")
        return self.pack(data, flows)

    def unpack(self, t: float, y: np.ndarray, along: bool = True) -> tuple[StateField, FlowState]:
        v = self.layout.view(y)
        state = StateField(t, v["w"].copy(), v["z"].copy(), v["k"].copy(), v["a"].copy())
        if self.mode == "burgers":
            flows = FlowState(self.labels.copy(), v["eta"].copy(), v["eta_x"].copy())
        else:
            flows = FlowState(self.labels.copy(), v["eta"].copy(), v["eta_x"].copy(),
                              psi=v["psi"].copy(), phi=v["phi"].copy(),
                              psi_x=v["psi_x"].copy(), phi_x=v["phi_x"].copy(),
                              integrals={name: v[name].copy() for name in INTEGRALS})
        if along:
            ev = self._evaluator(v)
            flows.along = {"eta": ev(flows.eta)}
            if self.mode == "full":
                flows.along["psi"] = ev(flows.psi)
                flows.along["phi"] = ev(flows.phi)
        return state, flows

    # }}}

    # {{{ tendency

    def _fields(self, v):
        u = np.stack([v["w"], v["z"], v["k"], v["a"]])
        uh = np.fft.rfft(u, axis=-1)
        if self.dealias:
            uh = uh * self.mask
            u = np.fft.irfft(uh, n=self.n, axis=-1)
        du = np.fft.irfft(uh * self.ik, n=self.n, axis=-1)
        return u, du

    def _evaluator(self, v):
        u, du = self._fields(v)
        return evaluator(np.concatenate([u, du]), self.interp)

    def tendency(self, t: float, y: np.ndarray) -> np.ndarray:
        v = self.layout.view(y)
        u, du = self._fields(v)
        w, z, k, a = u
        wx, zx, kx, ax = du
        out = np.empty_like(y)
        o = self.layout.view(out)
        mask = self.mask if self.dealias else None

        if self.mode == "burgers":
            tend = -w * wx
            if mask is not None:
                tend = np.fft.irfft(np.fft.rfft(tend) * mask, n=self.n)
            o["w"][:] = tend
            o["z"][:] = 0.0
            o["k"][:] = 0.0
            o["a"][:] = 0.0
            ev = evaluator(np.stack([w, wx]), self.interp)(v["eta"])
            o["eta"][:] = ev[0]
            o["eta_x"][:] = ev[1] * v["eta_x"]
            return out

        if np.any(~(w - z > 0)):
            i = int(np.flatnonzero(~(w - z > 0))[0])
            raise DegenerateStateError(i, 0.5 * float(w[i] - z[i]))
        l1 = w / 3.0 + z
        l2 = 2.0 * (w + z) / 3.0
        l3 = w + z / 3.0
        sw, sz, sa = source_terms(w, z, kx, a)
        tend = np.stack([-l3 * wx + sw, -l1 * zx + sz, -l2 * kx, -l2 * ax + sa])
        if mask is not None:
            tend = np.fft.irfft(np.fft.rfft(tend, axis=-1) * mask, n=self.n, axis=-1)
        o["w"][:], o["z"][:], o["k"][:], o["a"][:] = tend

        ev = evaluator(np.concatenate([u, du]), self.interp)
        e, p, f = ev(v["eta"]), ev(v["psi"]), ev(v["phi"])
        (e_l, e_dl), (p_l, p_dl), (f_l, f_dl) = (speeds_and_slopes(q) for q in (e, p, f))
        o["eta"][:] = e_l[2]
        o["psi"][:] = p_l[0]
        o["phi"][:] = f_l[1]
        o["eta_x"][:] = e_dl[2] * v["eta_x"]
        o["psi_x"][:] = p_dl[0] * v["psi_x"]
        o["phi_x"][:] = f_dl[1] * v["phi_x"]
        rates = integral_rates(e, p, f, v, v["eta_x"])
        for name in INTEGRALS:
            o[name][:] = rates[name]
        return out

    # }}}

    def post_step(self, y: np.ndarray) -> np.ndarray:
        return y

    def max_dt(self, y: np.ndarray, cfl: float) -> float:
        v = self.layout.view(y)
        u, du = self._fields(v)
        if self.mode == "burgers":
            speed, slope = np.abs(u[0]).max(), np.abs(du[0]).max()
        else:
            speed = np.abs(u[0] + u[1] / 3.0).max()
            slope = np.abs(du[0] + du[1] / 3.0).max()
        h = spectral.TWO_PI / self.n
        dt = cfl * h / max(speed, 1e-300)
        if slope > 0:
            dt = min(dt, 0.5 / slope)
        return float(dt)

    def min_eta_x(self, y: np.ndarray) -> tuple[float, float]:
        v = self.layout.view(y)
        i = int(np.argmin(v["eta_x"]))
        return float(v["eta_x"][i]), float(self.labels[i])

    def monitors(self, t: float, y: np.ndarray) -> dict[str, float]:
        v = self.layout.view(y)
        u, du = self._fields(v)
        mn, arg = self.min_eta_x(y)
        c = 0.5 * (u[0] - u[1])
        return {
            "t": t, "min_eta_x": mn, "argmin": arg,
            "dw": float(np.abs(du[0]).max()), "dz": float(np.abs(du[1]).max()),
            "dk": float(np.abs(du[2]).max()), "da": float(np.abs(du[3]).max()),
            "min_c": float(c.min()), "gap": float(u[1].max() - u[0].min()),
            "max_w": float(u[0].max()), "min_w": float(u[0].min()), "max_c": float(c.max()),
            "max_a": float(np.abs(u[3]).max()), "max_z": float(np.abs(u[1]).max()),
            "tail": spectral.tail_energy(v["w"]),
        }

    def snapshot(self, t: float, y: np.ndarray) -> Snapshot:
        state, flows = self.unpack(t, y)
        return Snapshot(t, flows, state=state)

