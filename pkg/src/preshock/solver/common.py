"""Pieces shared by the two discretizations: packing, RK4, evaluators, flow rates."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .. import spectral
from .state import ROW


class Layout:
    """Named 1-d blocks of a flat state vector."""

    def __init__(self, blocks: list[tuple[str, int]]):
        self.names = [b[0] for b in blocks]
        self.slices = {}
        start = 0
        for name, size in blocks:
            self.slices[name] = slice(start, start + size)
            start += size
        self.size = start

    def pack(self, parts: dict[str, np.ndarray]) -> np.ndarray:
        y = np.empty(self.size)
        for name in self.names:
            y[self.slices[name]] = parts[name]
        return y

    def view(self, y: np.ndarray) -> dict[str, np.ndarray]:
        return {name: y[sl] for name, sl in self.slices.items()}


def rk4(f: Callable, t: float, y: np.ndarray, dt: float) -> np.ndarray:
    """One classical fourth-order Runge-Kutta step."""
    k1 = f(t, y)
    k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


class ExactEvaluator:
    """Trigonometric interpolation by direct summation (exact, ``O(N M)``)."""

    def __init__(self, fields: np.ndarray):
        fields = np.atleast_2d(fields)
        n = fields.shape[-1]
        c = spectral.coefficients(fields)
        weight = np.full(n // 2 + 1, 2.0)
        weight[0] = 1.0
        weight[-1] = 1.0
        self.coef = (c * weight).T      # (K, nf)
        self.k = spectral.wavenumbers(n)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        base = np.exp(1j * x)[:, None]
        # powers of exp(ix) by repeated products are cheaper than exp(ikx)
        e = np.empty((x.size, self.k.size), dtype=complex)
        e[:, 0] = 1.0
        if self.k.size > 1:
            e[:, 1:] = base
            np.cumprod(e[:, 1:], axis=1, out=e[:, 1:])
        return np.real(e @ self.coef).T


class FastEvaluator:
    """Spectral oversampling followed by local Lagrange interpolation."""

    def __init__(self, fields: np.ndarray, factor: int = 4, p: int = 8):
        self.interp = spectral.PeriodicInterpolant(fields, factor=factor, p=p)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.interp(x)


def evaluator(fields: np.ndarray, kind: str = "fast"):
    if kind == "exact":
        return ExactEvaluator(fields)
    if kind == "fast":
        return FastEvaluator(fields)
    raise ValueError(f"unknown interpolation kind {kind!r}")


def speeds_and_slopes(ev: np.ndarray):
    """Wave speeds and their angular derivatives from rows of ``ALONG``."""
    w, z = ev[ROW["w"]], ev[ROW["z"]]
    dw, dz = ev[ROW["dw"]], ev[ROW["dz"]]
    lam = (w / 3.0 + z, 2.0 * (w + z) / 3.0, w + z / 3.0)
    dlam = (dw / 3.0 + dz, 2.0 * (dw + dz) / 3.0, dw + dz / 3.0)
    return lam, dlam


def integral_rates(e: np.ndarray, p: np.ndarray, f: np.ndarray, v: dict[str, np.ndarray],
                   eta_x: np.ndarray) -> dict[str, np.ndarray]:
    """Integrands of every co-integrated quantity.

    ``e, p, f`` are ``ALONG`` rows composed with the fast, slow and middle
    flows; ``v`` holds current flow derivatives and integrals.
    """
    w, z, k, a, dw, dz, dk, da = e
    c = 0.5 * (w - z)
    inv_I = np.exp(-k / 8.0 + (8.0 / 3.0) * v["Ia_eta"])
    qz = dz + 0.25 * c * dk
    qw = dw - 0.25 * c * dk

    pw, pz, pk, pa, pdw, pdz, pdk, pda = p
    pc = 0.5 * (pw - pz)
    pqw = pdw - 0.25 * pc * pdk
    eG = np.exp(v["G_psi"])
    psi_x = v["psi_x"]

    fw, fz, fk, fa, fdw, fdz, fdk, fda = f
    fc = 0.5 * (fw - fz)
    Ifr = v["Ifrak"]

    return {
        "Ia_eta": a,
        "J38_qz": inv_I * eta_x * c * dk * qz,
        "J38_wa": inv_I * w * eta_x * da,
        "J39_qw": eta_x * qw,
        "J39_kc": eta_x * dk * c,
        "J39_z": eta_x * dz,
        "Jpsi": pdz - (4.0 / 3.0) * pa,
        "G_psi": (8.0 / 3.0) * pa + pc * pdk / 12.0,
        "J310_qw": eG * psi_x * pc * pdk * pqw,
        "J310_az": eG * psi_x * pda * pz,
        "Ia_phi": fa,
        "Ifrak": (8.0 / 3.0) * fa * Ifr,
        "D44": Ifr * fc * fc,
        "Lw_phi": np.abs(fdw),
    }

