"""Azimuthal Euler system in Riemann variables (adiabatic exponent 2, rescaled time).

Unknowns on the circle are the Riemann variables ``w = b + c`` and
``z = b - c`` (``b`` the azimuthal velocity profile, ``c`` the rescaled sound
speed), the entropy ``k`` and the radial velocity profile ``a``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import spectral

# {{{ parameters


def default_exponents(mu: float) -> tuple[float, ...]:
    """Smallest admissible decay exponents: ``(a_0..a_5, z_0..z_5, k_0..k_5)``."""
    a = (0.0, 0.0) + tuple(mu + 1.0 - j for j in range(2, 6))
    z = (0.0,) + tuple(mu - j for j in range(1, 6))
    k = (0.0, mu) + tuple(mu - j for j in range(2, 6))
    return tuple(min(v, 1.0) for v in a + z + k)


def exponent_violations(exponents: Sequence[float], mu: float, tol: float = 1e-12) -> list[str]:
    """Human-readable list of violated exponent constraints (empty when admissible)."""
    e = np.asarray(exponents, dtype=float)
    if e.shape != (18,):
        return [f"expected 18 exponents, got {e.size}"]
    a, z, k = e[:6], e[6:12], e[12:]
    bad = []

    def need(ok: bool, msg: str) -> None:
        if not ok:
            bad.append(msg)

    need(abs(a[0]) <= tol and abs(z[0]) <= tol and abs(k[0]) <= tol, "zeroth exponents must be 0")
    need(abs(a[1]) <= tol, "a_1 must be 0")
    need(z[1] <= tol, "z_1 must be <= 0")
    need(k[1] >= mu - tol, f"k_1 = {k[1]} < mu")
    for j in range(1, 6):
        need(z[j] >= mu - j - tol, f"z_{j} = {z[j]} < mu - {j}")
    for j in range(2, 6):
        need(a[j] >= mu + 1 - j - tol, f"a_{j} = {a[j]} < mu + 1 - {j}")
        need(k[j] >= mu - j - tol, f"k_{j} = {k[j]} < mu - {j}")
    need(bool(np.all(e <= 1.0 + tol)), "exponents must be <= 1")
    return bad


@dataclass(frozen=True)
class Params:
    """Small parameter, data-class margin and grid size for one experiment."""

    eps: float
    mu: float = 0.25
    gamma: float = 2.0
    exponents: tuple[float, ...] | None = None
    n_grid: int = 1024

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if self.gamma != 2.0:
            raise ValueError(f"only gamma = 2 is supported, got {self.gamma}")
        if self.n_grid < 8 or self.n_grid % 2:
            raise ValueError(f"n_grid must be even and >= 8, got {self.n_grid}")
        if self.exponents is None:
            object.__setattr__(self, "exponents", default_exponents(self.mu))
        else:
            object.__setattr__(self, "exponents", tuple(float(v) for v in self.exponents))
        bad = exponent_violations(self.exponents, self.mu)
        if bad:
            raise ValueError("inadmissible exponents: " + "; ".join(bad))

    @property
    def a_decay(self) -> tuple[float, ...]:
        return self.exponents[:6]

    @property
    def z_decay(self) -> tuple[float, ...]:
        return self.exponents[6:12]

    @property
    def k_decay(self) -> tuple[float, ...]:
        return self.exponents[12:]

    def with_(self, **kw) -> "Params":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        return {
            "eps": self.eps,
            "mu": self.mu,
            "gamma": self.gamma,
            "exponents": list(self.exponents),
            "n_grid": self.n_grid,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Params":
        return cls(
            eps=float(d["eps"]),
            mu=float(d.get("mu", 0.25)),
            gamma=float(d.get("gamma", 2.0)),
            exponents=d.get("exponents"),
            n_grid=int(d.get("n_grid", 1024)),
        )


# }}}

# {{{ state


class DegenerateStateError(ValueError):
    """Sound speed ``c = (w - z)/2`` is not positive somewhere."""

    def __init__(self, index: int, value: float):
        self.index = index
        self.value = value
        super().__init__(f"degenerate state: c = {value:.6g} <= 0 at grid index {index}")


@dataclass
class StateField:
    """Periodic samples of ``(w, z, k, a)`` at time ``t`` on :func:`spectral.grid`."""

    t: float
    w: np.ndarray
    z: np.ndarray
    k: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        arrs = [np.asarray(v, dtype=float) for v in (self.w, self.z, self.k, self.a)]
        n = arrs[0].shape
        if any(v.shape != n for v in arrs) or len(n) != 1:
            raise ValueError("w, z, k, a must be 1-d arrays of equal length")
        self.w, self.z, self.k, self.a = arrs
        self.t = float(self.t)

    @property
    def n(self) -> int:
        return self.w.size

    @property
    def theta(self) -> np.ndarray:
        return spectral.grid(self.n)

    @property
    def b(self) -> np.ndarray:
        return 0.5 * (self.w + self.z)

    @property
    def c(self) -> np.ndarray:
        return 0.5 * (self.w - self.z)

    @property
    def degenerate(self) -> bool:
        return bool(np.any(~(self.c > 0)))

    def check_hyperbolic(self) -> None:
        bad = np.flatnonzero(~(self.c > 0))
        if bad.size:
            i = int(bad[0])
            raise DegenerateStateError(i, float(self.c[i]))

    def stacked(self) -> np.ndarray:
        return np.stack([self.w, self.z, self.k, self.a])

    @classmethod
    def from_stacked(cls, t: float, u: np.ndarray) -> "StateField":
        return cls(t, u[0].copy(), u[1].copy(), u[2].copy(), u[3].copy())

    def copy(self) -> "StateField":
        return StateField(self.t, self.w.copy(), self.z.copy(), self.k.copy(), self.a.copy())


@dataclass
class Tendency:
    dw: np.ndarray
    dz: np.ndarray
    dk: np.ndarray
    da: np.ndarray

    def stacked(self) -> np.ndarray:
        return np.stack([self.dw, self.dz, self.dk, self.da])


# }}}

# {{{ transforms and speeds


def riemann_from_primitive(b, c):
    """``(b, c) -> (w, z) = (b + c, b - c)``."""
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    if b.shape != c.shape:
        raise ValueError(f"shape mismatch: b {b.shape} vs c {c.shape}")
    return b + c, b - c


def primitive_from_riemann(w, z):
    """``(w, z) -> (b, c) = ((w + z)/2, (w - z)/2)``."""
    w = np.asarray(w, dtype=float)
    z = np.asarray(z, dtype=float)
    if w.shape != z.shape:
        raise ValueError(f"shape mismatch: w {w.shape} vs z {z.shape}")
    return 0.5 * (w + z), 0.5 * (w - z)


def wave_speeds(w, z):
    """Slow, middle and fast characteristic speeds."""
    w = np.asarray(w, dtype=float)
    z = np.asarray(z, dtype=float)
    return w / 3.0 + z, 2.0 * (w + z) / 3.0, w + z / 3.0


# }}}

# {{{ right-hand side


def source_terms(w, z, k_theta, a):
    """Non-transport parts of the tendencies, shared by every discretization."""
    jump2 = (w - z) ** 2
    coupling = jump2 * k_theta / 24.0
    sw = -(8.0 / 3.0) * a * w + coupling
    sz = -(8.0 / 3.0) * a * z + coupling
    sa = -(4.0 / 3.0) * a * a + (w + z) ** 2 / 3.0 - jump2 / 6.0
    return sw, sz, sa


def rhs(state: StateField, dealias: bool = True) -> Tendency:
    """Time derivative of ``(w, z, k, a)`` with spectral derivatives.

    With ``dealias`` the inputs and the result are truncated to the lower
    two thirds of the spectrum.
    """
    state.check_hyperbolic()
    u = state.stacked()
    n = state.n
    if dealias:
        mask = spectral.two_thirds_mask(n)
        uh = np.fft.rfft(u, axis=-1) * mask
        u = np.fft.irfft(uh, n=n, axis=-1)
    else:
        uh = np.fft.rfft(u, axis=-1)
    ik = 1j * spectral.wavenumbers(n)
    ik[-1] = 0.0
    ux = np.fft.irfft(uh * ik, n=n, axis=-1)
    w, z, k, a = u
    wx, zx, kx, ax = ux
    l1, l2, l3 = wave_speeds(w, z)
    sw, sz, sa = source_terms(w, z, kx, a)
    out = np.stack([
        -l3 * wx + sw,
        -l1 * zx + sz,
        -l2 * kx,
        -l2 * ax + sa,
    ])
    if dealias:
        out = np.fft.irfft(np.fft.rfft(out, axis=-1) * mask, n=n, axis=-1)
    return Tendency(*out)


# }}}

# {{{ derived fields


def diff_riemann(state: StateField):
    """Differentiated Riemann variables ``(q^w, q^z)``."""
    wx, zx, kx = (spectral.derivative(f) for f in (state.w, state.z, state.k))
    c = state.c
    return wx - 0.25 * c * kx, zx + 0.25 * c * kx


def specific_vorticity(state: StateField) -> np.ndarray:
    """``4 (w + z - a_theta) c^-2 e^k``; requires ``c > 0``."""
    state.check_hyperbolic()
    ax = spectral.derivative(state.a)
    return 4.0 * (state.w + state.z - ax) * np.exp(state.k) / state.c ** 2


def polar_reconstruction(state: StateField, r: float):
    """Physical profiles ``(u_r, u_theta, sigma, S)`` on the circle of radius ``r``."""
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r}")
    b, c = primitive_from_riemann(state.w, state.z)
    return r * state.a, r * b, r * c, state.k.copy()


# }}}
