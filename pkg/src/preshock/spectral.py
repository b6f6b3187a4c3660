"""Fourier tools for real periodic samples on the circle (-pi, pi].

Samples always live on the grid ``theta_i = -pi + 2*pi*(i + 1)/n`` so that
``theta = 0`` is a node whenever ``n`` is even.
"""

from __future__ import annotations

import numpy as np

TWO_PI = 2.0 * np.pi


def grid(n: int) -> np.ndarray:
    """Uniform periodic grid of ``n`` points on (-pi, pi]."""
    if n < 2:
        raise ValueError(f"grid needs at least 2 points, got {n}")
    return -np.pi + TWO_PI * np.arange(1, n + 1) / n


def origin(n: int) -> float:
    """First node of :func:`grid`."""
    return -np.pi + TWO_PI / n


def wavenumbers(n: int) -> np.ndarray:
    return np.arange(n // 2 + 1, dtype=float)


def _phase_to_grid(n: int) -> np.ndarray:
    # rfft assumes samples start at 0; ours start at origin(n)
    return np.exp(-1j * wavenumbers(n) * origin(n))


def coefficients(f: np.ndarray) -> np.ndarray:
    """Complex amplitudes ``c_k`` with ``f(x) = sum_k c_k exp(ikx)`` (k >= 0 half).

    The Nyquist coefficient is returned as-is; :func:`evaluate` treats it as a
    cosine so that the interpolant is real.
    """
    f = np.asarray(f, dtype=float)
    n = f.shape[-1]
    return np.fft.rfft(f, axis=-1) * _phase_to_grid(n) / n


def derivative(f: np.ndarray, order: int = 1) -> np.ndarray:
    """Spectral derivative of periodic samples along the last axis."""
    f = np.asarray(f, dtype=float)
    n = f.shape[-1]
    k = wavenumbers(n)
    fh = np.fft.rfft(f, axis=-1)
    mult = (1j * k) ** order
    if n % 2 == 0 and order % 2 == 1:
        mult[-1] = 0.0
    return np.fft.irfft(fh * mult, n=n, axis=-1)


def derivatives(f: np.ndarray, orders: tuple[int, ...]) -> list[np.ndarray]:
    """Several derivatives from one forward transform."""
    f = np.asarray(f, dtype=float)
    n = f.shape[-1]
    k = wavenumbers(n)
    fh = np.fft.rfft(f, axis=-1)
    out = []
    for order in orders:
        mult = (1j * k) ** order
        if n % 2 == 0 and order % 2 == 1:
            mult[-1] = 0.0
        out.append(np.fft.irfft(fh * mult, n=n, axis=-1))
    return out


def antiderivative(f: np.ndarray) -> np.ndarray:
    """Periodic antiderivative with zero mean; the mean of ``f`` must vanish."""
    f = np.asarray(f, dtype=float)
    n = f.shape[-1]
    k = wavenumbers(n)
    fh = np.fft.rfft(f, axis=-1)
    mult = np.zeros_like(k, dtype=complex)
    mult[1:] = 1.0 / (1j * k[1:])
    if n % 2 == 0:
        mult[-1] = 0.0
    return np.fft.irfft(fh * mult, n=n, axis=-1)


def two_thirds_mask(n: int) -> np.ndarray:
    k = wavenumbers(n)
    return (k < n / 3.0).astype(float)


def dealias(f: np.ndarray) -> np.ndarray:
    """Zero the upper third of the spectrum (2/3 rule)."""
    f = np.asarray(f, dtype=float)
    n = f.shape[-1]
    return np.fft.irfft(np.fft.rfft(f, axis=-1) * two_thirds_mask(n), n=n, axis=-1)


def exponential_filter(n: int, strength: float = 36.0, order: int = 36) -> np.ndarray:
    """Smooth spectral filter ``exp(-strength (k/kmax)^order)``."""
    k = wavenumbers(n)
    return np.exp(-strength * (k / (n / 2.0)) ** order)


def apply_filter(f: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    return np.fft.irfft(np.fft.rfft(f, axis=-1) * sigma, n=f.shape[-1], axis=-1)


def evaluate(f: np.ndarray, x: np.ndarray, order: int = 0, chunk: int = 4096) -> np.ndarray:
    """Exact trigonometric interpolant of samples ``f`` (or its derivative) at ``x``.

    Direct summation, ``O(n * len(x))``.
    """
    f = np.asarray(f, dtype=float)
    x = np.asarray(x, dtype=float)
    n = f.shape[-1]
    c = coefficients(f)
    k = wavenumbers(n)
    weight = np.full(k.shape, 2.0)
    weight[0] = 1.0
    if n % 2 == 0:
        weight[-1] = 1.0
    c = c * weight * (1j * k) ** order
    flat = x.ravel()
    out = np.empty(flat.shape)
    for start in range(0, flat.size, chunk):
        xs = flat[start:start + chunk]
        out[start:start + chunk] = np.real(np.exp(1j * np.outer(xs, k)) @ c)
    return out.reshape(x.shape)


def oversample(f: np.ndarray, factor: int) -> np.ndarray:
    """Samples of the trigonometric interpolant on a ``factor``-times finer grid.

    The fine grid is ``grid(n * factor)`` shifted so that every coarse node is
    also a fine node: fine node ``j`` sits at ``origin(n) + j * h / factor``.
    """
    f = np.asarray(f, dtype=float)
    n = f.shape[-1]
    m = n * factor
    fh = np.fft.rfft(f, axis=-1)
    big = np.zeros(f.shape[:-1] + (m // 2 + 1,), dtype=complex)
    big[..., : n // 2 + 1] = fh
    if n % 2 == 0:
        # split the Nyquist mode so the padded interpolant stays real
        big[..., n // 2] *= 0.5
    return np.fft.irfft(big, n=m, axis=-1) * factor


def tail_energy(f: np.ndarray, fraction: float = 1.0 / 3.0) -> float:
    """Share of spectral amplitude in the top ``fraction`` of modes (resolution monitor)."""
    fh = np.abs(np.fft.rfft(np.asarray(f, dtype=float)))
    fh[0] = 0.0
    total = fh.sum()
    if total == 0.0:
        return 0.0
    cut = int(len(fh) * (1.0 - fraction))
    return float(fh[cut:].sum() / total)


def _lagrange_weights(s: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Weights (and derivative weights) for equispaced nodes ``0..p-1`` at offsets ``s``."""
    nodes = np.arange(p, dtype=float)
    diff = s[:, None] - nodes[None, :]
    w = np.ones((s.size, p))
    dw = np.zeros((s.size, p))
    for j in range(p):
        num = np.ones(s.size)
        dnum = np.zeros(s.size)
        for m in range(p):
            if m == j:
                continue
            dnum = dnum * diff[:, m] + num
            num = num * diff[:, m]
        denom = np.prod([j - m for m in range(p) if m != j])
        w[:, j] = num / denom
        dw[:, j] = dnum / denom
    return w, dw


class PeriodicInterpolant:
    """Fast local evaluation of band-limited periodic data at arbitrary points.

    The data are oversampled spectrally, then read off with a ``p``-point
    Lagrange stencil on the fine grid.
    """

    def __init__(self, fields: np.ndarray, factor: int = 4, p: int = 6):
        fields = np.atleast_2d(np.asarray(fields, dtype=float))
        self.n = fields.shape[-1]
        self.factor = factor
        self.p = p
        self.m = self.n * factor
        self.h = TWO_PI / self.m
        self.x0 = origin(self.n)
        self.fine = oversample(fields, factor)

    def _stencil(self, x: np.ndarray):
        u = (np.asarray(x, dtype=float).ravel() - self.x0) / self.h
        base = np.floor(u).astype(np.int64) - (self.p // 2 - 1)
        s = u - base
        idx = (base[:, None] + np.arange(self.p)[None, :]) % self.m
        return idx, s

    def __call__(self, x: np.ndarray, derivative: bool = False):
        x = np.asarray(x, dtype=float)
        idx, s = self._stencil(x)
        w, dw = _lagrange_weights(s, self.p)
        vals = np.einsum("fij,ij->fi", self.fine[:, idx], w)
        vals = vals.reshape((self.fine.shape[0],) + x.shape)
        if not derivative:
            return vals
        dvals = np.einsum("fij,ij->fi", self.fine[:, idx], dw) / self.h
        return vals, dvals.reshape((self.fine.shape[0],) + x.shape)
