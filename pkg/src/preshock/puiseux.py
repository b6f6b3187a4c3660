"""Fractional-power inversion of ``x = a3 y^3 + a4 y^4``.

The normalized branch ``ybar(s) = sum_n (-1)^n c_n 3^-n s^(n+1)`` satisfies
``ybar^3 + ybar^4 = s^3``; the general branch is obtained by scaling,
``y(x) = (a3/a4) ybar(a3^(-4/3) a4 x^(1/3))``.  The integers-over-powers-of-3
``c_n`` come from a convolution recursion which is run in exact rational
arithmetic for the first terms and in floating point (on ``c_n / 3^n``)
beyond.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import interpolate

EXACT_ORDER = 24
TABLE_ORDER = 600


# {{{ coefficient recursion


def _conv(u, v, n):
    return sum(u[i] * v[n - i] for i in range(n + 1))


def _exact_coefficients(n_max: int) -> list[Fraction]:
    c = [Fraction(1)]
    p2, p3, p4 = [Fraction(1)], [Fraction(1)], [Fraction(1)]
    for n in range(1, n_max + 1):
        # powers with c_n still unknown (taken as 0) give the partial sums
        cc = c + [Fraction(0)]
        p2n = _conv(cc, cc, n)
        p3n = _conv(p2 + [p2n], cc, n)
        c_n = p4[n - 1] - p3n / 3
        c.append(c_n)
        # now complete the power tables through index n
        p2.append(p2n + 2 * c_n)
        p3.append(p3n + 3 * c_n)
        p4.append(_conv(p3, c, n))
    return c


def _float_scaled(n_max: int, seed: list[Fraction]) -> np.ndarray:
    """``d_n = c_n / 3^n`` in floating point, continuing from exact ``seed``."""
    d = np.zeros(n_max + 1)
    for i, v in enumerate(seed[: n_max + 1]):
        d[i] = float(v / Fraction(3) ** i)
    # g = sum (-1)^n d_n s^n satisfies g^3 + s g^4 = 1
    g = np.array([(-1) ** i * d[i] for i in range(n_max + 1)])
    start = min(len(seed), n_max + 1)
    for n in range(start, n_max + 1):
        g[n] = 0.0
        head = g[: n + 1]
        g2 = np.convolve(head, head)[: n + 1]
        g3 = np.convolve(g2, head)[: n + 1]
        g4 = np.convolve(g3, head)[: n]
        g[n] = -(g3[n] + g4[n - 1]) / 3.0
        d[n] = (-1) ** n * g[n]
    return d


@lru_cache(maxsize=None)
def _table() -> tuple[tuple[Fraction, ...], np.ndarray]:
    exact = _exact_coefficients(EXACT_ORDER)
    return tuple(exact), _float_scaled(TABLE_ORDER, exact)


def coefficients(n_max: int) -> list:
    """``c_0 .. c_n_max``: exact :class:`Fraction` through order 24, floats beyond."""
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    exact, d = _table()
    if n_max <= EXACT_ORDER:
        return list(exact[: n_max + 1])
    warnings.warn(
        f"coefficients beyond order {EXACT_ORDER} use floating-point accumulation",
        stacklevel=2,
    )
    if n_max > TABLE_ORDER:
        d = _float_scaled(n_max, list(exact))
    out: list = list(exact)
    for n in range(EXACT_ORDER + 1, n_max + 1):
        with np.errstate(over="ignore"):
            out.append(float(d[n]) * 3.0 ** n)
    return out


def scaled_coefficients(n_max: int) -> np.ndarray:
    """``|c_n| / 3^n`` as floats (no overflow)."""
    _, d = _table()
    if n_max > TABLE_ORDER:
        d = _float_scaled(n_max, list(_table()[0]))
    return d[: n_max + 1].copy()


def radius_estimate(n_max: int = 200, stride: int = 3) -> float:
    """Convergence radius of the normalized series in ``s``.

    The ratio ``|d_n / d_(n+stride)|^(1/stride)`` is formed with ``stride = 3``
    because the singularities sit symmetrically on the circle, then
    extrapolated linearly in ``1/n``.
    """
    d = np.abs(scaled_coefficients(n_max + stride))
    n = np.arange(n_max // 2, n_max + 1)
    ratio = (d[n] / d[n + stride]) ** (1.0 / stride)
    slope, intercept = np.polyfit(1.0 / n, ratio, 1)
    return float(intercept)


# }}}


# {{{ series object


def _cbrt(x):
    return np.cbrt(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class PuiseuxSeries:
    """Truncated fractional series for the root of ``-x + a3 y^3 + a4 y^4``."""

    c: tuple
    a3: float
    a4: float
    order: int
    radius_est: float

    @classmethod
    def build(cls, a3: float, a4: float, order: int = 12) -> "PuiseuxSeries":
        if a3 == 0:
            raise ValueError("a3 must be nonzero")
        exact, d = _table()
        c = tuple(exact[: order + 1]) if order <= EXACT_ORDER else tuple(
            list(exact) + [float(d[n]) * 3.0 ** n for n in range(EXACT_ORDER + 1, order + 1)]
        )
        return cls(c=c, a3=float(a3), a4=float(a4), order=order, radius_est=_radius())

    @property
    def safety_fraction(self) -> float:
        return 0.5 * self.radius_est ** 3

    def normalized(self, s):
        """``ybar(s)`` truncated after the ``s^(order+1)`` term."""
        return np.asarray(s, dtype=float) * _horner(_signed(self.order), s)

    def power_coefficients(self) -> np.ndarray:
        """``e_n`` with ``y(x) = sum_n e_n x^((n+1)/3)`` (real cube roots)."""
        g = _signed(self.order)
        scale = _cbrt(self.a3) ** -4 * self.a4
        return _cbrt(1.0 / self.a3) * g * scale ** np.arange(self.order + 1)

    def in_safety_region(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.abs(self.a4 ** 3 * x) < self.safety_fraction * self.a3 ** 4

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        s = _cbrt(self.a3) ** -4 * self.a4 * _cbrt(x)
        return _cbrt(x / self.a3) * _horner(_signed(self.order), s)


@lru_cache(maxsize=None)
def _radius() -> float:
    return radius_estimate()


@lru_cache(maxsize=64)
def _signed(order: int) -> np.ndarray:
    d = scaled_coefficients(order)
    return d * (-1.0) ** np.arange(order + 1)


def _horner(coef: np.ndarray, s):
    s = np.asarray(s, dtype=float)
    acc = np.zeros_like(s) + coef[-1]
    for v in coef[-2::-1]:
        acc = acc * s + v
    return acc


def _auto_order(a3: float, a4: float, x) -> int:
    """Smallest truncation whose first neglected term is below machine precision."""
    xmax = float(np.max(np.abs(x))) if np.size(x) else 0.0
    if a4 == 0.0 or xmax == 0.0:
        return 0
    smax = abs(a4) * abs(a3) ** (-4.0 / 3.0) * xmax ** (1.0 / 3.0)
    d = np.abs(scaled_coefficients(TABLE_ORDER))
    terms = d * smax ** np.arange(TABLE_ORDER + 1)
    small = np.flatnonzero(terms < 0.25 * np.finfo(float).eps)
    small = small[small >= 10]
    return int(small[0]) if small.size else TABLE_ORDER


# }}}


# {{{ operations


class OutsideSafetyRegion(ValueError):
    pass


def invert_quartic(a3: float, a4: float, x, order: int | None = None):
    """Root ``y`` of ``-x + a3 y^3 + a4 y^4 = 0`` on the branch through the origin.

    ``order=None`` picks the truncation automatically (machine precision).
    Raises :class:`OutsideSafetyRegion` when ``|a4^3 x| >= r a3^4`` with ``r``
    half the cube of the estimated convergence radius.
    """
    if a3 == 0:
        raise ValueError("a3 must be nonzero")
    x = np.asarray(x, dtype=float)
    r = 0.5 * _radius() ** 3
    bound = r * a3 ** 4
    lhs = np.abs(a4 ** 3 * x)
    if np.any(lhs >= bound):
        worst = float(np.max(lhs))
        raise OutsideSafetyRegion(
            f"|a4^3 x| = {worst:.6g} exceeds safety bound r*a3^4 = {bound:.6g} (r = {r:.6g})"
        )
    if order is None:
        order = _auto_order(a3, a4, x)
    series = PuiseuxSeries.build(a3, a4, order)
    y = series(x)
    return float(y) if y.ndim == 0 else y


def three_term(a3: float, a4, dtheta):
    """Leading three terms of the inversion in powers of ``dtheta^(1/3)``."""
    a4 = np.asarray(a4, dtype=float)
    r1 = _cbrt(dtheta)
    ia3 = _cbrt(1.0 / a3)
    return ia3 * r1 - a4 * ia3 ** 5 * r1 ** 2 / 3.0 + a4 ** 2 * np.asarray(dtheta) / (3.0 * a3 ** 3)


def remainder_scale(a3: float, a4, dtheta):
    """``|a3|^(-13/3) |a4|^3 |dtheta|^(4/3)``."""
    return np.abs(a3) ** (-13.0 / 3.0) * np.abs(a4) ** 3 * np.abs(dtheta) ** (4.0 / 3.0)


def window_constant(radius: float | None = None) -> float:
    """Admissible ``|theta - theta0| <= C a3^4 / L^3`` constant.

    Combines the monotonicity window of the perturbed problem with the
    convergence radius of the series at ``|a4| <= L/24``.
    """
    radius = _radius() if radius is None else radius
    return min(23.0 / 24.0, 0.5 * (24.0 * radius) ** 3)


@dataclass
class PerturbedInversion:
    """Label-side inversion of a ``C^{3,1}`` map with certified remainder data."""

    x0: float
    theta0: float
    a3: float
    L: float
    window: float
    x: np.ndarray
    dtheta: np.ndarray
    a4: np.ndarray
    approx: np.ndarray
    remainder: np.ndarray
    scale: np.ndarray
    _a4_fn: object = None

    @property
    def ratio(self) -> np.ndarray:
        """``|R| / (a3^(-13/3) |a4|^3 |dtheta|^(4/3))``; nan where the scale vanishes."""
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.scale > 0, np.abs(self.remainder) / self.scale, np.nan)

    def invert(self, theta, iterations: int = 60, tol: float = 1e-15):
        """Labels ``x`` whose image is ``theta``, from the three-term formula.

        ``a4`` depends on the unknown label, so the formula is iterated to a
        fixed point; the result carries the intrinsic three-term error.
        """
        dth = np.asarray(theta, dtype=float) - self.theta0
        if np.any(np.abs(dth) > self.window):
            raise OutsideSafetyRegion(
                f"|theta - theta0| exceeds window {self.window:.6g}"
            )
        y = _cbrt(dth / self.a3)
        for _ in range(iterations):
            y_new = three_term(self.a3, self._a4_fn(self.x0 + y), dth)
            if np.max(np.abs(y_new - y), initial=0.0) <= tol * max(1.0, float(np.max(np.abs(y), initial=0.0))):
                y = y_new
                break
            y = y_new
        return self.x0 + y


def quartic_coefficient(fourth, x0: float, x, nodes: int = 24):
    """``a4(x) = int_x0^x f''''(t) (x - t)^3 dt / (3! (x - x0)^4)`` by Gauss-Legendre."""
    x = np.asarray(x, dtype=float)
    s, wts = np.polynomial.legendre.leggauss(nodes)
    s = 0.5 * (s + 1.0)
    wts = 0.5 * wts
    dx = x - x0
    pts = x0 + np.multiply.outer(dx, s)
    vals = fourth(pts) * (1.0 - s) ** 3
    return (vals @ wts) / 6.0


def perturbed_invert(x_samples, theta_samples, x0: float, a3: float, L: float | None = None,
                     fourth=None, c_window: float | None = None) -> PerturbedInversion:
    """Invert ``theta(x) = theta0 + a3 (x-x0)^3 + a4(x) (x-x0)^4`` near ``x0``.

    ``theta`` is given by samples on an interval; its fourth derivative is
    taken from a degree-7 interpolating spline unless ``fourth`` is passed.
    ``L`` defaults to the sup of the fourth derivative over the samples.
    """
    xs = np.asarray(x_samples, dtype=float)
    th = np.asarray(theta_samples, dtype=float)
    if xs.shape != th.shape or xs.ndim != 1:
        raise ValueError("x_samples and theta_samples must be 1-d of equal length")
    if a3 == 0:
        raise ValueError("a3 must be nonzero")
    spline = interpolate.make_interp_spline(xs, th, k=7)
    if fourth is None:
        fourth = spline.derivative(4)
    theta0 = float(spline(x0))
    if L is None:
        fine = np.linspace(xs[0], xs[-1], 16 * xs.size)
        L = float(np.max(np.abs(fourth(fine))))
    c_window = window_constant() if c_window is None else c_window
    window = c_window * abs(a3) ** 4 / L ** 3 if L > 0 else math.inf

    def a4_fn(x):
        return quartic_coefficient(fourth, x0, x)

    dth = th - theta0
    keep = (np.abs(dth) <= window) & (xs != x0)
    x_in = xs[keep]
    a4 = a4_fn(x_in)
    approx = three_term(a3, a4, dth[keep])
    remainder = (x_in - x0) - approx
    return PerturbedInversion(
        x0=float(x0), theta0=theta0, a3=float(a3), L=float(L), window=float(window),
        x=x_in, dtheta=dth[keep], a4=a4, approx=approx, remainder=remainder,
        scale=remainder_scale(a3, a4, dth[keep]), _a4_fn=a4_fn,
    )


# }}}
