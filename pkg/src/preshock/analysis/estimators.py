"""scikit-learn style wrappers for the one-dimensional fits of the analysis.

Both estimators take a single feature column ``X`` (time or angle) and a
target ``y``; they validate with :func:`sklearn.utils.validation.check_X_y`
and expose fitted quantities with a trailing underscore.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .blowup import fit_tail
from .holder import holder_exponent


def _column(X) -> np.ndarray:
    X = check_array(X, ensure_2d=True)
    if X.shape[1] != 1:
        raise ValueError(f"expected one feature column, got {X.shape[1]}")
    return X[:, 0]


class BlowupDetector(RegressorMixin, BaseEstimator):
    """Fit ``min eta_x`` against time and extrapolate its zero.

    ``fit(X, y)`` takes times (one column) and the decreasing minima;
    ``predict`` evaluates the fitted polynomial.  After fitting,
    ``T_star_`` holds the extrapolated blowup time.
    """

    def __init__(self, degree: int = 4, min_tail: int = 8, residual_tol: float = 1e-3):
        self.degree = degree
        self.min_tail = min_tail
        self.residual_tol = residual_tol

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        t = _column(X)
        order = np.argsort(t)
        t, y = t[order], y[order]
        self.t_ref_ = float(t[-1])
        self.fit_ = fit_tail(t - self.t_ref_, y, self.degree, self.min_tail, self.residual_tol)
        self.T_star_ = self.t_ref_ + self.fit_.root
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "fit_")
        return self.fit_.at(_column(X) - self.t_ref_)


class HolderEstimator(BaseEstimator):
    """Hoelder exponent of sampled data at a point.

    ``fit(X, y)`` takes angles (one column) and field values; only samples
    with ``r_lo <= |theta - xi| <= r_hi`` on each side enter the fit.
    ``f_xi=None`` takes the value at the sample nearest ``xi``.
    """

    def __init__(self, xi: float = 0.0, r_lo: float = 1e-3, r_hi: float = 1e-2,
                 f_xi: float | None = None, min_points: int = 10):
        self.xi = xi
        self.r_lo = r_lo
        self.r_hi = r_hi
        self.f_xi = f_xi
        self.min_points = min_points

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        theta = _column(X)
        f_xi = self.f_xi if self.f_xi is not None else float(y[np.argmin(np.abs(theta - self.xi))])
        est = holder_exponent((theta, y), self.xi, f_xi, self.r_lo, self.r_hi,
                              min_points=self.min_points)
        self.f_xi_ = f_xi
        self.exponent_ = est.exponent
        self.one_sided_ = (est.left, est.right)
        # amplitude of |f - f_xi| ~ C |theta - xi|^alpha, from both sides
        r = np.abs(theta - self.xi)
        keep = (r >= self.r_lo) & (r <= self.r_hi) & (np.abs(y - f_xi) > 0)
        self.amplitude_ = float(np.exp(np.mean(np.log(np.abs(y[keep] - f_xi))
                                               - self.exponent_ * np.log(r[keep]))))
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        """Magnitude of the power-law model ``amplitude * |theta - xi|^exponent``."""
        check_is_fitted(self, "exponent_")
        return self.amplitude_ * np.abs(_column(X) - self.xi) ** self.exponent_
