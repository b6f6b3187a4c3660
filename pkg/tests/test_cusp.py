from dataclasses import replace

import numpy as np
import pytest
from scipy.optimize import brentq

from preshock import spectral
from preshock.analysis import fit_cusp, reconstruct_and_compare
from preshock.analysis.blowup import BlowupReport
from preshock.analysis.cusp import CuspExpansion, fractional_coefficients
from preshock.euler_core import Params
from preshock.solver import Snapshot, Trajectory
from preshock.solver.state import LabelState

N = 256
# eta - x* = x^3/6 + 0.075 x^4 - x^5/120 + ...
A3, A4, A5 = 1 / 6, 0.075, -1 / 120


def eta_of(x, quartic=0.3):
    return x - np.sin(x) + quartic * (1 - np.cos(x)) ** 2


FIELD_FORMULAS = {
    "w": (lambda x: 1 + np.sin(x) + 0.5 * np.sin(x) ** 2, [1, 1, 0.5, -1 / 6, -1 / 6]),
    "z": (lambda x: -1 + 0.2 * np.sin(x) ** 3 + 0.1 * np.sin(x) ** 4, [-1, 0, 0, 0.2, 0.1]),
    "k": (lambda x: 0.05 * np.sin(x) ** 3, [0, 0, 0, 0.05, 0]),
    "a": (lambda x: 0.3 + 0.1 * np.sin(x) ** 3, [0.3, 0, 0, 0.1, 0]),
}


def synthetic(quartic=0.3, n=N):
    """Time-independent label trajectory whose eta_x vanishes to second order at label 0."""
    x = spectral.grid(n)
    eta = eta_of(x, quartic)
    eta_x = spectral.derivative(eta - x) + 1
    f = {name: fn(x) for name, (fn, _) in FIELD_FORMULAS.items()}
    snaps = []
    for t in np.linspace(-0.08, -0.01, 8):
        ls = LabelState(t, x, eta - x, eta_x, f["w"], f["z"], f["k"], f["a"])
        snaps.append(Snapshot(t, None, labels=ls))
    params = Params(eps=np.sqrt(0.1), n_grid=n)
    traj = Trajectory(snaps, {}, params)
    report = BlowupReport(0.0, 0.0, 0.0, -0.01, {}, {}, params.eps, params.mu)
    return traj, report


@pytest.fixture(scope="module")
def fitted():
    traj, report = synthetic()
    return fit_cusp(traj, report), traj, report


def test_label_radius_is_eps_squared(fitted):
    exp, *_ = fitted
    assert abs(exp.label_radius - 0.1) < 1e-15


def test_fit_recovers_eta_taylor_data(fitted):
    exp, *_ = fitted
    assert abs(exp.a3 - A3) < 1e-9 and abs(exp.a4 - A4) < 1e-9 and abs(exp.a5 - A5) < 1e-7
    assert abs(exp.xi_star) < 1e-12 and abs(exp.x_star) < 1e-12


def test_fit_recovers_field_taylor_data(fitted):
    exp, *_ = fitted
    for name, (_, taylor) in FIELD_FORMULAS.items():
        np.testing.assert_allclose(exp.taylor[name], taylor, atol=1e-8, err_msg=name)


def _invert(u, quartic=0.3):
    return brentq(lambda x: eta_of(x, quartic) - u, -1.0, 1.0, xtol=1e-15, rtol=1e-15)


@pytest.mark.parametrize("name, order", [("w", 1.0), ("z", 5 / 3), ("k", 5 / 3), ("a", 5 / 3)])
def test_expansion_remainder_order(fitted, name, order):
    # exact values come from inverting eta numerically; the truncation error must
    # shrink at the rate of the first dropped power
    exp, *_ = fitted
    fn = FIELD_FORMULAS[name][0]
    for sign in (1, -1):
        us = sign * np.array([1e-4, 1e-4 / 8])
        rem = [abs(fn(_invert(u)) - exp.evaluate(name, u)) for u in us]
        rate = np.log(rem[0] / rem[1]) / np.log(8)
        assert abs(rate - order) < 0.05, (name, sign, rate)


def test_without_quartic_term_second_coefficient_is_pure():
    taylor = {n: list(t) for n, (_, t) in FIELD_FORMULAS.items()}
    taylor["varpi"] = [1.0, 0, 0, 2.0, 0]
    frac = fractional_coefficients(taylor, A3, 0.0)
    assert abs(frac["w"]["2"] - 0.5 * A3 ** (-2 / 3)) < 1e-14
    assert abs(frac["w"]["1"] - A3 ** (-1 / 3)) < 1e-14
    assert abs(frac["z"]["4"] - 0.1 * A3 ** (-4 / 3)) < 1e-14
    assert frac["varpi"] == {"0": 1.0, "3": 2.0 / A3}


def test_evaluate_exact_for_cubic_eta_and_linear_field():
    a3 = 0.4
    taylor = {n: [0.7, 1.3, 0, 0, 0] for n in ("w", "z", "k", "a", "varpi")}
    frac = fractional_coefficients(taylor, a3, 0.0)
    exp = CuspExpansion(a3, 0.0, 0.0, taylor, frac, 1.0, 0.0, 0.0, 0.0, 0.1, 0.25, 0.5, 0.01)
    x = np.linspace(-0.3, 0.3, 13)
    np.testing.assert_allclose(exp.evaluate("w", a3 * x ** 3), 0.7 + 1.3 * x, atol=1e-15)


def test_reconstruction_remainders_are_small(fitted):
    exp, traj, report = fitted
    prof = reconstruct_and_compare(exp, traj, report)
    assert prof.summary["w"]["max_normalized"] < 10
    for name in ("z", "k", "a"):
        assert prof.summary[name]["max_remainder"] < 1e-3


def test_reconstruction_refuses_underresolved_window(fitted):
    exp, traj, report = fitted
    tiny = replace(exp, label_radius=3 * spectral.TWO_PI / N / 2)
    with pytest.raises(ValueError, match="label cells"):
        reconstruct_and_compare(tiny, traj, report)


def test_magnitude_ratios_keys(fitted):
    exp, *_ = fitted
    ratios = exp.magnitude_ratios()
    assert abs(ratios["w_1"] - A3 ** (-1 / 3)) < 1e-7
    assert set(ratios) >= {"w_0", "z_3", "a_4", "varpi_3"}
