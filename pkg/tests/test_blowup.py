import numpy as np
import pytest
from conftest import burgers_run
from hypothesis import given, settings
from hypothesis import strategies as st

from preshock import spectral
from preshock.analysis import (
    detect_blowup,
    eta_x_structure_check,
    fit_tail,
    refine_argmin,
    scaling_slopes,
)
from preshock.analysis.blowup import local_minima, uniqueness_margin
from preshock.errors import AmbiguousBlowup
from preshock.solver import FlowState, Snapshot, Trajectory


def test_refine_argmin_of_shifted_cosine():
    x = spectral.grid(64)
    xm, v = refine_argmin(1.0 - 0.5 * np.cos(x - 0.123))
    assert abs(xm - 0.123) < 1e-13 and abs(v - 0.5) < 1e-14


def test_local_minima_and_margin():
    x = spectral.grid(64)
    vals = 2 + np.cos(2 * x) + 0.1 * np.sin(x)
    assert local_minima(vals).size == 2
    assert abs(uniqueness_margin(vals) - 0.2) < 1e-12
    assert uniqueness_margin(np.cos(x)) == 2.0


@settings(max_examples=25)
@given(st.floats(0.01, 0.5), st.floats(0.5, 5), st.floats(0, 1))
def test_fit_tail_recovers_root_of_quadratic(root, slope, curv):
    s = np.linspace(-0.5, 0.0, 12)
    v = slope * (root - s) + 0.1 * curv * (root - s) ** 2
    tf = fit_tail(s, v, degree=4)
    assert abs(tf.root - root) < 1e-8


def test_fit_tail_rejections():
    s = np.linspace(-1, 0, 10)
    with pytest.raises(AmbiguousBlowup, match="densified"):
        fit_tail(s[:5], -s[:5] + 1)
    with pytest.raises(AmbiguousBlowup, match="decreasing"):
        fit_tail(s, s)
    zigzag = 1 - s + 0.02 * (np.arange(s.size) % 2)
    with pytest.raises(AmbiguousBlowup, match="residual"):
        fit_tail(s, zigzag, residual_tol=1e-6)


def test_burgers_oracle_and_translation():
    rep = detect_blowup(burgers_run(512)[0])
    assert abs(rep.T_star - 1) <= 1e-3 and abs(rep.x_star) <= 1e-3
    moved = detect_blowup(burgers_run(512, shift=0.3)[0])
    assert abs(moved.x_star - 0.3) <= 1e-3
    assert abs(moved.T_star - 1) <= 1e-3
    assert rep.passed and rep.to_dict()["passed"]


def test_burgers_sandwich_against_closed_form():
    # eta_x = 1 - t cos x exactly; the window is |x| <= 1 since eps = 1
    traj = burgers_run(512)[0]
    rep = detect_blowup(traj)
    st_ = eta_x_structure_check(traj, rep)
    x = np.linspace(-1, 1, 81)
    x = x[x != 0]
    t = traj.times[(traj.times > 0) & (traj.times < rep.T_star)]
    exact = 1 - np.outer(t, np.cos(x + rep.x_star))
    gap = (rep.T_star - t)[:, None]
    c = np.min((exact - gap / 2) / (t[:, None] * x ** 2))
    C = max(np.max((exact - 1.5 * gap) / x ** 2), 0.0)
    assert c >= 1 - np.cos(1.0)
    # eta_x carries about 4e-5 of discretization error by the stop
    assert abs(st_.c - c) < 1e-4 and abs(st_.C - C) < 1e-4
    assert st_.center_ok and st_.passed


def _flat_trajectory(eta_x_rows, times):
    x = spectral.grid(eta_x_rows[0].size)
    snaps = []
    for t, e in zip(times, eta_x_rows):
        zero = np.zeros_like(x)
        fl = FlowState(x, x + spectral.antiderivative(e - e.mean()), e)
        fl.along = {"eta": np.stack([zero + 1, zero, zero, zero])}
        snaps.append(Snapshot(t, fl))
    return Trajectory(snaps, {}, None, mode="burgers", config={"solver": {"dense_below": 1.0}})


def test_competing_minima_are_ambiguous():
    x = spectral.grid(64)
    times = np.linspace(0, 0.9, 10)
    rows = [1 - t * (0.5 + 0.5 * np.cos(2 * x)) for t in times]
    with pytest.raises(AmbiguousBlowup, match="competing"):
        detect_blowup(_flat_trajectory(rows, times))


def test_cosine_profile_blows_up_at_one():
    x = spectral.grid(64)
    times = np.linspace(0.1, 0.9, 9)
    rows = [1 - t * np.cos(x) for t in times]
    traj = _flat_trajectory(rows, times)
    rep = detect_blowup(traj)
    assert abs(rep.T_star - 1) < 1e-10 and abs(rep.x_star) < 1e-12
    assert eta_x_structure_check(traj, rep).center_ok


@settings(max_examples=25)
@given(st.floats(0.5, 3), st.floats(0.5, 3), st.floats(0.1, 10), st.floats(0.1, 10))
def test_scaling_slopes_exact_power_laws(p, q, A, B):
    eps = np.array([0.2, 0.1, 0.05])
    out = scaling_slopes(eps, -A * eps ** p, B * eps ** q)
    assert abs(out["T_star"]["slope"] - p) < 1e-9 and abs(out["x_star"]["slope"] - q) < 1e-9
    assert abs(out["T_star"]["prefactor"] - A) < 1e-8 * A


def test_scaling_slopes_preconditions():
    with pytest.raises(ValueError):
        scaling_slopes([0.1, 0.1, 0.2], [1, 2, 3], [1, 2, 3])
    with pytest.raises(ValueError):
        scaling_slopes([0.1, 0.2, 0.3], [1, 0, 3], [1, 2, 3])
