from dataclasses import replace

import numpy as np
import pytest
from conftest import short_eulerian_run
from hypothesis import given, settings
from hypothesis import strategies as st

from preshock import spectral
from preshock.diagnostics import (
    IDENTITIES,
    InsufficientCadence,
    appendix_identity_residuals,
    centred_windows,
    estimate_envelopes,
    identity_suite,
    refinement_slope,
    time_derivative,
    vorticity_checks,
)
from preshock.euler_core import Params, StateField
from preshock.solver import SolverConfig, StopRule, evolve_until
from preshock.solver.state import ROW


@settings(max_examples=30)
@given(st.floats(0.5, 6), st.floats(1e-3, 1e3))
def test_refinement_slope_exact_power_law(p, amp):
    n = np.array([256, 512, 1024])
    assert abs(refinement_slope(n, amp * 1e-3 * n ** -p / 256 ** -p) - p) < 1e-9


def test_refinement_slope_floor_rules():
    # the finest value sits at the floor and is dropped after its first appearance
    assert refinement_slope([256, 512, 1024, 2048], [1e-6, 1e-12, 1e-13, 1e-14]) == pytest.approx(
        np.log(1e-6 / 1e-11) / np.log(2))
    assert refinement_slope([256, 512, 1024], [1e-13] * 3) == float("inf")
    assert refinement_slope([256, 512], [1e-3, 1e-4]) is None


def test_centred_windows():
    assert centred_windows(np.arange(10.0)) == [2, 3, 4, 5, 6, 7]
    t = np.array([0, 1, 2, 3, 4, 4.5, 5, 5.5, 6, 6.5])
    assert centred_windows(t) == [2, 6, 7]


@settings(max_examples=30)
@given(st.lists(st.floats(-3, 3), min_size=5, max_size=5), st.floats(0.01, 1))
def test_time_derivative_exact_for_quartics(coef, h):
    t = 0.3 + h * np.arange(7)
    vals = np.polyval(coef, t)
    exact = np.polyval(np.polyder(coef), t[3])
    assert abs(time_derivative(vals, t, 3) - exact) <= 1e-9 * max(1.0, np.max(np.abs(vals)) / h)


@pytest.fixture(scope="module")
def smooth():
    return short_eulerian_run(0.2, 1024, 0.01)


def test_identities_hold_on_smooth_run(smooth):
    # at a fixed cadence of 0.01 the centred difference error dominates; the
    # convergence order under refinement is an acceptance check
    names = tuple(IDENTITIES)
    for res in appendix_identity_residuals(smooth, names):
        assert res.sup < 1e-3, res.name
        assert res.times.size == len(smooth) - 4
    suite = identity_suite(smooth)
    assert {r.name for r in suite} >= {"vorticity along phi", "vorticity Duhamel", "k o phi = k0"}


def test_vorticity_duhamel_without_entropy():
    run = short_eulerian_run(0.2, 2048, 0.01, t_span=0.25, zero_aux=True)
    _, duhamel = vorticity_checks(run)
    assert duhamel.sup <= 1e-8


def test_irrotational_data_stay_irrotational():
    # a' = w + z with k = 0 makes the specific vorticity vanish, and nothing creates it
    n = 128
    x = spectral.grid(n)
    w, z = 1 + 0.1 * np.sin(x), -1 + 0.05 * np.cos(x)
    data = StateField(0.0, w, z, 0 * x, 0.5 + spectral.antiderivative(w + z))
    run = evolve_until(data, Params(eps=0.2, n_grid=n), StopRule(t_max=0.1),
                       SolverConfig(scheme="eulerian", snapshot_dt=0.01))
    evolution, duhamel = vorticity_checks(run, relative=False)
    assert evolution.sup < 1e-10 and duhamel.sup < 1e-10


def test_cadence_and_mode_errors(smooth):
    with pytest.raises(InsufficientCadence):
        appendix_identity_residuals(replace(smooth, snapshots=smooth.snapshots[:4]))
    with pytest.raises(ValueError):
        appendix_identity_residuals(replace(smooth, mode="burgers"))


def test_envelopes_initial_snapshot_and_inflated_w(smooth):
    first = replace(smooth, snapshots=smooth.snapshots[:1])
    assert estimate_envelopes(first).passed
    snap = smooth.snapshots[-1]
    rows = snap.flows.along["eta"].copy()
    rows[ROW["w"]] *= 10
    flows = replace(snap.flows, along={**snap.flows.along, "eta": rows})
    loud = replace(snap, flows=flows, labels=None, _eulerian_cache={})
    report = estimate_envelopes(replace(smooth, snapshots=smooth.snapshots[:-1] + [loud]))
    assert "w ~ 1" in report.failed
    assert report.to_dict()["passed"] is False
