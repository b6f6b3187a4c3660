"""Shared runs and the acceptance summary.

Expensive simulations are memoized per session so that several tests can
look at the same trajectory.
"""

from __future__ import annotations

import time
from dataclasses import replace
from functools import lru_cache

import numpy as np
import pytest

from preshock import spectral
from preshock.euler_core import Params, StateField
from preshock.experiment import RunConfig, initial_state, solver_settings
from preshock.initial_data import DataSpec, build_canonical
from preshock.solver import SolverConfig, StopRule, Trajectory, evolve_until

_LINES: list[str] = []


@lru_cache(maxsize=None)
def full_run(eps: float, grid: int, stop: float, marks: tuple = (), perturb: float = 0.0,
             seed: int = 0) -> tuple[Trajectory, float]:
    """Canonical full-system run on the label scheme, with its wall time."""
    cfg = RunConfig(mode="full", eps=eps, grid=grid, stop_eta_x=stop, perturb=perturb, seed=seed)
    data, params = initial_state(cfg)
    rule, solver = solver_settings(cfg)
    started = time.perf_counter()
    traj = evolve_until(data, params, replace(rule, marks=marks), solver)
    return traj, time.perf_counter() - started


def _first_below(traj: Trajectory, level: float) -> float:
    mon = traj.monitors
    return float(mon["t"][np.flatnonzero(mon["min_eta_x"] <= level)[0]])


def truncate_at(traj: Trajectory, level: float) -> Trajectory:
    """The run as it would have ended with the stop rule at ``level``.

    ``level`` must be one of the run's marks; snapshots kept only because of
    an earlier mark are dropped so the cadence matches a run stopped there.
    """
    marks = traj.config["stop"]["marks"]
    if level not in marks:
        raise ValueError(f"{level} is not a mark of this run")
    t_end = _first_below(traj, level)
    extra = {_first_below(traj, m) for m in marks if m > level}
    snaps = [s for s in traj.snapshots if s.t <= t_end and s.t not in extra]
    return replace(traj, snapshots=snaps, stop_reason="eta_x")


@lru_cache(maxsize=None)
def burgers_run(grid: int, shift: float = 0.0, stop: float = 0.1) -> tuple[Trajectory, float]:
    cfg = RunConfig(mode="burgers", grid=grid, burgers_shift=shift, stop_eta_x=stop)
    data, _ = initial_state(cfg)
    rule, solver = solver_settings(cfg)
    started = time.perf_counter()
    traj = evolve_until(data, None, rule, solver)
    return traj, time.perf_counter() - started


@lru_cache(maxsize=None)
def short_eulerian_run(eps: float, grid: int, snapshot_dt: float, t_span: float = 0.5,
                       zero_aux: bool = False) -> Trajectory:
    """Smooth full-system run on the angular grid, stopped well before blowup."""
    params = Params(eps=eps, n_grid=grid)
    data = build_canonical(DataSpec(params), check=False)
    if zero_aux:
        zero = np.zeros(grid)
        data = StateField(data.t, data.w, zero, zero, zero)
    rule = StopRule(t_max=-eps + t_span * eps)
    return evolve_until(data, params, rule, SolverConfig(scheme="eulerian", snapshot_dt=snapshot_dt))


def sine_state(n: int, t: float = 0.0) -> StateField:
    x = spectral.grid(n)
    return StateField(t, 2.0 + 0.3 * np.cos(x), 0.2 * np.sin(2 * x), 0.1 * np.cos(3 * x),
                      0.4 + 0.1 * np.sin(x))


@pytest.fixture
def record():
    """Log one acceptance line; shown again in the terminal summary."""
    def _record(criterion: int, passed: bool, detail: str) -> None:
        line = f"criterion {criterion}: {'PASS' if passed else 'FAIL'}  {detail}"
        print(line)
        _LINES.append(line)
    return _record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
