"""The nine acceptance criteria, each at its stated tolerance.

Every test logs one PASS/FAIL line (repeated in the terminal summary) before
asserting.  Runs are shared through the memoized helpers in ``conftest``.
"""

from __future__ import annotations

import random
import time

import numpy as np
import pytest
from conftest import burgers_run, full_run, truncate_at
from scipy import optimize

from preshock import puiseux
from preshock.analysis import (
    cusp_holder,
    detect_blowup,
    eta_x_structure_check,
    fit_cusp,
    reconstruct_and_compare,
    scaling_slopes,
)
from preshock.diagnostics import attach_slopes, estimate_envelopes, identity_suite
from preshock.euler_core import Params
from preshock.initial_data import DataSpec, build_canonical
from preshock.solver import SolverConfig, StopRule, evolve_until

pytestmark = pytest.mark.slow

MU = 0.25
LADDER = (1e-2, 5e-3, 2e-3, 1e-3)


def sweep_member(eps: float):
    """The delta = 1e-2 run of the sweep member at ``eps`` and its wall time."""
    if eps == 0.2:
        traj, sec = full_run(0.2, 1024, 1e-3, (1e-2,))
        return truncate_at(traj, 1e-2), sec
    if eps == 0.1:
        traj, sec = full_run(0.1, 2048, 1e-3, LADDER[:-1])
        return truncate_at(traj, 1e-2), sec
    return full_run(0.05, 4096, 1e-2)


# {{{ 1. Burgers oracle


def test_burgers_oracle(record):
    started = time.perf_counter()
    traj, _ = burgers_run(512)
    rep = detect_blowup(traj)
    elapsed = time.perf_counter() - started
    errs = []
    for n in (256, 512, 1024):
        errs.append(abs(detect_blowup(burgers_run(n)[0]).T_star - 1.0))
    order = -np.polyfit(np.log([256, 512, 1024]), np.log(errs), 1)[0]
    ok = (abs(rep.T_star - 1.0) <= 1e-3 and abs(rep.x_star) <= 1e-3 and order >= 3
          and elapsed < 5.0)
    record(1, ok, f"T*-1 = {rep.T_star - 1:.2e}, x* = {rep.x_star:.1e}, order {order:.1f} "
                  f"(errors {', '.join(f'{e:.1e}' for e in errs)}), {elapsed:.1f} s at N=512")
    assert ok


# }}}

# {{{ 2. scaling of T* and x*


def test_blowup_scaling(record):
    eps = (0.2, 0.1, 0.05)
    reports, seconds = [], 0.0
    for e in eps:
        traj, sec = sweep_member(e)
        reports.append(detect_blowup(traj))
        seconds += sec
    slopes = scaling_slopes(eps, [r.T_star for r in reports], [r.x_star for r in reports])
    sT, sx = slopes["T_star"]["slope"], slopes["x_star"]["slope"]
    ok = sT >= 1.1 and sx >= 2.1 and seconds < 600
    record(2, ok, f"slope T* {sT:.2f} (>= 1.1), slope x* {sx:.2f} (>= 2.1), "
                  f"runs {seconds:.0f} s")
    assert ok


# }}}

# {{{ 3. Hoelder exponent


def test_holder_exponent_ladder(record):
    traj, _ = full_run(0.1, 2048, 1e-3, LADDER[:-1])
    est = []
    for level in LADDER:
        run = traj if level == LADDER[-1] else truncate_at(traj, level)
        est.append(cusp_holder(run).exponent)
    dist = np.abs(np.array(est) - 1.0 / 3.0)
    monotone = bool(np.all(np.diff(dist) < 0))
    ok = 0.28 <= est[0] <= 0.38 and monotone and all(0.28 <= v <= 0.38 for v in est)
    record(3, ok, "exponents " + ", ".join(f"{v:.4f}@{lv:g}" for v, lv in zip(est, LADDER))
           + f" (eps=0.1), monotone toward 1/3: {monotone}")
    assert ok


# }}}

# {{{ 4. cusp reconstruction


def test_cusp_reconstruction(record):
    traj, _ = full_run(0.2, 1024, 1e-3, (1e-2,))
    rep = detect_blowup(traj)
    prof = reconstruct_and_compare(fit_cusp(traj, rep), traj, rep)
    s = prof.summary
    worst = max(v["max_normalized"] for v in s.values())
    w_rem = s["w"]["max_remainder"]
    split = {n: s[n]["max_remainder"] / w_rem for n in ("z", "k", "a")}
    ok = worst <= 100.0 and all(v <= 0.2 for v in split.values())
    record(4, ok, f"max normalized remainder {worst:.3g} (<= 100); z/k/a remainder over w: "
           + ", ".join(f"{n} {v:.1e}" for n, v in split.items()) + " (<= eps = 0.2)")
    assert ok


# }}}

# {{{ 5. coefficient magnitudes

BOUNDED = ("w_0", "w_1", "w_2", "z_3", "z_4", "k_3", "a_0", "a_3", "a_4")


def test_coefficient_magnitudes(record):
    worst = {}
    for eps in (0.2, 0.1, 0.05):
        traj, _ = sweep_member(eps)
        ratios = fit_cusp(traj, detect_blowup(traj)).magnitude_ratios()
        worst[eps] = max((ratios[k], k) for k in BOUNDED)
    ok = all(v <= 10.0 for v, _ in worst.values())
    record(5, ok, "largest ratio per eps: "
           + ", ".join(f"{e:g}: {k} {v:.2f}" for e, (v, k) in worst.items()) + " (<= 10)")
    assert ok


# }}}

# {{{ 6. identity residuals under refinement


def test_identity_suite_refinement(record):
    eps, grids = 0.2, (256, 512, 1024)
    runs = []
    for n in grids:
        params = Params(eps=eps, n_grid=n)
        data = build_canonical(DataSpec(params), check=False)
        # snapshot cadence refined with the grid so time differencing keeps pace
        cfg = SolverConfig(scheme="eulerian", snapshot_dt=eps / 40 * 256 / n)
        traj = evolve_until(data, params, StopRule(t_max=-eps / 2), cfg)
        runs.append(identity_suite(traj))
    finest = attach_slopes(grids, runs)
    slow = min(finest, key=lambda r: r.slope)
    big = max(finest, key=lambda r: r.sup)
    ok = all(r.slope >= 2 and r.sup <= 1e-6 for r in finest)
    record(6, ok, f"{len(finest)} identities; slowest order {slow.slope:.1f} ({slow.name}), "
                  f"largest residual at N=1024 {big.sup:.1e} ({big.name})")
    assert ok


# }}}

# {{{ 7. envelopes


def _accepted_runs():
    yield "eps=0.1 delta=1e-2", sweep_member(0.1)[0]
    yield "eps=0.1 delta=1e-3", full_run(0.1, 2048, 1e-3, LADDER[:-1])[0]
    yield "eps=0.05 delta=1e-2", sweep_member(0.05)[0]


def test_envelopes(record):
    failures, sandwich = [], []
    for name, traj in _accepted_runs():
        env = estimate_envelopes(traj, slack=4.0)
        failures += [f"{name}: {c}" for c in env.failed]
        st = eta_x_structure_check(traj, detect_blowup(traj))
        sandwich.append((name, st.c, st.C))
    ok = not failures and all(c > 0 and C > 0 and np.isfinite(C) for _, c, C in sandwich)
    record(7, ok, "envelopes at eps 0.1, 0.05 " + ("hold" if not failures else f"fail {failures}")
           + "; sandwich c, C: " + ", ".join(f"({c:.2g}, {C:.2g})" for _, c, C in sandwich))
    assert ok


@pytest.mark.xfail(strict=True, reason="phi_x drops below 1/4 at eps = 0.2 for the canonical data")
def test_envelopes_largest_eps(record):
    traj, _ = sweep_member(0.2)
    env = estimate_envelopes(traj, slack=4.0)
    others = [c for c in env.failed if c != "phi_x ~ 1"]
    st = eta_x_structure_check(traj, detect_blowup(traj))
    record(7, env.passed, f"eps=0.2: failed {env.failed or 'none'} "
           f"({env.checks['phi_x ~ 1'].detail}); sandwich c, C = ({st.c:.2g}, {st.C:.2g}) [expected failure]")
    assert not others and st.c > 0 and st.C > 0
    assert env.passed


# }}}

# {{{ 8. Puiseux inversion


def test_puiseux(record):
    c = puiseux.coefficients(12)
    exact = (c[0], c[1], c[2]) == (1, 1, 3)
    s = puiseux.PuiseuxSeries.build(1.0, 1.0, order=12)
    x = np.linspace(-1e-3, 1e-3, 2001)
    y = s(x)
    alg = float(np.max(np.abs(-x + y ** 3 + y ** 4)))

    rng = random.Random(8)
    worst_root = 0.0
    r = 0.5 * puiseux.radius_estimate() ** 3
    for _ in range(1000):
        a3 = rng.uniform(0.2, 5.0) * rng.choice((-1, 1))
        a4 = rng.uniform(-3.0, 3.0)
        xmax = r * a3 ** 4 / max(abs(a4) ** 3, 1e-12)
        xv = rng.uniform(-1, 1) * min(xmax * 0.99, 1.0)
        yv = puiseux.invert_quartic(a3, a4, xv)
        guess = np.cbrt(xv / a3)
        lo, hi = sorted((guess * 0.5 - 1e-12, guess * 1.5 + 1e-12))
        root = optimize.bisect(lambda t: -xv + a3 * t ** 3 + a4 * t ** 4, lo, hi, xtol=1e-16, rtol=1e-15)
        worst_root = max(worst_root, abs(yv - root))

    xs = np.linspace(-0.05, 0.05, 4001)
    th = xs ** 3 + xs ** 4 + 0.3 * xs ** 5
    inv = puiseux.perturbed_invert(xs, th, 0.0, 1.0)
    ratio = float(np.nanmax(inv.ratio))
    ok = exact and alg <= 1e-12 and worst_root <= 1e-10 and ratio <= 10.0
    record(8, ok, f"c0..c2 = {c[0]}, {c[1]}, {c[2]}; residual {alg:.1e}; "
                  f"bisection gap {worst_root:.1e} over 1000 draws; perturbed remainder ratio {ratio:.2f}")
    assert ok


# }}}

# {{{ 9. stability


def test_perturbation_stability(record):
    eps = 0.1
    amp = 1e-4 * eps
    base = detect_blowup(sweep_member(eps)[0])
    moved = detect_blowup(full_run(eps, 2048, 1e-2, perturb=amp, seed=1)[0])
    dT = abs(moved.T_star - base.T_star) / eps ** (1 + MU)
    dx = abs(moved.x_star - base.x_star) / eps ** (2 + MU)
    bound = 10 * amp
    ok = dT <= bound and dx <= bound
    record(9, ok, f"|dT*|/eps^(1+mu) = {dT:.2e}, |dx*|/eps^(2+mu) = {dx:.2e} (<= {bound:.0e})")
    assert ok


# }}}
