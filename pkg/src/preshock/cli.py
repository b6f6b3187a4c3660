"""Command-line driver: simulate, sweep, analyze, validate-data, puiseux-demo.

Exit codes: 0 clean, 1 any other failure, 2 estimate violation during a
run, 3 ambiguous blowup.  Settings come from ``--config`` (flat
``key = value``) overridden by flags.  ``PRESHOCK_WORKERS`` caps the
number of concurrent sweep members.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import puiseux, runio
from .analysis import scaling_slopes
from .errors import AmbiguousBlowup, EstimateViolation
from .euler_core import Params
from .experiment import (
    RunConfig,
    analyze,
    read_config_file,
    record_analysis,
    write_reports,
)
from .experiment import simulate as run_simulation
from .initial_data import (
    DataSpec,
    InvalidDataError,
    build_canonical,
    load_data,
    save_data,
    validate,
)

log = logging.getLogger("preshock")

FLAG_KEYS = ("eps", "mu", "grid", "cfl", "stop_eta_x", "out", "mode", "seed")


def _add_common(p: argparse.ArgumentParser, eps_list: bool = False) -> None:
    p.add_argument("--config", help="flat key = value file; flags override it")
    if eps_list:
        p.add_argument("--eps", help="comma-separated eps values (at least three)")
    else:
        p.add_argument("--eps", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--grid", type=int, help="number of grid points")
    p.add_argument("--cfl", type=float)
    p.add_argument("--stop-eta-x", dest="stop_eta_x", type=float,
                   help="stop once min eta_x falls to this value")
    p.add_argument("--out", help="output directory")
    p.add_argument("--mode", choices=("full", "burgers"))
    p.add_argument("--seed", type=int)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="any other config key (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="preshock", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one simulation and write its reports")
    _add_common(p)
    p = sub.add_parser("sweep", help="run several eps values and fit scaling slopes")
    _add_common(p, eps_list=True)
    p = sub.add_parser("analyze", help="regenerate reports of a finished run directory")
    p.add_argument("run_dir")
    p.add_argument("--config")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    p = sub.add_parser("validate-data", help="check initial data against the admissible class")
    _add_common(p)
    p.add_argument("--data", help="CSV data file with JSON header (default: canonical family)")
    p.add_argument("--write", help="also save the checked data to this path")
    p = sub.add_parser("puiseux-demo", help="print quartic-inversion coefficients and examples")
    p.add_argument("--order", type=int, default=12)
    p.add_argument("--out", help="write the JSON here instead of stdout")
    return ap


def _settings(args, base: dict | None = None) -> dict:
    raw = dict(base or {})
    if getattr(args, "config", None):
        raw.update(read_config_file(args.config))
    for item in getattr(args, "set", []):
        if "=" not in item:
            raise ValueError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        raw[k.strip()] = v.strip()
    for key in FLAG_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            raw[key] = v
    if getattr(args, "data", None):
        raw["data"] = args.data
    return raw


def _print_checks(report: dict) -> None:
    for name, c in report.get("checks", {}).items():
        print(f"  {'ok  ' if c['passed'] else 'FAIL'} {name}: {c['value']:.4g} (bound {c['bound']:.4g})")


# {{{ subcommands


def _simulate_into(cfg: RunConfig, run_dir: Path) -> tuple[int, dict]:
    traj = run_simulation(cfg)
    runio.write_run(traj, run_dir, extra={"run_config": cfg.resolved().to_dict()})
    res = analyze(traj, cfg)
    write_reports(run_dir, res, cfg)
    record_analysis(run_dir, cfg)
    code = 3 if res.ambiguous else 0
    return code, res.reports.get("blowup", {})


def cmd_simulate(args) -> int:
    cfg = RunConfig.from_mapping(_settings(args))
    run_dir = Path(cfg.out)
    code, blowup = _simulate_into(cfg, run_dir)
    if code == 3:
        summary = runio.read_json(run_dir / "reports" / "summary.json")
        print(f"ambiguous blowup: {summary['errors'].get('blowup')}", file=sys.stderr)
        return code
    print(f"T* = {blowup['T_star']:.10g}  x* = {blowup['x_star']:.6g}  xi* = {blowup['xi_star']:.6g}")
    _print_checks(blowup)
    print(f"run written to {run_dir}")
    return 0


def _sweep_member(cfg_dict: dict) -> dict:
    cfg = RunConfig(**cfg_dict)
    try:
        code, blowup = _simulate_into(cfg, Path(cfg.out))
    except EstimateViolation as exc:
        return {"eps": cfg.eps, "status": "estimate-violation", "error": str(exc), "exit": 2}
    except Exception as exc:     # one failed member must not lose the others
        return {"eps": cfg.eps, "status": "error", "error": f"{type(exc).__name__}: {exc}", "exit": 1}
    if code:
        return {"eps": cfg.eps, "status": "ambiguous-blowup", "exit": code}
    return {"eps": cfg.eps, "status": "ok", "exit": 0, "T_star": blowup["T_star"],
            "x_star": blowup["x_star"], "out": cfg.out}


def workers() -> int:
    env = os.environ.get("PRESHOCK_WORKERS")
    return max(1, int(env)) if env else max(1, os.cpu_count() or 1)


def cmd_sweep(args) -> int:
    raw = _settings(args)
    eps_text = raw.pop("eps", None) or raw.pop("eps_list", None)
    if eps_text is None:
        raise ValueError("sweep needs --eps with at least three values")
    eps_list = [float(e) for e in str(eps_text).split(",") if e.strip()]
    if len(set(eps_list)) < 3:
        raise ValueError(f"sweep needs at least three distinct eps values, got {eps_list}")
    base = RunConfig.from_mapping(raw)
    root = Path(base.out)
    members = [replace(base, eps=e, out=str(root / f"eps_{e:g}")).to_dict() for e in eps_list]
    n_workers = min(workers(), len(members))
    if n_workers == 1:
        results = [_sweep_member(m) for m in members]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(_sweep_member, members))
    root.mkdir(parents=True, exist_ok=True)
    head = {"schema_version": runio.SCHEMA_VERSION, "config": base.to_dict(),
            "eps": eps_list}
    runio.write_json(root / "members.json", {**head, "members": results})
    failed = [r for r in results if r["status"] != "ok"]
    if failed:
        for r in failed:
            print(f"eps={r['eps']:g}: {r['status']} {r.get('error', '')}", file=sys.stderr)
        return max(r["exit"] for r in failed)
    slopes = scaling_slopes([r["eps"] for r in results], [r["T_star"] for r in results],
                            [r["x_star"] for r in results])
    runio.write_json(root / "scaling.json", {**head, "slopes": slopes, "members": results})
    runio.write_table(root / "scaling.csv", {"eps": [r["eps"] for r in results],
                                             "T_star": [r["T_star"] for r in results],
                                             "x_star": [r["x_star"] for r in results]})
    print(f"{'eps':>8} {'T*':>14} {'x*':>14}")
    for r in results:
        print(f"{r['eps']:8.4g} {r['T_star']:14.6e} {r['x_star']:14.6e}")
    print(f"slope log|T*| vs log eps: {slopes['T_star']['slope']:.3f}")
    print(f"slope log|x*| vs log eps: {slopes['x_star']['slope']:.3f}")
    return 0


def cmd_analyze(args) -> int:
    run_dir = Path(args.run_dir)
    traj, meta = runio.read_run(run_dir)
    cfg = RunConfig.from_mapping(_settings(args, base=meta.get("run_config", {})))
    res = analyze(traj, cfg)
    write_reports(run_dir, res, cfg)
    record_analysis(run_dir, cfg)
    if res.ambiguous:
        print(f"ambiguous blowup: {res.errors['blowup']}", file=sys.stderr)
        return 3
    for name, err in res.errors.items():
        print(f"{name} skipped: {err}")
    print(f"reports regenerated in {run_dir / 'reports'}")
    return 0


def cmd_validate_data(args) -> int:
    raw = _settings(args)
    if raw.get("data"):
        data, params, _ = load_data(raw["data"])
    else:
        cfg = RunConfig.from_mapping(raw).resolved()
        params = Params(eps=cfg.eps, mu=cfg.mu, n_grid=cfg.grid)
        data = build_canonical(DataSpec(params, rng_seed=cfg.seed), check=False)
    report = validate(data, params)
    print(report.summary())
    if args.write:
        save_data(args.write, data, params)
    if raw.get("out"):
        runio.write_json(Path(raw["out"]), {"schema_version": runio.SCHEMA_VERSION,
                                            "params": params.to_dict(), "report": report.to_dict()})
    print("valid" if report.valid else "INVALID: " + ", ".join(report.failed()))
    return 0 if report.valid else 1


def puiseux_demo(order: int = 12) -> dict:
    coeffs = puiseux.coefficients(order)
    rng = np.random.default_rng(0)
    examples = []
    for a3, a4, x in [(1.0, 0.0, 0.008), (1.0, 1.0, 0.0011), (1.0, 1.0, 1e-6),
                      *[(float(rng.uniform(0.5, 2)), float(rng.uniform(-1, 1)),
                         float(rng.uniform(-1e-3, 1e-3))) for _ in range(3)]]:
        y = puiseux.invert_quartic(a3, a4, x)
        examples.append({"a3": a3, "a4": a4, "x": x, "y": y,
                         "residual": abs(-x + a3 * y ** 3 + a4 * y ** 4)})
    return {"schema_version": runio.SCHEMA_VERSION, "order": order,
            "coefficients": [str(c) for c in coeffs],
            "radius_estimate": puiseux.radius_estimate(), "examples": examples}


def cmd_puiseux_demo(args) -> int:
    text = runio.dumps(puiseux_demo(args.order))
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


COMMANDS = {"simulate": cmd_simulate, "sweep": cmd_sweep, "analyze": cmd_analyze,
            "validate-data": cmd_validate_data, "puiseux-demo": cmd_puiseux_demo}


# }}}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except EstimateViolation as exc:
        print(f"estimate violation ({exc.check}): {exc}", file=sys.stderr)
        return exc.exit_code
    except AmbiguousBlowup as exc:
        print(f"ambiguous blowup: {exc}", file=sys.stderr)
        return exc.exit_code
    except InvalidDataError as exc:
        print(exc.report.summary(), file=sys.stderr)
        print(f"invalid data: {exc}", file=sys.stderr)
        return 1
    except runio.MissingRunFiles as exc:
        print("incomplete run directory, missing:", file=sys.stderr)
        for name in exc.missing:
            print(f"  {name}", file=sys.stderr)
        return 1
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
