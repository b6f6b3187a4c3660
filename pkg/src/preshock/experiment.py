"""Run configuration and the simulate/analyze pipeline shared by the command line."""

from __future__ import annotations

import configparser
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import runio, spectral
from .analysis import (
    cusp_holder,
    detect_blowup,
    eta_x_structure_check,
    fit_cusp,
    reconstruct_and_compare,
)
from .diagnostics import (
    DEFAULT_IDENTITIES,
    IDENTITIES,
    estimate_envelopes,
    identity_suite,
)
from .errors import AmbiguousBlowup
from .euler_core import Params, StateField
from .initial_data import (
    DataSpec,
    InvalidDataError,
    build_canonical,
    load_data,
    perturb,
    validate,
)
from .solver import SolverConfig, StopRule, evolve_until

MODES = ("full", "burgers")


@dataclass
class RunConfig:
    """Everything that determines a run and its reports.

    ``None`` knobs take mode-dependent defaults in :meth:`resolved`.
    """

    mode: str = "full"
    eps: float = 0.1
    mu: float = 0.25
    grid: int | None = None
    cfl: float = 0.4
    stop_eta_x: float | None = None
    scheme: str = "labels"
    seed: int = 0
    perturb: float = 0.0
    data: str | None = None
    snapshot_dt: float | None = None
    dense_dt: float | None = None
    dense_below: float | None = None
    t_max: float | None = None
    burgers_shift: float = 0.0
    fit_degree: int = 4
    cusp_degree: int = 9
    window_scale: float = 1.0
    holder_outer: float = 10.0
    slack: float = 4.0
    identities: str = "default"
    out: str = "run"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.perturb < 0:
            raise ValueError("perturb amplitude must be nonnegative")
        if self.cfl <= 0:
            raise ValueError("cfl must be positive")
        if self.grid is not None and (self.grid < 16 or self.grid % 2):
            raise ValueError(f"grid must be even and >= 16, got {self.grid}")
        if self.stop_eta_x is not None and not 0 < self.stop_eta_x < 1:
            raise ValueError("stop_eta_x must lie in (0, 1)")

    def resolved(self) -> "RunConfig":
        d = asdict(self)
        burgers = self.mode == "burgers"
        if d["grid"] is None:
            d["grid"] = 512 if burgers else default_grid(self.eps)
        if d["stop_eta_x"] is None:
            d["stop_eta_x"] = 0.1 if burgers else 1e-2
        if d["dense_below"] is None:
            d["dense_below"] = 0.3 if burgers else 0.1
        if burgers and d["dense_dt"] is None:
            d["dense_dt"] = 0.01
        return RunConfig(**d)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_mapping(cls, raw: dict) -> "RunConfig":
        """Build from string or typed values, ignoring ``None``; unknown keys are errors."""
        known = {f.name: f for f in fields(cls)}
        kw = {}
        for key, value in raw.items():
            name = key.strip().replace("-", "_")
            if name not in known:
                raise ValueError(f"unknown config key {key!r}")
            if value is None:
                continue
            kw[name] = _coerce(name, value)
        return cls(**kw)


_TYPES = {"grid": int, "seed": int, "fit_degree": int, "cusp_degree": int,
          "mode": str, "scheme": str, "data": str, "identities": str, "out": str}


def _coerce(name: str, value):
    if not isinstance(value, str):
        return value
    if value.strip().lower() in ("none", ""):
        return None
    return _TYPES.get(name, float)(value.strip())


def read_config_file(path) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    parser.read_string("[run]\n" + Path(path).read_text())
    return dict(parser["run"])


def default_grid(eps: float) -> int:
    """Power of two resolving the initial well: 1024 points at eps = 0.2, doubling as eps halves."""
    return int(2 ** max(8, math.ceil(math.log2(204.8 / eps) - 1e-9)))


# {{{ data and run


def initial_state(cfg: RunConfig) -> tuple[StateField, Params | None]:
    cfg = cfg.resolved()
    n = cfg.grid
    if cfg.mode == "burgers":
        x = spectral.grid(n)
        zero = np.zeros(n)
        u0 = -np.sin(x - cfg.burgers_shift)
        data = StateField(0.0, u0, zero, zero, zero)
        return perturb(data, cfg.perturb, cfg.seed), None
    if cfg.data:
        data, params, _ = load_data(cfg.data)
        report = validate(data, params)
        if not report.valid:
            raise InvalidDataError(report)
    else:
        params = Params(eps=cfg.eps, mu=cfg.mu, n_grid=n)
        data = build_canonical(DataSpec(params, rng_seed=cfg.seed))
    return perturb(data, cfg.perturb, cfg.seed), params


def solver_settings(cfg: RunConfig) -> tuple[StopRule, SolverConfig]:
    cfg = cfg.resolved()
    stop = StopRule(eta_x_min=cfg.stop_eta_x, t_max=cfg.t_max)
    solver = SolverConfig(scheme=cfg.scheme, mode=cfg.mode, cfl=cfg.cfl,
                          snapshot_dt=cfg.snapshot_dt, dense_dt=cfg.dense_dt,
                          dense_below=cfg.dense_below, envelope_slack=cfg.slack)
    return stop, solver


def simulate(cfg: RunConfig):
    data, params = initial_state(cfg)
    stop, solver = solver_settings(cfg)
    return evolve_until(data, params, stop, solver)


# }}}

# {{{ analysis


@dataclass
class Analysis:
    reports: dict[str, dict]
    tables: dict[str, object]
    errors: dict[str, str]
    ambiguous: bool = False


def analyze(traj, cfg: RunConfig) -> Analysis:
    """Every report that applies to the run; failures of optional parts are recorded, not raised."""
    cfg = cfg.resolved()
    reports, tables, errors = {}, {}, {}
    try:
        report = detect_blowup(traj, degree=cfg.fit_degree)
    except AmbiguousBlowup as exc:
        errors["blowup"] = str(exc)
        return Analysis(reports, tables, errors, ambiguous=True)
    reports["blowup"] = report.to_dict()

    def attempt(name, fn):
        try:
            return fn()
        except (ValueError, np.linalg.LinAlgError) as exc:
            errors[name] = str(exc)
            return None

    est = attempt("holder", lambda: cusp_holder(traj, report, outer=cfg.holder_outer))
    if est is not None:
        reports["holder"] = est.to_dict()
    if traj.mode != "full":
        return Analysis(reports, tables, errors)

    reports["structure"] = eta_x_structure_check(traj, report).to_dict()
    exp = attempt("cusp", lambda: fit_cusp(traj, report, degree=cfg.cusp_degree,
                                           window_scale=cfg.window_scale))
    if exp is not None:
        reports["cusp"] = exp.to_dict()
        prof = attempt("cusp_profile", lambda: reconstruct_and_compare(exp, traj, report))
        if prof is not None:
            reports["cusp_profile"] = prof.to_dict()
            tables["cusp_profile"] = prof
    reports["envelopes"] = estimate_envelopes(traj, slack=cfg.slack).to_dict()
    names = {"default": DEFAULT_IDENTITIES, "all": tuple(IDENTITIES)}.get(cfg.identities)
    if names is None:
        names = tuple(s.strip() for s in cfg.identities.split(",") if s.strip())
    res = attempt("identities", lambda: identity_suite(traj, names))
    if res is not None:
        reports["identities"] = {r.name: {"sup": r.sup, "final": float(r.series[-1]) if r.series.size else 0.0}
                                 for r in res}
        tables["identities"] = res
    return Analysis(reports, tables, errors)


def write_reports(run_dir, analysis: Analysis, cfg: RunConfig) -> Path:
    out = Path(run_dir) / "reports"
    out.mkdir(parents=True, exist_ok=True)
    for stale in out.glob("*"):
        stale.unlink()
    head = {"schema_version": runio.SCHEMA_VERSION, "config": cfg.resolved().to_dict()}
    for name, rep in analysis.reports.items():
        runio.write_json(out / f"{name}.json", {**head, "report": rep})
    runio.write_json(out / "summary.json", {**head, "reports": sorted(analysis.reports),
                                            "errors": analysis.errors,
                                            "ambiguous_blowup": analysis.ambiguous})
    if "cusp_profile" in analysis.tables:
        analysis.tables["cusp_profile"].write_csv(out / "cusp_profile.csv")
    for res in analysis.tables.get("identities", []):
        slug = res.name.replace(" ", "_").replace("=", "eq").replace(".", "_")
        runio.write_table(out / f"identity_{slug}.csv", {"t": res.times, "residual": res.series})
    return out


def record_analysis(run_dir, cfg: RunConfig) -> None:
    """Append the analysis configuration to the manifest."""
    path = Path(run_dir) / "manifest.json"
    meta = runio.read_json(path)
    meta.setdefault("analyses", []).append(cfg.resolved().to_dict())
    runio.write_json(path, meta)


# }}}
