"""Run directories: manifest, per-snapshot CSV, monitor CSV and an exact array archive.

Layout of a run directory::

    manifest.json        params, solver config, stop reason, dt history
    monitors.csv         one row per step
    snapshots/NNNN.csv   theta, w, z, k, a, eta, psi, phi, eta_x on the flow labels
    trajectory.npz       every array, for bit-exact reload
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .euler_core import Params, StateField
from .solver.state import FlowState, LabelState, Snapshot, Trajectory

SCHEMA_VERSION = 1
SNAPSHOT_COLUMNS = ("theta", "w", "z", "k", "a", "eta", "psi", "phi", "eta_x")
FLOAT_DIGITS = 12


class MissingRunFiles(FileNotFoundError):
    def __init__(self, run_dir, missing: list[str]):
        self.missing = missing
        super().__init__(f"{run_dir}: missing " + ", ".join(missing))


# {{{ json


def _plain(obj):
    """Recursively convert numpy values and round floats to fixed precision."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.{FLOAT_DIGITS}g}")
    return obj


def dumps(obj) -> str:
    return json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())


# }}}

# {{{ csv


def write_table(path, columns: dict[str, np.ndarray]) -> None:
    names = list(columns)
    table = np.column_stack([np.asarray(columns[k], dtype=float) for k in names])
    np.savetxt(path, table, delimiter=",", header=",".join(names), comments="", fmt="%.17g")


def read_table(path) -> dict[str, np.ndarray]:
    with open(path) as fh:
        names = fh.readline().strip().split(",")
        table = np.loadtxt(fh, delimiter=",", ndmin=2)
    return {k: table[:, i] for i, k in enumerate(names)}


def snapshot_columns(snap: Snapshot) -> dict[str, np.ndarray]:
    """Per-label table; field values are taken at ``eta`` of each label."""
    fl = snap.flows
    along = fl.along["eta"]
    nan = np.full(fl.labels.size, np.nan)
    return {
        "theta": fl.labels, "w": along[0], "z": along[1], "k": along[2], "a": along[3],
        "eta": fl.eta,
        "psi": fl.psi if fl.psi is not None else nan,
        "phi": fl.phi if fl.phi is not None else nan,
        "eta_x": fl.eta_x,
    }


# }}}

# {{{ archive


def _flatten(traj: Trajectory) -> dict[str, np.ndarray]:
    arrays = {"times": traj.times, "dt_history": traj.dt_history}
    for key, v in traj.monitors.items():
        arrays[f"monitors/{key}"] = v
    for i, s in enumerate(traj.snapshots):
        pre = f"s{i}/"
        fl = s.flows
        for name in ("labels", "eta", "eta_x", "psi", "phi", "psi_x", "phi_x"):
            v = getattr(fl, name)
            if v is not None:
                arrays[pre + "flows/" + name] = v
        for name, v in fl.integrals.items():
            arrays[pre + "integrals/" + name] = v
        for name, v in fl.along.items():
            arrays[pre + "along/" + name] = v
        if s.state is not None:
            arrays[pre + "state"] = np.concatenate([[s.state.t], s.state.stacked().ravel()])
        if s.labels is not None:
            ls = s.labels
            arrays[pre + "labels"] = np.concatenate(
                [[ls.t], np.stack([ls.x, ls.d, ls.eta_x, ls.w, ls.z, ls.k, ls.a]).ravel()])
    return arrays


def _unflatten(arrays, meta: dict) -> Trajectory:
    times = arrays["times"]
    snaps = []
    for i, t in enumerate(times):
        pre = f"s{i}/"
        kw = {}
        integrals, along = {}, {}
        for key in arrays.files:
            if not key.startswith(pre):
                continue
            rest = key[len(pre):]
            if rest.startswith("flows/"):
                kw[rest[6:]] = arrays[key]
            elif rest.startswith("integrals/"):
                integrals[rest[10:]] = arrays[key]
            elif rest.startswith("along/"):
                along[rest[6:]] = arrays[key]
        fl = FlowState(integrals=integrals, along=along, **kw)
        state = labels = None
        if pre + "state" in arrays.files:
            v = arrays[pre + "state"]
            state = StateField.from_stacked(v[0], v[1:].reshape(4, -1))
        if pre + "labels" in arrays.files:
            v = arrays[pre + "labels"]
            x, d, ex, w, z, k, a = v[1:].reshape(7, -1)
            labels = LabelState(float(v[0]), x, d, ex, w, z, k, a)
        snaps.append(Snapshot(float(t), fl, state=state, labels=labels))
    monitors = {key[9:]: arrays[key] for key in arrays.files if key.startswith("monitors/")}
    params = Params.from_dict(meta["params"]) if meta.get("params") else None
    return Trajectory(snapshots=snaps, monitors=monitors, params=params, mode=meta["mode"],
                      scheme=meta["scheme"], stop_reason=meta["stop_reason"],
                      dt_history=arrays["dt_history"], config=meta["config"])


# }}}


def manifest(traj: Trajectory, extra: dict | None = None) -> dict:
    out = {
        "schema_version": SCHEMA_VERSION,
        "params": traj.params.to_dict() if traj.params is not None else None,
        "mode": traj.mode,
        "scheme": traj.scheme,
        "stop_reason": traj.stop_reason,
        "t_stop": traj.t_stop,
        "n_snapshots": len(traj),
        "snapshot_times": traj.times,
        "steps": int(traj.dt_history.size),
        "dt_history": traj.dt_history,
        "config": traj.config,
    }
    if extra:
        out.update(extra)
    return out


def write_run(traj: Trajectory, run_dir, extra: dict | None = None) -> Path:
    run_dir = Path(run_dir)
    (run_dir / "snapshots").mkdir(parents=True, exist_ok=True)
    for i, s in enumerate(traj.snapshots):
        write_table(run_dir / "snapshots" / f"{i:04d}.csv", snapshot_columns(s))
    write_table(run_dir / "monitors.csv", traj.monitors)
    exact = {"params": traj.params.to_dict() if traj.params is not None else None,
             "mode": traj.mode, "scheme": traj.scheme, "stop_reason": traj.stop_reason,
             "config": traj.config}
    np.savez(run_dir / "trajectory.npz", meta=np.array(json.dumps(exact)), **_flatten(traj))
    write_json(run_dir / "manifest.json", manifest(traj, extra))
    return run_dir


def required_files(run_dir) -> list[str]:
    run_dir = Path(run_dir)
    names = ["manifest.json", "monitors.csv", "trajectory.npz"]
    missing = [n for n in names if not (run_dir / n).exists()]
    if "manifest.json" not in missing:
        n = read_json(run_dir / "manifest.json").get("n_snapshots", 0)
        missing += [f"snapshots/{i:04d}.csv" for i in range(n)
                    if not (run_dir / "snapshots" / f"{i:04d}.csv").exists()]
    return missing


def read_run(run_dir) -> tuple[Trajectory, dict]:
    """Reload a run exactly; raises :class:`MissingRunFiles` listing what is absent."""
    run_dir = Path(run_dir)
    missing = required_files(run_dir)
    if missing:
        raise MissingRunFiles(run_dir, missing)
    meta = read_json(run_dir / "manifest.json")
    if meta.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"{run_dir}: schema version {meta.get('schema_version')} not supported")
    with np.load(run_dir / "trajectory.npz") as arrays:
        # full-precision copy of the run metadata; the manifest is rounded
        traj = _unflatten(arrays, json.loads(str(arrays["meta"])))
    return traj, meta
