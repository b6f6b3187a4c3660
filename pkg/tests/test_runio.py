import json

import numpy as np
import pytest
from conftest import burgers_run, short_eulerian_run
from hypothesis import given
from hypothesis import strategies as st

from preshock import runio
from preshock.runio import MissingRunFiles, read_run, read_table, write_run, write_table


def _assert_same(a, b):
    fa, fb = runio._flatten(a), runio._flatten(b)
    assert fa.keys() == fb.keys()
    for key in fa:
        np.testing.assert_array_equal(fa[key], fb[key], err_msg=key)
    assert (a.params, a.mode, a.scheme, a.stop_reason) == (b.params, b.mode, b.scheme, b.stop_reason)
    assert json.dumps(a.config, sort_keys=True, default=str) == json.dumps(b.config, sort_keys=True, default=str)


@pytest.mark.parametrize("which", ["eulerian", "burgers"])
def test_round_trip_is_bit_exact(tmp_path, which):
    traj = short_eulerian_run(0.2, 1024, 0.01) if which == "eulerian" else burgers_run(512)[0]
    write_run(traj, tmp_path / "run", extra={"note": 1})
    back, meta = read_run(tmp_path / "run")
    _assert_same(traj, back)
    assert meta["note"] == 1 and meta["n_snapshots"] == len(traj)
    assert len(list((tmp_path / "run" / "snapshots").glob("*.csv"))) == len(traj)


def test_missing_files_are_listed(tmp_path):
    traj = burgers_run(512)[0]
    run = write_run(traj, tmp_path / "run")
    (run / "monitors.csv").unlink()
    (run / "snapshots" / "0003.csv").unlink()
    with pytest.raises(MissingRunFiles) as info:
        read_run(run)
    assert info.value.missing == ["monitors.csv", "snapshots/0003.csv"]


def test_schema_version_checked(tmp_path):
    run = write_run(burgers_run(512)[0], tmp_path / "run")
    meta = json.loads((run / "manifest.json").read_text())
    meta["schema_version"] = 99
    (run / "manifest.json").write_text(json.dumps(meta))
    with pytest.raises(ValueError, match="schema"):
        read_run(run)


def test_json_rounds_to_twelve_digits():
    out = json.loads(runio.dumps({"x": np.float64(1 / 3), "n": np.int64(4), "b": np.bool_(True),
                                  "v": np.array([0.1 + 0.2]), "inf": float("inf")}))
    assert out == {"x": 0.333333333333, "n": 4, "b": True, "v": [0.3], "inf": "inf"}


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=1, max_size=20))
def test_table_round_trip(tmp_path_factory, vals):
    path = tmp_path_factory.mktemp("t") / "t.csv"
    write_table(path, {"a": vals, "b": vals[::-1]})
    back = read_table(path)
    np.testing.assert_array_equal(back["a"], vals)
    np.testing.assert_array_equal(back["b"], vals[::-1])
