import json
import math

import numpy as np
import pytest

from transduce_sim.emit import (ImageEmitter, Table, table_from_csv, table_from_json, table_to_csv, table_to_json,
                                write_run_info, write_table)

META = {"config_hash": "ab" * 32, "name": "unit"}


def _table():
    rows = [{"x": 0.1, "n": 3, "ok": True, "label": "a,b", "v": math.inf},
            {"x": 1e-300, "n": -1, "ok": False, "label": "", "v": math.nan},
            {"x": np.float64(2.0) / 3, "n": np.int64(7), "ok": True, "label": "q\"uote", "v": -math.inf}]
    return Table.from_dicts("demo", rows, units={"x": "Hz"})


def test_numpy_scalars_become_plain():
    t = _table()
    assert type(t.rows[2][0]) is float and type(t.rows[2][1]) is int


def test_json_round_trip_exact():
    t = _table()
    back, meta = table_from_json(table_to_json(t, META))
    assert back.equals(t)
    assert back.units == {"x": "Hz"}
    assert meta["config_hash"] == META["config_hash"] and meta["schema_version"] == 1


def test_json_is_strict():
    doc = json.loads(table_to_json(_table(), META))
    assert doc["rows"][0][4] == {"float": "inf"}


def test_csv_round_trip_exact(tmp_path):
    t = _table()
    p = tmp_path / "demo.csv"
    table_to_csv(t, META, p)
    back, meta = table_from_csv(p)
    assert back.equals(t)
    assert meta["config_hash"] == META["config_hash"]
    assert p.read_text().startswith("# table: demo\n")


def test_equals_is_type_strict():
    a = Table("t", ["x"], [[1.0]])
    assert not a.equals(Table("t", ["x"], [[1]]))
    assert a.equals(Table("t", ["x"], [[1.0]]))


def test_write_table_and_run_info(tmp_path):
    paths = write_table(_table(), tmp_path / "out", META)
    assert sorted(p.name for p in paths) == ["demo.csv", "demo.json"]
    info = json.loads(write_run_info(tmp_path / "out", "sweep", ["sweep"], META, {"eta": math.nan}).read_text())
    assert info["command"] == "sweep" and info["eta"] == {"float": "nan"}
    assert info["backend"] in ("numba", "numpy")


def test_images_disabled_is_noop(tmp_path):
    assert ImageEmitter(False).heatmap(tmp_path / "x.png", [0, 1], [0, 1], np.zeros((2, 2)), "eta") is None


def test_heatmap_written(tmp_path):
    pytest.importorskip("matplotlib")
    p = ImageEmitter(True).heatmap(tmp_path / "x.png", [0.0, 1.0], [0.0, 1.0], np.eye(2), "eta")
    assert p.stat().st_size > 0
