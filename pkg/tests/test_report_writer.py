import json
import math

import numpy as np
import pytest

from src.report_writer import ReportWriter, ReportWriterError, boundary_rows, coordinate_names, format_float, to_jsonable

HASH = "ab" * 32


def test_format_float_is_shortest_roundtrip():
    assert format_float(0.1) == "0.1"
    assert format_float(1e-20) == "1e-20"
    assert format_float(math.inf) == "inf"
    assert format_float(np.float64(2.5)) == "2.5"


def test_csv_layout(tmp_path):
    writer = ReportWriter(tmp_path, HASH)
    rows = [{"a": 1.0, "b": True}, {"a": 0.25, "c": None, "b": np.bool_(False)}]
    path = writer.write_csv("table.csv", rows)
    raw = path.read_bytes()
    assert raw == (
        f"config_hash,a,b,c\r\n{HASH},1.0,true,\r\n{HASH},0.25,false,\r\n".encode("utf-8")
    )
    assert writer.csv_columns(path) == ["config_hash", "a", "b", "c"]
    assert writer.written == [path]


def test_csv_explicit_columns_and_quoting(tmp_path):
    writer = ReportWriter(tmp_path, HASH)
    path = writer.write_csv("t.csv", [{"name": "x, y", "k": np.int64(3)}], columns=["k", "name"])
    assert path.read_text(encoding="utf-8").splitlines()[1] == f'{HASH},3,"x, y"'


def test_json_document(tmp_path):
    writer = ReportWriter(tmp_path / "nested", HASH)
    path = writer.write_json("summary.json", {"z": np.arange(3), "a": math.nan}, {"t.csv": ["config_hash", "k"]})
    text = path.read_text(encoding="utf-8")
    assert text.endswith("}\n")
    doc = json.loads(text)
    assert list(doc) == sorted(doc)
    assert doc["z"] == [0, 1, 2]
    assert doc["a"] == "nan"
    assert doc["config_hash"] == HASH
    assert doc["columns"] == {"t.csv": ["config_hash", "k"]}


def test_identical_inputs_give_identical_bytes(tmp_path):
    rows = [{"x": 1 / 3, "y": 2.0}]
    first = ReportWriter(tmp_path / "a", HASH).write_csv("t.csv", rows).read_bytes()
    second = ReportWriter(tmp_path / "b", HASH).write_csv("t.csv", rows).read_bytes()
    assert first == second


def test_to_jsonable():
    assert to_jsonable({1: (np.float32(0.5), np.int32(2))}) == {"1": [0.5, 2]}
    assert to_jsonable(-math.inf) == "-inf"


def test_unserializable_document(tmp_path):
    with pytest.raises(ReportWriterError):
        ReportWriter(tmp_path, HASH).write_json("bad.json", {"x": object()})


def test_boundary_rows():
    rows = boundary_rows(np.array([[0.0, 1.0], [2.0, 3.0]]))
    assert rows == [{"x": 0.0, "y": 1.0}, {"x": 2.0, "y": 3.0}]


def test_four_dimensional_rows_do_not_reuse_the_weight_column():
    (row,) = boundary_rows(np.array([[1.0, 2.0, 3.0, 4.0]]))
    assert list(row) == ["x", "y", "z", "t"]
    assert "w" not in row
    assert coordinate_names(3) == ["x", "y", "z"]
    with pytest.raises(ReportWriterError):
        coordinate_names(5)
