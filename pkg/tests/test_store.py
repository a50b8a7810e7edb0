import csv
import io
import json
import math

import numpy as np
import pytest

from inhomperc import store
from inhomperc.config import RunConfig
from inhomperc.store import ResultRecord, StoreError


def _rec(kind="EstimateRecord", payload=None, cfg=None):
    cfg = cfg or RunConfig.from_ini("[sampling]\nseed = 1\n")
    return store.make_record(kind, "estimate-pi", cfg, payload or {"observable": "pi", "N": 4, "value": 0.5})


def test_record_kinds_validated():
    with pytest.raises(StoreError):
        ResultRecord("Mystery", "t", "c", "d", {}, {})


def test_append_and_read_back(tmp_path):
    path = str(tmp_path / "runs.jsonl")
    recs = [_rec(k) for k in store.RECORD_KINDS]
    store.append_records(path, recs[:2])
    store.append_records(path, recs[2:])
    assert store.read_records(path) == recs


def test_append_only(tmp_path):
    path = str(tmp_path / "runs.jsonl")
    store.append_records(path, [_rec()])
    before = open(path, "rb").read()
    store.append_records(path, [_rec(payload={"observable": "x"})])
    after = open(path, "rb").read()
    assert after.startswith(before) and len(after) > len(before)


def test_lines_are_canonical_json(tmp_path):
    path = str(tmp_path / "runs.jsonl")
    store.append_records(path, [_rec(payload={"b": 1, "a": np.float64(0.1), "c": np.int64(3), "d": np.bool_(True),
                                              "e": (1, 2), "f": math.inf})])
    line = open(path).read().splitlines()[0]
    d = json.loads(line)
    assert list(d) == sorted(d)
    assert d["payload"] == {"a": 0.1, "b": 1, "c": 3, "d": True, "e": [1, 2], "f": math.inf}


def test_source_date_epoch(monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")
    assert store.now_timestamp() == "1970-01-01T00:00:00Z"
    assert _rec().timestamp == "1970-01-01T00:00:00Z"


def test_missing_and_malformed_store(tmp_path):
    with pytest.raises(StoreError):
        store.read_records(str(tmp_path / "none.jsonl"))
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"schema_version": 1}\nnot json\n')
    with pytest.raises(StoreError, match="bad.jsonl:1"):
        store.read_records(str(bad))
    bad.write_text('{"schema_version": 99}\n')
    with pytest.raises(StoreError, match="schema version"):
        store.read_records(str(bad))


def test_empty_store_exports_header_only(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    text = store.export(str(path), "csv")
    assert text == ",".join(store.BASE_COLUMNS) + "\r\n"


def test_csv_covers_every_field(tmp_path):
    path = str(tmp_path / "runs.jsonl")
    recs = [
        _rec("EstimateRecord", {"observable": "pi", "estimate": {"mean": 0.25, "n_samples": 10}}),
        _rec("FitRecord", {"observable": "eta_1", "fit": {"exponent": 0.1, "window": [[8, 0.5, 1.0]]}}),
        _rec("MarginalReport", {"kappa": 1.0, "blocking": [[3, 0.01]], "verdict": "Unresolved"}),
        _rec("LengthRecord", {"observable": "length", "length": {"value": 13.0, "method": "crossing_threshold"},
                              "flag": False}),
    ]
    store.append_records(path, recs)
    text = store.export(path, "csv")
    assert "\r\n" in text
    rows = list(csv.DictReader(io.StringIO(text, newline="")))
    assert len(rows) == 4
    for rec, row in zip(recs, rows):
        flat = store.flatten(rec.payload, "payload.")
        flat.update(store.flatten(rec.config, "config."))
        for k, v in flat.items():
            assert row[k] == store._cell(v)
        for k in store.BASE_COLUMNS:
            assert row[k] == str(getattr(rec, k))
    assert rows[1]["payload.fit.window"] == "[[8, 0.5, 1.0]]"
    assert rows[3]["payload.flag"] == "false"
    assert rows[0]["payload.fit.exponent"] == ""


def test_jsonl_export_reimports(tmp_path):
    path = str(tmp_path / "runs.jsonl")
    recs = [_rec(k) for k in store.RECORD_KINDS]
    store.append_records(path, recs)
    out = str(tmp_path / "copy.jsonl")
    store.export(path, "jsonl", out)
    assert store.read_records(out) == recs
    assert open(out, "rb").read() == open(path, "rb").read()


def test_unknown_format(tmp_path):
    path = str(tmp_path / "runs.jsonl")
    store.append_records(path, [_rec()])
    with pytest.raises(StoreError):
        store.export(path, "xml")
