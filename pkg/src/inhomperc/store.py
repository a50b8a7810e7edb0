"""Append-only JSONL run store and its exports.

Each line is one record::

    {"schema_version": 1, "kind": "EstimateRecord", "timestamp": "...",
     "command": "estimate-pi", "config_digest": "...", "config": {...},
     "payload": {...}}

Keys are sorted and floats use Python's shortest round-trip repr, so a
record's bytes depend only on its content.  Non-finite floats are written as
``Infinity``/``NaN`` (Python's JSON extension).  The timestamp honours
``SOURCE_DATE_EPOCH`` when set, which makes re-runs byte-identical.
"""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import os
from dataclasses import dataclass
from typing import Iterable, Optional

SCHEMA_VERSION = 1
RECORD_KINDS = ("EstimateRecord", "FitRecord", "MarginalReport", "LengthRecord")
STORE_ENV = "INHOMPERC_STORE"
DEFAULT_STORE = "inhomperc-runs.jsonl"
BASE_COLUMNS = ("schema_version", "kind", "timestamp", "command", "config_digest")


class StoreError(RuntimeError):
    pass


def default_store_path() -> str:
    return os.environ.get(STORE_ENV, DEFAULT_STORE)


def now_timestamp() -> str:
    sde = os.environ.get("SOURCE_DATE_EPOCH")
    if sde is not None:
        t = _dt.datetime.fromtimestamp(int(sde), tz=_dt.timezone.utc)
    else:
        t = _dt.datetime.now(tz=_dt.timezone.utc).replace(microsecond=0)
    return t.strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class ResultRecord:
    kind: str
    timestamp: str
    command: str
    config_digest: str
    config: dict
    payload: dict
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if self.kind not in RECORD_KINDS:
            raise StoreError(f"unknown record kind {self.kind!r}")

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "kind": self.kind,
            "timestamp": self.timestamp,
            "command": self.command,
            "config_digest": self.config_digest,
            "config": self.config,
            "payload": self.payload,
        }

    def to_line(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ResultRecord":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise StoreError(f"unsupported schema version {d.get('schema_version')!r}")
        return cls(d["kind"], d["timestamp"], d["command"], d["config_digest"], d["config"], d["payload"],
                   d["schema_version"])


def make_record(kind: str, command: str, cfg, payload: dict) -> ResultRecord:
    # round-trip through JSON so tuples and numpy scalars normalise
    payload = json.loads(json.dumps(payload, default=_jsonable))
    return ResultRecord(kind, now_timestamp(), command, cfg.digest(), cfg.canonical(), payload)


def _jsonable(o):
    import numpy as np

    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if hasattr(o, "to_dict"):
        return o.to_dict()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def append_records(path: str, records: Iterable[ResultRecord]) -> None:
    """Append whole lines; the file is only ever opened for appending."""
    lines = "".join(r.to_line() + "\n" for r in records)
    if not lines:
        return
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    with open(path, "a", encoding="utf-8", newline="\n") as fh:
        fh.write(lines)
        fh.flush()
        os.fsync(fh.fileno())


def read_records(path: str) -> list[ResultRecord]:
    if not os.path.exists(path):
        raise StoreError(f"store {path} does not exist")
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(ResultRecord.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError) as exc:
                raise StoreError(f"{path}:{lineno}: malformed record ({exc})") from None
    return out


def flatten(d, prefix: str = "") -> dict:
    """Nested dicts become dotted keys; lists stay whole as JSON text."""
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(flatten(v, key + "."))
        elif isinstance(v, list):
            out[key] = json.dumps(v, sort_keys=True)
        else:
            out[key] = v
    return out


def export_csv(records: list[ResultRecord]) -> str:
    rows = []
    extra: set[str] = set()
    for r in records:
        row = {k: getattr(r, k) for k in BASE_COLUMNS}
        flat = flatten(r.payload, "payload.")
        flat.update(flatten(r.config, "config."))
        extra.update(flat)
        row.update(flat)
        rows.append(row)
    header = list(BASE_COLUMNS) + sorted(extra)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=header, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
    w.writeheader()
    for row in rows:
        w.writerow({k: _cell(row.get(k)) for k in header})
    return buf.getvalue()


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def export(path: str, fmt: str, out: Optional[str] = None) -> str:
    """Export a store as ``csv`` or ``jsonl``; returns the text (and writes
    ``out`` when given)."""
    records = read_records(path)
    fmt = fmt.lower()
    if fmt == "csv":
        text = export_csv(records)
    elif fmt == "jsonl":
        text = "".join(r.to_line() + "\n" for r in records)
    else:
        raise StoreError(f"unknown export format {fmt!r}")
    if out is not None:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text
