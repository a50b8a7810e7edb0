import csv
import io
import json
import subprocess
import sys

import pytest

from inhomperc import cli, store


@pytest.fixture(autouse=True)
def _pinned_clock(monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")


def _run(args, tmp_path, name="runs.jsonl"):
    path = str(tmp_path / name)
    return cli.run([*args, "--store", path]), path


def test_estimate_pi(tmp_path, capsys):
    rc, path = _run(["estimate-pi", "--N", "1", "--p", "0.5", "--samples", "100000", "--seed", "7"], tmp_path)
    assert rc == 0
    (rec,) = store.read_records(path)
    assert rec.kind == "EstimateRecord" and rec.command == "estimate-pi"
    e = rec.payload["estimate"]
    assert abs(e["mean"] - 63 / 128) <= 4 * e["std_error"]
    out = capsys.readouterr().out
    assert "estimate-pi" in out and "+-" in out


def test_every_command_writes_a_record_kind(tmp_path):
    cases = [
        (["estimate-pi-cond", "--n", "2", "--N", "8", "--p", "0.5", "--samples", "500"], "EstimateRecord"),
        (["estimate-crossing", "--N", "4", "--p", "0.5", "--samples", "500"], "EstimateRecord"),
        (["estimate-length", "--p", "0.7", "--samples", "500"], "LengthRecord"),
        (["measure-phi", "--kind", "powerlaw", "--w", "0.5", "--N", "8", "--samples", "200"], "EstimateRecord"),
        (["measure-psi", "--w", "0.5", "--N", "8", "--samples", "200"], "EstimateRecord"),
        (["compute-IN", "--kind", "powerlaw", "--w", "0.5", "--N", "64"], "FitRecord"),
        (["fit-one-arm", "--N", "1,2,4,8", "--samples", "500", "--n-boot", "20"], "FitRecord"),
        (["marginal-scan", "--kappas", "1", "--k-range", "1-2", "--samples", "200", "--n-boot", "10"],
         "MarginalReport"),
    ]
    for i, (args, kind) in enumerate(cases):
        rc, path = _run(args, tmp_path, f"s{i}.jsonl")
        assert rc == 0, args
        recs = store.read_records(path)
        assert recs and all(r.kind == kind for r in recs), args


@pytest.mark.parametrize("args", [
    ["estimate-pi", "--N", "4", "--p", "1.5", "--samples", "10"],
    ["estimate-pi", "--N", "four", "--p", "0.5"],
    ["estimate-pi", "--set", "sampling.colour=red"],
    ["fit-nu", "--method", "xi-tilde", "--p-list", "0.7,0.6,0.56"],
    ["estimate-pi", "--config", "/nonexistent.ini"],
    ["no-such-command"],
])
def test_bad_arguments_exit_2(args, tmp_path):
    rc, path = _run(args, tmp_path) if args[0] != "no-such-command" else (cli.run(args), None)
    assert rc == 2


def test_runtime_failure_exits_1(tmp_path, capsys):
    rc, _ = _run(["estimate-length", "--method", "xi", "--p", "0.5", "--samples", "100"], tmp_path)
    assert rc in (1, 2)
    rc = cli.run(["export", "--store", str(tmp_path / "missing.jsonl")])
    assert rc == 1
    assert "does not exist" in capsys.readouterr().err


def test_config_file_and_overrides(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[profile]\np = 0.5\n[experiment]\nN = 2\n[sampling]\nsamples = 300\nseed = 1\n")
    rc, path = _run(["estimate-pi", "--config", str(ini), "--set", "experiment.N=3"], tmp_path)
    assert rc == 0
    (rec,) = store.read_records(path)
    assert rec.config["experiment"]["N"] == [3]
    assert rec.payload["N"] == 3


def test_rerun_is_byte_identical_across_workers(tmp_path):
    args = ["iiic-dim", "--w", "0.5", "--N", "8,16,32", "--samples", "200", "--arm-N", "2,4,8,16",
            "--n-boot", "50", "--seed", "42"]
    rc1, p1 = _run([*args, "--workers", "1"], tmp_path, "a.jsonl")
    rc2, p2 = _run([*args, "--workers", "2"], tmp_path, "b.jsonl")
    rc3, p3 = _run([*args, "--workers", "1"], tmp_path, "c.jsonl")
    assert rc1 == rc2 == rc3 == 0
    a, b, c = (open(p, "rb").read() for p in (p1, p2, p3))
    assert a == b == c


def test_export_csv_and_jsonl(tmp_path, capsys):
    rc, path = _run(["estimate-pi", "--N", "1,2", "--p", "0.5", "--samples", "100"], tmp_path)
    assert rc == 0
    capsys.readouterr()
    assert cli.run(["export", "--store", path, "--format", "csv"]) == 0
    text = capsys.readouterr().out
    rows = list(csv.DictReader(io.StringIO(text, newline="")))
    assert [r["payload.N"] for r in rows] == ["1", "2"]
    out = str(tmp_path / "x.jsonl")
    assert cli.run(["export", "--store", path, "--format", "jsonl", "--out", out]) == 0
    assert [json.loads(l)["payload"]["N"] for l in open(out)] == [1, 2]


def test_selftest_passes(tmp_path):
    rc, path = _run(["selftest"], tmp_path)
    (rec,) = store.read_records(path)
    assert rc == 0, rec.payload
    assert rec.payload["passed"] and len(rec.payload["checks"]) >= 6


def test_module_entry_point(tmp_path):
    path = str(tmp_path / "m.jsonl")
    r = subprocess.run([sys.executable, "-m", "inhomperc", "estimate-pi", "--N", "1", "--p", "0.5",
                        "--samples", "100", "--store", path], capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert len(store.read_records(path)) == 1
