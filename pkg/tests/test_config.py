import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from inhomperc.config import SCHEMA, ConfigError, RunConfig


def test_defaults():
    cfg = RunConfig()
    assert cfg.get("run", "lattice") == "triangular"
    assert cfg.get("experiment", "delta") == pytest.approx(math.exp(-1))
    assert cfg.get("sampling", "workers") == 1
    assert cfg.get("profile", "p") is None
    assert cfg.get("profile", "p", 0.5) == 0.5


def test_parse_lists_ranges_and_pairs():
    cfg = RunConfig.from_ini(
        "[experiment]\nN = 8,16,32\nk_range = 3-7\np_list = 0.7, 0.65\n"
        "[profile]\ntable = 0.55:35,0.6:13\n"
    )
    assert cfg.get("experiment", "N") == [8, 16, 32]
    assert cfg.get("experiment", "k_range") == [3, 4, 5, 6, 7]
    assert cfg.get("experiment", "p_list") == [0.7, 0.65]
    assert cfg.get("profile", "table") == [[0.55, 35.0], [0.6, 13.0]]


@pytest.mark.parametrize("text,key", [
    ("[bogus]\nx = 1\n", "bogus"),
    ("[run]\ncolour = red\n", "run.colour"),
    ("[sampling]\nsamples = many\n", "sampling.samples"),
    ("[experiment]\nmode = sideways\n", "experiment.mode"),
    ("[profile]\nkind = fractal\n", "profile.kind"),
    ("not an ini file", "file"),
])
def test_rejects_bad_input_naming_the_key(text, key):
    with pytest.raises(ConfigError) as ei:
        RunConfig.from_ini(text)
    assert ei.value.key == key


def test_require():
    cfg = RunConfig()
    with pytest.raises(ConfigError, match="profile.p"):
        cfg.require("profile", "p")


def test_missing_file():
    with pytest.raises(ConfigError):
        RunConfig.load("/nonexistent/run.ini")


def test_round_trip():
    cfg = RunConfig.from_ini(
        "[run]\nlattice = square\n[profile]\nkind = marginal\nkappa = 0.25\ntable = 0.55:35\n"
        "[experiment]\nN = 1,2\nk_range = 3-5\n[sampling]\nseed = 9\nsamples = 100\n"
    )
    back = RunConfig.from_ini(cfg.to_ini())
    assert back == cfg
    assert back.digest() == cfg.digest()


_values = {
    ("sampling", "seed"): st.integers(0, 2 ** 63),
    ("sampling", "samples"): st.integers(1, 10 ** 9),
    ("profile", "p"): st.floats(0, 1),
    ("experiment", "N"): st.lists(st.integers(1, 4096), min_size=1, max_size=6),
    ("experiment", "p_list"): st.lists(st.floats(0.5, 1), min_size=1, max_size=5),
}


@given(st.fixed_dictionaries({f"{s}.{k}": v for (s, k), v in _values.items()}))
def test_round_trip_property(vals):
    cfg = RunConfig()
    for sk, v in vals.items():
        s, k = sk.split(".")
        cfg.set(s, k, v)
    assert RunConfig.from_ini(cfg.to_ini()) == cfg


def test_digest_ignores_execution_keys():
    a = RunConfig.from_ini("[sampling]\nseed = 3\nworkers = 1\n")
    b = RunConfig.from_ini("[sampling]\nseed = 3\nworkers = 8\n[run]\nstore = /tmp/x.jsonl\n")
    c = RunConfig.from_ini("[sampling]\nseed = 4\n")
    assert a.digest() == b.digest()
    assert a.digest() != c.digest()
    assert "workers" not in b.canonical()["sampling"]


def test_schema_sections():
    assert set(SCHEMA) == {"run", "profile", "experiment", "sampling"}
