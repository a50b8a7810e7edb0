"""Run configuration: an INI file with four sections.

::

    [run]         lattice, store
    [profile]     kind, p, w, kappa, alpha, amplitude, nu, table, p_c, c_ell
    [experiment]  per-command parameters (N, n, ratio, mode, method, ...)
    [sampling]    samples, seed, workers, max_N

Lists are comma separated (``N = 8,16,32``); ``k_range`` also accepts
``3-7``.  Length tables are ``p:length`` pairs (``table = 0.55:35,0.6:13``).
Unknown sections or keys are rejected.
"""

from __future__ import annotations

import configparser
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable


class ConfigError(ValueError):
    def __init__(self, key: str, msg: str):
        super().__init__(f"{key}: {msg}")
        self.key = key


def _int_list(s: str) -> list[int]:
    s = s.strip()
    if "-" in s and "," not in s and not s.startswith("-"):
        a, b = s.split("-")
        return list(range(int(a), int(b) + 1))
    return [int(v) for v in s.split(",") if v.strip()]


def _float_list(s: str) -> list[float]:
    return [float(v) for v in s.split(",") if v.strip()]


def _pairs(s: str) -> list[list[float]]:
    out = []
    for item in s.split(","):
        if item.strip():
            a, b = item.split(":")
            out.append([float(a), float(b)])
    return out


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _choice(*opts: str) -> Callable[[str], str]:
    def parse(s: str) -> str:
        v = s.strip()
        if v not in opts:
            raise ValueError(f"expected one of {', '.join(opts)}, got {v!r}")
        return v

    return parse


def _fmt(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, list):
        if v and isinstance(v[0], list):
            return ",".join(f"{_fmt(a)}:{_fmt(b)}" for a, b in v)
        return ",".join(_fmt(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


# (parser, default); None default means "unset"
SCHEMA: dict[str, dict[str, tuple[Callable[[str], Any], Any]]] = {
    "run": {
        "lattice": (_choice("triangular", "square"), "triangular"),
        "store": (str, None),
    },
    "profile": {
        "kind": (_choice("homogeneous", "powerlaw", "marginal"), "homogeneous"),
        "p": (float, None),
        "w": (float, 0.5),
        "kappa": (float, 1.0),
        "alpha": (_choice("scaling", "tabulated"), "scaling"),
        "amplitude": (float, 1.0),
        "nu": (float, 4.0 / 3.0),
        "table": (_pairs, None),
        "p_c": (float, None),
        "c_ell": (float, 1.0),
    },
    "experiment": {
        "N": (_int_list, None),
        "n": (_int_list, None),
        "ratio": (int, 3),
        "mode": (_choice("primal", "vacant"), "primal"),
        "method": (_choice("L", "xi", "xi-tilde", "d3n-rate"), "L"),
        "delta": (float, math.exp(-1)),
        "c": (float, 1.0),
        "confidence": (float, 0.95),
        "N_range": (_int_list, None),
        "box_radius": (int, None),
        "p_list": (_float_list, None),
        "kappas": (_float_list, None),
        "k_range": (_int_list, None),
        "surrogate": (_choice("closed-form", "one-arm"), "closed-form"),
        "beta": (float, 5.0 / 36.0),
        "pi_table": (_pairs, None),
        "arm_N": (_int_list, None),
        "arm_samples": (int, None),
        "L_samples": (int, None),
        "n_boot": (int, 1000),
    },
    "sampling": {
        "samples": (int, None),
        "seed": (int, 0),
        "workers": (int, 1),
        "max_N": (int, 512),
    },
}

# keys that change how a run executes but never what it computes
EXECUTION_KEYS = {("run", "store"), ("sampling", "workers")}


@dataclass
class RunConfig:
    values: dict[str, dict[str, Any]] = field(default_factory=lambda: {s: {} for s in SCHEMA})

    def get(self, section: str, key: str, default: Any = None) -> Any:
        v = self.values.get(section, {}).get(key)
        if v is not None:
            return v
        sd = SCHEMA[section][key][1]
        return sd if sd is not None else default

    def require(self, section: str, key: str) -> Any:
        v = self.get(section, key)
        if v is None:
            raise ConfigError(f"{section}.{key}", "required for this command")
        return v

    def set_raw(self, section: str, key: str, raw: str) -> None:
        if section not in SCHEMA:
            raise ConfigError(section, "unknown section")
        if key not in SCHEMA[section]:
            raise ConfigError(f"{section}.{key}", "unknown key")
        parse = SCHEMA[section][key][0]
        try:
            self.values[section][key] = parse(raw)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{section}.{key}", f"invalid value {raw!r} ({exc})") from None

    def set(self, section: str, key: str, value: Any) -> None:
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError(f"{section}.{key}", "unknown key")
        self.values[section][key] = value

    # -- serialisation

    @classmethod
    def from_ini(cls, text: str) -> "RunConfig":
        cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
        cp.optionxform = str
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError("file", str(exc)) from None
        cfg = cls()
        for section in cp.sections():
            for key, raw in cp.items(section):
                cfg.set_raw(section, key, raw)
        return cfg

    @classmethod
    def load(cls, path: str) -> "RunConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                return cls.from_ini(fh.read())
        except OSError as exc:
            raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None

    def to_ini(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        for section in SCHEMA:
            items = {k: _fmt(v) for k, v in sorted(self.values.get(section, {}).items()) if v is not None}
            cp[section] = items
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    def canonical(self) -> dict:
        """Explicit values that bear on results, for records and digests."""
        out: dict[str, dict[str, Any]] = {}
        for section in SCHEMA:
            d = {k: v for k, v in sorted(self.values.get(section, {}).items())
                 if v is not None and (section, k) not in EXECUTION_KEYS}
            out[section] = d
        return out

    def digest(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def __eq__(self, other):
        if not isinstance(other, RunConfig):
            return NotImplemented
        strip = lambda v: {s: {k: x for k, x in d.items() if x is not None} for s, d in v.items()}
        return strip(self.values) == strip(other.values)
