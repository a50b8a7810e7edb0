"""Command-line entry points.

Every subcommand reads a RunConfig (``--config``), applies flag overrides,
runs, appends its records to the JSONL store and prints a summary built from
those records.  Exit codes: 0 success, 1 runtime failure, 2 config error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from typing import Callable, Optional, Sequence

from . import __version__
from . import estimators as est
from . import scaling as sc
from . import store
from .config import ConfigError, RunConfig
from .lattice import Mode, as_geometry
from .profile import (
    Homogeneous,
    Marginal,
    PowerLaw,
    ProfileError,
    ScalingLaw,
    tabulated_from_lengths,
)
from .rng import derive_seed

log = logging.getLogger("inhomperc")

# flag -> (section, key)
FLAGS = {
    "--lattice": ("run", "lattice"),
    "--kind": ("profile", "kind"),
    "--p": ("profile", "p"),
    "--w": ("profile", "w"),
    "--kappa": ("profile", "kappa"),
    "--alpha": ("profile", "alpha"),
    "--amplitude": ("profile", "amplitude"),
    "--nu": ("profile", "nu"),
    "--table": ("profile", "table"),
    "--p-c": ("profile", "p_c"),
    "--c-ell": ("profile", "c_ell"),
    "--N": ("experiment", "N"),
    "--n": ("experiment", "n"),
    "--ratio": ("experiment", "ratio"),
    "--mode": ("experiment", "mode"),
    "--method": ("experiment", "method"),
    "--delta": ("experiment", "delta"),
    "--c": ("experiment", "c"),
    "--confidence": ("experiment", "confidence"),
    "--N-range": ("experiment", "N_range"),
    "--box-radius": ("experiment", "box_radius"),
    "--p-list": ("experiment", "p_list"),
    "--kappas": ("experiment", "kappas"),
    "--k-range": ("experiment", "k_range"),
    "--surrogate": ("experiment", "surrogate"),
    "--beta": ("experiment", "beta"),
    "--pi-table": ("experiment", "pi_table"),
    "--arm-N": ("experiment", "arm_N"),
    "--arm-samples": ("experiment", "arm_samples"),
    "--L-samples": ("experiment", "L_samples"),
    "--n-boot": ("experiment", "n_boot"),
    "--samples": ("sampling", "samples"),
    "--seed": ("sampling", "seed"),
    "--workers": ("sampling", "workers"),
    "--max-N": ("sampling", "max_N"),
}


def _dest(flag: str) -> str:
    return "opt_" + flag.lstrip("-").replace("-", "_")


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="RunConfig INI file")
    p.add_argument("--store", help=f"JSONL store (default ${store.STORE_ENV} or {store.DEFAULT_STORE})")
    p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                   help="override any config key")
    p.add_argument("-v", "--verbose", action="store_true")
    for flag, (section, key) in FLAGS.items():
        p.add_argument(flag, dest=_dest(flag), metavar=key.upper(), help=f"sets {section}.{key}")
    return p


# ---------------------------------------------------------------------------
# config helpers


def build_config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    for item in args.set:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(item, "expected SECTION.KEY=VALUE")
        lhs, raw = item.split("=", 1)
        section, key = lhs.strip().split(".", 1)
        cfg.set_raw(section, key, raw)
    for flag, (section, key) in FLAGS.items():
        raw = getattr(args, _dest(flag))
        if raw is not None:
            cfg.set_raw(section, key, raw)
    if args.store:
        cfg.set("run", "store", args.store)
    return cfg


def geometry(cfg: RunConfig):
    return as_geometry(cfg.get("run", "lattice"))


def p_c(cfg: RunConfig) -> float:
    v = cfg.get("profile", "p_c")
    return v if v is not None else geometry(cfg).p_c


def _alpha(cfg: RunConfig):
    if cfg.get("profile", "alpha") == "tabulated":
        return tabulated_from_lengths(cfg.require("profile", "table"), p_c(cfg))
    return ScalingLaw(cfg.get("profile", "amplitude"), cfg.get("profile", "nu"))


def build_profile(cfg: RunConfig):
    kind = cfg.get("profile", "kind")
    try:
        if kind == "homogeneous":
            return Homogeneous(density(cfg), p_c(cfg))
        if kind == "powerlaw":
            return PowerLaw(cfg.get("profile", "w"), _alpha(cfg), p_c(cfg))
        return Marginal(cfg.get("profile", "kappa"), _alpha(cfg), p_c(cfg))
    except ProfileError as exc:
        raise ConfigError("profile", str(exc)) from None


def density(cfg: RunConfig) -> float:
    p = cfg.get("profile", "p", p_c(cfg))
    if not 0 <= p <= 1:
        raise ConfigError("profile.p", f"density must lie in [0, 1], got {p}")
    return p


def samples(cfg: RunConfig, default: Optional[int] = None) -> int:
    n = cfg.get("sampling", "samples", default)
    if n is None:
        raise ConfigError("sampling.samples", "required for this command")
    if n < 1:
        raise ConfigError("sampling.samples", "must be positive")
    return n


def _require_p_above(cfg: RunConfig, p: float):
    if not p > p_c(cfg):
        raise ConfigError("profile.p", f"must exceed p_c = {p_c(cfg)}")


# ---------------------------------------------------------------------------
# commands; each returns a list of (kind, payload)

Payloads = list[tuple[str, dict]]


def cmd_estimate_pi(cfg: RunConfig) -> Payloads:
    g = geometry(cfg)
    Ns = cfg.require("experiment", "N")
    p = density(cfg)
    curve = est.one_arm_curve(Ns, p, samples(cfg), cfg.get("sampling", "seed"), g)
    return [("EstimateRecord", {"observable": "pi", "N": e.event["N"], "p": p, "estimate": e.to_dict()})
            for e in curve]


def _broadcast(a: list, b: list, ka: str, kb: str) -> list[tuple]:
    if len(a) == 1:
        a = a * len(b)
    if len(b) == 1:
        b = b * len(a)
    if len(a) != len(b):
        raise ConfigError(f"experiment.{ka}", f"length does not match experiment.{kb}")
    return list(zip(a, b))


def cmd_estimate_pi_cond(cfg: RunConfig) -> Payloads:
    g = geometry(cfg)
    p = density(cfg)
    seed = cfg.get("sampling", "seed")
    pairs = _broadcast(cfg.require("experiment", "n"), cfg.require("experiment", "N"), "n", "N")
    out = []
    for i, (n, N) in enumerate(pairs):
        s = seed if len(pairs) == 1 else derive_seed(seed, i)
        e = est.estimate_pi_cond(n, N, p, samples(cfg), s, g)
        out.append(("EstimateRecord", {"observable": "pi_cond", "n": n, "N": N, "p": p, "estimate": e.to_dict()}))
    return out


def cmd_estimate_crossing(cfg: RunConfig) -> Payloads:
    g = geometry(cfg)
    p = density(cfg)
    seed = cfg.get("sampling", "seed")
    ratio = cfg.get("experiment", "ratio")
    mode = Mode(cfg.get("experiment", "mode"))
    out = []
    for N in cfg.require("experiment", "N"):
        e = est.estimate_crossing(N, ratio, p, mode, samples(cfg), derive_seed(seed, N), g)
        out.append(("EstimateRecord", {"observable": "crossing", "N": N, "ratio": ratio, "mode": mode.value,
                                       "p": p, "estimate": e.to_dict()}))
    return out


def _length(cfg: RunConfig, p: float, method: str, seed: int) -> est.LengthEstimate:
    g = geometry(cfg)
    ex = lambda k: cfg.get("experiment", k)
    if method == "L":
        return est.estimate_L(p, ex("delta"), ex("c"), samples(cfg, 2000), ex("confidence"), seed,
                              cfg.get("sampling", "max_N"), g)
    if method == "xi-tilde":
        return est.estimate_xi_tilde(p, ex("box_radius"), samples(cfg, 20000), seed, g)
    Nr = ex("N_range")
    if Nr is None:
        # window from a preliminary L(p)
        L = est.estimate_L(p, ex("delta"), ex("c"), ex("L_samples") or 2000, ex("confidence"),
                           derive_seed(seed, 0), cfg.get("sampling", "max_N"), g)
        Nr = sc.decay_window(L.value)
    if method == "xi":
        return est.estimate_xi(p, Nr, samples(cfg, 20000), seed, g)
    return est.estimate_D3N_rate(p, Nr, samples(cfg, 20000), seed, g)


def cmd_estimate_length(cfg: RunConfig) -> Payloads:
    cfg.require("profile", "p")
    p = density(cfg)
    _require_p_above(cfg, p)
    method = cfg.get("experiment", "method")
    le = _length(cfg, p, method, cfg.get("sampling", "seed"))
    return [("LengthRecord", {"observable": "length", "method": method, "p": p, "length": le.to_dict()})]


def cmd_measure_phi(cfg: RunConfig) -> Payloads:
    g = geometry(cfg)
    prof = build_profile(cfg)
    seed = cfg.get("sampling", "seed")
    out = []
    for N in cfg.require("experiment", "N"):
        mean, var = est.measure_phi(prof, N, samples(cfg), derive_seed(seed, N), g)
        out.append(("EstimateRecord", {"observable": "phi", "N": N, "profile": prof.to_dict(),
                                       "estimate": mean.to_dict(), "variance": var.to_dict()}))
    return out


def _powerlaw(cfg: RunConfig) -> PowerLaw:
    if cfg.get("profile", "kind") == "homogeneous" and cfg.values["profile"].get("kind") is None:
        cfg.set("profile", "kind", "powerlaw")
    prof = build_profile(cfg)
    if not isinstance(prof, PowerLaw):
        raise ConfigError("profile.kind", "this command needs the powerlaw profile")
    return prof


def cmd_measure_psi(cfg: RunConfig) -> Payloads:
    g = geometry(cfg)
    prof = _powerlaw(cfg)
    c_ell = cfg.get("profile", "c_ell")
    seed = cfg.get("sampling", "seed")
    Ns = sorted(cfg.require("experiment", "N"))
    counts = est.psi_samples(prof, Ns, c_ell, samples(cfg), seed, g)
    out = []
    for m, N in enumerate(Ns):
        ev = {"kind": "psi_proxy", "N": N, "c_ell": c_ell, "profile": prof.to_dict(), "lattice": g.kind.value}
        mean = est.Estimate.from_samples(counts[:, m], seed, ev)
        var = est.sample_variance(counts[:, m], seed, ev)
        cv = math.sqrt(max(var.mean, 0.0)) / mean.mean if mean.mean > 0 else None
        out.append(("EstimateRecord", {"observable": "psi", "N": N, "profile": prof.to_dict(),
                                       "estimate": mean.to_dict(), "variance": var.to_dict(), "cv": cv}))
    return out


def cmd_compute_IN(cfg: RunConfig) -> Payloads:
    prof = _powerlaw(cfg)
    if cfg.get("experiment", "surrogate") == "one-arm":
        table = cfg.require("experiment", "pi_table")
        surrogate = est.OneArmAtL(tuple(tuple(t) for t in table))
    else:
        surrogate = est.ClosedForm(cfg.get("experiment", "beta"))
    out = []
    for N in cfg.require("experiment", "N"):
        val = est.compute_I_N(prof, N, surrogate)
        out.append(("FitRecord", {"observable": "I_N", "N": N, "profile": prof.to_dict(),
                                  "surrogate": cfg.get("experiment", "surrogate"), "I_N": val}))
    return out


def cmd_fit_one_arm(cfg: RunConfig) -> Payloads:
    g = geometry(cfg)
    p = density(cfg)
    Ns = cfg.get("experiment", "N") or [8, 16, 32, 64, 128, 256]
    fit, curve = sc.estimate_one_arm_exponent(p, Ns, samples(cfg), cfg.get("sampling", "seed"), g,
                                              cfg.get("experiment", "n_boot"))
    return [("FitRecord", {"observable": "eta_1", "p": p, "fit": fit.to_dict(),
                           "curve": [e.to_dict() for e in curve]})]


def cmd_iiic_dim(cfg: RunConfig) -> Payloads:
    g = geometry(cfg)
    ex = lambda k: cfg.get("experiment", k)
    rep = sc.estimate_DH(cfg.get("profile", "w"), cfg.require("experiment", "N"), cfg.get("profile", "c_ell"),
                         samples(cfg), cfg.get("sampling", "seed"), g,
                         ScalingLaw(cfg.get("profile", "amplitude"), cfg.get("profile", "nu")),
                         ex("arm_N") or (8, 16, 32, 64, 128, 256), ex("arm_samples"), None, ex("n_boot"))
    return [("FitRecord", {"observable": "D_H", **rep.to_dict()})]


def cmd_fit_nu(cfg: RunConfig) -> Payloads:
    g = geometry(cfg)
    method = cfg.get("experiment", "method")
    if method not in ("L", "xi"):
        raise ConfigError("experiment.method", "fit-nu supports L or xi")
    delta, c, seed = cfg.get("experiment", "delta"), cfg.get("experiment", "c"), cfg.get("sampling", "seed")
    max_N = cfg.get("sampling", "max_N")

    def window(p):
        # xi decay window sized from L at the same p; stream 2**32 + k keeps
        # these probes clear of the per-p streams used by the fit itself
        k = round(p * 1e6)
        L = est.estimate_L(p, delta, c, cfg.get("experiment", "L_samples") or 2000, 0.95,
                           derive_seed(seed, 2 ** 32 + k), max_N, g)
        return sc.decay_window(L.value)

    fit, lengths = sc.estimate_nu(cfg.require("experiment", "p_list"), delta, c, seed, g,
                                  samples(cfg, 2000), max_N, method, window, cfg.get("experiment", "n_boot"))
    return [("FitRecord", {"observable": "nu", "method": method, "fit": fit.to_dict(),
                           "lengths": [le.to_dict() for le in lengths]})]


def cmd_marginal_scan(cfg: RunConfig) -> Payloads:
    g = geometry(cfg)
    kappas = cfg.get("experiment", "kappas") or [cfg.get("profile", "kappa")]
    reps = sc.marginal_scan(kappas, cfg.require("experiment", "k_range"), cfg.get("profile", "nu"),
                            samples(cfg), cfg.get("sampling", "seed"), cfg.get("profile", "amplitude"), g,
                            min(cfg.get("experiment", "n_boot"), 200), include_critical=True)
    return [("MarginalReport", r.to_dict()) for r in reps]


def cmd_length_equivalence(cfg: RunConfig) -> Payloads:
    g = geometry(cfg)
    ex = lambda k: cfg.get("experiment", k)
    rows = sc.length_equivalence_report(ex("p_list") or [0.55, 0.60, 0.65], cfg.get("sampling", "seed"), g,
                                        samples(cfg, 20000), ex("L_samples") or 2000,
                                        cfg.get("sampling", "max_N"), ex("delta"), ex("c"))
    return [("LengthRecord", {"observable": "length_equivalence", **r.to_dict()}) for r in rows]


def cmd_selftest(cfg: RunConfig) -> Payloads:
    from . import selftest

    checks = selftest.run_all()
    return [("FitRecord", {"observable": "selftest", "checks": checks,
                           "passed": all(c["passed"] for c in checks)})]


COMMANDS: dict[str, tuple[Callable[[RunConfig], Payloads], str]] = {
    "estimate-pi": (cmd_estimate_pi, "one-arm probability pi(N)"),
    "estimate-pi-cond": (cmd_estimate_pi_cond, "annulus arm probability pi(n | N)"),
    "estimate-crossing": (cmd_estimate_crossing, "parallelogram crossing probability"),
    "estimate-length": (cmd_estimate_length, "characteristic length (L | xi | xi-tilde | d3n-rate)"),
    "measure-phi": (cmd_measure_phi, "size of the origin's cluster in S_N"),
    "measure-psi": (cmd_measure_psi, "local-cluster proxy count Psi_N"),
    "compute-IN": (cmd_compute_IN, "deterministic sum I_N"),
    "fit-one-arm": (cmd_fit_one_arm, "one-arm exponent eta_1"),
    "iiic-dim": (cmd_iiic_dim, "growth exponent D_H of E[Psi_N]"),
    "fit-nu": (cmd_fit_nu, "correlation-length exponent nu"),
    "marginal-scan": (cmd_marginal_scan, "blocking probabilities under the marginal profile"),
    "length-equivalence": (cmd_length_equivalence, "xi, L and D3N rate side by side"),
    "selftest": (cmd_selftest, "exhaustive small-instance oracle suite"),
}


# ---------------------------------------------------------------------------
# summaries


def _fmt(v) -> str:
    if isinstance(v, float):
        if math.isinf(v) or math.isnan(v):
            return str(v)
        return f"{v:.6g}"
    if isinstance(v, (list, dict)):
        return json.dumps(v, sort_keys=True)
    return str(v)


def summary_rows(rec: store.ResultRecord) -> list[tuple[str, str]]:
    """Human summary of one record, read back from the record itself."""
    d = rec.payload
    obs = d.get("observable")
    rows = []
    if "estimate" in d:
        e = d["estimate"]
        rows.append((_label(d), f"{_fmt(e['mean'])} +- {_fmt(e['std_error'])}  (n={e['n_samples']})"))
        if "variance" in d:
            rows.append(("  variance", _fmt(d["variance"]["mean"])))
        if d.get("cv") is not None:
            rows.append(("  cv", _fmt(d["cv"])))
    elif "length" in d:
        le = d["length"]
        se = le["diagnostics"].get("std_error")
        rows.append((f"{le['method']} p={_fmt(d['p'])}", _fmt(le["value"]) + (f" +- {_fmt(se)}" if se else "")))
    elif obs == "length_equivalence":
        rows.append((f"p={_fmt(d['p'])}", f"xi={_fmt(d['xi']['value'])} L={_fmt(d['L']['value'])} "
                                          f"d3n={_fmt(d['d3n_rate']['value'])}"))
        for k, v in sorted(d["ratios"].items()):
            rows.append((f"  {k}", _fmt(v) + ("  FLAGGED" if k in d["flagged"] else "")))
    elif obs == "I_N":
        rows.append((f"I_N N={d['N']}", _fmt(d["I_N"])))
    elif obs in ("eta_1", "nu"):
        f = d["fit"]
        rows.append((obs, f"{_fmt(f['exponent'])}  CI [{_fmt(f['ci_low'])}, {_fmt(f['ci_high'])}]  "
                          f"R2={_fmt(f['r_squared'])}"))
    elif obs == "D_H":
        f = d["DH_fit"]
        rows.append(("D_H fitted", f"{_fmt(f['exponent'])}  CI [{_fmt(f['ci_low'])}, {_fmt(f['ci_high'])}]"))
        rows.append(("D_H predicted", f"{_fmt(d['DH_predicted'])}  CI [{_fmt(d['predicted_ci'][0])}, "
                                      f"{_fmt(d['predicted_ci'][1])}]"))
        rows.append(("eta_1", _fmt(d["eta_fit"]["exponent"])))
    elif obs == "selftest":
        for c in d["checks"]:
            rows.append((c["name"], ("PASS " if c["passed"] else "FAIL ") + c["detail"]))
    elif rec.kind == "MarginalReport":
        label = "critical" if d["kappa"] == 0 else f"kappa={_fmt(d['kappa'])}"
        probs = " ".join(f"{k}:{_fmt(b)}" for k, b in d["blocking"])
        rows.append((label, f"blocking [{probs}]  decay {_fmt(d['fitted_decay_exponent'])} "
                            f"CI [{_fmt(d['ci_low'])}, {_fmt(d['ci_high'])}]  {d['verdict']}"))
    else:
        rows.append((rec.kind, _fmt(d)))
    return rows


def _label(d: dict) -> str:
    parts = [d["observable"]]
    for k in ("n", "N", "p", "ratio", "mode"):
        if k in d:
            parts.append(f"{k}={_fmt(d[k])}")
    return " ".join(parts)


def print_summary(command: str, records: Sequence[store.ResultRecord], path: str, out=None) -> None:
    out = out or sys.stdout
    rows = [r for rec in records for r in summary_rows(rec)]
    width = max([len(a) for a, _ in rows] + [8])
    print(f"{command}  ({len(records)} record(s) -> {path})", file=out)
    for a, b in rows:
        print(f"  {a.ljust(width)}  {b}", file=out)


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    ap = argparse.ArgumentParser(prog="inhomperc", description="Monte Carlo laboratory for inhomogeneous percolation")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_, description=help_)
    exp = sub.add_parser("export", help="export a store as csv or jsonl")
    exp.add_argument("--store", help="store to read")
    exp.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    exp.add_argument("--out", help="output file (default stdout)")
    return ap


def _export(args) -> int:
    path = args.store or store.default_store_path()
    text = store.export(path, args.format, args.out)
    if args.out is None:
        sys.stdout.write(text)
    return 0


def run(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "export":
            return _export(args)
        cfg = build_config(args)
        est.set_workers(cfg.get("sampling", "workers"))
        fn, _ = COMMANDS[args.command]
        payloads = fn(cfg)
        path = cfg.get("run", "store") or store.default_store_path()
        records = [store.make_record(kind, args.command, cfg, pl) for kind, pl in payloads]
        store.append_records(path, records)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (est.EstimationError, sc.FitError, store.StoreError, ProfileError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        log.debug("unexpected failure", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print_summary(args.command, records, path)
    if args.command == "selftest" and not records[0].payload["passed"]:
        return 1
    return 0


def main() -> None:
    sys.exit(run())
