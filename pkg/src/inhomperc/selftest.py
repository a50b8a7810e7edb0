"""Exhaustive and exact small-instance checks, bundled for ``inhomperc selftest``."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from . import estimators as est
from . import oracles
from .profile import PowerLaw, ScalingLaw
from .rng import derive_seeds
from .scaling import fit_power

MC_SAMPLES = 100_000
# small amplitude keeps the N = 1 densities (0.6 at r <= 1) away from 1
SMALL = PowerLaw(0.5, ScalingLaw(0.1))


def _within(mc: est.Estimate, exact: float, k: float = 4.0) -> tuple[bool, str]:
    z = abs(mc.mean - exact) / mc.std_error if mc.std_error > 0 else (0.0 if mc.mean == exact else math.inf)
    return z <= k, f"exact {exact:.6g}, MC {mc.mean:.6g} +- {mc.std_error:.2g} ({z:.2f} se)"


def check_pi_exact() -> dict:
    exact = oracles.exact_pi(1, Fraction(1, 2))
    mc = est.estimate_pi(1, 0.5, MC_SAMPLES, 7)
    ok, detail = _within(mc, float(exact))
    return {"name": "pi(1) at p=1/2", "passed": exact == Fraction(63, 128) and ok,
            "detail": f"enumeration {exact}; {detail}"}


def check_parallelogram_duality() -> dict:
    r = oracles.parallelogram_duality(6, 2)
    return {"name": "6x2 crossing duality", "passed": r.exceptions == 0,
            "detail": f"{r.configurations} configurations, {r.exceptions} exceptions"}


def check_annulus_duality() -> dict:
    r = oracles.annulus_duality(1, 3)
    return {"name": "annulus(1,3) circuit duality", "passed": r.exceptions == 0 and r.configurations == 2 ** 40,
            "detail": f"{r.configurations} configurations, {r.exceptions} exceptions, {r.nodes} nodes"}


def check_phi_exact() -> dict:
    prof = SMALL
    mean, _ = oracles.exact_phi(prof, 1)
    mc, _ = est.measure_phi(prof, 1, MC_SAMPLES, 11)
    ok, detail = _within(mc, mean)
    return {"name": "phi at N=1", "passed": ok, "detail": detail}


def check_psi_exact() -> dict:
    prof = SMALL
    exact = oracles.psi_mean_unit_scale(prof, 1)
    mc, _ = est.measure_psi_proxy(prof, 1, 1.0, MC_SAMPLES, 13)
    ok, detail = _within(mc, exact)
    return {"name": "psi proxy at N=1", "passed": ok, "detail": detail}


def check_xi_tilde_exact() -> dict:
    exact = oracles.exact_xi_tilde(0.7, 2)
    le = est.estimate_xi_tilde(0.7, 2, MC_SAMPLES, 17)
    se = le.diagnostics["std_error"]
    z = abs(le.value - exact) / se
    return {"name": "xi_tilde at p=0.7, box 2", "passed": z <= 4.0,
            "detail": f"exact {exact:.6g}, MC {le.value:.6g} +- {se:.2g} ({z:.2f} se)"}


def check_seed_collisions() -> dict:
    s = derive_seeds(12345, 1_000_000)
    n = np.unique(s).size
    return {"name": "derive_seed collisions", "passed": n == s.size,
            "detail": f"{s.size - n} collisions in {s.size} streams"}


def check_fit_power() -> dict:
    pts = [(x, 3.0 * x ** -0.5, 1.0) for x in (4.0, 8.0, 16.0, 32.0, 64.0)]
    f = fit_power(pts, n_boot=50)
    ok = abs(f.exponent + 0.5) < 1e-9 and abs(f.amplitude - 3.0) < 1e-9
    return {"name": "power fit on exact data", "passed": ok,
            "detail": f"exponent {f.exponent:.12g}, amplitude {f.amplitude:.12g}"}


CHECKS = (
    check_pi_exact,
    check_parallelogram_duality,
    check_annulus_duality,
    check_phi_exact,
    check_psi_exact,
    check_xi_tilde_exact,
    check_seed_collisions,
    check_fit_power,
)


def run_all() -> list[dict]:
    out = []
    for check in CHECKS:
        try:
            res = check()
        except Exception as exc:  # a broken check is a failed check
            res = {"name": check.__name__, "passed": False, "detail": f"raised {type(exc).__name__}: {exc}"}
        out.append(res)
    return out
