"""Power-law fits and the scaling experiments built on the estimators."""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import optimize

from . import estimators as est
from .estimators import EstimationError, Estimate, LengthEstimate
from .lattice import TRIANGULAR, LatticeGeometry, Mode, as_geometry
from .profile import NU_TRIANGULAR, Homogeneous, Marginal, PowerLaw, ScalingLaw
from .rng import derive_seed

log = logging.getLogger(__name__)


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class PowerFit:
    exponent: float
    amplitude: float
    r_squared: float
    ci_low: float
    ci_high: float
    window: tuple[tuple[float, float, float], ...]

    def to_dict(self) -> dict:
        return {"exponent": self.exponent, "amplitude": self.amplitude, "r_squared": self.r_squared,
                "ci_low": self.ci_low, "ci_high": self.ci_high, "window": [list(p) for p in self.window]}

    @classmethod
    def from_dict(cls, d: dict) -> "PowerFit":
        return cls(d["exponent"], d["amplitude"], d["r_squared"], d["ci_low"], d["ci_high"],
                   tuple(tuple(p) for p in d["window"]))

    def decay(self) -> "PowerFit":
        """Same fit reported as a decay exponent, ``y ~ x**(-exponent)``."""
        return PowerFit(-self.exponent, self.amplitude, self.r_squared, -self.ci_high, -self.ci_low, self.window)


def _wls(lx, ly, w):
    W = w.sum()
    mx, my = (w * lx).sum() / W, (w * ly).sum() / W
    sxx = (w * (lx - mx) ** 2).sum()
    if sxx == 0:
        return None
    slope = (w * (lx - mx) * (ly - my)).sum() / sxx
    return slope, my - slope * mx


def fit_power(points: Sequence[tuple[float, float, float]], n_boot: int = 1000, seed: int = 0,
              confidence: float = 0.95, min_span: float = 4.0) -> PowerFit:
    """Weighted least squares of ``log y`` on ``log x``; percentile bootstrap
    over points for the exponent CI."""
    pts = [(float(x), float(y), float(w)) for x, y, w in points]
    if len(pts) < 3:
        raise FitError(f"power fit needs at least 3 points, got {len(pts)}")
    arr = np.array(pts)
    if np.any(arr[:, :2] <= 0) or not np.all(np.isfinite(arr)):
        raise FitError("power fit needs finite positive x and y")
    if np.any(arr[:, 2] <= 0):
        raise FitError("weights must be positive")
    x, y, w = arr.T
    if x.max() < min_span * x.min():
        raise FitError(f"x must span a factor {min_span:g}, got {x.min()}..{x.max()}")
    lx, ly = np.log(x), np.log(y)
    slope, icpt = _wls(lx, ly, w)
    pred = icpt + slope * lx
    my = (w * ly).sum() / w.sum()
    ss_tot = (w * (ly - my) ** 2).sum()
    ss_res = (w * (ly - pred) ** 2).sum()
    r2 = 1.0 if ss_tot <= 1e-300 else max(0.0, min(1.0, 1.0 - ss_res / ss_tot))
    rng = np.random.default_rng(seed)
    n = len(pts)
    boots = []
    for _ in range(n_boot):
        idx = rng.integers(0, n, n)
        fit = _wls(lx[idx], ly[idx], w[idx])
        if fit is not None:
            boots.append(fit[0])
    if boots:
        q = (1 - confidence) / 2
        lo, hi = np.quantile(boots, [q, 1 - q])
    else:
        lo = hi = slope
    lo, hi = min(float(lo), slope), max(float(hi), slope)
    return PowerFit(float(slope), float(math.exp(icpt)), float(r2), lo, hi, tuple(pts))


def _binomial_points(xs, ests: Sequence[Estimate], min_count: int = 10):
    """Fit points from Bernoulli estimates, skipping unresolved ones; weight is
    the inverse variance of ``log phat``."""
    pts = []
    for x, e in zip(xs, ests):
        k = e.mean * e.n_samples
        if k < min_count:
            continue
        if e.mean >= 1.0:
            pts.append((x, 1.0, float(e.n_samples)))
        else:
            pts.append((x, e.mean, k / (1 - e.mean)))
    return pts


def estimate_one_arm_exponent(p: float, N_list: Sequence[int], n_samples: int, seed: int,
                              g: LatticeGeometry = TRIANGULAR, n_boot: int = 1000) -> tuple[PowerFit, list[Estimate]]:
    """Decay exponent of ``pi(N)``; the fit's ``exponent`` is ``eta_1`` itself."""
    Ns = sorted(int(N) for N in N_list)
    if Ns[0] < 1 or Ns[-1] < 8 * Ns[0]:
        raise FitError("one-arm N_list must start at >= 1 and span a factor 8")
    curve = est.one_arm_curve(Ns, p, n_samples, seed, g)
    pts = _binomial_points(Ns, curve)
    if all(e.mean >= 1.0 for e in curve):
        window = tuple((float(N), 1.0, float(n_samples)) for N in Ns)
        return PowerFit(0.0, 1.0, 1.0, 0.0, 0.0, window), curve
    return fit_power(pts, n_boot, seed).decay(), curve


# ---------------------------------------------------------------------------
# IIIC dimension


@dataclass(frozen=True)
class DHReport:
    w: float
    dh_fit: PowerFit
    dh_predicted: float
    predicted_ci: tuple[float, float]
    eta_fit: PowerFit
    psi: tuple[tuple[int, Estimate, Estimate], ...]

    def to_dict(self) -> dict:
        return {
            "w": self.w,
            "DH_fit": self.dh_fit.to_dict(),
            "DH_predicted": self.dh_predicted,
            "predicted_ci": list(self.predicted_ci),
            "eta_fit": self.eta_fit.to_dict(),
            "psi": [{"N": N, "mean": m.to_dict(), "variance": v.to_dict()} for N, m, v in self.psi],
        }


def predicted_DH(w: float, eta: float) -> float:
    return 2.0 - w * eta


def direct_growth_slope(w: float, pi_fit: PowerFit, N_list: Sequence[int]) -> float:
    """Slope of ``log(N^2 pi(N^w))`` using the fitted pure power law for ``pi``."""
    Ns = np.asarray(sorted(N_list), dtype=np.float64)
    y = 2 * np.log(Ns) + np.log(pi_fit.amplitude) - pi_fit.exponent * w * np.log(Ns)
    return float(np.polyfit(np.log(Ns), y, 1)[0])


def estimate_DH(w: float, N_list: Sequence[int], c_ell: float, n_samples: int, seed: int,
                g: LatticeGeometry = TRIANGULAR, alpha: Optional[ScalingLaw] = None,
                arm_N_list: Sequence[int] = (8, 16, 32, 64, 128, 256), arm_samples: Optional[int] = None,
                eta_fit: Optional[PowerFit] = None, n_boot: int = 1000) -> DHReport:
    """Fitted growth exponent of ``E[Psi_N]`` against ``2 - w * eta_1``."""
    g = as_geometry(g)
    if not 0 < w < 1:
        raise FitError("w must lie in (0, 1)")
    prof = PowerLaw(w, alpha or ScalingLaw(), g.p_c)
    Ns = sorted(int(N) for N in N_list)
    counts = est.psi_samples(prof, Ns, c_ell, n_samples, derive_seed(seed, 0), g)
    psi = []
    pts = []
    for m, N in enumerate(Ns):
        ev = {"kind": "psi_proxy", "N": N, "c_ell": c_ell, "profile": prof.to_dict(), "lattice": g.kind.value}
        mean = Estimate.from_samples(counts[:, m], derive_seed(seed, 0), ev)
        var = est.sample_variance(counts[:, m], derive_seed(seed, 0), ev)
        psi.append((N, mean, var))
        if mean.mean <= 0:
            raise FitError(f"no proxy counts at N={N}")
        rel = mean.std_error / mean.mean if mean.std_error > 0 else 1e-6
        pts.append((N, mean.mean, 1.0 / rel ** 2))
    dh = fit_power(pts, n_boot, seed)
    if eta_fit is None:
        eta_fit, _ = estimate_one_arm_exponent(g.p_c, arm_N_list, arm_samples or n_samples,
                                               derive_seed(seed, 1), g, n_boot)
    pred = predicted_DH(w, eta_fit.exponent)
    ci = (predicted_DH(w, eta_fit.ci_high), predicted_DH(w, eta_fit.ci_low))
    return DHReport(w, dh, pred, ci, eta_fit, tuple(psi))


# ---------------------------------------------------------------------------
# nu from L(p)


def fit_nu(p_list: Sequence[float], lengths: Sequence[float], p_c: float, n_boot: int = 1000,
           seed: int = 0) -> PowerFit:
    """``L ~ (p - p_c)**(-nu)``; the returned exponent is ``nu``.

    Density offsets close to ``p_c`` are expensive, so the usual p lists
    (0.56 to 0.70 on the triangular lattice) span a factor 3; that is the
    span required here."""
    pts = [(p - p_c, L, 1.0) for p, L in zip(p_list, lengths)]
    return fit_power(pts, n_boot, seed, min_span=3.0).decay()


def estimate_nu(p_list: Sequence[float], delta: float = math.exp(-1), c: float = 1.0, seed: int = 0,
                g: LatticeGeometry = TRIANGULAR, n_samples: int = 2000, max_N: int = 512,
                method: str = "L", N_range_for: Optional[callable] = None,
                n_boot: int = 1000) -> tuple[PowerFit, list[LengthEstimate]]:
    """Fit ``nu`` from ``L(p)`` (or from ``xi(p)`` with ``method='xi'``)."""
    g = as_geometry(g)
    kept_p, kept = [], []
    for i, p in enumerate(sorted(p_list, reverse=True)):
        try:
            if method == "L":
                le = est.estimate_L(p, delta, c, n_samples, 0.95, derive_seed(seed, i), max_N, g)
            elif method == "xi":
                Nr = N_range_for(p) if N_range_for else range(1, 13)
                le = est.estimate_xi(p, Nr, n_samples, derive_seed(seed, i), g)
            else:
                raise FitError(f"unknown nu method {method!r}")
        except EstimationError as exc:
            warnings.warn(f"dropping p={p}: {exc}")
            continue
        kept_p.append(p)
        kept.append(le)
    if len(kept) < 3:
        raise FitError(f"only {len(kept)} usable lengths; need 3")
    return fit_nu(kept_p, [le.value for le in kept], g.p_c, n_boot, seed), kept


# ---------------------------------------------------------------------------
# marginal scan

VERDICTS = ("BlockadeDiverges", "BlockadeSummable", "Unresolved")


@dataclass(frozen=True)
class MarginalReport:
    kappa: float
    blocking: tuple[tuple[int, float], ...]
    counts: tuple[tuple[int, int, int, bool], ...]  # (k, blocked, n, degenerate)
    fitted_decay_exponent: float
    ci_low: float
    ci_high: float
    verdict: str

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")

    def to_dict(self) -> dict:
        return {"kappa": self.kappa, "blocking": [list(b) for b in self.blocking],
                "counts": [list(c) for c in self.counts],
                "fitted_decay_exponent": self.fitted_decay_exponent, "ci_low": self.ci_low,
                "ci_high": self.ci_high, "verdict": self.verdict}

    @classmethod
    def from_dict(cls, d: dict) -> "MarginalReport":
        return cls(d["kappa"], tuple(tuple(b) for b in d["blocking"]), tuple(tuple(c) for c in d["counts"]),
                   d["fitted_decay_exponent"], d["ci_low"], d["ci_high"], d["verdict"])


def _neg_loglik(theta, ks, blocked, n):
    logA, a = theta
    P = np.minimum(np.exp(logA - a * np.log(ks)), 1.0 - 1e-12)
    P = np.maximum(P, 1e-300)
    return -np.sum(blocked * np.log(P) + (n - blocked) * np.log1p(-P))


def fit_blocking_decay(ks, blocked, n) -> float:
    """Binomial maximum likelihood for ``P(k) = A k**(-a)``; ``inf`` when no
    scale is ever blocked."""
    ks = np.asarray(ks, dtype=np.float64)
    blocked = np.asarray(blocked, dtype=np.float64)
    n = np.asarray(n, dtype=np.float64)
    if blocked.sum() == 0:
        return math.inf
    if len(ks) < 2:
        raise FitError("decay fit needs at least two non-degenerate scales")
    lk = np.log(ks)
    # start from the log-log least squares line through smoothed frequencies
    ph = (blocked + 0.5) / (n + 1.0)
    a0, b0 = np.polyfit(lk, np.log(ph), 1)
    res = optimize.minimize(_neg_loglik, x0=[b0, -a0], args=(ks, blocked, n), method="Nelder-Mead",
                            options={"xatol": 1e-9, "fatol": 1e-10, "maxiter": 4000})
    return float(res.x[1])


def _verdict(lo: float, hi: float) -> str:
    if hi < 1:
        return "BlockadeDiverges"
    if lo > 1:
        return "BlockadeSummable"
    return "Unresolved"


def _report(kappa, ks, blocked, n, degenerate, n_boot, boot_seed) -> MarginalReport:
    live = [i for i in range(len(ks)) if not degenerate[i]]
    kk = np.array([ks[i] for i in live], dtype=np.float64)
    bb = np.array([blocked[i] for i in live], dtype=np.float64)
    nn = np.array([n for _ in live], dtype=np.float64)
    if len(live) == 0:
        a, lo, hi = math.inf, math.inf, math.inf
    else:
        a = fit_blocking_decay(kk, bb, nn)
        rng = np.random.default_rng(boot_seed)
        boots = []
        for _ in range(n_boot):
            bs = rng.binomial(nn.astype(np.int64), bb / nn)
            boots.append(fit_blocking_decay(kk, bs, nn))
        boots = np.array(boots)
        lo, hi = (float(v) for v in np.quantile(boots, [0.025, 0.975], method="nearest"))
        lo, hi = min(lo, a), max(hi, a)
    blocking = tuple((int(k), blocked[i] / n) for i, k in enumerate(ks))
    counts = tuple((int(k), int(blocked[i]), int(n), bool(degenerate[i])) for i, k in enumerate(ks))
    return MarginalReport(float(kappa), blocking, counts, a, lo, hi, _verdict(lo, hi))


def marginal_scan(kappa_list: Sequence[float], k_range: Sequence[int], nu: float = NU_TRIANGULAR,
                  n_samples: int = 2000, seed: int = 0, amplitude: float = 1.0,
                  g: LatticeGeometry = TRIANGULAR, n_boot: int = 200,
                  include_critical: bool = False) -> list[MarginalReport]:
    """Blocking-circuit probability of ``S_{3^(k+1)} \\ S_{3^k}`` under the
    marginal profile, per ``kappa`` and ``k``.

    Scale ``k`` uses seed base ``derive_seed(seed, k)`` for every ``kappa``,
    so all profiles see the same uniforms.  Marginal densities dominate
    ``p_c`` and grow with ``kappa``, so a replica blocked under some profile
    is blocked under every smaller one, down to ``p_c``.  Only replicas still
    blocked are re-examined as ``kappa`` grows; the result is identical to
    testing every replica.  ``include_critical`` prepends the ``p_c``
    reference as a report with ``kappa = 0``.
    """
    g = as_geometry(g)
    ks = sorted(int(k) for k in k_range)
    if ks[0] < 0:
        raise FitError("k must be >= 0")
    kappas = sorted(float(x) for x in kappa_list)
    if kappas and kappas[0] <= 0:
        raise FitError("kappa must be positive")
    offs = g.offsets(Mode.PRIMAL)
    crit = Homogeneous(g.p_c, g.p_c)
    # per k: indices of replicas blocked under the current profile
    alive: dict[int, np.ndarray] = {}
    crit_blocked = []
    for k in ks:
        inner, outer = 3 ** k, 3 ** (k + 1)
        cross = est.annulus_outcomes(crit, inner, outer, n_samples, derive_seed(seed, k), g)
        alive[k] = np.flatnonzero(~cross)
        crit_blocked.append(alive[k].size)
    reports = []
    if include_critical:
        reports.append(_report(0.0, ks, crit_blocked, n_samples, [False] * len(ks), n_boot,
                               derive_seed(seed, 10_000)))
    law = ScalingLaw(amplitude, nu)
    for j, kappa in enumerate(kappas):
        prof = Marginal(kappa, law, g.p_c)
        blocked, degenerate = [], []
        for k in ks:
            inner, outer = 3 ** k, 3 ** (k + 1)
            dens = prof.radial_table(outer)
            if np.all(dens[inner + 1:] >= 1.0):
                alive[k] = alive[k][:0]
                blocked.append(0)
                degenerate.append(True)
                continue
            idx = alive[k]
            if idx.size:
                out = est._kernels.drive_annulus_subset(est._u64(derive_seed(seed, k)), idx, dens, offs,
                                                        inner, outer, est.workers())
                idx = idx[~out]
            alive[k] = idx
            blocked.append(int(idx.size))
            degenerate.append(False)
        reports.append(_report(kappa, ks, blocked, n_samples, degenerate, n_boot, derive_seed(seed, 10_001 + j)))
    return reports


# ---------------------------------------------------------------------------
# length equivalence


@dataclass(frozen=True)
class EquivalenceRow:
    p: float
    xi: LengthEstimate
    L: LengthEstimate
    d3n_rate: LengthEstimate
    ratios: dict
    flagged: tuple[str, ...]

    def to_dict(self) -> dict:
        return {"p": self.p, "xi": self.xi.to_dict(), "L": self.L.to_dict(), "d3n_rate": self.d3n_rate.to_dict(),
                "ratios": self.ratios, "flagged": list(self.flagged)}


def decay_window(L: float, n_points: int = 10) -> list[int]:
    """Distances for the decay fits, from about ``L/4`` to ``2L``."""
    lo = max(1, round(L / 4))
    hi = max(4 * lo, math.ceil(2 * L))
    return sorted(set(np.linspace(lo, hi, n_points).round().astype(int).tolist()))


def length_equivalence_report(p_list: Sequence[float], seed: int = 0, g: LatticeGeometry = TRIANGULAR,
                              n_samples: int = 20000, L_samples: int = 2000, max_N: int = 512,
                              delta: float = math.exp(-1), c: float = 1.0,
                              bracket: tuple[float, float] = (0.1, 10.0)) -> list[EquivalenceRow]:
    """``xi``, ``L`` and the dual crossing rate per ``p``, with pairwise ratios."""
    g = as_geometry(g)
    rows = []
    for i, p in enumerate(p_list):
        s = derive_seed(seed, i)
        L = est.estimate_L(p, delta, c, L_samples, 0.95, derive_seed(s, 0), max_N, g)
        Nr = decay_window(L.value)
        xi = est.estimate_xi(p, Nr, n_samples, derive_seed(s, 1), g)
        d3 = est.estimate_D3N_rate(p, Nr, n_samples, derive_seed(s, 2), g)
        ratios = {"xi/L": xi.value / L.value, "d3n/xi": d3.value / xi.value, "d3n/L": d3.value / L.value}
        flagged = tuple(k for k, v in ratios.items() if not bracket[0] <= v <= bracket[1])
        rows.append(EquivalenceRow(p, xi, L, d3, ratios, flagged))
    return rows
