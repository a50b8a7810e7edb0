"""Monte Carlo estimators for arm, crossing and length observables.

Replica ``i`` of any estimator uses seed ``derive_seed(seed_base, i)``, so a
run is reproducible from ``(seed_base, n_samples)`` alone.  Estimators with an
internal sweep (over ``N`` or a search) derive one ``seed_base`` per sweep
point with ``derive_seed(seed, point)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numba
import numpy as np
from scipy import stats

from . import _kernels
from .engine import (
    annulus_arm,
    blocking_circuit,
    crossing,
    occupied_circuit,
    one_arm,
    proxy_radius,
    ell_table,
    sample_region,
)
from .lattice import (
    TRIANGULAR,
    Annulus,
    Box,
    LatticeGeometry,
    Mode,
    Orientation,
    Parallelogram,
    as_geometry,
    enclosing_radius,
)
from .profile import DensityProfile, Homogeneous, PowerLaw
from .rng import MASK64, derive_seed

log = logging.getLogger(__name__)

_WORKERS = 1


class EstimationError(RuntimeError):
    pass


def set_workers(n: int) -> None:
    """Number of replica chunks (and threads, up to what numba allows)."""
    global _WORKERS
    _WORKERS = max(1, int(n))
    numba.set_num_threads(min(_WORKERS, numba.config.NUMBA_NUM_THREADS))


def workers() -> int:
    return _WORKERS


def _u64(seed: int) -> np.uint64:
    return np.uint64(int(seed) & MASK64)


# ---------------------------------------------------------------------------
# result types


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    n_samples: int
    seed_base: int
    event: dict
    replicas: tuple[tuple[int, int], ...] = ()

    @classmethod
    def from_samples(cls, values, seed_base: int, event: dict, start: int = 0) -> "Estimate":
        v = np.asarray(values, dtype=np.float64)
        n = v.size
        if n == 0:
            raise EstimationError("an estimate needs at least one sample")
        se = float(v.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return cls(float(v.mean()), se, n, int(seed_base), dict(event), ((start, start + n),))

    def _sums(self) -> tuple[float, float]:
        n = self.n_samples
        s1 = self.mean * n
        var = self.std_error ** 2 * n
        return s1, (n - 1) * var + n * self.mean ** 2

    def merge(self, other: "Estimate") -> "Estimate":
        """Pool two estimates of the same event over disjoint replica ranges."""
        if other.seed_base != self.seed_base or other.event != self.event:
            raise EstimationError("can only merge estimates of one event under one seed base")
        ranges = sorted(self.replicas + other.replicas)
        for (a0, a1), (b0, b1) in zip(ranges, ranges[1:]):
            if b0 < a1:
                raise EstimationError(f"replica ranges overlap: {(a0, a1)} and {(b0, b1)}")
        n = self.n_samples + other.n_samples
        a1, a2 = self._sums()
        b1, b2 = other._sums()
        s1, s2 = a1 + b1, a2 + b2
        mean = s1 / n
        var = max(0.0, (s2 - n * mean ** 2) / (n - 1)) if n > 1 else 0.0
        return Estimate(mean, math.sqrt(var / n), n, self.seed_base, self.event, tuple(ranges))

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "std_error": self.std_error,
            "n_samples": self.n_samples,
            "seed_base": self.seed_base,
            "event": self.event,
            "replicas": [list(r) for r in self.replicas],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Estimate":
        return cls(d["mean"], d["std_error"], d["n_samples"], d["seed_base"], d["event"],
                   tuple(tuple(r) for r in d.get("replicas", ())))


LENGTH_METHODS = ("crossing_threshold", "two_point_decay", "mean_radius", "dual_crossing_decay")


@dataclass(frozen=True)
class LengthEstimate:
    value: float
    method: str
    params: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in LENGTH_METHODS:
            raise ValueError(f"unknown length method {self.method!r}")

    def to_dict(self) -> dict:
        return {"value": self.value, "method": self.method, "params": self.params,
                "diagnostics": self.diagnostics}


def sample_variance(values, seed_base: int, event: dict) -> Estimate:
    """Sample variance with the usual fourth-moment standard error."""
    v = np.asarray(values, dtype=np.float64)
    n = v.size
    if n < 2:
        raise EstimationError("variance needs at least two samples")
    s2 = float(v.var(ddof=1))
    m4 = float(np.mean((v - v.mean()) ** 4))
    se = math.sqrt(max(0.0, m4 - s2 * s2 * (n - 3) / (n - 1)) / n)
    return Estimate(s2, se, n, int(seed_base), dict(event, statistic="variance"), ((0, n),))


def wilson_lower(k: int, n: int, confidence: float) -> float:
    """One-sided Wilson score lower bound for a binomial proportion."""
    z = float(stats.norm.ppf(confidence))
    ph = k / n
    denom = 1 + z * z / n
    centre = ph + z * z / (2 * n)
    half = z * math.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n))
    return max(0.0, (centre - half) / denom)


# ---------------------------------------------------------------------------
# generic driver over explicit configurations


@dataclass(frozen=True)
class EventSpec:
    """One engine query plus its region.

    ``kind`` is one of ``one_arm``, ``annulus_arm``, ``crossing``,
    ``blocking_circuit``, ``occupied_circuit``.
    """

    kind: str
    z: tuple[int, int] = (0, 0)
    n: int = 0
    N: int = 1
    region: Optional[Union[Parallelogram, Annulus]] = None
    mode: Mode = Mode.PRIMAL

    def box(self) -> Box:
        if self.kind in ("one_arm", "annulus_arm"):
            return Box((0, 0), max(abs(self.z[0]), abs(self.z[1])) + self.N)
        return Box((0, 0), enclosing_radius(self.region))

    def evaluate(self, c) -> bool:
        if self.kind == "one_arm":
            return one_arm(c, self.z, self.N)
        if self.kind == "annulus_arm":
            return annulus_arm(c, self.z, self.n, self.N)
        if self.kind == "crossing":
            return crossing(c, self.region, self.mode)
        if self.kind == "blocking_circuit":
            return blocking_circuit(c, self.region)
        if self.kind == "occupied_circuit":
            return occupied_circuit(c, self.region)
        raise EstimationError(f"unknown event kind {self.kind!r}")

    def describe(self) -> dict:
        d = {"kind": self.kind, "z": list(self.z), "n": self.n, "N": self.N, "mode": Mode(self.mode).value}
        if self.region is not None:
            d["region"] = repr(self.region)
        return d


def estimate_event(prof: DensityProfile, g: LatticeGeometry, event: EventSpec, n_samples: int,
                   seed_base: int) -> Estimate:
    """Fraction of sampled configurations on which ``event`` holds."""
    if n_samples <= 0:
        raise EstimationError("n_samples must be positive")
    g = as_geometry(g)
    box = event.box()
    hits = np.empty(n_samples, dtype=np.float64)
    for i in range(n_samples):
        c = sample_region(prof, g, box, derive_seed(seed_base, i))
        hits[i] = event.evaluate(c)
    desc = dict(event.describe(), profile=prof.to_dict(), lattice=g.kind.value)
    return Estimate.from_samples(hits, seed_base, desc)


# ---------------------------------------------------------------------------
# compiled fast paths


def _check_n(n_samples: int):
    if n_samples <= 0:
        raise EstimationError("n_samples must be positive")


def arm_radii(prof: DensityProfile, R: int, n_samples: int, seed: int, g: LatticeGeometry = TRIANGULAR,
              stop: bool = False):
    """Per replica: cluster size of the origin in ``S_R``, sum of ``||z||^2``
    over it, and its largest radius (``-1`` when the origin is vacant).

    ``stop`` ends each search on reaching ``dS_R``; sizes of such clusters are
    then partial, radii are not affected."""
    _check_n(n_samples)
    g = as_geometry(g)
    return _kernels.drive_origin_cluster(_u64(seed), 0, n_samples, prof.radial_table(R),
                                         g.offsets(Mode.PRIMAL), False, R, stop, _WORKERS)


def _homog(p: float, g: LatticeGeometry) -> Homogeneous:
    return Homogeneous(p, as_geometry(g).p_c)


def one_arm_curve(N_list: Sequence[int], p: float, n_samples: int, seed: int,
                  g: LatticeGeometry = TRIANGULAR) -> list[Estimate]:
    """``pi(N)`` for every ``N`` from one set of replicas (coupled across ``N``)."""
    g = as_geometry(g)
    Ns = sorted(int(N) for N in N_list)
    if Ns[0] < 0:
        raise EstimationError("one-arm radius must be >= 0")
    _, _, rmax = arm_radii(_homog(p, g), Ns[-1], n_samples, seed, g, stop=True)
    return [Estimate.from_samples(rmax >= N, seed, {"kind": "one_arm", "N": N, "p": p,
                                                    "lattice": g.kind.value}) for N in Ns]


def estimate_pi(N: int, p: float, n_samples: int, seed: int, g: LatticeGeometry = TRIANGULAR) -> Estimate:
    return one_arm_curve([N], p, n_samples, seed, g)[0]


def annulus_outcomes(prof: DensityProfile, inner: int, outer: int, n_samples: int, seed: int,
                     g: LatticeGeometry = TRIANGULAR, mode: Mode = Mode.PRIMAL) -> np.ndarray:
    """Per replica: open path from ring ``inner + 1`` to ring ``outer``."""
    _check_n(n_samples)
    g = as_geometry(g)
    mode = Mode(mode)
    return _kernels.drive_annulus_cross(_u64(seed), 0, n_samples, prof.radial_table(outer), g.offsets(mode),
                                        mode is Mode.VACANT, inner, outer, _WORKERS)


def estimate_pi_cond(n: int, N: int, p: float, n_samples: int, seed: int,
                     g: LatticeGeometry = TRIANGULAR) -> Estimate:
    if n >= N:
        raise EstimationError(f"annulus arm needs n < N, got n={n}, N={N}")
    g = as_geometry(g)
    hits = annulus_outcomes(_homog(p, g), max(n, 0) - 1, N, n_samples, seed, g)
    return Estimate.from_samples(hits, seed, {"kind": "annulus_arm", "n": n, "N": N, "p": p,
                                              "lattice": g.kind.value})


def crossing_parallelogram(N: int, width_ratio: int) -> Parallelogram:
    """The ``ratio*N x N`` parallelogram roughly centred at the origin."""
    if N < 1 or width_ratio < 1:
        raise EstimationError("crossing needs N >= 1 and ratio >= 1")
    length = width_ratio * N
    return Parallelogram((-(length // 2), -(N // 2)), length, N, Orientation.X)


def crossing_outcomes(prof: DensityProfile, par: Parallelogram, mode: Mode, n_samples: int, seed: int,
                      g: LatticeGeometry = TRIANGULAR) -> np.ndarray:
    _check_n(n_samples)
    g = as_geometry(g)
    mode = Mode(mode)
    R = enclosing_radius(par)
    swap = Orientation(par.orientation) is Orientation.Y
    return _kernels.drive_para_cross(_u64(seed), 0, n_samples, prof.radial_table(R), g.offsets(mode),
                                     mode is Mode.VACANT, par.origin[0], par.origin[1], par.length,
                                     par.width, swap, mode is Mode.VACANT, _WORKERS)


def estimate_crossing(N: int, width_ratio: int, p: float, mode: Mode, n_samples: int, seed: int,
                      g: LatticeGeometry = TRIANGULAR) -> Estimate:
    """``R_{ratio,N}`` (primal, long way) or ``D_{ratio,N}`` (vacant, short way)."""
    g = as_geometry(g)
    par = crossing_parallelogram(N, width_ratio)
    hits = crossing_outcomes(_homog(p, g), par, mode, n_samples, seed, g)
    return Estimate.from_samples(hits, seed, {"kind": "crossing", "N": N, "ratio": width_ratio, "p": p,
                                              "mode": Mode(mode).value, "lattice": g.kind.value})


# ---------------------------------------------------------------------------
# lengths


def estimate_L(p: float, delta: float = math.exp(-1), c: float = 1.0, n_samples: int = 2000,
               confidence: float = 0.95, seed: int = 0, max_N: int = 512,
               g: LatticeGeometry = TRIANGULAR) -> LengthEstimate:
    """Smallest ``N`` whose ``3N x N`` long-way crossing probability clears
    ``1 - c*delta`` at the given one-sided confidence."""
    g = as_geometry(g)
    if not p > g.p_c:
        raise EstimationError(f"L(p) needs p > p_c = {g.p_c}")
    if not (0 < delta < 1 and c > 0 and c * delta < 1):
        raise EstimationError("need delta in (0,1), c > 0 and c*delta < 1")
    target = 1.0 - c * delta
    probes: dict[int, dict] = {}

    def passes(N: int) -> bool:
        if N not in probes:
            est = estimate_crossing(N, 3, p, Mode.PRIMAL, n_samples, derive_seed(seed, N), g)
            k = round(est.mean * n_samples)
            lb = wilson_lower(k, n_samples, confidence)
            probes[N] = {"N": N, "R": est.mean, "lower": lb, "pass": lb >= target}
        return probes[N]["pass"]

    N = 1
    while not passes(N):
        N *= 2
        if N > max_N:
            raise EstimationError(f"L({p}) search exceeded the budget max_N={max_N}")
    lo, hi = N // 2, N
    if N > 1:
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if passes(mid):
                hi = mid
            else:
                lo = mid
    params = {"p": p, "delta": delta, "c": c, "n_samples": n_samples, "confidence": confidence,
              "seed": seed, "lattice": g.kind.value}
    diag = {"target": target, "probes": [probes[k] for k in sorted(probes)]}
    return LengthEstimate(float(hi), "crossing_threshold", params, diag)


def _fit_decay(Ns, counts, n_samples, min_count=10):
    """Weighted least squares of ``log(k/n)`` on ``(1, log N, N)`` over the
    resolved points.

    The ``log N`` column absorbs the power-law prefactor of an exponential
    decay, which otherwise biases the rate at the short distances that can be
    resolved.  With fewer than four resolved points the prefactor is dropped.
    Returns ``(rate, prefactor_exponent, intercept, window)`` or ``None``.
    """
    Ns = np.asarray(Ns, dtype=np.float64)
    counts = np.asarray(counts, dtype=np.float64)
    keep = counts >= min_count
    if keep.sum() < 2:
        return None
    x, k = Ns[keep], counts[keep]
    y = np.log(k / n_samples)
    # 1/var(log phat) for a binomial
    sw = np.sqrt(k * n_samples / np.maximum(n_samples - k, 1.0))
    cols = [np.ones_like(x), x] if x.size < 4 else [np.ones_like(x), np.log(x), x]
    A = np.stack(cols, axis=1)
    coef = np.linalg.lstsq(A * sw[:, None], y * sw, rcond=None)[0]
    b = float(coef[1]) if x.size >= 4 else 0.0
    return float(coef[-1]), b, float(coef[0]), x.tolist()


def estimate_xi(p: float, N_range: Sequence[int], n_samples: int, seed: int,
                g: LatticeGeometry = TRIANGULAR) -> LengthEstimate:
    """Correlation length from the decay of vacant two-point connections."""
    g = as_geometry(g)
    if not p > g.p_c:
        raise EstimationError(f"xi(p) needs p > p_c = {g.p_c}")
    Ns = np.array(sorted(set(int(N) for N in N_range)), dtype=np.int64)
    if Ns[0] < 1 or Ns[-1] < 4 * Ns[0]:
        raise EstimationError("N_range must start at >= 1 and span a factor 4")
    _check_n(n_samples)
    R = 2 * int(Ns[-1]) + 2
    hx, hy = _kernels.drive_two_point(_u64(seed), 0, n_samples, _homog(p, g).radial_table(R),
                                      g.offsets(Mode.VACANT), R, Ns, _WORKERS)
    kx, ky = hx.sum(axis=0), hy.sum(axis=0)
    counts = np.maximum(kx, ky)
    tau = (counts / n_samples).tolist()
    fit = _fit_decay(Ns, counts, n_samples)
    if fit is None or fit[0] >= 0:
        raise EstimationError("two-point probabilities below resolution; use smaller N or more samples")
    slope, pref, icpt, window = fit
    xi = -1.0 / slope
    bound_ok = all(t <= math.exp(-N / xi) * 1.5 + 3 * math.sqrt(t * (1 - t) / n_samples)
                   for N, t in zip(Ns.tolist(), tau) if N in window)
    params = {"p": p, "N_range": Ns.tolist(), "n_samples": n_samples, "seed": seed, "lattice": g.kind.value}
    diag = {"tau": tau, "counts_x": kx.tolist(), "counts_y": ky.tolist(), "window": window,
            "slope": slope, "prefactor_exponent": pref, "intercept": icpt,
            "a_priori_bound_ok": bool(bound_ok)}
    return LengthEstimate(xi, "two_point_decay", params, diag)


def estimate_D3N_rate(p: float, N_range: Sequence[int], n_samples: int, seed: int,
                      g: LatticeGeometry = TRIANGULAR) -> LengthEstimate:
    """Decay length of the short-way vacant crossing of ``3N x N``."""
    g = as_geometry(g)
    if not p > g.p_c:
        raise EstimationError(f"D3N rate needs p > p_c = {g.p_c}")
    Ns = sorted(set(int(N) for N in N_range))
    prof = _homog(p, g)
    counts = []
    for N in Ns:
        hits = crossing_outcomes(prof, crossing_parallelogram(N, 3), Mode.VACANT, n_samples,
                                 derive_seed(seed, N), g)
        counts.append(int(hits.sum()))
    fit = _fit_decay(Ns, counts, n_samples)
    if fit is None or fit[0] >= 0:
        raise EstimationError("dual crossing probabilities unresolved (too few positive counts)")
    slope, pref, icpt, window = fit
    params = {"p": p, "N_range": Ns, "n_samples": n_samples, "seed": seed, "lattice": g.kind.value}
    diag = {"D": [k / n_samples for k in counts], "counts": counts, "window": window,
            "slope": slope, "prefactor_exponent": pref, "intercept": icpt}
    return LengthEstimate(-1.0 / slope, "dual_crossing_decay", params, diag)


def _xi_tilde_run(p, R, n_samples, seed, g):
    sizes, s2, rmax = arm_radii(_homog(p, g), R, n_samples, seed, g, stop=True)
    finite = (sizes > 0) & (rmax < R)
    a = np.where(finite, s2, 0.0)
    b = np.where(finite, sizes, 0).astype(np.float64)
    return a, b, int(finite.sum()), int(((sizes > 0) & ~finite).sum())


def estimate_xi_tilde(p: float, box_radius: Optional[int] = None, n_samples: int = 20000, seed: int = 0,
                      g: LatticeGeometry = TRIANGULAR, min_finite: int = 20) -> LengthEstimate:
    """Quadratic mean radius of the finite cluster of the origin, "finite"
    meaning it stays off the boundary of ``S_box_radius``."""
    g = as_geometry(g)
    if not p > g.p_c:
        raise EstimationError(f"xi_tilde needs p > p_c = {g.p_c}")
    pilot = None
    if box_radius is None:
        a, b, nf, _ = _xi_tilde_run(p, 16, max(1000, n_samples // 10), derive_seed(seed, 1), g)
        if b.sum() == 0:
            raise EstimationError("finite clusters too rare to size the box")
        pilot = math.sqrt(a.sum() / b.sum())
        box_radius = max(16, math.ceil(8 * pilot))
    a, b, nf, ninf = _xi_tilde_run(p, box_radius, n_samples, seed, g)
    if nf < min_finite or b.sum() == 0:
        raise EstimationError(f"finite-cluster conditioning too rare: {nf} of {n_samples} replicas")
    ratio = a.sum() / b.sum()
    value = math.sqrt(ratio)
    # delta method for the ratio estimator
    resid = a - ratio * b
    se_ratio = math.sqrt(resid.var(ddof=1) / n_samples) / b.mean()
    se = se_ratio / (2 * value) if value > 0 else 0.0
    params = {"p": p, "box_radius": box_radius, "n_samples": n_samples, "seed": seed, "lattice": g.kind.value}
    diag = {"std_error": se, "n_finite": nf, "n_touching": ninf, "pilot": pilot}
    return LengthEstimate(value, "mean_radius", params, diag)


# ---------------------------------------------------------------------------
# inhomogeneous observables


def phi_samples(prof: DensityProfile, N: int, n_samples: int, seed: int,
                g: LatticeGeometry = TRIANGULAR) -> np.ndarray:
    sizes, _, _ = arm_radii(prof, N, n_samples, seed, g)
    return sizes


def measure_phi(prof: DensityProfile, N: int, n_samples: int, seed: int,
                g: LatticeGeometry = TRIANGULAR) -> tuple[Estimate, Estimate]:
    """Mean and variance of the size of the origin's cluster inside ``S_N``."""
    sizes = phi_samples(prof, N, n_samples, seed, g)
    ev = {"kind": "phi", "N": N, "profile": prof.to_dict(), "lattice": as_geometry(g).kind.value}
    return Estimate.from_samples(sizes, seed, ev), sample_variance(sizes, seed, ev)


def psi_samples(prof: DensityProfile, N_list: Sequence[int], c_ell: float, n_samples: int, seed: int,
                g: LatticeGeometry = TRIANGULAR, w: Optional[float] = None) -> np.ndarray:
    """Proxy counts, shape ``(n_samples, len(N_list))``, from one sample of
    the box the largest ``N`` needs (coupled across ``N``)."""
    _check_n(n_samples)
    g = as_geometry(g)
    if w is None:
        if not isinstance(prof, PowerLaw):
            raise EstimationError("proxy counts need a power-law profile or an explicit w")
        w = prof.w
    Ns = np.array(sorted(int(N) for N in N_list), dtype=np.int64)
    R = proxy_radius(int(Ns[-1]), w, c_ell)
    ell = ell_table(int(Ns[-1]), w, c_ell)
    return _kernels.drive_psi(_u64(seed), 0, n_samples, prof.radial_table(R), g.offsets(Mode.PRIMAL),
                              R, Ns, ell, _WORKERS)


def measure_psi_proxy(prof: DensityProfile, N: int, c_ell: float, n_samples: int, seed: int,
                      g: LatticeGeometry = TRIANGULAR, w: Optional[float] = None) -> tuple[Estimate, Estimate]:
    counts = psi_samples(prof, [N], c_ell, n_samples, seed, g, w)[:, 0]
    ev = {"kind": "psi_proxy", "N": N, "c_ell": c_ell, "profile": prof.to_dict(),
          "lattice": as_geometry(g).kind.value}
    return Estimate.from_samples(counts, seed, ev), sample_variance(counts, seed, ev)


# ---------------------------------------------------------------------------
# the deterministic sum I_N


@dataclass(frozen=True)
class ClosedForm:
    """``P_inf(p) ~ (p - p_c)**beta``."""

    beta: float = 5.0 / 36.0


@dataclass(frozen=True)
class OneArmAtL:
    """``P_inf(p_c + eps(r)) ~ pi(r**w)`` from a ``[(N, pi(N)), ...]`` table."""

    pi_table: Optional[tuple[tuple[float, float], ...]] = None


def _loglog_interp(table, x):
    xs = np.log([t[0] for t in table])
    ys = np.log([t[1] for t in table])
    lx = np.log(x)
    i = np.clip(np.searchsorted(xs, lx) - 1, 0, len(xs) - 2)
    t = (lx - xs[i]) / (xs[i + 1] - xs[i])
    return np.exp(ys[i] + t * (ys[i + 1] - ys[i]))


def compute_I_N(prof: PowerLaw, N: int, surrogate: Union[ClosedForm, OneArmAtL] = ClosedForm()) -> float:
    """``sum over S_N`` of the percolation-probability surrogate at ``p(z)``.

    Uses the ring sizes of the box (1 at ``r = 0``, ``8r`` after).
    """
    if not isinstance(prof, PowerLaw):
        raise EstimationError("I_N is defined for the power-law profile")
    r = np.arange(N + 1)
    mult = np.where(r == 0, 1, 8 * r).astype(np.float64)
    if isinstance(surrogate, ClosedForm):
        eps = prof.radial_table(N) - prof.p_c
        f = eps ** surrogate.beta
    elif isinstance(surrogate, OneArmAtL):
        if not surrogate.pi_table:
            raise EstimationError("OneArmAtL surrogate needs a one-arm table")
        table = sorted((float(a), float(b)) for a, b in surrogate.pi_table)
        f = _loglog_interp(table, np.maximum(r, 1).astype(np.float64) ** prof.w)
    else:
        raise EstimationError(f"unknown surrogate {surrogate!r}")
    return float(np.sum(mult * f))
