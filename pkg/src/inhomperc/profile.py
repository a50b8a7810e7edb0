"""Density profiles ``z -> p(z)``.

All profiles are radial in the sup-norm ``r = max(|x|, |y|)``; the compiled
kernels consume them through :meth:`DensityProfile.radial_table`.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence, Union

import numpy as np

from .lattice import Site, norm

NU_TRIANGULAR = 4.0 / 3.0
# below this radius log log r < 1 and the marginal profile is set to 1
MARGINAL_R_MIN = math.exp(math.e)


class ProfileError(ValueError):
    pass


@dataclass(frozen=True)
class ScalingLaw:
    """``alpha(x) = min(1 - p_c, amplitude * x**(-1/nu))``."""

    amplitude: float = 1.0
    nu: float = NU_TRIANGULAR

    def __post_init__(self):
        if self.amplitude <= 0 or self.nu <= 0:
            raise ProfileError("scaling law needs amplitude > 0 and nu > 0")

    def to_dict(self) -> dict:
        return {"kind": "scaling", "amplitude": self.amplitude, "nu": self.nu}


@dataclass(frozen=True)
class Tabulated:
    """Inverse of a measured length table ``[(p, length), ...]``.

    Interpolation is piecewise linear in ``(log length, log(p - p_c))`` and
    extrapolates the end segments as power laws.
    """

    table: tuple[tuple[float, float], ...]
    p_c: float = 0.5

    def __post_init__(self):
        pts = sorted((float(p), float(L)) for p, L in self.table)
        if len(pts) < 2:
            raise ProfileError("tabulated alpha needs at least two (p, length) pairs")
        for (p0, L0), (p1, L1) in zip(pts, pts[1:]):
            if not (p1 > p0 and L1 < L0):
                raise ProfileError("length table must be strictly decreasing in p")
        if pts[0][0] <= self.p_c or pts[-1][1] <= 0:
            raise ProfileError("table densities must exceed p_c and lengths be positive")
        object.__setattr__(self, "table", tuple(pts))

    def to_dict(self) -> dict:
        return {"kind": "tabulated", "table": [list(t) for t in self.table], "p_c": self.p_c}


AlphaBackend = Union[ScalingLaw, Tabulated]


def alpha_of(b: AlphaBackend, x: float, p_c: float = 0.5) -> float:
    """Density increment whose correlation length is ``x``."""
    if not x > 0:
        raise ProfileError(f"alpha_of needs a positive length, got {x}")
    cap = 1.0 - p_c
    if isinstance(b, ScalingLaw):
        return min(cap, b.amplitude * x ** (-1.0 / b.nu))
    lx = math.log(x)
    # ascending in log length
    logL = [math.log(L) for _, L in reversed(b.table)]
    loge = [math.log(p - b.p_c) for p, _ in reversed(b.table)]
    if lx <= logL[0]:
        i = 0
    elif lx >= logL[-1]:
        i = len(logL) - 2
    else:
        i = int(np.searchsorted(logL, lx)) - 1
    t = (lx - logL[i]) / (logL[i + 1] - logL[i])
    val = math.exp(loge[i] + t * (loge[i + 1] - loge[i]))
    return min(cap, val)


def _alpha_from_dict(d: dict) -> AlphaBackend:
    d = dict(d)
    kind = d.pop("kind", "scaling")
    if kind == "scaling":
        return ScalingLaw(**d)
    if kind == "tabulated":
        return Tabulated(table=tuple(tuple(t) for t in d["table"]), p_c=d.get("p_c", 0.5))
    raise ProfileError(f"unknown alpha backend {kind!r}")


@dataclass(frozen=True)
class _Profile:
    def density_at(self, z: Site) -> float:
        return self.density_r(norm(z))

    def density_r(self, r: int) -> float:  # pragma: no cover - abstract
        raise NotImplementedError

    def radial_table(self, R: int) -> np.ndarray:
        """``table[r] = p(z)`` for ``||z|| = r``, ``r = 0..R``."""
        return np.array([self.density_r(r) for r in range(R + 1)], dtype=np.float64)

    def to_dict(self) -> dict:
        raise NotImplementedError

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class Homogeneous(_Profile):
    p: float = 0.5
    p_c: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ProfileError(f"density must lie in [0, 1], got {self.p}")

    def density_r(self, r: int) -> float:
        return self.p

    def radial_table(self, R: int) -> np.ndarray:
        return np.full(R + 1, self.p, dtype=np.float64)

    def to_dict(self) -> dict:
        return {"kind": "homogeneous", "p": self.p, "p_c": self.p_c}


@dataclass(frozen=True)
class PowerLaw(_Profile):
    """``p(z) = p_c + alpha(r**w)``; ``r = 0`` is evaluated as ``r = 1``."""

    w: float = 0.5
    alpha: AlphaBackend = field(default_factory=ScalingLaw)
    p_c: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.w < 1.0:
            raise ProfileError(f"power-law exponent w must lie in (0, 1), got {self.w}")

    @property
    def lam(self) -> float:
        """Decay exponent of the increment, ``w / nu`` (scaling-law backend only)."""
        if not isinstance(self.alpha, ScalingLaw):
            raise ProfileError("lambda is defined for the scaling-law backend only")
        return self.w / self.alpha.nu

    def density_r(self, r: int) -> float:
        r = max(r, 1)
        return min(1.0, self.p_c + alpha_of(self.alpha, float(r) ** self.w, self.p_c))

    def to_dict(self) -> dict:
        return {"kind": "powerlaw", "w": self.w, "alpha": self.alpha.to_dict(), "p_c": self.p_c}


@dataclass(frozen=True)
class Marginal(_Profile):
    """``p(z) = p_c + alpha(r / (kappa log log r))`` for ``log log r >= 1``, else 1."""

    kappa: float = 1.0
    alpha: AlphaBackend = field(default_factory=ScalingLaw)
    p_c: float = 0.5

    def __post_init__(self):
        if not self.kappa > 0:
            raise ProfileError(f"kappa must be positive, got {self.kappa}")

    def density_r(self, r: int) -> float:
        if r < MARGINAL_R_MIN:
            return 1.0
        ll = math.log(math.log(r))
        return min(1.0, self.p_c + alpha_of(self.alpha, r / (self.kappa * ll), self.p_c))

    def to_dict(self) -> dict:
        return {"kind": "marginal", "kappa": self.kappa, "alpha": self.alpha.to_dict(), "p_c": self.p_c}


DensityProfile = Union[Homogeneous, PowerLaw, Marginal]


def density_at(prof: DensityProfile, z: Site) -> float:
    return prof.density_at(z)


def profile_from_dict(d: dict) -> DensityProfile:
    d = dict(d)
    kind = d.pop("kind")
    if kind == "homogeneous":
        return Homogeneous(**d)
    if "alpha" in d:
        d["alpha"] = _alpha_from_dict(d["alpha"])
    if kind == "powerlaw":
        return PowerLaw(**d)
    if kind == "marginal":
        return Marginal(**d)
    raise ProfileError(f"unknown profile kind {kind!r}")


def tabulated_from_lengths(pairs: Sequence[tuple[float, float]], p_c: float) -> Tabulated:
    return Tabulated(table=tuple((float(p), float(L)) for p, L in pairs), p_c=p_c)
