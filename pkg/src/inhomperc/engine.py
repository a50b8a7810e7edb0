"""Sampled configurations and connectivity events.

A :class:`Configuration` is the occupancy of a box ``S_R(c)``.  Events are
answered with a :class:`ClusterForest`, a union-find over the box sites plus
virtual nodes standing for distinguished site sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import _kernels
from .lattice import (
    Annulus,
    Box,
    LatticeGeometry,
    Mode,
    Parallelogram,
    Region,
    RegionError,
    Side,
    Site,
    as_geometry,
    region_boundary,
    region_sites,
)
from .profile import DensityProfile, PowerLaw
from .rng import site_uniforms


class EventError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Configuration:
    geometry: LatticeGeometry
    region: Box
    occupancy: np.ndarray  # bool, region_sites order
    seed: int
    profile_digest: str

    @property
    def side(self) -> int:
        return 2 * self.region.N + 1

    def grid(self) -> np.ndarray:
        """Occupancy as ``grid[y - y0, x - x0]``."""
        return self.occupancy.reshape(self.side, self.side)

    def index(self, z: Site) -> int:
        cx, cy = self.region.center
        N = self.region.N
        dx, dy = z[0] - cx, z[1] - cy
        if abs(dx) > N or abs(dy) > N:
            raise RegionError(f"site {z} outside the sampled box {self.region}")
        return (dy + N) * self.side + (dx + N)

    def occupied(self, z: Site) -> bool:
        return bool(self.occupancy[self.index(z)])

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        cx, cy = self.region.center
        N = self.region.N
        r = np.arange(-N, N + 1)
        Y, X = np.meshgrid(r + cy, r + cx, indexing="ij")
        return X.ravel(), Y.ravel()

    def with_site(self, z: Site, value: bool) -> "Configuration":
        occ = self.occupancy.copy()
        occ[self.index(z)] = value
        return Configuration(self.geometry, self.region, occ, self.seed, self.profile_digest + "*")

    def __eq__(self, other):
        return (
            isinstance(other, Configuration)
            and self.geometry == other.geometry
            and self.region == other.region
            and self.seed == other.seed
            and np.array_equal(self.occupancy, other.occupancy)
        )


def sample_region(prof: DensityProfile, g: LatticeGeometry, box: Box, seed: int) -> Configuration:
    """Occupy each site of ``box`` independently with probability ``p(z)``."""
    if not isinstance(box, Box):
        raise RegionError("configurations are sampled on boxes")
    g = as_geometry(g)
    cx, cy = box.center
    N = box.N
    r = np.arange(-N, N + 1)
    Y, X = np.meshgrid(r + cy, r + cx, indexing="ij")
    X, Y = X.ravel(), Y.ravel()
    radius = np.maximum(np.abs(X), np.abs(Y))
    dens = prof.radial_table(int(radius.max()))[radius]
    occ = site_uniforms(seed, X, Y) < dens
    return Configuration(g, box, occ, int(seed), prof.digest())


def configuration_from_sites(g: LatticeGeometry, box: Box, occupied: Iterable[Site]) -> Configuration:
    """Explicit configuration, for tests and enumeration."""
    occ = np.zeros((2 * box.N + 1) ** 2, dtype=bool)
    c = Configuration(as_geometry(g), box, occ, 0, "explicit")
    for z in occupied:
        occ[c.index(z)] = True
    return c


def configuration_from_bits(g: LatticeGeometry, box: Box, bits: np.ndarray) -> Configuration:
    return Configuration(as_geometry(g), box, np.asarray(bits, dtype=bool).copy(), 0, "explicit")


# ---------------------------------------------------------------------------
# masks


def region_mask(c: Configuration, r: Optional[Region]) -> np.ndarray:
    X, Y = c.coords()
    if r is None:
        return np.ones(X.shape, dtype=bool)
    if isinstance(r, Box):
        return np.maximum(np.abs(X - r.center[0]), np.abs(Y - r.center[1])) <= r.N
    if isinstance(r, Annulus):
        d = np.maximum(np.abs(X - r.center[0]), np.abs(Y - r.center[1]))
        return (d > r.inner) & (d <= r.outer)
    if isinstance(r, Parallelogram):
        dx, dy = X - r.origin[0], Y - r.origin[1]
        i, j = (dx, dy) if r.orientation == "x" else (dy, dx)
        return (i >= 0) & (i <= r.length) & (j >= 0) & (j <= r.width)
    raise RegionError(f"unknown region {r!r}")


def _require_inside(c: Configuration, r: Region):
    m = region_mask(c, r)
    if int(m.sum()) != len(region_sites(c.geometry, r)):
        raise RegionError(f"{r} is not inside the sampled box {c.region}")


# ---------------------------------------------------------------------------
# union-find over a configuration


class ClusterForest:
    """Union-find over the box sites plus up to four virtual nodes."""

    MAX_VIRTUAL = 4

    def __init__(self, c: Configuration, mode: Mode = Mode.PRIMAL, within: Optional[Region] = None):
        self.config = c
        self.mode = Mode(mode)
        n = c.occupancy.size
        self.n_sites = n
        self.parent = np.arange(n + self.MAX_VIRTUAL, dtype=np.int64)
        self.rank = np.zeros(n + self.MAX_VIRTUAL, dtype=np.int64)
        self.open = c.occupancy if self.mode is Mode.PRIMAL else ~c.occupancy
        self.open = self.open & region_mask(c, within)
        self._n_virtual = 0
        offs = c.geometry.offsets(self.mode)
        _kernels.label_grid(self.open, c.side, c.side, offs, self.parent, self.rank)

    def find(self, i: int) -> int:
        parent = self.parent
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = int(parent[i])
        return i

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return ra

    def add_virtual(self, sites: Iterable[Site]) -> int:
        """Virtual node joined to every open site of ``sites`` in the forest."""
        if self._n_virtual >= self.MAX_VIRTUAL:
            raise EventError("at most four distinguished site sets")
        v = self.n_sites + self._n_virtual
        self._n_virtual += 1
        for z in sites:
            try:
                i = self.config.index(z)
            except RegionError:
                continue
            if self.open[i]:
                self.union(v, i)
        return v

    def connected(self, a: int, b: int) -> bool:
        return self.find(a) == self.find(b)

    def labels(self) -> np.ndarray:
        """Root of every site, ``-1`` for closed sites."""
        out = _kernels.find_all(self.parent, self.n_sites)
        out[~self.open] = -1
        return out


def connects(c: Configuration, A: Sequence[Site], B: Sequence[Site], within: Optional[Region] = None,
             mode: Mode = Mode.PRIMAL) -> bool:
    """``A`` joined to ``B`` by a ``mode``-open path inside ``within``."""
    if not A or not B:
        return False
    f = ClusterForest(c, mode, within)
    va = f.add_virtual(A)
    vb = f.add_virtual(B)
    return f.connected(va, vb)


def one_arm(c: Configuration, z: Site, N: int) -> bool:
    box = Box(z, N)
    _require_inside(c, box)
    if not c.occupied(z):
        return False
    return connects(c, [z], region_boundary(c.geometry, box, Side.OUTER), box, Mode.PRIMAL)


def annulus_arm(c: Configuration, z: Site, n: int, N: int) -> bool:
    """``dS_n(z)`` joined to ``dS_N(z)`` inside ``S_N(z) \\ S_{n-1}(z)``."""
    if n >= N:
        raise EventError(f"annulus arm needs n < N, got n={n}, N={N}")
    if n <= 0:
        return one_arm(c, z, N)
    ann = Annulus(z, n - 1, N)
    _require_inside(c, Box(z, N))
    g = c.geometry
    return connects(c, region_boundary(g, ann, Side.INNER), region_boundary(g, ann, Side.OUTER), ann)


def crossing(c: Configuration, par: Parallelogram, mode: Mode = Mode.PRIMAL) -> bool:
    """Primal: occupied path between the short sides.  Vacant: vacant
    matching path between the long sides."""
    _require_inside(c, par)
    g = c.geometry
    mode = Mode(mode)
    if mode is Mode.PRIMAL:
        a, b = region_boundary(g, par, Side.SIDE_A), region_boundary(g, par, Side.SIDE_B)
    else:
        a, b = region_boundary(g, par, Side.LONG_A), region_boundary(g, par, Side.LONG_B)
    return connects(c, a, b, par, mode)


def blocking_circuit(c: Configuration, ann: Annulus) -> bool:
    """A vacant matching circuit separates the inner ring from the outer one."""
    _require_inside(c, Box(ann.center, ann.outer))
    g = c.geometry
    return not connects(c, region_boundary(g, ann, Side.INNER), region_boundary(g, ann, Side.OUTER),
                        ann, Mode.PRIMAL)


def occupied_circuit(c: Configuration, ann: Annulus) -> bool:
    _require_inside(c, Box(ann.center, ann.outer))
    g = c.geometry
    return not connects(c, region_boundary(g, ann, Side.INNER), region_boundary(g, ann, Side.OUTER),
                        ann, Mode.VACANT)


def local_cluster_count(c: Configuration, N: int) -> int:
    """Sites of ``S_N`` joined to the origin inside ``S_N``."""
    box = Box((0, 0), N)
    _require_inside(c, box)
    if not c.occupied((0, 0)):
        return 0
    f = ClusterForest(c, Mode.PRIMAL, box)
    return int(np.count_nonzero(f.labels() == f.find(c.index((0, 0)))))


def ell_radius(r: int, w: float, c_ell: float = 1.0) -> int:
    """Local scale ``max(1, ceil(c_ell * r**w))``."""
    return max(1, math.ceil(c_ell * float(r) ** w))


def ell_table(R: int, w: float, c_ell: float = 1.0) -> np.ndarray:
    return np.array([ell_radius(r, w, c_ell) for r in range(R + 1)], dtype=np.int64)


def proxy_radius(N: int, w: float, c_ell: float = 1.0) -> int:
    """Box radius a proxy count on ``S_N`` needs to be sampled on."""
    return N + ell_radius(N, w, c_ell)


def _proxy_w(prof: DensityProfile, w: Optional[float]) -> float:
    if w is not None:
        return w
    if isinstance(prof, PowerLaw):
        return prof.w
    raise EventError("proxy count needs a power-law profile or an explicit w")


def iiic_proxy_count(c: Configuration, prof: DensityProfile, N: int, c_ell: float = 1.0,
                     w: Optional[float] = None) -> int:
    """Sites ``z`` of ``S_N`` with ``z`` joined to ``dS_ell(||z||)(z)``."""
    w = _proxy_w(prof, w)
    need = proxy_radius(N, w, c_ell)
    if c.region.center != (0, 0) or c.region.N < need:
        raise RegionError(f"proxy count on S_{N} needs a sample on S_{need}(0), got {c.region}")
    f = ClusterForest(c, Mode.PRIMAL)
    lab = f.labels()
    side = c.side
    idx = np.flatnonzero(lab >= 0)
    roots = lab[idx]
    i, j = idx % side, idx // side
    big = np.iinfo(np.int64).max
    lo_x = np.full(lab.size + f.MAX_VIRTUAL, big)
    hi_x = np.full(lab.size + f.MAX_VIRTUAL, -1)
    lo_y = lo_x.copy()
    hi_y = hi_x.copy()
    np.minimum.at(lo_x, roots, i)
    np.maximum.at(hi_x, roots, i)
    np.minimum.at(lo_y, roots, j)
    np.maximum.at(hi_y, roots, j)
    reach = np.maximum.reduce([i - lo_x[roots], hi_x[roots] - i, j - lo_y[roots], hi_y[roots] - j])
    R = c.region.N
    r = np.maximum(np.abs(i - R), np.abs(j - R))
    inside = r <= N
    ell = ell_table(N, w, c_ell)
    return int(np.count_nonzero(reach[inside] >= ell[r[inside]]))
