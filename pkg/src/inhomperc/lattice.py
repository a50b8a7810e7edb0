"""Lattices, neighbourhoods and the regions every event is phrased over.

Sites are integer pairs.  The triangular lattice uses the axial embedding in
which ``(x, y)`` sits at ``x*e1 + y*e2`` with ``e2`` at 60 degrees, so the
coordinate box ``max(|dx|, |dy|) <= N`` is a 60-degree rhombus in the plane.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Union

import numpy as np

Site = tuple[int, int]


class LatticeKind(str, enum.Enum):
    TRIANGULAR = "triangular"
    SQUARE = "square"


class Mode(str, enum.Enum):
    """Which sites are open and which adjacency joins them."""

    PRIMAL = "primal"  # occupied sites, primal adjacency
    VACANT = "vacant"  # vacant sites, matching adjacency


_TRI = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1))
_SQ = ((1, 0), (-1, 0), (0, 1), (0, -1))
_SQ_MATCH = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1), (1, -1), (-1, 1))

# literature threshold for square site percolation; triangular is exact
P_C = {LatticeKind.TRIANGULAR: 0.5, LatticeKind.SQUARE: 0.592746}


@dataclass(frozen=True)
class LatticeGeometry:
    kind: LatticeKind = LatticeKind.TRIANGULAR

    @property
    def p_c(self) -> float:
        return P_C[self.kind]

    def primal_offsets(self) -> tuple[Site, ...]:
        return _TRI if self.kind is LatticeKind.TRIANGULAR else _SQ

    def matching_offsets(self) -> tuple[Site, ...]:
        return _TRI if self.kind is LatticeKind.TRIANGULAR else _SQ_MATCH

    def offsets(self, mode: Mode) -> np.ndarray:
        """Offsets as an ``(k, 2)`` int64 array, for the compiled kernels."""
        offs = self.primal_offsets() if Mode(mode) is Mode.PRIMAL else self.matching_offsets()
        return np.array(offs, dtype=np.int64)


TRIANGULAR = LatticeGeometry(LatticeKind.TRIANGULAR)
SQUARE = LatticeGeometry(LatticeKind.SQUARE)


def as_geometry(g: LatticeGeometry | LatticeKind | str) -> LatticeGeometry:
    if isinstance(g, LatticeGeometry):
        return g
    return LatticeGeometry(LatticeKind(g))


def neighbors(g: LatticeGeometry, z: Site) -> list[Site]:
    x, y = z
    return [(x + dx, y + dy) for dx, dy in g.primal_offsets()]


def matching_neighbors(g: LatticeGeometry, z: Site) -> list[Site]:
    x, y = z
    return [(x + dx, y + dy) for dx, dy in g.matching_offsets()]


def norm(z: Site) -> int:
    return max(abs(z[0]), abs(z[1]))


def dist(a: Site, b: Site) -> int:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


# ---------------------------------------------------------------------------
# regions


class RegionError(ValueError):
    pass


@dataclass(frozen=True)
class Box:
    """``S_N(center)``: all sites within sup-distance ``N`` of ``center``."""

    center: Site = (0, 0)
    N: int = 0

    def __post_init__(self):
        if self.N < 0:
            raise RegionError(f"box radius must be >= 0, got {self.N}")

    def contains(self, z: Site) -> bool:
        return dist(z, self.center) <= self.N

    def contains_box(self, other: "Box") -> bool:
        return dist(other.center, self.center) + other.N <= self.N


@dataclass(frozen=True)
class Annulus:
    """``S_outer(center) \\ S_inner(center)``: sites with inner < d <= outer.

    ``inner = -1`` removes nothing, giving the full box.
    """

    center: Site = (0, 0)
    inner: int = 0
    outer: int = 1

    def __post_init__(self):
        if self.inner < -1 or self.inner >= self.outer:
            raise RegionError(f"annulus needs -1 <= inner < outer, got {self.inner}, {self.outer}")

    def contains(self, z: Site) -> bool:
        return self.inner < dist(z, self.center) <= self.outer


class Orientation(str, enum.Enum):
    X = "x"  # long sides parallel to the x axis
    Y = "y"


@dataclass(frozen=True)
class Parallelogram:
    """Sites ``origin + (i, j)`` with ``0 <= i <= length``, ``0 <= j <= width``
    (axes swapped for orientation Y).  Short sides are ``i = 0`` and
    ``i = length``; long sides are ``j = 0`` and ``j = width``."""

    origin: Site = (0, 0)
    length: int = 3
    width: int = 1
    orientation: Orientation = Orientation.X

    def __post_init__(self):
        if not (self.length >= self.width >= 1):
            raise RegionError(
                f"parallelogram needs length >= width >= 1, got {self.length}x{self.width}"
            )

    def local(self, z: Site) -> tuple[int, int]:
        dx, dy = z[0] - self.origin[0], z[1] - self.origin[1]
        return (dx, dy) if Orientation(self.orientation) is Orientation.X else (dy, dx)

    def at(self, i: int, j: int) -> Site:
        if Orientation(self.orientation) is Orientation.X:
            return (self.origin[0] + i, self.origin[1] + j)
        return (self.origin[0] + j, self.origin[1] + i)

    def contains(self, z: Site) -> bool:
        i, j = self.local(z)
        return 0 <= i <= self.length and 0 <= j <= self.width

    def extent(self) -> int:
        """Sup-distance from the origin to the farthest corner."""
        corners = [self.at(i, j) for i in (0, self.length) for j in (0, self.width)]
        return max(norm(c) for c in corners)


Region = Union[Box, Annulus, Parallelogram]


class Side(str, enum.Enum):
    OUTER = "outer"
    INNER = "inner"
    SIDE_A = "side_a"
    SIDE_B = "side_b"
    LONG_A = "long_a"
    LONG_B = "long_b"


def _box_sites(c: Site, N: int) -> list[Site]:
    cx, cy = c
    return [(cx + dx, cy + dy) for dy in range(-N, N + 1) for dx in range(-N, N + 1)]


def _ring(c: Site, r: int) -> list[Site]:
    if r == 0:
        return [c]
    return [z for z in _box_sites(c, r) if dist(z, c) == r]


def region_sites(g: LatticeGeometry, r: Region) -> list[Site]:
    """Sites of ``r`` in a fixed order (y-major, then x, in lattice coordinates)."""
    if isinstance(r, Box):
        return _box_sites(r.center, r.N)
    if isinstance(r, Annulus):
        return [z for z in _box_sites(r.center, r.outer) if dist(z, r.center) > r.inner]
    if isinstance(r, Parallelogram):
        out = [r.at(i, j) for j in range(r.width + 1) for i in range(r.length + 1)]
        return sorted(out, key=lambda s: (s[1], s[0]))
    raise RegionError(f"unknown region {r!r}")


def region_boundary(g: LatticeGeometry, r: Region, which: Side | str) -> list[Site]:
    which = Side(which)
    if isinstance(r, Box):
        if which is not Side.OUTER:
            raise RegionError(f"box has only an outer boundary, not {which.value}")
        return _ring(r.center, r.N)
    if isinstance(r, Annulus):
        if which is Side.OUTER:
            return _ring(r.center, r.outer)
        if which is Side.INNER:
            return _ring(r.center, r.inner + 1)
        raise RegionError(f"annulus has inner/outer rings, not {which.value}")
    if isinstance(r, Parallelogram):
        if which is Side.SIDE_A:
            pts = [r.at(0, j) for j in range(r.width + 1)]
        elif which is Side.SIDE_B:
            pts = [r.at(r.length, j) for j in range(r.width + 1)]
        elif which is Side.LONG_A:
            pts = [r.at(i, 0) for i in range(r.length + 1)]
        elif which is Side.LONG_B:
            pts = [r.at(i, r.width) for i in range(r.length + 1)]
        else:
            raise RegionError(f"parallelogram has sides, not {which.value}")
        return sorted(pts, key=lambda s: (s[1], s[0]))
    raise RegionError(f"unknown region {r!r}")


def enclosing_radius(r: Region) -> int:
    """Smallest ``N`` with ``r`` inside ``S_N(0)``."""
    if isinstance(r, Box):
        return norm(r.center) + r.N
    if isinstance(r, Annulus):
        return norm(r.center) + r.outer
    if isinstance(r, Parallelogram):
        return r.extent()
    raise RegionError(f"unknown region {r!r}")
