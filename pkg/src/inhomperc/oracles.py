"""Exact small-instance oracles.

These share no code with the compiled kernels: they use their own adjacency
lists, their own searches and, for circuits, a winding-number test in the
Euclidean embedding of the lattice rather than any crossing event.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numba import njit

from .engine import configuration_from_bits, local_cluster_count, one_arm
from .lattice import (
    TRIANGULAR,
    Annulus,
    Box,
    LatticeGeometry,
    LatticeKind,
    Parallelogram,
    Side,
    as_geometry,
    norm,
    region_boundary,
    region_sites,
)
from .profile import DensityProfile


@dataclass(frozen=True)
class DualityResult:
    configurations: int
    exceptions: int
    nodes: int = 0


def embed(g: LatticeGeometry, z) -> tuple[float, float]:
    """Planar position of a site."""
    x, y = z
    if as_geometry(g).kind is LatticeKind.TRIANGULAR:
        return x + 0.5 * y, y * math.sqrt(3) / 2
    return float(x), float(y)


def _graph(g, sites, offsets):
    index = {z: i for i, z in enumerate(sites)}
    n = len(sites)
    adj = np.full((n, len(offsets)), -1, dtype=np.int64)
    deg = np.zeros(n, dtype=np.int64)
    for i, (x, y) in enumerate(sites):
        for dx, dy in offsets:
            j = index.get((x + dx, y + dy))
            if j is not None:
                adj[i, deg[i]] = j
                deg[i] += 1
    return index, adj, deg


@njit(cache=True)
def _reach(open_, adj, deg, src, dst):
    n = open_.shape[0]
    seen = np.zeros(n, dtype=np.bool_)
    stack = np.empty(n, dtype=np.int64)
    top = 0
    for s in range(n):
        if src[s] and open_[s] and not seen[s]:
            seen[s] = True
            stack[top] = s
            top += 1
    while top > 0:
        top -= 1
        u = stack[top]
        if dst[u]:
            return True
        for k in range(deg[u]):
            v = adj[u, k]
            if open_[v] and not seen[v]:
                seen[v] = True
                stack[top] = v
                top += 1
    return False


@njit(cache=True)
def _winds(open_, adj, deg, dth):
    """Some open cycle winds around the origin: a BFS potential of the angle
    fails to close up by a full turn."""
    n = open_.shape[0]
    seen = np.zeros(n, dtype=np.bool_)
    phi = np.zeros(n)
    stack = np.empty(n, dtype=np.int64)
    for s in range(n):
        if not open_[s] or seen[s]:
            continue
        seen[s] = True
        phi[s] = 0.0
        stack[0] = s
        top = 1
        while top > 0:
            top -= 1
            u = stack[top]
            for k in range(deg[u]):
                v = adj[u, k]
                if not open_[v]:
                    continue
                want = phi[u] + dth[u, k]
                if not seen[v]:
                    seen[v] = True
                    phi[v] = want
                    stack[top] = v
                    top += 1
                elif abs(phi[v] - want) > np.pi:
                    return True
    return False


@njit(cache=True)
def _para_enum(n, adj, deg, side_a, side_b, long_a, long_b):
    bad = 0
    occ = np.zeros(n, dtype=np.bool_)
    vac = np.zeros(n, dtype=np.bool_)
    for m in range(1 << n):
        for i in range(n):
            occ[i] = (m >> i) & 1
            vac[i] = not occ[i]
        primal = _reach(occ, adj, deg, side_a, side_b)
        dual = _reach(vac, adj, deg, long_a, long_b)
        if primal == dual:
            bad += 1
    return bad


def parallelogram_duality(length: int = 6, width: int = 2) -> DualityResult:
    """Every configuration of the triangular ``length x width`` parallelogram
    has exactly one of: occupied long-way crossing, vacant short-way crossing."""
    par = Parallelogram((0, 0), length, width)
    sites = region_sites(TRIANGULAR, par)
    n = len(sites)
    if n > 26:
        raise ValueError(f"{n} sites is too many to enumerate")
    index, adj, deg = _graph(TRIANGULAR, sites, TRIANGULAR.primal_offsets())

    def mask(side):
        m = np.zeros(n, dtype=np.bool_)
        for z in region_boundary(TRIANGULAR, par, side):
            m[index[z]] = True
        return m

    bad = _para_enum(n, adj, deg, mask(Side.SIDE_A), mask(Side.SIDE_B), mask(Side.LONG_A), mask(Side.LONG_B))
    return DualityResult(1 << n, int(bad))


@njit(cache=True)
def _path_site(open_, adj, deg, src, dst, assign):
    """Undecided site on a shortest open src-to-dst path, or -1 if none."""
    n = open_.shape[0]
    parent = np.full(n, -2, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    head = 0
    tail = 0
    for s in range(n):
        if src[s] and open_[s]:
            parent[s] = -1
            queue[tail] = s
            tail += 1
    while head < tail:
        u = queue[head]
        head += 1
        if dst[u]:
            while u >= 0:
                if assign[u] < 0:
                    return u
                u = parent[u]
            return -1
        for k in range(deg[u]):
            v = adj[u, k]
            if open_[v] and parent[v] == -2:
                parent[v] = u
                queue[tail] = v
                tail += 1
    return -1


@njit(cache=True)
def _cycle_site(open_, adj, deg, dth, assign):
    """Undecided site on a winding open cycle, or -1 if none."""
    n = open_.shape[0]
    seen = np.zeros(n, dtype=np.bool_)
    mark = np.zeros(n, dtype=np.bool_)
    parent = np.full(n, -1, dtype=np.int64)
    phi = np.zeros(n)
    stack = np.empty(n, dtype=np.int64)
    for s in range(n):
        if not open_[s] or seen[s]:
            continue
        seen[s] = True
        stack[0] = s
        top = 1
        while top > 0:
            top -= 1
            u = stack[top]
            for k in range(deg[u]):
                v = adj[u, k]
                if not open_[v]:
                    continue
                want = phi[u] + dth[u, k]
                if not seen[v]:
                    seen[v] = True
                    phi[v] = want
                    parent[v] = u
                    stack[top] = v
                    top += 1
                elif abs(phi[v] - want) > np.pi:
                    # fundamental cycle: u and v up to their common ancestor
                    w = u
                    while w >= 0:
                        mark[w] = True
                        w = parent[w]
                    w = v
                    while not mark[w]:
                        if assign[w] < 0:
                            return w
                        w = parent[w]
                    lca = w
                    w = u
                    while w != lca:
                        if assign[w] < 0:
                            return w
                        w = parent[w]
                    return -1
    return -1


@njit(cache=True)
def _annulus_bb(adj, deg, wadj, wdeg, dth, src, dst):
    """Adaptive branch and bound over all occupancies.

    A partial assignment is settled once the occupied crossing and the vacant
    winding circuit each agree between the all-vacant and the all-occupied
    completions; every completion then shares both answers.  Unsettled nodes
    branch on an undecided site of a witness path or cycle.  Returns
    (configurations, exceptions, nodes).
    """
    n = adj.shape[0]
    assign = np.full(n, -1, dtype=np.int64)
    lo = np.zeros(n, dtype=np.bool_)
    hi = np.zeros(n, dtype=np.bool_)
    vlo = np.zeros(n, dtype=np.bool_)
    vhi = np.zeros(n, dtype=np.bool_)
    branch = np.empty(n, dtype=np.int64)
    total = 0
    bad = 0
    nodes = 0
    depth = 0
    while True:
        nodes += 1
        for i in range(n):
            lo[i] = assign[i] == 1
            hi[i] = assign[i] != 0
            vlo[i] = not hi[i]
            vhi[i] = not lo[i]
        pick = -1
        u = _reach(lo, adj, deg, src, dst)
        if not u:
            pick = _path_site(hi, adj, deg, src, dst, assign)
        v = False
        if pick < 0:
            v = _winds(vlo, wadj, wdeg, dth)
            if not v:
                pick = _cycle_site(vhi, wadj, wdeg, dth, assign)
        if pick < 0:
            total += 1 << (n - depth)
            if u == v:
                bad += 1 << (n - depth)
            while depth > 0:
                s = branch[depth - 1]
                if assign[s] == 0:
                    assign[s] = 1
                    break
                assign[s] = -1
                depth -= 1
            if depth == 0:
                return total, bad, nodes
        else:
            branch[depth] = pick
            assign[pick] = 0
            depth += 1


def _winding_graph(g, sites, ann: Annulus):
    """Vacant-path graph for the circuit test, with edge angle increments.

    The inner ring is the perimeter of the hole ``S_inner``.  Edges joining
    two inner-ring sites along a diagonal offset cut a corner of the hole,
    so a cycle through them need not enclose the whole ring; they are left
    out.  A winding cycle in what remains encloses every inner-ring site.
    """
    index, adj, deg = _graph(g, sites, g.matching_offsets())
    cx, cy = embed(g, ann.center)
    ring = ann.inner + 1
    r_of = [max(abs(z[0] - ann.center[0]), abs(z[1] - ann.center[1])) for z in sites]
    adj2 = np.full_like(adj, -1)
    deg2 = np.zeros_like(deg)
    dth = np.zeros(adj.shape)
    for i, z in enumerate(sites):
        px, py = embed(g, z)
        a0 = math.atan2(py - cy, px - cx)
        for k in range(deg[i]):
            j = adj[i, k]
            w = sites[j]
            diagonal = w[0] != z[0] and w[1] != z[1]
            if diagonal and r_of[i] == ring and r_of[j] == ring:
                continue
            qx, qy = embed(g, w)
            a1 = math.atan2(qy - cy, qx - cx)
            adj2[i, deg2[i]] = j
            dth[i, deg2[i]] = (a1 - a0 + math.pi) % (2 * math.pi) - math.pi
            deg2[i] += 1
    return index, adj2, deg2, dth


def annulus_duality(inner: int = 1, outer: int = 3) -> DualityResult:
    """Over every configuration of ``S_outer \\ S_inner`` on the triangular
    lattice: no occupied inner-to-outer crossing iff a vacant circuit winds
    around the hole.  By occupied/vacant symmetry of the configuration set
    this also covers the occupied-circuit / vacant-crossing pair."""
    if inner < 0:
        raise ValueError("the circuit test needs a hole, inner >= 0")
    ann = Annulus((0, 0), inner, outer)
    g = TRIANGULAR
    sites = region_sites(g, ann)
    index, adj, deg = _graph(g, sites, g.primal_offsets())
    _, wadj, wdeg, dth = _winding_graph(g, sites, ann)
    n = len(sites)
    src = np.zeros(n, dtype=np.bool_)
    dst = np.zeros(n, dtype=np.bool_)
    for z in region_boundary(g, ann, Side.INNER):
        src[index[z]] = True
    for z in region_boundary(g, ann, Side.OUTER):
        dst[index[z]] = True
    total, bad, nodes = _annulus_bb(adj, deg, wadj, wdeg, dth, src, dst)
    return DualityResult(int(total), int(bad), int(nodes))


def winding_circuit(g: LatticeGeometry, ann: Annulus, vacant_sites) -> bool:
    """Independent circuit test on an explicit set of vacant sites."""
    g = as_geometry(g)
    if ann.inner < 0:
        raise ValueError("the circuit test needs a hole, inner >= 0")
    sites = region_sites(g, ann)
    _, adj, deg, dth = _winding_graph(g, sites, ann)
    vac = set(vacant_sites)
    open_ = np.array([z in vac for z in sites], dtype=np.bool_)
    return bool(_winds(open_, adj, deg, dth))


# ---------------------------------------------------------------------------
# exact expectations by weighting every configuration


def _weights(prof: DensityProfile, sites):
    return [prof.density_at(z) for z in sites]


def exact_expectation(prof: DensityProfile, g: LatticeGeometry, box: Box, f, exact: bool = False):
    """``E[f(config)]`` and ``E[f^2]`` over all configurations of ``box``.

    ``exact`` uses rational arithmetic (densities must then be rationals or
    floats with exact binary value)."""
    g = as_geometry(g)
    sites = region_sites(g, box)
    n = len(sites)
    if n > 16:
        raise ValueError(f"{n} sites is too many to enumerate")
    ps = _weights(prof, sites)
    if exact:
        ps = [Fraction(p) for p in ps]
    m1 = Fraction(0) if exact else 0.0
    m2 = Fraction(0) if exact else 0.0
    for bits in itertools.product((False, True), repeat=n):
        w = Fraction(1) if exact else 1.0
        for b, p in zip(bits, ps):
            w *= p if b else 1 - p
        if w == 0:
            continue
        c = configuration_from_bits(g, box, np.array(bits))
        v = f(c)
        m1 += w * v
        m2 += w * v * v
    return m1, m2


def exact_pi(N: int = 1, p=Fraction(1, 2), g: LatticeGeometry = TRIANGULAR) -> Fraction:
    from .profile import Homogeneous

    prof = Homogeneous(float(p), as_geometry(g).p_c)
    m1, _ = exact_expectation(prof, g, Box((0, 0), N), lambda c: int(one_arm(c, (0, 0), N)), exact=True)
    return m1


def exact_phi(prof: DensityProfile, N: int = 1, g: LatticeGeometry = TRIANGULAR) -> tuple[float, float]:
    """Mean and variance of the local cluster count on ``S_N``."""
    m1, m2 = exact_expectation(prof, g, Box((0, 0), N), lambda c: local_cluster_count(c, N))
    return float(m1), float(m2 - m1 * m1)


def psi_mean_unit_scale(prof: DensityProfile, N: int, g: LatticeGeometry = TRIANGULAR) -> float:
    """``E[Psi_N]`` when every local scale is 1: ``z`` counts iff it is
    occupied with at least one occupied neighbour."""
    g = as_geometry(g)
    tot = 0.0
    for z in region_sites(g, Box((0, 0), N)):
        q = 1.0
        for dx, dy in g.primal_offsets():
            q *= 1 - prof.density_at((z[0] + dx, z[1] + dy))
        tot += prof.density_at(z) * (1 - q)
    return tot


def exact_xi_tilde(p: float, box_radius: int = 2, g: LatticeGeometry = TRIANGULAR) -> float:
    """Mean radius over the finite (off-boundary) clusters of the origin, by
    summing over every connected set of ``S_{box-1}`` containing the origin."""
    g = as_geometry(g)
    inner = region_sites(g, Box((0, 0), box_radius - 1))
    others = [z for z in inner if z != (0, 0)]
    if len(others) > 20:
        raise ValueError("box too large for animal enumeration")
    num = 0.0
    den = 0.0
    for bits in itertools.product((False, True), repeat=len(others)):
        C = {(0, 0)} | {z for z, b in zip(others, bits) if b}
        # connected?
        seen = {(0, 0)}
        todo = [(0, 0)]
        while todo:
            x, y = todo.pop()
            for dx, dy in g.primal_offsets():
                w = (x + dx, y + dy)
                if w in C and w not in seen:
                    seen.add(w)
                    todo.append(w)
        if seen != C:
            continue
        bd = {(x + dx, y + dy) for x, y in C for dx, dy in g.primal_offsets()} - C
        prob = p ** len(C) * (1 - p) ** len(bd)
        num += prob * sum(norm(z) ** 2 for z in C)
        den += prob * len(C)
    return math.sqrt(num / den)
