"""Compiled cluster kernels.

Two families:

* union-find labelling over an explicit occupancy grid (used by
  :mod:`inhomperc.engine` on sampled configurations);
* lazy explorers that evaluate a site's state on demand from
  ``site_uniform(seed, x, y) < dens[max(|x|, |y|)]``.  Because the per-site
  draw is a pure function of ``(seed, x, y)``, the answer of a lazy explorer is
  exactly the answer on the fully sampled configuration.

Grids are indexed ``(y + R) * (2R + 1) + (x + R)`` for the box ``S_R(0)``.
Replica drivers take ``(seed_base, start, n)`` and derive replica seeds with
the same mixing as :func:`inhomperc.rng.derive_seed`.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

from .rng import GOLDEN, nb_mix64, nb_site_uniform

_ONE = np.uint64(1)


@njit(cache=True, inline="always")
def nb_derive_seed(seed_base, i):
    return nb_mix64(seed_base + (np.uint64(i) + _ONE) * np.uint64(GOLDEN))


@njit(cache=True, inline="always")
def _is_open(seed, x, y, dens, vacant):
    r = max(abs(x), abs(y))
    occ = nb_site_uniform(seed, x, y) < dens[r]
    return occ != vacant


# ---------------------------------------------------------------------------
# union-find


@njit(cache=True, inline="always")
def uf_find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


@njit(cache=True, inline="always")
def uf_union(parent, rank, a, b):
    ra = uf_find(parent, a)
    rb = uf_find(parent, b)
    if ra == rb:
        return ra
    if rank[ra] < rank[rb]:
        ra, rb = rb, ra
    parent[rb] = ra
    if rank[ra] == rank[rb]:
        rank[ra] += 1
    return ra


@njit(cache=True)
def label_grid(open_mask, nx, ny, offs, parent, rank):
    """Union all adjacent open pairs of an ``ny x nx`` grid (row-major, x fastest).

    ``offs`` must be symmetric; only the forward half of each pair is visited.
    """
    for j in range(ny):
        for i in range(nx):
            a = j * nx + i
            if not open_mask[a]:
                continue
            for k in range(offs.shape[0]):
                if offs[k, 1] < 0 or (offs[k, 1] == 0 and offs[k, 0] < 0):
                    continue
                ii = i + offs[k, 0]
                jj = j + offs[k, 1]
                if ii < 0 or jj < 0 or ii >= nx or jj >= ny:
                    continue
                b = jj * nx + ii
                if open_mask[b]:
                    uf_union(parent, rank, a, b)


@njit(cache=True)
def find_all(parent, n):
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        out[i] = uf_find(parent, i)
    return out


# ---------------------------------------------------------------------------
# bitset + growable stack helpers


@njit(cache=True, inline="always")
def _test(bits, i):
    return (bits[i >> 6] >> np.uint64(i & 63)) & _ONE


@njit(cache=True, inline="always")
def _set(bits, i):
    bits[i >> 6] |= _ONE << np.uint64(i & 63)


@njit(cache=True)
def _grow(stack):
    new = np.empty(stack.shape[0] * 2, dtype=stack.dtype)
    new[: stack.shape[0]] = stack
    return new


# ---------------------------------------------------------------------------
# lazy explorers (single replica)
#
# The hot loops run on a fixed stack and hand control back when it may
# overflow; the caller grows it and resumes.  Reassigning the array inside the
# loop itself is several times slower.

_GROW = -2


@njit(cache=True)
def _oc_run(seed, dens, offs, vacant, R, stop, bits, stack, top, acc):
    side = 2 * R + 1
    cap = stack.shape[0] - offs.shape[0]
    while top > 0:
        if top > cap:
            return top, _GROW
        top -= 1
        a = stack[top]
        x = a % side - R
        y = a // side - R
        acc[0] += 1
        r = max(abs(x), abs(y))
        acc[1] += r * r
        if r > acc[2]:
            acc[2] = r
            if stop and r == R:
                return 0, 0
        for k in range(offs.shape[0]):
            xx = x + offs[k, 0]
            yy = y + offs[k, 1]
            if abs(xx) > R or abs(yy) > R:
                continue
            b = (yy + R) * side + (xx + R)
            if _test(bits, b):
                continue
            if _is_open(seed, xx, yy, dens, vacant):
                _set(bits, b)
                stack[top] = b
                top += 1
    return 0, 0


@njit(cache=True)
def origin_cluster(seed, dens, offs, vacant, R, stop, bits, stack):
    """Explore the open cluster of the origin inside ``S_R``.

    Returns ``(size, sum of ||z||^2, max radius, stack)``; ``size = 0`` if the
    origin is closed.  With ``stop`` the search ends as soon as ``dS_R`` is
    reached (size and sum are then partial).  Only open sites are marked in
    ``bits``, which must be clear on entry and is left dirty.
    """
    if not _is_open(seed, 0, 0, dens, vacant):
        return 0, 0.0, -1, stack
    side = 2 * R + 1
    start = R * side + R
    _set(bits, start)
    stack[0] = start
    acc = np.zeros(3, dtype=np.float64)
    top, status = _oc_run(seed, dens, offs, vacant, R, stop, bits, stack, 1, acc)
    while status == _GROW:
        stack = _grow(stack)
        top, status = _oc_run(seed, dens, offs, vacant, R, stop, bits, stack, top, acc)
    return int(acc[0]), acc[1], int(acc[2]), stack


@njit(cache=True)
def _ann_run(seed, dens, offs, vacant, inner, outer, bits, stack, top):
    R = outer
    side = 2 * R + 1
    cap = stack.shape[0] - offs.shape[0]
    while top > 0:
        if top > cap:
            return top, _GROW
        top -= 1
        b = stack[top]
        x = b % side - R
        y = b // side - R
        for k in range(offs.shape[0]):
            xx = x + offs[k, 0]
            yy = y + offs[k, 1]
            rr = max(abs(xx), abs(yy))
            if rr <= inner or rr > outer:
                continue
            c = (yy + R) * side + (xx + R)
            if _test(bits, c):
                continue
            # closed sites are marked too, so each site is drawn once
            _set(bits, c)
            if _is_open(seed, xx, yy, dens, vacant):
                if rr == outer:
                    return 0, 1
                stack[top] = c
                top += 1
    return 0, 0


@njit(cache=True)
def annulus_cross(seed, dens, offs, vacant, inner, outer, bits, stack):
    """Open path from ring ``inner + 1`` to ring ``outer`` inside
    ``inner < ||z|| <= outer`` (centre 0).  Stops at the first success."""
    R = outer
    side = 2 * R + 1
    r0 = inner + 1
    # walk the source ring; r0 == 0 means the single site at the origin
    nring = 1 if r0 == 0 else 8 * r0
    for t in range(nring):
        if r0 == 0:
            sx, sy = 0, 0
        else:
            # perimeter walk of the square ring of radius r0
            q = t // (2 * r0)
            s = t % (2 * r0)
            if q == 0:
                sx, sy = -r0 + s, -r0
            elif q == 1:
                sx, sy = r0, -r0 + s
            elif q == 2:
                sx, sy = r0 - s, r0
            else:
                sx, sy = -r0, r0 - s
        a = (sy + R) * side + (sx + R)
        if _test(bits, a):
            continue
        _set(bits, a)
        if not _is_open(seed, sx, sy, dens, vacant):
            continue
        if r0 == outer:
            return True, stack
        stack[0] = a
        top, status = _ann_run(seed, dens, offs, vacant, inner, outer, bits, stack, 1)
        while status == _GROW:
            stack = _grow(stack)
            top, status = _ann_run(seed, dens, offs, vacant, inner, outer, bits, stack, top)
        if status == 1:
            return True, stack
    return False, stack


@njit(cache=True)
def _para_run(seed, dens, offs, vacant, ox, oy, length, width, swap, short_way, bits, stack, top):
    nx = length + 1
    cap = stack.shape[0] - offs.shape[0]
    while top > 0:
        if top > cap:
            return top, _GROW
        top -= 1
        b = stack[top]
        i = b % nx
        j = b // nx
        for k in range(offs.shape[0]):
            if swap:
                ii = i + offs[k, 1]
                jj = j + offs[k, 0]
            else:
                ii = i + offs[k, 0]
                jj = j + offs[k, 1]
            if ii < 0 or jj < 0 or ii > length or jj > width:
                continue
            c = jj * nx + ii
            if _test(bits, c):
                continue
            _set(bits, c)
            if swap:
                xx, yy = ox + jj, oy + ii
            else:
                xx, yy = ox + ii, oy + jj
            if _is_open(seed, xx, yy, dens, vacant):
                if (short_way and jj == width) or ((not short_way) and ii == length):
                    return 0, 1
                stack[top] = c
                top += 1
    return 0, 0


@njit(cache=True)
def para_cross(seed, dens, offs, vacant, ox, oy, length, width, swap, short_way, bits, stack):
    """Open crossing of the parallelogram ``origin + (i, j)``, ``0<=i<=length``,
    ``0<=j<=width`` (``swap`` exchanges the axes).  Long way joins ``i = 0`` to
    ``i = length``; short way joins ``j = 0`` to ``j = width``."""
    nx = length + 1
    nsrc = width + 1 if not short_way else length + 1
    for t in range(nsrc):
        if short_way:
            i0, j0 = t, 0
        else:
            i0, j0 = 0, t
        a = j0 * nx + i0
        if _test(bits, a):
            continue
        _set(bits, a)
        if swap:
            sx, sy = ox + j0, oy + i0
        else:
            sx, sy = ox + i0, oy + j0
        if not _is_open(seed, sx, sy, dens, vacant):
            continue
        if (short_way and j0 == width) or ((not short_way) and i0 == length):
            return True, stack
        stack[0] = a
        top, status = _para_run(seed, dens, offs, vacant, ox, oy, length, width, swap, short_way, bits, stack, 1)
        while status == _GROW:
            stack = _grow(stack)
            top, status = _para_run(seed, dens, offs, vacant, ox, oy, length, width, swap, short_way,
                                    bits, stack, top)
        if status == 1:
            return True, stack
    return False, stack


@njit(cache=True)
def psi_counts_one(seed, dens, offs, R, Ns, ell, occ, parent, rank, lo_x, hi_x, lo_y, hi_y, out):
    """Label ``S_R`` and count, for each ``N`` in ``Ns``, sites ``z`` of ``S_N``
    whose cluster reaches sup-distance ``ell[||z||]`` from ``z``."""
    side = 2 * R + 1
    n = side * side
    for a in range(n):
        x = a % side - R
        y = a // side - R
        occ[a] = _is_open(seed, x, y, dens, False)
        parent[a] = a
        rank[a] = 0
    label_grid(occ, side, side, offs, parent, rank)
    for a in range(n):
        lo_x[a] = side
        hi_x[a] = -1
        lo_y[a] = side
        hi_y[a] = -1
    for a in range(n):
        if not occ[a]:
            continue
        root = uf_find(parent, a)
        i = a % side
        j = a // side
        if i < lo_x[root]:
            lo_x[root] = i
        if i > hi_x[root]:
            hi_x[root] = i
        if j < lo_y[root]:
            lo_y[root] = j
        if j > hi_y[root]:
            hi_y[root] = j
    for m in range(Ns.shape[0]):
        out[m] = 0
    Nmax = Ns[Ns.shape[0] - 1]
    for j in range(R - Nmax, R + Nmax + 1):
        for i in range(R - Nmax, R + Nmax + 1):
            a = j * side + i
            if not occ[a]:
                continue
            root = uf_find(parent, a)
            reach = max(max(i - lo_x[root], hi_x[root] - i), max(j - lo_y[root], hi_y[root] - j))
            r = max(abs(i - R), abs(j - R))
            if reach >= ell[r]:
                for m in range(Ns.shape[0]):
                    if r <= Ns[m]:
                        out[m] += 1


# ---------------------------------------------------------------------------
# replica drivers; chunked so results never depend on the chunk count


@njit(cache=True, parallel=True)
def drive_origin_cluster(seed_base, start, n, dens, offs, vacant, R, stop, nchunks):
    sizes = np.zeros(n, dtype=np.int64)
    s2 = np.zeros(n, dtype=np.float64)
    rmax = np.zeros(n, dtype=np.int64)
    side = 2 * R + 1
    nwords = (side * side + 63) // 64
    for c in prange(nchunks):
        bits = np.zeros(nwords, dtype=np.uint64)
        stack = np.empty(1024, dtype=np.int64)
        lo = n * c // nchunks
        hi = n * (c + 1) // nchunks
        for i in range(lo, hi):
            seed = nb_derive_seed(seed_base, start + i)
            sz, q, rm, stack = origin_cluster(seed, dens, offs, vacant, R, stop, bits, stack)
            sizes[i] = sz
            s2[i] = q
            rmax[i] = rm
            bits[:] = 0
    return sizes, s2, rmax


@njit(cache=True, parallel=True)
def drive_annulus_cross(seed_base, start, n, dens, offs, vacant, inner, outer, nchunks):
    out = np.zeros(n, dtype=np.bool_)
    side = 2 * outer + 1
    nwords = (side * side + 63) // 64
    for c in prange(nchunks):
        bits = np.zeros(nwords, dtype=np.uint64)
        stack = np.empty(1024, dtype=np.int64)
        lo = n * c // nchunks
        hi = n * (c + 1) // nchunks
        for i in range(lo, hi):
            seed = nb_derive_seed(seed_base, start + i)
            ok, stack = annulus_cross(seed, dens, offs, vacant, inner, outer, bits, stack)
            out[i] = ok
            bits[:] = 0
    return out


@njit(cache=True, parallel=True)
def drive_para_cross(seed_base, start, n, dens, offs, vacant, ox, oy, length, width, swap, short_way, nchunks):
    out = np.zeros(n, dtype=np.bool_)
    nwords = ((length + 1) * (width + 1) + 63) // 64
    for c in prange(nchunks):
        bits = np.zeros(nwords, dtype=np.uint64)
        stack = np.empty(1024, dtype=np.int64)
        lo = n * c // nchunks
        hi = n * (c + 1) // nchunks
        for i in range(lo, hi):
            seed = nb_derive_seed(seed_base, start + i)
            ok, stack = para_cross(seed, dens, offs, vacant, ox, oy, length, width, swap, short_way, bits, stack)
            out[i] = ok
            bits[:] = 0
    return out


@njit(cache=True, parallel=True)
def drive_two_point(seed_base, start, n, dens, offs, R, Ns, nchunks):
    """Vacant cluster of the origin in ``S_R``: hits of ``(N, 0)`` and ``(0, N)``."""
    hx = np.zeros((n, Ns.shape[0]), dtype=np.bool_)
    hy = np.zeros((n, Ns.shape[0]), dtype=np.bool_)
    side = 2 * R + 1
    nwords = (side * side + 63) // 64
    for c in prange(nchunks):
        bits = np.zeros(nwords, dtype=np.uint64)
        stack = np.empty(1024, dtype=np.int64)
        lo = n * c // nchunks
        hi = n * (c + 1) // nchunks
        for i in range(lo, hi):
            seed = nb_derive_seed(seed_base, start + i)
            sz, q, rm, stack = origin_cluster(seed, dens, offs, True, R, False, bits, stack)
            if sz > 1:
                for m in range(Ns.shape[0]):
                    N = Ns[m]
                    hx[i, m] = _test(bits, R * side + (N + R)) == _ONE
                    hy[i, m] = _test(bits, (N + R) * side + R) == _ONE
            bits[:] = 0
    return hx, hy


@njit(cache=True, parallel=True)
def drive_psi(seed_base, start, n, dens, offs, R, Ns, ell, nchunks):
    out = np.zeros((n, Ns.shape[0]), dtype=np.int64)
    side = 2 * R + 1
    m = side * side
    for c in prange(nchunks):
        occ = np.zeros(m, dtype=np.bool_)
        parent = np.empty(m, dtype=np.int32)
        rank = np.empty(m, dtype=np.int8)
        lo_x = np.empty(m, dtype=np.int32)
        hi_x = np.empty(m, dtype=np.int32)
        lo_y = np.empty(m, dtype=np.int32)
        hi_y = np.empty(m, dtype=np.int32)
        row = np.zeros(Ns.shape[0], dtype=np.int64)
        lo = n * c // nchunks
        hi = n * (c + 1) // nchunks
        for i in range(lo, hi):
            seed = nb_derive_seed(seed_base, start + i)
            psi_counts_one(seed, dens, offs, R, Ns, ell, occ, parent, rank, lo_x, hi_x, lo_y, hi_y, row)
            out[i, :] = row
    return out


@njit(cache=True, parallel=True)
def drive_annulus_subset(seed_base, idx, dens, offs, inner, outer, nchunks):
    """Primal annulus crossing for the replicas listed in ``idx`` only."""
    n = idx.shape[0]
    out = np.zeros(n, dtype=np.bool_)
    side = 2 * outer + 1
    nwords = (side * side + 63) // 64
    for c in prange(nchunks):
        bits = np.zeros(nwords, dtype=np.uint64)
        stack = np.empty(1024, dtype=np.int64)
        lo = n * c // nchunks
        hi = n * (c + 1) // nchunks
        for i in range(lo, hi):
            seed = nb_derive_seed(seed_base, idx[i])
            ok, stack = annulus_cross(seed, dens, offs, False, inner, outer, bits, stack)
            out[i] = ok
            bits[:] = 0
    return out
