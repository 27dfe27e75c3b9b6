"""Numba kernels for the hot loops: occupancy hashing, ball stamping, path
integration and graph walks.

Everything here works on plain arrays so the public modules can wrap it with
typed objects.  Cell ``i`` along an axis has its center at ``(i + 0.5) * h``.
"""
import math

import numpy as np
from numba import njit

EMPTY = np.int64(-(2**63))
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


# --------------------------------------------------------------------------
# open-addressing hash set of packed cell keys

@njit(cache=True)
def _slot(key, shift):
    # splitmix64 finalizer; plain multiplicative hashing clusters on lattice keys
    z = np.uint64(key)
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    z = z ^ (z >> np.uint64(31))
    return np.int64(z >> np.uint64(shift))


@njit(cache=True)
def _grow(keys, vals, shift):
    cap = keys.shape[0] * 2
    nkeys = np.full(cap, EMPTY, dtype=np.int64)
    nvals = np.zeros(cap, dtype=np.int32)
    nshift = shift - 1
    mask = cap - 1
    for i in range(keys.shape[0]):
        k = keys[i]
        if k != EMPTY:
            j = _slot(k, nshift)
            while nkeys[j] != EMPTY:
                j = (j + 1) & mask
            nkeys[j] = k
            nvals[j] = vals[i]
    return nkeys, nvals, nshift


@njit(cache=True)
def _insert(keys, vals, shift, key, val):
    """Insert ``key`` with ``val`` unless present; return True if new."""
    mask = keys.shape[0] - 1
    j = _slot(key, shift)
    while True:
        k = keys[j]
        if k == key:
            return False
        if k == EMPTY:
            keys[j] = key
            vals[j] = val
            return True
        j = (j + 1) & mask


@njit(cache=True)
def table_new(log2cap):
    cap = 1 << log2cap
    return (np.full(cap, EMPTY, dtype=np.int64), np.zeros(cap, dtype=np.int32),
            64 - log2cap)


@njit(cache=True)
def table_insert_many(keys, vals, shift, count, new_keys, val):
    """Bulk insert used by the Python-level OccupancyGrid."""
    added = np.zeros(new_keys.shape[0], dtype=np.bool_)
    for i in range(new_keys.shape[0]):
        if 2 * (count + 1) > keys.shape[0]:
            keys, vals, shift = _grow(keys, vals, shift)
        if _insert(keys, vals, shift, new_keys[i], val):
            count += 1
            added[i] = True
    return keys, vals, shift, count, added


@njit(cache=True)
def table_contains(keys, shift, query):
    mask = keys.shape[0] - 1
    out = np.zeros(query.shape[0], dtype=np.bool_)
    for i in range(query.shape[0]):
        j = _slot(query[i], shift)
        while True:
            k = keys[j]
            if k == query[i]:
                out[i] = True
                break
            if k == EMPTY:
                break
            j = (j + 1) & mask
    return out


@njit(cache=True)
def table_items(keys, vals, count):
    ok = np.empty(count, dtype=np.int64)
    ov = np.empty(count, dtype=np.int32)
    n = 0
    for i in range(keys.shape[0]):
        if keys[i] != EMPTY:
            ok[n] = keys[i]
            ov[n] = vals[i]
            n += 1
    return ok, ov


# --------------------------------------------------------------------------
# key packing: axis 0 in the highest bits, last axis in the lowest bits

@njit(cache=True)
def pack_bits(dim):
    return 63 // dim


@njit(cache=True)
def pack_cells(cells):
    n, dim = cells.shape
    bits = 63 // dim
    bias = np.int64(1) << (bits - 1)
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        key = np.int64(0)
        for a in range(dim):
            c = cells[i, a]
            if c < -bias or c >= bias:
                raise OverflowError("cell coordinate outside packable range")
            key = (key << bits) | (c + bias)
        out[i] = key
    return out


@njit(cache=True)
def unpack_cells(keys, dim):
    bits = 63 // dim
    bias = np.int64(1) << (bits - 1)
    mask = (np.int64(1) << bits) - 1
    out = np.empty((keys.shape[0], dim), dtype=np.int64)
    for i in range(keys.shape[0]):
        key = keys[i]
        for a in range(dim - 1, -1, -1):
            out[i, a] = (key & mask) - bias
            key = key >> bits
    return out


@njit(cache=True)
def cell_radii(keys, dim, h):
    """Euclidean norm of each cell center."""
    bits = 63 // dim
    bias = np.int64(1) << (bits - 1)
    mask = (np.int64(1) << bits) - 1
    out = np.empty(keys.shape[0])
    for i in range(keys.shape[0]):
        key = keys[i]
        s = 0.0
        for a in range(dim):
            c = ((key & mask) - bias + 0.5) * h
            s += c * c
            key = key >> bits
        out[i] = math.sqrt(s)
    return out


# --------------------------------------------------------------------------
# ball stamping

@njit(cache=True)
def _lo(x, s, h):
    return np.int64(math.ceil((x - s) * (1.0 / h) - 0.5))


@njit(cache=True)
def _hi(x, s, h):
    return np.int64(math.floor((x + s) * (1.0 / h) - 0.5))


@njit(cache=True)
def block_shape(dim):
    """log2 of the occupancy-block side per axis; 64 cells per block."""
    lb = np.zeros(dim, dtype=np.int64)
    left = 6
    a = dim - 1
    while left > 0:
        lb[a] += 1
        left -= 1
        a -= 1
        if a < 0:
            a = dim - 1
    return lb


@njit(cache=True)
def _block_slot(keys, bms, shift, key):
    mask = keys.shape[0] - 1
    j = _slot(key, shift)
    while True:
        k = keys[j]
        if k == key:
            return j, False
        if k == EMPTY:
            keys[j] = key
            bms[j] = np.uint64(0)
            return j, True
        j = (j + 1) & mask


@njit(cache=True)
def _grow_blocks(keys, bms, shift):
    cap = keys.shape[0] * 2
    nkeys = np.full(cap, EMPTY, dtype=np.int64)
    nbms = np.zeros(cap, dtype=np.uint64)
    nshift = shift - 1
    mask = cap - 1
    for i in range(keys.shape[0]):
        k = keys[i]
        if k != EMPTY:
            j = _slot(k, nshift)
            while nkeys[j] != EMPTY:
                j = (j + 1) & mask
            nkeys[j] = k
            nbms[j] = bms[i]
    return nkeys, nbms, nshift


@njit(cache=True)
def _stamp(p, q, has_q, eps2, h, lb, keys, bms, shift, out_keys, out_b, n_out,
           bucket, work, iwork):
    """Set the cells of B(p, eps) that are not inside B(q, eps).

    Newly set cells are appended to ``out_keys``/``out_b`` from ``n_out``.
    Returns (new n_out, number of new blocks).
    """
    dim = p.shape[0]
    bits = 63 // dim
    bias = np.int64(1) << (bits - 1)
    m = dim - 1          # column axis
    r = dim - 2          # row axis, looped directly
    inv_h = 1.0 / h
    rem = work[0]
    remq = work[1]
    idx = iwork[0]
    hi = iwork[1]
    prefix = iwork[2]
    bprefix = iwork[3]
    loc = iwork[4]
    new_blocks = 0
    last_key = EMPTY
    last_slot = 0
    one = np.uint64(1)
    zero = np.uint64(0)
    ushift = np.uint64(shift)
    tmask = keys.shape[0] - 1
    lbz = lb[m]
    zmask = (np.int64(1) << lbz) - 1
    lbr = lb[r]
    rmask = (np.int64(1) << lbr) - 1
    pm = p[m]
    qm = q[m]
    pr = p[r]
    qr = q[r]
    level = 0
    rem[0] = eps2
    remq[0] = eps2
    prefix[0] = 0
    bprefix[0] = 0
    loc[0] = 0
    if r > 0:
        s0 = math.sqrt(eps2)
        idx[0] = _lo(p[0], s0, h)
        hi[0] = _hi(p[0], s0, h)
    while True:
        if r > 0:
            if idx[level] > hi[level]:
                # parent indices were advanced before descending
                level -= 1
                if level < 0:
                    break
                continue
            c = (idx[level] + 0.5) * h
            dp = c - p[level]
            r_next = rem[level] - dp * dp
            if r_next < 0.0:
                idx[level] += 1
                continue
            dq = c - q[level]
            i_l = idx[level]
            nl = level + 1
            rem[nl] = r_next
            remq[nl] = remq[level] - dq * dq
            prefix[nl] = (prefix[level] << bits) | (i_l + bias)
            bprefix[nl] = (bprefix[level] << bits) | ((i_l >> lb[level]) + bias)
            loc[nl] = (loc[level] << lb[level]) | (i_l & ((np.int64(1) << lb[level]) - 1))
            idx[level] += 1
            if nl < r:
                level = nl
                s = math.sqrt(r_next)
                idx[level] = _lo(p[level], s, h)
                hi[level] = _hi(p[level], s, h)
                continue
            rr = rem[nl]
            rq = remq[nl]
            pre0 = prefix[nl]
            bpre0 = bprefix[nl]
            loc0 = loc[nl]
        else:
            rr = eps2
            rq = eps2
            pre0 = 0
            bpre0 = 0
            loc0 = 0
        # tight loop over the row axis
        s = math.sqrt(rr)
        jlo = _lo(pr, s, h)
        jhi = _hi(pr, s, h)
        for j in range(jlo, jhi + 1):
            c = (j + 0.5) * h
            dp = c - pr
            rc = rr - dp * dp
            if rc < 0.0:
                continue
            sc = math.sqrt(rc)
            klo = np.int64(math.ceil((pm - sc) * inv_h - 0.5))
            khi = np.int64(math.floor((pm + sc) * inv_h - 0.5))
            dq = c - qr
            rqc = rq - dq * dq
            # q-run of this column, kept branch-light: an empty q-run
            # becomes [khi + 1, khi + 1] so the first run takes everything
            sq = math.sqrt(max(rqc, 0.0))
            qlo = np.int64(math.ceil((qm - sq) * inv_h - 0.5))
            qhi = np.int64(math.floor((qm + sq) * inv_h - 0.5))
            empty_q = (not has_q) or rqc < 0.0 or qlo > qhi
            qlo = khi + 1 if empty_q else qlo
            qhi = khi + 1 if empty_q else qhi
            a1 = klo
            b1 = min(khi, qlo - 1)
            a2 = max(klo, qhi + 1)
            b2 = khi
            if b1 < a1 and b2 < a2:
                continue
            base = ((pre0 << bits) | (j + bias)) << bits
            bpre_z = ((bpre0 << bits) | ((j >> lbr) + bias)) << bits
            lbase = ((loc0 << lbr) | (j & rmask)) << lbz
            for seg in range(2):
                k = a1 if seg == 0 else a2
                r2 = b1 if seg == 0 else b2
                while k <= r2:
                    kb = k >> lbz
                    kend = min(r2, ((kb + 1) << lbz) - 1)
                    b0 = lbase | (k & zmask)
                    mask = ((one << np.uint64(kend - k + 1)) - one) << np.uint64(b0)
                    bkey = bpre_z | (kb + bias)
                    if bkey == last_key:
                        slot = last_slot
                    else:
                        z = np.uint64(bkey)
                        z = (z ^ (z >> np.uint64(30))) * _MIX1
                        z = (z ^ (z >> np.uint64(27))) * _MIX2
                        z = z ^ (z >> np.uint64(31))
                        slot = np.int64(z >> ushift)
                        while True:
                            kk = keys[slot]
                            if kk == bkey:
                                break
                            if kk == EMPTY:
                                keys[slot] = bkey
                                bms[slot] = zero
                                new_blocks += 1
                                break
                            slot = (slot + 1) & tmask
                        last_key = bkey
                        last_slot = slot
                    old = bms[slot]
                    fresh_bits = mask & ~old
                    if fresh_bits != zero:
                        bms[slot] = old | fresh_bits
                        for c2 in range(k, kend + 1):
                            bit = one << np.uint64(lbase | (c2 & zmask))
                            if fresh_bits & bit:
                                out_keys[n_out] = base | (c2 + bias)
                                out_b[n_out] = bucket
                                n_out += 1
                    k = kend + 1
        if r == 0:
            break
    return n_out, new_blocks


@njit(cache=True)
def ball_bounds(dim, eps, h, lb):
    """Upper bounds on cells and blocks touched by one ball."""
    side = 2.0 * eps / h + 2.0
    cells = 1.0
    blocks = 1.0
    for a in range(dim):
        cells *= side
        blocks *= math.ceil(side / (1 << lb[a])) + 1.0
    return np.int64(cells), np.int64(blocks)


@njit(cache=True)
def sausage_cells(points, eps, h, skip, stops):
    """Cells of the eps-sausage of a sampled path, in order of first cover.

    Parameters
    ----------
    points : (n, d) array, d >= 2
    eps, h : ball radius and cell size
    skip : stamping is skipped while the displacement from the last stamped
        point stays below this distance
    stops : sorted point indices; every stop is stamped and cells first
        covered by points ``stops[k-1] < i <= stops[k]`` get bucket ``k``

    Returns
    -------
    keys, buckets : packed cell keys and their first-cover bucket
    n_stamps : number of stamped points
    """
    n, dim = points.shape
    bits = 63 // dim
    bias = np.int64(1) << (bits - 1)
    lb = block_shape(dim)
    per_cells, per_blocks = ball_bounds(dim, eps, h, lb)
    log2cap = 10
    while (1 << log2cap) < 4 * per_blocks:
        log2cap += 1
    keys = np.full(1 << log2cap, EMPTY, dtype=np.int64)
    bms = np.zeros(1 << log2cap, dtype=np.uint64)
    shift = 64 - log2cap
    nblocks = 0
    out_keys = np.empty(max(4 * per_cells, 1 << 16), dtype=np.int64)
    out_b = np.empty(out_keys.shape[0], dtype=np.int32)
    n_out = 0
    eps2 = eps * eps
    skip2 = skip * skip
    work = np.empty((2, dim))
    iwork = np.zeros((5, dim), dtype=np.int64)
    q = points[0].copy()
    has_q = False
    n_stamps = 0
    last = stops[stops.shape[0] - 1]
    bucket = 0
    for i in range(last + 1):
        while stops[bucket] < i:
            bucket += 1
        p = points[i]
        if has_q and i != stops[bucket]:
            d2 = 0.0
            for a in range(dim):
                dd = p[a] - q[a]
                d2 += dd * dd
            if d2 < skip2:
                continue
        for a in range(dim):
            if abs(p[a]) / h + eps / h + 2.0 >= bias:
                raise OverflowError("path left the packable cell range")
        while 2 * (nblocks + per_blocks) > keys.shape[0]:
            keys, bms, shift = _grow_blocks(keys, bms, shift)
        if n_out + per_cells > out_keys.shape[0]:
            size = 2 * out_keys.shape[0] + per_cells
            nk = np.empty(size, dtype=np.int64)
            nb = np.empty(size, dtype=np.int32)
            nk[:n_out] = out_keys[:n_out]
            nb[:n_out] = out_b[:n_out]
            out_keys = nk
            out_b = nb
        n_stamps += 1
        n_out, fresh = _stamp(p, q, has_q, eps2, h, lb, keys, bms, shift,
                              out_keys, out_b, n_out, bucket, work, iwork)
        nblocks += fresh
        for a in range(dim):
            q[a] = p[a]
        has_q = True
    return out_keys[:n_out].copy(), out_b[:n_out].copy(), n_stamps


@njit(cache=True)
def interval_sausage_1d(x, eps, h, stops):
    """Cell count of the 1-d sausage at each stop.

    A continuous path covers every point between consecutive samples, so the
    sausage is the interval [min - eps, max + eps] of the samples so far.
    """
    out = np.empty(stops.shape[0], dtype=np.int64)
    lo = x[0]
    hi = x[0]
    k = 0
    for i in range(stops[stops.shape[0] - 1] + 1):
        if x[i] < lo:
            lo = x[i]
        elif x[i] > hi:
            hi = x[i]
        while k < stops.shape[0] and stops[k] == i:
            out[k] = _hi(hi, eps, h) - _lo(lo, eps, h) + 1
            k += 1
    return out


# --------------------------------------------------------------------------
# radial conformal metric

@njit(cache=True)
def _smooth(u):
    return u * u * u * (u * (6.0 * u - 15.0) + 10.0)


@njit(cache=True)
def _smooth_d(u):
    w = u * (u - 1.0)
    return 30.0 * w * w


@njit(cache=True)
def radial_factor(r, breaks, start, other):
    """Return (G(r), G'(r)) for the plateau/connector profile."""
    v = start
    for j in range(breaks.shape[0]):
        b = breaks[j]
        nxt = other if v == start else start
        if r < b - 1.0:
            return v, 0.0
        if r < b:
            u = r - (b - 1.0)
            return v + (nxt - v) * _smooth(u), (nxt - v) * _smooth_d(u)
        v = nxt
    return v, 0.0


@njit(cache=True)
def radial_factor_many(r, breaks, start, other):
    g = np.empty(r.shape[0])
    dg = np.empty(r.shape[0])
    for i in range(r.shape[0]):
        g[i], dg[i] = radial_factor(r[i], breaks, start, other)
    return g, dg


@njit(cache=True)
def radial_em(x0, noise, dt, breaks, start, other):
    """Euler-Maruyama for the generator 1/2 Laplace-Beltrami of g = G(|x|) I.

    ``noise`` holds standard normals of shape (n, d); returns (n + 1, d).
    """
    n, dim = noise.shape
    out = np.empty((n + 1, dim))
    sdt = math.sqrt(dt)
    c = (dim - 2) / 4.0
    for a in range(dim):
        out[0, a] = x0[a]
    for i in range(n):
        r2 = 0.0
        for a in range(dim):
            r2 += out[i, a] * out[i, a]
        r = math.sqrt(r2)
        g, dg = radial_factor(r, breaks, start, other)
        sig = sdt / math.sqrt(g)
        if dg != 0.0 and r > 0.0:
            drift = c * dg / (g * g * r) * dt
            for a in range(dim):
                out[i + 1, a] = out[i, a] + drift * out[i, a] + sig * noise[i, a]
        else:
            for a in range(dim):
                out[i + 1, a] = out[i, a] + sig * noise[i, a]
    return out


# --------------------------------------------------------------------------
# occupation times and hitting

@njit(cache=True)
def first_inside(points, center, radius, start):
    r2 = radius * radius
    for i in range(start, points.shape[0]):
        s = 0.0
        for a in range(points.shape[1]):
            d = points[i, a] - center[a]
            s += d * d
        if s < r2:
            return i
    return -1


@njit(cache=True)
def first_outside(points, radius):
    r2 = radius * radius
    for i in range(points.shape[0]):
        s = 0.0
        for a in range(points.shape[1]):
            s += points[i, a] * points[i, a]
        if s >= r2:
            return i
    return -1


@njit(cache=True)
def count_inside(points, center, radius, start, stop):
    r2 = radius * radius
    n = 0
    for i in range(start, stop):
        s = 0.0
        for a in range(points.shape[1]):
            d = points[i, a] - center[a]
            s += d * d
        if s < r2:
            n += 1
    return n


# --------------------------------------------------------------------------
# pre-Sierpinski gasket in triangular-lattice coordinates (a, b):
# the unit up-triangle with lower-left corner (a, b) belongs to the graph
# iff a & b == 0.

@njit(cache=True)
def gasket_is_triangle(a, b):
    return a >= 0 and b >= 0 and (a & b) == 0


@njit(cache=True)
def gasket_nbrs(a, b, out):
    """Write the neighbours of (a, b) into ``out`` (4 x 2) sorted; return count."""
    n = 0
    if gasket_is_triangle(a, b):
        out[n, 0] = a + 1
        out[n, 1] = b
        out[n + 1, 0] = a
        out[n + 1, 1] = b + 1
        n += 2
    if gasket_is_triangle(a - 1, b):
        out[n, 0] = a - 1
        out[n, 1] = b
        out[n + 1, 0] = a - 1
        out[n + 1, 1] = b + 1
        n += 2
    if gasket_is_triangle(a, b - 1):
        out[n, 0] = a
        out[n, 1] = b - 1
        out[n + 1, 0] = a + 1
        out[n + 1, 1] = b - 1
        n += 2
    # insertion sort, lexicographic
    for i in range(1, n):
        x0 = out[i, 0]
        x1 = out[i, 1]
        j = i - 1
        while j >= 0 and (out[j, 0] > x0 or (out[j, 0] == x0 and out[j, 1] > x1)):
            out[j + 1, 0] = out[j, 0]
            out[j + 1, 1] = out[j, 1]
            j -= 1
        out[j + 1, 0] = x0
        out[j + 1, 1] = x1
    return n


@njit(cache=True)
def gasket_walk(choices, start_a, start_b):
    """Simple random walk; ``choices`` are uniform integers in [0, 4)."""
    n = choices.shape[0]
    out = np.empty((n + 1, 2), dtype=np.int64)
    nb = np.empty((6, 2), dtype=np.int64)
    a = start_a
    b = start_b
    out[0, 0] = a
    out[0, 1] = b
    for i in range(n):
        deg = gasket_nbrs(a, b, nb)
        j = choices[i] % deg
        a = nb[j, 0]
        b = nb[j, 1]
        out[i + 1, 0] = a
        out[i + 1, 1] = b
    return out


@njit(cache=True)
def visit_stats(walk, stops):
    """Range and maximal visit multiplicity at each stop index."""
    amax = 0
    bmax = 0
    for i in range(stops[stops.shape[0] - 1] + 1):
        if walk[i, 0] > amax:
            amax = walk[i, 0]
        if walk[i, 1] > bmax:
            bmax = walk[i, 1]
    width = bmax + 1
    counts = np.zeros((amax + 1) * width, dtype=np.int64)
    rng = np.empty(stops.shape[0], dtype=np.int64)
    mx = np.empty(stops.shape[0], dtype=np.int64)
    distinct = 0
    best = 0
    k = 0
    for i in range(stops[stops.shape[0] - 1] + 1):
        j = walk[i, 0] * width + walk[i, 1]
        if counts[j] == 0:
            distinct += 1
        counts[j] += 1
        if counts[j] > best:
            best = counts[j]
        while k < stops.shape[0] and stops[k] == i:
            rng[k] = distinct
            mx[k] = best
            k += 1
    return rng, mx


@njit(cache=True)
def gasket_bfs(level):
    """Graph distance from the origin for all vertices with a + b <= 2**level.

    Returns a (side+1, side+1) int array with -1 for non-vertices.
    """
    side = 1 << level
    dist = np.full((side + 1, side + 1), -1, dtype=np.int64)
    qa = np.empty((side + 1) * (side + 1), dtype=np.int64)
    qb = np.empty_like(qa)
    nb = np.empty((6, 2), dtype=np.int64)
    dist[0, 0] = 0
    qa[0] = 0
    qb[0] = 0
    head = 0
    tail = 1
    while head < tail:
        a = qa[head]
        b = qb[head]
        head += 1
        deg = gasket_nbrs(a, b, nb)
        for j in range(deg):
            x = nb[j, 0]
            y = nb[j, 1]
            if x + y <= side and dist[x, y] < 0:
                dist[x, y] = dist[a, b] + 1
                qa[tail] = x
                qb[tail] = y
                tail += 1
    return dist
