"""Sampling kernels for special values and the gradient-parallel curve set.

All kernels take per-node arrays on an ``(na, nb)`` parameter grid, with a
trailing axis over contours (``val``) or contour pairs (``gap``); NaN marks a
contour missed by the line.
"""
import numpy as np

from ._accel import USE_NUMBA, njit

# record layouts (int64 arrays)
#   node hit:  i, j, p, q, c1, c2          (q = -1 for a double point)
#   triple:    i, j, p, q, s, c1, c2, c3
#   crossing:  i, j, di, dj, p, q, c1, c2  (q = -1 for a double point)


def pair_differences(val, pairs):
    """Signed differences ``val[..., p0] - val[..., p1]`` for every pair."""
    return val[..., pairs[:, 0]] - val[..., pairs[:, 1]]


def node_scan(diff, tol, vmin=0.0, vmax=np.inf):
    """Best special witness and any ultraspecial triple at each node.

    Triples are only reported when their common value lies in ``[vmin, vmax]``.
    """
    na, nb, M = diff.shape
    hits = []
    hit_res = []
    triples = []
    triple_res = []
    vals = np.empty(2 * M)
    pid = np.empty(2 * M, dtype=np.int64)
    coef = np.empty(2 * M, dtype=np.int64)
    for i in range(na):
        for j in range(nb):
            n = 0
            best = np.inf
            bp = -1
            bq = -1
            bc1 = 0
            bc2 = 0
            for p in range(M):
                g = abs(diff[i, j, p])
                if g != g:
                    continue
                if g <= tol and g < best:
                    best = g
                    bp = p
                    bq = -1
                    bc1 = 1
                    bc2 = 0
                for c in range(1, 3):
                    vals[n] = c * g
                    pid[n] = p
                    coef[n] = c
                    n += 1
            if n == 0:
                continue
            order = np.argsort(vals[:n])
            for k in range(n - 1):
                u = order[k]
                v = order[k + 1]
                if pid[u] != pid[v]:
                    r = vals[v] - vals[u]
                    if r <= tol and r < best:
                        best = r
                        bp = pid[u]
                        bq = pid[v]
                        bc1 = coef[u]
                        bc2 = coef[v]
            if bp >= 0:
                hits.append((i, j, bp, bq, bc1, bc2))
                hit_res.append(best)
            # three pairwise distinct pairs inside a window of width tol
            found = False
            for k in range(n):
                if found:
                    break
                u = order[k]
                if vals[u] < vmin - tol or vals[u] > vmax:
                    continue
                second = -1
                for l in range(k + 1, n):
                    w = order[l]
                    if vals[w] - vals[u] > tol:
                        break
                    if pid[w] == pid[u]:
                        continue
                    if second < 0:
                        second = w
                    elif pid[w] != pid[second]:
                        triples.append((i, j, pid[u], pid[second], pid[w], coef[u], coef[second], coef[w]))
                        triple_res.append(vals[w] - vals[u])
                        found = True
                        break
    h = np.empty((len(hits), 6), dtype=np.int64)
    for k in range(len(hits)):
        for c in range(6):
            h[k, c] = hits[k][c]
    t = np.empty((len(triples), 8), dtype=np.int64)
    for k in range(len(triples)):
        for c in range(8):
            t[k, c] = triples[k][c]
    hr = np.empty(len(hit_res))
    for k in range(len(hit_res)):
        hr[k] = hit_res[k]
    tr = np.empty(len(triple_res))
    for k in range(len(triple_res)):
        tr[k] = triple_res[k]
    return h, hr, t, tr


def edge_scan(diff, tol, vmin=0.0, vmax=np.inf):
    """Relations ``c1 |d_p| - c2 |d_q|`` (and signed ``d_p``) changing sign on an edge.

    Relations whose common value ``c1 |d_p|`` stays outside ``[vmin, vmax]``
    over the whole edge are skipped; double points are always kept.
    """
    na, nb, M = diff.shape
    out = []
    for i in range(na):
        for j in range(nb):
            for e in range(2):
                di = 1 if e == 0 else 0
                dj = 1 - di
                i2 = i + di
                j2 = j + dj
                if i2 >= na or j2 >= nb:
                    continue
                for p in range(M):
                    su = diff[i, j, p]
                    sv = diff[i2, j2, p]
                    if su != su or sv != sv:
                        continue
                    if abs(su) > tol and abs(sv) > tol and (su > 0) != (sv > 0):
                        out.append((i, j, di, dj, p, -1, 1, 0))
                    gu = abs(su)
                    gv = abs(sv)
                    for q in range(p + 1, M):
                        tu = diff[i, j, q]
                        tv = diff[i2, j2, q]
                        if tu != tu or tv != tv:
                            continue
                        hu = abs(tu)
                        hv = abs(tv)
                        for c1 in range(1, 3):
                            for c2 in range(1, 3):
                                ru = c1 * gu - c2 * hu
                                rv = c1 * gv - c2 * hv
                                if abs(ru) > tol and abs(rv) > tol and (ru > 0) != (rv > 0):
                                    lo = min(c1 * gu, c1 * gv)
                                    hi = max(c1 * gu, c1 * gv)
                                    if hi >= vmin and lo <= vmax:
                                        out.append((i, j, di, dj, p, q, c1, c2))
    res = np.empty((len(out), 8), dtype=np.int64)
    for k in range(len(out)):
        for c in range(8):
            res[k, c] = out[k][c]
    return res


def edge_scan_np(diff, tol, vmin=0.0, vmax=np.inf):
    """Vectorised fallback for :func:`edge_scan` (records in another order)."""
    na, nb, M = diff.shape
    iu, ju = np.triu_indices(M, 1)
    out = []
    for di, dj in ((1, 0), (0, 1)):
        u = diff[: na - di, : nb - dj]
        v = diff[di:, dj:]
        flip = (np.abs(u) > tol) & (np.abs(v) > tol) & ((u > 0) != (v > 0))
        for i, j, p in zip(*np.nonzero(flip)):
            out.append((i, j, di, dj, p, -1, 1, 0))
        gu, gv = np.abs(u), np.abs(v)
        for c1 in (1, 2):
            for c2 in (1, 2):
                ru = c1 * gu[..., iu] - c2 * gu[..., ju]
                rv = c1 * gv[..., iu] - c2 * gv[..., ju]
                flip = (np.abs(ru) > tol) & (np.abs(rv) > tol) & ((ru > 0) != (rv > 0))
                wu, wv = c1 * gu[..., iu], c1 * gv[..., iu]
                flip &= (np.maximum(wu, wv) >= vmin) & (np.minimum(wu, wv) <= vmax)
                for i, j, k in zip(*np.nonzero(flip)):
                    out.append((i, j, di, dj, iu[k], ju[k], c1, c2))
    return np.array(out, dtype=np.int64).reshape(-1, 8)


def curve_residuals_np(val, da, db, pairs, f, g):
    p0, p1 = pairs[f, 0], pairs[f, 1]
    q0, q1 = pairs[g, 0], pairs[g, 1]
    df = val[:, p0] - val[:, p1]
    dg = val[:, q0] - val[:, q1]
    af = da[:, p0] - da[:, p1]
    ag = da[:, q0] - da[:, q1]
    bf = db[:, p0] - db[:, p1]
    bg = db[:, q0] - db[:, q1]
    return df * dg * (ag * bf - af * bg)


def curve_scan_np(val, da, db, form, pairs, tol):
    """Vectorised fallback for :func:`curve_scan` (records in another order)."""
    na, nb, _ = val.shape
    M = pairs.shape[0]
    f, g = np.triu_indices(M, 1)
    flat = lambda x: x.reshape(na * nb, -1)
    res = curve_residuals_np(flat(val), flat(da), flat(db), pairs, f, g).reshape(na, nb, -1)
    out = []
    for di, dj in ((1, 0), (0, 1)):
        u = res[: na - di, : nb - dj]
        v = res[di:, dj:]
        flip = (np.abs(u) > tol) & (np.abs(v) > tol) & ((u > 0) != (v > 0))
        same = (form[: na - di] == form[di:])[:, None, None]
        for i, j, k in zip(*np.nonzero(flip & same)):
            out.append((i, j, di, dj, f[k], g[k]))
    return np.array(out, dtype=np.int64).reshape(-1, 6)


def curve_residuals(val, da, db, pairs, f, g):
    """Gradient-parallel residual for pair-of-pairs (f, g) at every node (flattened)."""
    n, m = val.shape
    k = f.shape[0]
    out = np.empty((n, k))
    for t in range(n):
        for s in range(k):
            a0 = pairs[f[s], 0]
            a1 = pairs[f[s], 1]
            b0 = pairs[g[s], 0]
            b1 = pairs[g[s], 1]
            df = val[t, a0] - val[t, a1]
            dg = val[t, b0] - val[t, b1]
            af = da[t, a0] - da[t, a1]
            ag = da[t, b0] - da[t, b1]
            bf = db[t, a0] - db[t, a1]
            bg = db[t, b0] - db[t, b1]
            out[t, s] = df * dg * (ag * bf - af * bg)
    return out


def curve_scan(val, da, db, form, pairs, tol):
    """Edges on which the residual of some pair-of-pairs changes sign.

    ``form[i]`` labels the coordinate form used on row i; edges joining
    rows of different forms are skipped.
    """
    na, nb, m = val.shape
    M = pairs.shape[0]
    out = []
    for i in range(na):
        for j in range(nb):
            for e in range(2):
                di = 1 if e == 0 else 0
                dj = 1 - di
                i2 = i + di
                j2 = j + dj
                if i2 >= na or j2 >= nb or form[i] != form[i2]:
                    continue
                for f in range(M):
                    a0 = pairs[f, 0]
                    a1 = pairs[f, 1]
                    dfu = val[i, j, a0] - val[i, j, a1]
                    dfv = val[i2, j2, a0] - val[i2, j2, a1]
                    if dfu != dfu or dfv != dfv:
                        continue
                    afu = da[i, j, a0] - da[i, j, a1]
                    afv = da[i2, j2, a0] - da[i2, j2, a1]
                    bfu = db[i, j, a0] - db[i, j, a1]
                    bfv = db[i2, j2, a0] - db[i2, j2, a1]
                    for g in range(f + 1, M):
                        b0 = pairs[g, 0]
                        b1 = pairs[g, 1]
                        dgu = val[i, j, b0] - val[i, j, b1]
                        dgv = val[i2, j2, b0] - val[i2, j2, b1]
                        if dgu != dgu or dgv != dgv:
                            continue
                        agu = da[i, j, b0] - da[i, j, b1]
                        agv = da[i2, j2, b0] - da[i2, j2, b1]
                        bgu = db[i, j, b0] - db[i, j, b1]
                        bgv = db[i2, j2, b0] - db[i2, j2, b1]
                        ru = dfu * dgu * (agu * bfu - afu * bgu)
                        rv = dfv * dgv * (agv * bfv - afv * bgv)
                        if abs(ru) > tol and abs(rv) > tol and (ru > 0) != (rv > 0):
                            out.append((i, j, di, dj, f, g))
    res = np.empty((len(out), 6), dtype=np.int64)
    for k in range(len(out)):
        for c in range(6):
            res[k, c] = out[k][c]
    return res


if USE_NUMBA:
    node_scan = njit(node_scan)
    edge_scan = njit(edge_scan)
    curve_residuals = njit(curve_residuals)
    curve_scan = njit(curve_scan)
else:
    edge_scan = edge_scan_np
    curve_residuals = curve_residuals_np
    curve_scan = curve_scan_np
