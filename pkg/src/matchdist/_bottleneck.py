"""Exact bottleneck kernel: candidate binary search + Hopcroft-Karp feasibility.

Written in the numba-compatible subset; the same source runs interpreted
when acceleration is disabled.
"""
import numpy as np

from ._accel import USE_NUMBA, njit


def proper_distance_matrix(pb, pd, qb, qd):
    n1 = pb.shape[0]
    n2 = qb.shape[0]
    out = np.empty((n1, n2), dtype=np.float64)
    for i in range(n1):
        hp = 0.5 * (pd[i] - pb[i])
        for j in range(n2):
            linf = max(abs(pb[i] - qb[j]), abs(pd[i] - qd[j]))
            diag = max(hp, 0.5 * (qd[j] - qb[j]))
            out[i, j] = min(linf, diag)
    return out


def threshold_graph(dist, dp, dq, eps):
    """Bipartite graph of the diagram pair augmented with diagonal copies.

    Left: the n1 points of the first diagram, then n2 diagonal copies.
    Right: the n2 points of the second diagram, then n1 diagonal copies.
    """
    n1 = dp.shape[0]
    n2 = dq.shape[0]
    n = n1 + n2
    adj = np.zeros((n, n), dtype=np.bool_)
    for i in range(n1):
        for j in range(n2):
            if dist[i, j] <= eps:
                adj[i, j] = True
        if dp[i] <= eps:
            adj[i, n2 + i] = True
    for j in range(n2):
        if dq[j] <= eps:
            adj[n1 + j, j] = True
        for i in range(n1):
            adj[n1 + j, n2 + i] = True
    return adj


def hopcroft_karp(adj):
    """Maximum bipartite matching; returns (size, match of each left vertex)."""
    n_left = adj.shape[0]
    n_right = adj.shape[1]
    unreachable = n_left + n_right + 10
    match_l = np.full(n_left, -1, dtype=np.int64)
    match_r = np.full(n_right, -1, dtype=np.int64)
    dist = np.zeros(n_left, dtype=np.int64)
    queue = np.empty(n_left, dtype=np.int64)
    stack = np.empty(n_left + 1, dtype=np.int64)
    via = np.empty(n_left + 1, dtype=np.int64)
    nxt = np.zeros(n_left, dtype=np.int64)
    size = 0
    while True:
        head = 0
        tail = 0
        for u in range(n_left):
            if match_l[u] == -1:
                dist[u] = 0
                queue[tail] = u
                tail += 1
            else:
                dist[u] = unreachable
        limit = unreachable
        while head < tail:
            u = queue[head]
            head += 1
            if dist[u] + 1 > limit:
                continue
            for v in range(n_right):
                if adj[u, v]:
                    w = match_r[v]
                    if w == -1:
                        if limit == unreachable:
                            limit = dist[u] + 1
                    elif dist[w] == unreachable:
                        dist[w] = dist[u] + 1
                        queue[tail] = w
                        tail += 1
        if limit == unreachable:
            break
        for u in range(n_left):
            nxt[u] = 0
        for root in range(n_left):
            if match_l[root] != -1:
                continue
            depth = 0
            stack[0] = root
            found = False
            while depth >= 0 and not found:
                u = stack[depth]
                advanced = False
                while nxt[u] < n_right:
                    v = nxt[u]
                    nxt[u] += 1
                    if not adj[u, v]:
                        continue
                    w = match_r[v]
                    if w == -1:
                        if dist[u] + 1 == limit:
                            via[depth] = v
                            for k in range(depth, -1, -1):
                                match_l[stack[k]] = via[k]
                                match_r[via[k]] = stack[k]
                            size += 1
                            found = True
                            break
                    elif dist[w] == dist[u] + 1:
                        via[depth] = v
                        depth += 1
                        stack[depth] = w
                        advanced = True
                        break
                if not found and not advanced:
                    dist[u] = unreachable
                    depth -= 1
    return size, match_l


def bottleneck_proper(pb, pd, qb, qd):
    """Bottleneck cost between two finite multisets of proper points.

    Inputs are expanded by multiplicity. Returns the optimal cost and, for
    each left vertex of :func:`threshold_graph`, its matched right vertex.
    """
    n1 = pb.shape[0]
    n2 = qb.shape[0]
    n = n1 + n2
    if n == 0:
        return 0.0, np.empty(0, dtype=np.int64)
    dist = proper_distance_matrix(pb, pd, qb, qd)
    dp = 0.5 * (pd - pb)
    dq = 0.5 * (qd - qb)
    cand = np.empty(n1 * n2 + n + 1, dtype=np.float64)
    k = 0
    for i in range(n1):
        for j in range(n2):
            cand[k] = dist[i, j]
            k += 1
    for i in range(n1):
        cand[k] = dp[i]
        k += 1
    for j in range(n2):
        cand[k] = dq[j]
        k += 1
    cand[k] = 0.0
    cand = np.unique(cand)
    lo = 0
    hi = cand.shape[0] - 1
    while lo < hi:
        mid = (lo + hi) // 2
        size, _ = hopcroft_karp(threshold_graph(dist, dp, dq, cand[mid]))
        if size == n:
            hi = mid
        else:
            lo = mid + 1
    _, match = hopcroft_karp(threshold_graph(dist, dp, dq, cand[lo]))
    return cand[lo], match


def bottleneck_cost(pb, pd, qb, qd, pe, qe):
    """Cost only, with essential births ``pe``/``qe`` (sorted matching)."""
    if pe.shape[0] != qe.shape[0]:
        return np.inf
    ess = 0.0
    if pe.shape[0] > 0:
        ps = np.sort(pe)
        qs = np.sort(qe)
        for i in range(ps.shape[0]):
            ess = max(ess, abs(ps[i] - qs[i]))
    cost, _ = bottleneck_proper(pb, pd, qb, qd)
    return max(ess, cost)


if USE_NUMBA:
    proper_distance_matrix = njit(proper_distance_matrix)
    threshold_graph = njit(threshold_graph)
    hopcroft_karp = njit(hopcroft_karp)
    bottleneck_proper = njit(bottleneck_proper)
    bottleneck_cost = njit(bottleneck_cost)
