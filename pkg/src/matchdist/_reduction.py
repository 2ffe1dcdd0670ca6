"""Z/2 boundary-matrix reduction with clearing.

Inputs are in filtration order: ``dims[k]`` is the dimension of the k-th
simplex and ``faces[k]`` its facets as filtration positions (padded with -1).
Both kernels return ``(pair_dim, pair_birth, pair_death, ess_dim, ess_birth)``
as position arrays; values are looked up by the caller.
"""
import numpy as np

from ._accel import USE_NUMBA, njit


def _symdiff(x, y):
    """Symmetric difference of two sorted int64 arrays."""
    out = np.empty(x.shape[0] + y.shape[0], dtype=np.int64)
    i = 0
    j = 0
    k = 0
    while i < x.shape[0] and j < y.shape[0]:
        if x[i] < y[j]:
            out[k] = x[i]
            i += 1
            k += 1
        elif y[j] < x[i]:
            out[k] = y[j]
            j += 1
            k += 1
        else:
            i += 1
            j += 1
    while i < x.shape[0]:
        out[k] = x[i]
        i += 1
        k += 1
    while j < y.shape[0]:
        out[k] = y[j]
        j += 1
        k += 1
    return out[:k]


def reduce_filtration(dims, faces, top_dim):
    n = dims.shape[0]
    owner = np.full(n, -1, dtype=np.int64)  # pivot row -> column
    is_pivot = np.zeros(n, dtype=np.bool_)
    columns = [np.empty(0, dtype=np.int64) for _ in range(n)]
    for d in range(top_dim, 0, -1):
        for j in range(n):
            if dims[j] != d or is_pivot[j]:
                continue
            m = 0
            for f in range(faces.shape[1]):
                if faces[j, f] >= 0:
                    m += 1
            col = np.empty(m, dtype=np.int64)
            m = 0
            for f in range(faces.shape[1]):
                if faces[j, f] >= 0:
                    col[m] = faces[j, f]
                    m += 1
            col.sort()
            while col.shape[0] > 0:
                k = owner[col[-1]]
                if k < 0:
                    break
                col = _symdiff(col, columns[k])
            if col.shape[0] > 0:
                owner[col[-1]] = j
                is_pivot[col[-1]] = True
                columns[j] = col
    n_pairs = 0
    n_ess = 0
    for i in range(n):
        if owner[i] >= 0:
            n_pairs += 1
        elif not is_pivot[i] and columns[i].shape[0] == 0 and dims[i] < top_dim:
            n_ess += 1
    pair_dim = np.empty(n_pairs, dtype=np.int64)
    pair_birth = np.empty(n_pairs, dtype=np.int64)
    pair_death = np.empty(n_pairs, dtype=np.int64)
    ess_dim = np.empty(n_ess, dtype=np.int64)
    ess_birth = np.empty(n_ess, dtype=np.int64)
    p = 0
    e = 0
    for i in range(n):
        if owner[i] >= 0:
            pair_dim[p] = dims[i]
            pair_birth[p] = i
            pair_death[p] = owner[i]
            p += 1
        elif not is_pivot[i] and columns[i].shape[0] == 0 and dims[i] < top_dim:
            ess_dim[e] = dims[i]
            ess_birth[e] = i
            e += 1
    return pair_dim, pair_birth, pair_death, ess_dim, ess_birth


def reduce_filtration_py(dims, faces, top_dim):
    """Set-based reference implementation of :func:`reduce_filtration`."""
    n = len(dims)
    dims = np.asarray(dims).tolist()
    faces = np.asarray(faces).tolist()
    owner: dict[int, int] = {}
    reduced: dict[int, set] = {}
    for d in range(top_dim, 0, -1):
        for j in range(n):
            if dims[j] != d or j in owner:
                continue
            col = {f for f in faces[j] if f >= 0}
            while col:
                k = owner.get(max(col))
                if k is None:
                    break
                col ^= reduced[k]
            if col:
                owner[max(col)] = j
                reduced[j] = col
    pairs = sorted(owner.items())
    ess = [i for i in range(n) if i not in owner and i not in reduced and dims[i] < top_dim]
    return (
        np.array([dims[i] for i, _ in pairs], dtype=np.int64),
        np.array([i for i, _ in pairs], dtype=np.int64),
        np.array([j for _, j in pairs], dtype=np.int64),
        np.array([dims[i] for i in ess], dtype=np.int64),
        np.array(ess, dtype=np.int64),
    )


if USE_NUMBA:
    _symdiff = njit(_symdiff)
    reduce_filtration = njit(reduce_filtration)
else:
    reduce_filtration = reduce_filtration_py
