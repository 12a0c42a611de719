"""Hot numeric kernels with two interchangeable backends.

Two inner loops dominate runtime at corpus scale: all-pairs capped
dependency distances (one BFS per token) and candidate pair expansion
(run once per sentence per threshold triple during grid search, i.e.
hundreds of times per sentence). Both ship as numba-compiled kernels
with a vectorized numpy fallback.

Backend selection happens at import time: numba when available, unless
SPANFORGE_NO_NUMBA=1 forces the numpy path. `IMPLEMENTATIONS` exposes
both for equivalence tests and benchmarks.
"""

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("SPANFORGE_NO_NUMBA", "") != "1"


# ---------------------------------------------------------------------------
# All-pairs shortest path lengths over head links, capped.
# heads: int64[n], -1 for no head. Returns int64[n, n] with values in [0, cap];
# unreachable pairs report cap.

def _pairwise_distances_numpy(heads: np.ndarray, cap: int) -> np.ndarray:
    n = heads.shape[0]
    adj = np.zeros((n, n), dtype=bool)
    src = np.flatnonzero(heads >= 0)
    adj[src, heads[src]] = True
    adj |= adj.T
    dist = np.full((n, n), cap, dtype=np.int64)
    np.fill_diagonal(dist, 0)
    visited = np.eye(n, dtype=bool)
    frontier = visited.copy()
    adj_u8 = adj.astype(np.uint8)
    for d in range(1, cap):
        reached = (frontier.astype(np.uint8) @ adj_u8) > 0
        frontier = reached & ~visited
        if not frontier.any():
            break
        dist[frontier] = d
        visited |= frontier
    return dist


def _pairwise_distances_loops(heads, cap):
    n = heads.shape[0]
    dist = np.full((n, n), cap, dtype=np.int64)
    # CSR adjacency over the undirected (token, head) edges
    deg = np.zeros(n, dtype=np.int64)
    for i in range(n):
        h = heads[i]
        if h >= 0:
            deg[i] += 1
            deg[h] += 1
    indptr = np.zeros(n + 1, dtype=np.int64)
    for i in range(n):
        indptr[i + 1] = indptr[i] + deg[i]
    indices = np.empty(indptr[n], dtype=np.int64)
    fill = indptr[:n].copy()
    for i in range(n):
        h = heads[i]
        if h >= 0:
            indices[fill[i]] = h
            fill[i] += 1
            indices[fill[h]] = i
            fill[h] += 1
    queue = np.empty(n, dtype=np.int64)
    seen = np.full(n, -1, dtype=np.int64)
    for start in range(n):
        qhead = 0
        qtail = 1
        queue[0] = start
        seen[start] = start
        dist[start, start] = 0
        while qhead < qtail:
            u = queue[qhead]
            qhead += 1
            du = dist[start, u]
            if du >= cap:
                continue
            for k in range(indptr[u], indptr[u + 1]):
                v = indices[k]
                if seen[v] != start:
                    seen[v] = start
                    d = du + 1
                    dist[start, v] = d if d < cap else cap
                    queue[qtail] = v
                    qtail += 1
    return dist


# ---------------------------------------------------------------------------
# Candidate pair expansion.
# Given per-token probabilities and gates, emit every (s, e) pair with
# p_start[s] >= tau_s, p_end[e] >= tau_e, e > s, width <= max_width, whose
# derived member set {s} + thresholded interior + {e} has an allowed size.
# Returns (cand_start, cand_end, members_flat, members_indptr, expansions)
# sorted by (s, e); `expansions` counts the pairs examined after gating, so
# all-zero probability vectors cost zero expansions.

def _enumerate_pairs_numpy(p_start, p_end, p_inside, tau_s, tau_e, tau_i,
                           max_width, min_members, max_members):
    empty = (
        np.empty(0, np.int64),
        np.empty(0, np.int64),
        np.empty(0, np.int64),
        np.zeros(1, np.int64),
        0,
    )
    starts = np.flatnonzero(p_start >= tau_s)
    ends = np.flatnonzero(p_end >= tau_e)
    if starts.size == 0 or ends.size == 0:
        return empty
    inside_mask = p_inside >= tau_i
    pref = np.concatenate((np.zeros(1, np.int64), np.cumsum(inside_mask, dtype=np.int64)))
    s_grid = starts[:, None]
    e_grid = ends[None, :]
    valid = (e_grid > s_grid) & (e_grid - s_grid + 1 <= max_width)
    expansions = int(valid.sum())
    if expansions == 0:
        return empty
    ss = np.broadcast_to(s_grid, valid.shape)[valid]
    ee = np.broadcast_to(e_grid, valid.shape)[valid]
    sizes = 2 + pref[ee] - pref[ss + 1]
    keep = (sizes >= min_members) & (sizes <= max_members)
    ss = ss[keep].astype(np.int64)
    ee = ee[keep].astype(np.int64)
    sizes = sizes[keep]
    indptr = np.zeros(ss.size + 1, np.int64)
    np.cumsum(sizes, out=indptr[1:])
    members = np.empty(int(indptr[-1]), np.int64)
    pos = 0
    for i in range(ss.size):
        s = int(ss[i])
        e = int(ee[i])
        members[pos] = s
        pos += 1
        interior = np.flatnonzero(inside_mask[s + 1 : e]) + s + 1
        members[pos : pos + interior.size] = interior
        pos += interior.size
        members[pos] = e
        pos += 1
    return ss, ee, members, indptr, expansions


def _enumerate_pairs_loops(p_start, p_end, p_inside, tau_s, tau_e, tau_i,
                           max_width, min_members, max_members):
    n = p_start.shape[0]
    starts = np.empty(n, np.int64)
    ends = np.empty(n, np.int64)
    ns = 0
    ne = 0
    for i in range(n):
        if p_start[i] >= tau_s:
            starts[ns] = i
            ns += 1
        if p_end[i] >= tau_e:
            ends[ne] = i
            ne += 1
    pref = np.zeros(n + 1, np.int64)
    for i in range(n):
        pref[i + 1] = pref[i] + (1 if p_inside[i] >= tau_i else 0)
    expansions = 0
    n_cand = 0
    total_members = 0
    for a in range(ns):
        s = starts[a]
        for b in range(ne):
            e = ends[b]
            if e <= s:
                continue
            if e - s + 1 > max_width:
                break
            expansions += 1
            k = 2 + (pref[e] - pref[s + 1])
            if k >= min_members and k <= max_members:
                n_cand += 1
                total_members += k
    cand_s = np.empty(n_cand, np.int64)
    cand_e = np.empty(n_cand, np.int64)
    members = np.empty(total_members, np.int64)
    indptr = np.zeros(n_cand + 1, np.int64)
    ci = 0
    mi = 0
    for a in range(ns):
        s = starts[a]
        for b in range(ne):
            e = ends[b]
            if e <= s:
                continue
            if e - s + 1 > max_width:
                break
            k = 2 + (pref[e] - pref[s + 1])
            if k >= min_members and k <= max_members:
                cand_s[ci] = s
                cand_e[ci] = e
                members[mi] = s
                mi += 1
                for t in range(s + 1, e):
                    if p_inside[t] >= tau_i:
                        members[mi] = t
                        mi += 1
                members[mi] = e
                mi += 1
                ci += 1
                indptr[ci] = mi
    return cand_s, cand_e, members, indptr, expansions


if HAVE_NUMBA:
    _pairwise_distances_numba = njit(cache=True)(_pairwise_distances_loops)
    _enumerate_pairs_numba = njit(cache=True)(_enumerate_pairs_loops)
else:  # pragma: no cover
    _pairwise_distances_numba = None
    _enumerate_pairs_numba = None

IMPLEMENTATIONS = {
    "numpy": (_pairwise_distances_numpy, _enumerate_pairs_numpy),
}
if HAVE_NUMBA:
    IMPLEMENTATIONS["numba"] = (_pairwise_distances_numba, _enumerate_pairs_numba)

ACTIVE_BACKEND = "numba" if USE_NUMBA else "numpy"
pairwise_distances, enumerate_pairs = IMPLEMENTATIONS[ACTIVE_BACKEND]


def warmup() -> None:
    """Trigger JIT compilation so timing-sensitive callers pay it up front."""
    heads = np.array([-1, 0, 1], dtype=np.int64)
    pairwise_distances(heads, 5)
    p = np.array([1.0, 0.0, 1.0])
    enumerate_pairs(p, p[::-1].copy(), p, 0.5, 0.5, 0.5, 13, 2, 6)
