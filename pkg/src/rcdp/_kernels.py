"""Numba-jitted hot loops.

Everything here is plain array plumbing: a Dijkstra over CSR adjacency with a
two-component lexicographic key, and the Strauss birth-death chain. The
algorithmic decisions (which keys to use, what counts as a tie, elimination
rules) live in the callers; keeping the kernels dumb keeps them auditable.

The search kernel settles equal keys in ascending vertex id and, among
predecessors offering the exact same key, keeps the smallest id. cache=True
so the JIT cost is paid once per machine, not per process.
"""

import numpy as np
from numba import njit

INT32_NONE = np.int32(-1)


@njit(cache=True, inline="always")
def _heap_less(k1a, k2a, va, k1b, k2b, vb):
    if k1a != k1b:
        return k1a < k1b
    if k2a != k2b:
        return k2a < k2b
    return va < vb


@njit(cache=True)
def dijkstra_csr(indptr, adj_vertex, adj_edge, ekey1, ekey2,
                 ecost, eweight, elen, eactive, alive, source, stop_at):
    """Single-source search minimizing the lexicographic (key1, key2) sum.

    Returns (d1, d2, pred, cost_sum, weight_sum, len_sum). The d arrays are
    exact minima; the three *_sum arrays follow the predecessor tree and are
    advisory (callers that need exact path sums reconstruct and re-add).
    stop_at >= 0 ends the search once that vertex is settled.
    """
    n = indptr.size - 1
    inf = np.inf
    d1 = np.full(n, inf)
    d2 = np.full(n, inf)
    cost_sum = np.full(n, inf)
    weight_sum = np.full(n, inf)
    len_sum = np.full(n, inf)
    pred = np.full(n, INT32_NONE)
    settled = np.zeros(n, dtype=np.uint8)

    cap = adj_vertex.size + n + 8
    hk1 = np.empty(cap)
    hk2 = np.empty(cap)
    hv = np.empty(cap, dtype=np.int32)
    size = 0

    d1[source] = 0.0
    d2[source] = 0.0
    cost_sum[source] = 0.0
    weight_sum[source] = 0.0
    len_sum[source] = 0.0
    hk1[0] = 0.0
    hk2[0] = 0.0
    hv[0] = source
    size = 1

    while size > 0:
        # pop root
        top1 = hk1[0]; top2 = hk2[0]; u = hv[0]
        size -= 1
        hk1[0] = hk1[size]; hk2[0] = hk2[size]; hv[0] = hv[size]
        i = 0
        while True:
            left = 2 * i + 1
            if left >= size:
                break
            child = left
            right = left + 1
            if right < size and _heap_less(hk1[right], hk2[right], hv[right],
                                           hk1[left], hk2[left], hv[left]):
                child = right
            if _heap_less(hk1[child], hk2[child], hv[child],
                          hk1[i], hk2[i], hv[i]):
                hk1[i], hk1[child] = hk1[child], hk1[i]
                hk2[i], hk2[child] = hk2[child], hk2[i]
                hv[i], hv[child] = hv[child], hv[i]
                i = child
            else:
                break

        if settled[u] == 1:
            continue
        if top1 != d1[u] or top2 != d2[u]:
            continue  # stale entry
        settled[u] = 1
        if u == stop_at:
            break

        for k in range(indptr[u], indptr[u + 1]):
            e = adj_edge[k]
            if not eactive[e]:
                continue
            v = adj_vertex[k]
            if not alive[v]:
                continue
            n1 = d1[u] + ekey1[e]
            n2 = d2[u] + ekey2[e]
            if n1 < d1[v] or (n1 == d1[v] and n2 < d2[v]):
                d1[v] = n1
                d2[v] = n2
                pred[v] = u
                cost_sum[v] = cost_sum[u] + ecost[e]
                weight_sum[v] = weight_sum[u] + eweight[e]
                len_sum[v] = len_sum[u] + elen[e]
                # push
                j = size
                hk1[j] = n1; hk2[j] = n2; hv[j] = v
                size += 1
                while j > 0:
                    p = (j - 1) // 2
                    if _heap_less(hk1[j], hk2[j], hv[j], hk1[p], hk2[p], hv[p]):
                        hk1[j], hk1[p] = hk1[p], hk1[j]
                        hk2[j], hk2[p] = hk2[p], hk2[j]
                        hv[j], hv[p] = hv[p], hv[j]
                        j = p
                    else:
                        break
            elif n1 == d1[v] and n2 == d2[v] and u < pred[v]:
                # same key through a smaller-id predecessor: keep that one
                pred[v] = u
                cost_sum[v] = cost_sum[u] + ecost[e]
                weight_sum[v] = weight_sum[u] + eweight[e]
                len_sum[v] = len_sum[u] + elen[e]

    return d1, d2, pred, cost_sum, weight_sum, len_sum


@njit(cache=True)
def strauss_chain(n, x0, x1, y0, y1, inhibition, gamma, sweeps, seed):
    """Fixed-n Strauss configuration by single-point Metropolis moves.

    Proposal: move one uniformly chosen point to a uniform location;
    acceptance probability gamma ** (close pairs gained), where a close pair
    is a pair closer than the inhibition distance. gamma = 1 degenerates to
    uniform resampling. Returns an (n, 2) array.
    """
    np.random.seed(seed)
    pts = np.empty((n, 2))
    for i in range(n):
        pts[i, 0] = x0 + (x1 - x0) * np.random.random()
        pts[i, 1] = y0 + (y1 - y0) * np.random.random()
    if n < 2:
        return pts
    r2 = inhibition * inhibition
    for _ in range(sweeps):
        for _ in range(n):
            i = np.random.randint(0, n)
            px = x0 + (x1 - x0) * np.random.random()
            py = y0 + (y1 - y0) * np.random.random()
            old = 0
            new = 0
            for j in range(n):
                if j == i:
                    continue
                dx = pts[j, 0] - pts[i, 0]
                dy = pts[j, 1] - pts[i, 1]
                if dx * dx + dy * dy < r2:
                    old += 1
                dx = pts[j, 0] - px
                dy = pts[j, 1] - py
                if dx * dx + dy * dy < r2:
                    new += 1
            if new <= old:
                pts[i, 0] = px
                pts[i, 1] = py
            elif np.random.random() < gamma ** (new - old):
                pts[i, 0] = px
                pts[i, 1] = py
    return pts
