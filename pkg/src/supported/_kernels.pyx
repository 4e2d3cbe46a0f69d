# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled search kernels; mirror the functions in _kernels_py."""

from libc.stdlib cimport malloc, free
from libc.stdint cimport uint64_t


cdef inline int popcount(uint64_t x):
    return __builtin_popcountll(x)

cdef extern from *:
    int __builtin_popcountll(unsigned long long)
    int __builtin_ctzll(unsigned long long)


cdef int _search(uint64_t undom, int budget, uint64_t chosen, uint64_t* closed,
                 uint64_t* cover, int best_gain, uint64_t* out):
    cdef uint64_t cands, bit
    cdef int c, u
    if undom == 0:
        out[0] = chosen
        return 1
    if budget == 0 or budget * best_gain < popcount(undom):
        return 0
    c = __builtin_ctzll(undom)
    cands = closed[c]
    while cands:
        bit = cands & (~cands + 1)
        cands ^= bit
        u = __builtin_ctzll(bit)
        if _search(undom & ~cover[u], budget - 1, chosen | bit, closed, cover, best_gain, out):
            return 1
    return 0


def min_cover(closed_nbr, clients, int limit):
    cdef int n = len(closed_nbr)
    if n > 64:
        raise ValueError("compiled min_cover supports at most 64 vertices")
    cdef uint64_t* closed = <uint64_t*> malloc(max(n, 1) * sizeof(uint64_t))
    cdef uint64_t* cover = <uint64_t*> malloc(max(n, 1) * sizeof(uint64_t))
    cdef uint64_t cl = clients
    cdef uint64_t out = 0
    cdef int best_gain = 0, size, u
    try:
        for u in range(n):
            closed[u] = closed_nbr[u]
            cover[u] = closed[u] & cl
            best_gain = max(best_gain, popcount(cover[u]))
        for size in range(limit + 1):
            if _search(cl, size, 0, closed, cover, best_gain, &out):
                return size, int(out)
        return -1, 0
    finally:
        free(closed)
        free(cover)


cdef int _grow(int depth, int max_half, int* first, int* second, int* off, int* nbr,
               int* colors, char* used, char* closing):
    cdef int a = first[depth - 1], b = second[depth - 1]
    cdef int i, j, x, y, r
    if closing[a]:
        return depth
    if depth == max_half:
        return 0
    for i in range(off[a], off[a + 1]):
        x = nbr[i]
        if used[x]:
            continue
        used[x] = 1
        for j in range(off[b], off[b + 1]):
            y = nbr[j]
            if used[y] or colors[y] != colors[x]:
                continue
            used[y] = 1
            first[depth] = x
            second[depth] = y
            r = _grow(depth + 1, max_half, first, second, off, nbr, colors, used, closing)
            used[y] = 0
            if r:
                used[x] = 0
                return r
        used[x] = 0
    return 0


cdef int _partners(int p, int radius, int* off, int* nbr, int* colors, int* dist,
                   int* queue, int* out):
    """Same-colored vertices within radius of p into out (unsorted); resets dist."""
    cdef int head = 0, tail = 1, cnt = 0, u, w, i
    queue[0] = p
    dist[p] = 0
    while head < tail:
        u = queue[head]
        head += 1
        if dist[u] == radius:
            continue
        for i in range(off[u], off[u + 1]):
            w = nbr[i]
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                queue[tail] = w
                tail += 1
                if colors[w] == colors[p]:
                    out[cnt] = w
                    cnt += 1
    for i in range(tail):
        dist[queue[i]] = -1
    return cnt


def find_repetition(adj, colors, int max_half, sources=None):
    cdef int n = len(adj)
    if max_half < 1 or n == 0:
        return None
    cdef int total = sum(len(a) for a in adj)
    cdef int* off = <int*> malloc((n + 1) * sizeof(int))
    cdef int* nbr = <int*> malloc(max(total, 1) * sizeof(int))
    cdef int* col = <int*> malloc(n * sizeof(int))
    cdef int* dist = <int*> malloc(n * sizeof(int))
    cdef int* queue = <int*> malloc(n * sizeof(int))
    cdef int* part = <int*> malloc(n * sizeof(int))
    cdef char* used = <char*> malloc(n)
    cdef char* closing = <char*> malloc(n)
    cdef int* first = <int*> malloc((max_half + 1) * sizeof(int))
    cdef int* second = <int*> malloc((max_half + 1) * sizeof(int))
    cdef int v, k = 0, p, q, r, cnt, i, j
    try:
        for v in range(n):
            off[v] = k
            col[v] = colors[v]
            used[v] = 0
            closing[v] = 0
            dist[v] = -1
            for w in adj[v]:
                nbr[k] = w
                k += 1
        off[n] = k
        order = range(n) if sources is None else sources
        for p in order:
            cnt = _partners(p, max_half, off, nbr, col, dist, queue, part)
            partners = sorted([part[i] for i in range(cnt)])
            for q in partners:
                used[p] = 1
                used[q] = 1
                for j in range(off[q], off[q + 1]):
                    closing[nbr[j]] = 1
                first[0] = p
                second[0] = q
                r = _grow(1, max_half, first, second, off, nbr, col, used, closing)
                for j in range(off[q], off[q + 1]):
                    closing[nbr[j]] = 0
                used[p] = 0
                used[q] = 0
                if r:
                    return [first[i] for i in range(r)] + [second[i] for i in range(r)]
        return None
    finally:
        free(off); free(nbr); free(col); free(dist); free(queue); free(part)
        free(used); free(closing); free(first); free(second)
