"""Pure-Python versions of the compiled search kernels (same results, slower)."""


def min_cover(closed_nbr, clients, limit):
    """Smallest vertex set whose closed neighborhoods cover the client mask.

    closed_nbr[u] is the bitmask N[u]. Searches sizes 0..limit in increasing
    order; returns (size, member mask) or (-1, 0) when limit is too small.
    """
    n = len(closed_nbr)
    cover = [closed_nbr[u] & clients for u in range(n)]
    best_gain = max((bin(c).count("1") for c in cover), default=0)

    def search(undom, budget, chosen):
        if not undom:
            return chosen
        if budget == 0 or budget * best_gain < bin(undom).count("1"):
            return None
        low = undom & -undom
        c = low.bit_length() - 1
        cands = closed_nbr[c]
        while cands:
            bit = cands & -cands
            cands ^= bit
            u = bit.bit_length() - 1
            res = search(undom & ~cover[u], budget - 1, chosen | bit)
            if res is not None:
                return res
        return None

    for size in range(limit + 1):
        res = search(clients, size, 0)
        if res is not None:
            return size, res
    return -1, 0


def _partners(adj, colors, p, radius):
    """Same-colored vertices within `radius` of p, ascending."""
    dist = {p: 0}
    frontier = [p]
    out = []
    for d in range(radius):
        nxt = []
        for u in frontier:
            for w in adj[u]:
                if w not in dist:
                    dist[w] = d + 1
                    nxt.append(w)
                    if colors[w] == colors[p]:
                        out.append(w)
        frontier = nxt
    return sorted(out)


def find_repetition(adj, colors, max_half, sources=None):
    """Simple path p_0..p_{2l-1} with colors[p_i] == colors[p_{l+i}], l <= max_half, or None.

    Only paths starting at a vertex of `sources` (default: all, ascending)
    are searched, sources in the given order. Both halves are grown in
    lockstep from an equally colored pair (p_0, p_l) at distance <= max_half;
    a hit is closed when the first half's end is adjacent to p_l.
    """
    n = len(adj)
    used = [False] * n

    def grow(first, second, closing):
        depth = len(first)
        if first[-1] in closing:
            return first + second
        if depth == max_half:
            return None
        a, b = first[-1], second[-1]
        for x in adj[a]:
            if used[x]:
                continue
            cx = colors[x]
            used[x] = True
            for y in adj[b]:
                if used[y] or colors[y] != cx:
                    continue
                used[y] = True
                first.append(x)
                second.append(y)
                res = grow(first, second, closing)
                first.pop()
                second.pop()
                used[y] = False
                if res is not None:
                    used[x] = False
                    return res
            used[x] = False
        return None

    if max_half < 1:
        return None
    for p in (range(n) if sources is None else sources):
        for q in _partners(adj, colors, p, max_half):
            used[p] = used[q] = True
            res = grow([p], [q], set(adj[q]))
            used[p] = used[q] = False
            if res is not None:
                return res
    return None
