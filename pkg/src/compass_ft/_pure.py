"""Pure-Python kernels; the compiled ``_ufcore`` mirrors these step for step."""

import math

import numpy as np

TOL = 1e-9


class KernelError(RuntimeError):
    pass


def uf_decode(indptr, adj, eu, ev, w, is_boundary, defects, eps_fixed=0.0, trace=False):
    """Grow clusters from ``defects`` until neutral, then peel.

    Returns ``(correction, erasure, eps_trace)`` as int64/int64/float64 arrays.
    ``eps_fixed > 0`` selects fixed-step (unweighted) growth.
    """
    indptr = [int(x) for x in indptr]
    adj = [int(x) for x in adj]
    eu = [int(x) for x in eu]
    ev = [int(x) for x in ev]
    w = [float(x) for x in w]
    bnd = [bool(x) for x in is_boundary]
    defects = [int(d) for d in defects]
    N = len(indptr) - 1
    E = len(eu)

    parent = list(range(N))
    rank = [0] * N
    in_cl = [False] * N
    parity = [0] * N
    touch = [False] * N
    blist = [None] * N
    cov_u = [0.0] * E
    cov_v = [0.0] * E
    grown = [False] * E
    is_def = [False] * N

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def incident(v):
        return adj[indptr[v]:indptr[v + 1]]

    for d in defects:
        in_cl[d] = True
        parity[d] ^= 1
        is_def[d] = True
        blist[d] = list(incident(d))

    def clean(r):
        keep = []
        for e in blist[r]:
            if grown[e]:
                continue
            a, b = eu[e], ev[e]
            if in_cl[a] and in_cl[b] and find(a) == find(b):
                continue
            keep.append(e)
        blist[r] = keep

    def adopt(v, r):
        in_cl[v] = True
        parent[v] = r
        if bnd[v]:
            touch[r] = True
        else:
            blist[r].extend(incident(v))

    def union(a, b):
        if rank[a] < rank[b] or (rank[a] == rank[b] and b < a):
            a, b = b, a
        if rank[a] == rank[b]:
            rank[a] += 1
        parent[b] = a
        parity[a] ^= parity[b]
        touch[a] = touch[a] or touch[b]
        blist[a].extend(blist[b])
        blist[b] = None
        return a

    for d in set(defects):
        clean(d)

    eps_trace = []
    while True:
        best = -1
        for d in defects:
            r = find(d)
            if parity[r] and not touch[r]:
                if best < 0 or len(blist[r]) < len(blist[best]) or (
                        len(blist[r]) == len(blist[best]) and r < best):
                    best = r
        if best < 0:
            break
        r = best
        L = blist[r]
        if not L:
            raise KernelError("odd cluster cannot grow: graph component lacks a boundary")
        if eps_fixed > 0:
            eps = eps_fixed
        else:
            eps = math.inf
            for e in L:
                s = w[e] - cov_u[e] - cov_v[e]
                if s < eps:
                    eps = s
            if eps < 0:
                eps = 0.0
        if trace:
            eps_trace.append(eps)
        sat = []
        for e in L:
            a = eu[e]
            if in_cl[a] and find(a) == r:
                cov_u[e] += eps
            else:
                cov_v[e] += eps
            if w[e] - cov_u[e] - cov_v[e] <= TOL:
                sat.append(e)
        sat.sort()
        for e in sat:
            if grown[e]:
                continue
            grown[e] = True
            a, b = eu[e], ev[e]
            ra = find(a) if in_cl[a] else -1
            rb = find(b) if in_cl[b] else -1
            if ra >= 0 and rb >= 0:
                if ra != rb:
                    union(ra, rb)
            elif ra >= 0:
                adopt(b, ra)
            else:
                adopt(a, rb)
        clean(find(r))

    erasure = [e for e in range(E) if grown[e]]
    correction = _peel(N, eu, ev, bnd, is_def, erasure)
    return (np.array(correction, dtype=np.int64), np.array(erasure, dtype=np.int64),
            np.array(eps_trace, dtype=np.float64))


def _peel(N, eu, ev, bnd, is_def, erasure):
    nbrs = {}
    for e in erasure:  # ascending edge id
        nbrs.setdefault(eu[e], []).append(e)
        nbrs.setdefault(ev[e], []).append(e)
    verts = sorted(nbrs, key=lambda v: (not bnd[v], v))
    seen = set()
    order = []
    par_edge = {}
    for root in verts:
        if root in seen:
            continue
        seen.add(root)
        order.append(root)
        head = len(order) - 1
        while head < len(order):
            v = order[head]
            head += 1
            for e in nbrs[v]:
                o = ev[e] if eu[e] == v else eu[e]
                if o not in seen:
                    seen.add(o)
                    par_edge[o] = e
                    order.append(o)
    toggled = list(is_def)
    correction = []
    for v in reversed(order):
        if v in par_edge and toggled[v]:
            e = par_edge[v]
            correction.append(e)
            p = ev[e] if eu[e] == v else eu[e]
            if not bnd[p]:
                toggled[p] = not toggled[p]
            toggled[v] = False
    for v in range(N):
        if toggled[v] and not bnd[v]:
            raise KernelError(f"peeling left vertex {v} unmatched")
    correction.sort()
    return correction


def matching_dp(dist, bdist):
    """Exact minimum-weight matching of k defects, each paired or sent to the boundary.

    Returns ``(cost, mate)`` with ``mate[i] = -1`` for boundary matches.
    """
    k = len(bdist)
    dist = [[float(x) for x in row] for row in dist]
    bdist = [float(x) for x in bdist]
    size = 1 << k
    f = [0.0] * size
    choice = [0] * size
    for mask in range(1, size):
        low = mask & -mask
        i = low.bit_length() - 1
        rest = mask ^ low
        best = bdist[i] + f[rest]
        ch = -1
        m = rest
        di = dist[i]
        while m:
            lj = m & -m
            j = lj.bit_length() - 1
            c = di[j] + f[rest ^ lj]
            if c < best:
                best = c
                ch = j
            m ^= lj
        f[mask] = best
        choice[mask] = ch
    mate = [-1] * k
    mask = size - 1
    while mask:
        low = mask & -mask
        i = low.bit_length() - 1
        j = choice[mask]
        mask ^= low
        if j >= 0:
            mate[i], mate[j] = j, i
            mask ^= 1 << j
    return f[size - 1], np.array(mate, dtype=np.int64)


class _Decoder:
    def __init__(self, indptr, adj, eu, ev, w, is_boundary):
        self.args = (indptr, adj, eu, ev, w, is_boundary)

    def decode(self, defects, eps_fixed=0.0, trace=False):
        return uf_decode(*self.args, defects, eps_fixed, trace)


def make_decoder(indptr, adj, eu, ev, w, is_boundary):
    return _Decoder(indptr, adj, eu, ev, w, is_boundary)
