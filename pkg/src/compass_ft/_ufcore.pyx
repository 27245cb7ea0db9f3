# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled union-find growth/peeling and subset-DP matching.

Step-for-step twin of :mod:`compass_ft._pure`; results must agree exactly.
"""

import numpy as np
cimport numpy as cnp
from libcpp.vector cimport vector
from libcpp.algorithm cimport sort as cpp_sort

cnp.import_array()

cdef extern from *:
    int __builtin_ctzl(unsigned long) nogil

cdef double TOL = 1e-9
cdef double INF = float("inf")


from compass_ft._pure import KernelError


cdef inline int _find(int* parent, int x) noexcept nogil:
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


cdef class _UF:
    cdef int N, E
    cdef const int[:] indptr
    cdef const int[:] adj
    cdef const int[:] eu
    cdef const int[:] ev
    cdef const double[:] w
    cdef const unsigned char[:] bnd
    cdef vector[int] parent, rank, parity
    cdef vector[char] in_cl, touch, grown, is_def
    cdef vector[double] cov_u, cov_v
    cdef vector[vector[int]] blist

    def __init__(self, indptr, adj, eu, ev, w, is_boundary):
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int32)
        self.adj = np.ascontiguousarray(adj, dtype=np.int32)
        self.eu = np.ascontiguousarray(eu, dtype=np.int32)
        self.ev = np.ascontiguousarray(ev, dtype=np.int32)
        self.w = np.ascontiguousarray(w, dtype=np.float64)
        self.bnd = np.ascontiguousarray(is_boundary, dtype=np.uint8)
        self.N = self.indptr.shape[0] - 1
        self.E = self.eu.shape[0]
        self.parent.resize(self.N)
        self.rank.resize(self.N)
        self.parity.resize(self.N)
        self.in_cl.resize(self.N)
        self.touch.resize(self.N)
        self.is_def.resize(self.N)
        self.blist.resize(self.N)
        self.grown.resize(self.E)
        self.cov_u.resize(self.E)
        self.cov_v.resize(self.E)

    cdef void _reset(self):
        cdef int i
        for i in range(self.N):
            self.parent[i] = i
            self.rank[i] = 0
            self.parity[i] = 0
            self.in_cl[i] = 0
            self.touch[i] = 0
            self.is_def[i] = 0
            self.blist[i].clear()
        for i in range(self.E):
            self.grown[i] = 0
            self.cov_u[i] = 0.0
            self.cov_v[i] = 0.0

    cdef void _extend_incident(self, int r, int v):
        cdef int k
        for k in range(self.indptr[v], self.indptr[v + 1]):
            self.blist[r].push_back(self.adj[k])

    cdef void _clean(self, int r):
        cdef vector[int]* L = &self.blist[r]
        cdef size_t i, j = 0
        cdef int e, a, b
        cdef int* par = self.parent.data()
        for i in range(L.size()):
            e = L[0][i]
            if self.grown[e]:
                continue
            a = self.eu[e]
            b = self.ev[e]
            if self.in_cl[a] and self.in_cl[b] and _find(par, a) == _find(par, b):
                continue
            L[0][j] = e
            j += 1
        L.resize(j)

    cdef void _adopt(self, int v, int r):
        self.in_cl[v] = 1
        self.parent[v] = r
        if self.bnd[v]:
            self.touch[r] = 1
        else:
            self._extend_incident(r, v)

    cdef int _union(self, int a, int b):
        cdef int t
        if self.rank[a] < self.rank[b] or (self.rank[a] == self.rank[b] and b < a):
            t = a
            a = b
            b = t
        if self.rank[a] == self.rank[b]:
            self.rank[a] += 1
        self.parent[b] = a
        self.parity[a] ^= self.parity[b]
        self.touch[a] = self.touch[a] or self.touch[b]
        self.blist[a].insert(self.blist[a].end(), self.blist[b].begin(), self.blist[b].end())
        self.blist[b].clear()
        return a

    def decode(self, defects_in, double eps_fixed=0.0, bint trace=False):
        cdef cnp.int64_t[:] defects = np.ascontiguousarray(defects_in, dtype=np.int64)
        cdef int nd = defects.shape[0]
        cdef int i, d, r, best, e, a, b, ra, rb
        cdef size_t k, bs, rs
        cdef double eps, s
        cdef int* par
        cdef vector[int] sat
        cdef cnp.int64_t[:] er
        cdef int ne
        eps_trace = [] if trace else None
        self._reset()
        par = self.parent.data()
        for i in range(nd):
            d = <int>defects[i]
            self.in_cl[d] = 1
            self.parity[d] ^= 1
            self.is_def[d] = 1
            self._extend_incident(d, d)
        for i in range(nd):
            self._clean(<int>defects[i])

        while True:
            best = -1
            for i in range(nd):
                r = _find(par, <int>defects[i])
                if self.parity[r] and not self.touch[r]:
                    if best < 0:
                        best = r
                    else:
                        rs = self.blist[r].size()
                        bs = self.blist[best].size()
                        if rs < bs or (rs == bs and r < best):
                            best = r
            if best < 0:
                break
            r = best
            if self.blist[r].size() == 0:
                raise KernelError("odd cluster cannot grow: graph component lacks a boundary")
            if eps_fixed > 0:
                eps = eps_fixed
            else:
                eps = INF
                for k in range(self.blist[r].size()):
                    e = self.blist[r][k]
                    s = self.w[e] - self.cov_u[e] - self.cov_v[e]
                    if s < eps:
                        eps = s
                if eps < 0:
                    eps = 0.0
            if trace:
                eps_trace.append(eps)
            sat.clear()
            for k in range(self.blist[r].size()):
                e = self.blist[r][k]
                a = self.eu[e]
                if self.in_cl[a] and _find(par, a) == r:
                    self.cov_u[e] += eps
                else:
                    self.cov_v[e] += eps
                if self.w[e] - self.cov_u[e] - self.cov_v[e] <= TOL:
                    sat.push_back(e)
            cpp_sort(sat.begin(), sat.end())
            for k in range(sat.size()):
                e = sat[k]
                if self.grown[e]:
                    continue
                self.grown[e] = 1
                a = self.eu[e]
                b = self.ev[e]
                ra = _find(par, a) if self.in_cl[a] else -1
                rb = _find(par, b) if self.in_cl[b] else -1
                if ra >= 0 and rb >= 0:
                    if ra != rb:
                        self._union(ra, rb)
                elif ra >= 0:
                    self._adopt(b, ra)
                else:
                    self._adopt(a, rb)
            self._clean(_find(par, r))

        erasure = np.empty(self.E, dtype=np.int64)
        er = erasure
        ne = 0
        for e in range(self.E):
            if self.grown[e]:
                er[ne] = e
                ne += 1
        erasure = erasure[:ne]
        correction = self._peel(erasure)
        return correction, erasure, np.array(eps_trace if trace else [], dtype=np.float64)

    cdef _peel(self, cnp.int64_t[:] erasure):
        cdef int ne = erasure.shape[0]
        cdef int i, k, e, v, o, p, root, head
        cdef vector[int] deg, start, nb, order, par_edge, fill
        cdef vector[char] seen, toggled
        deg.resize(self.N, 0)
        for i in range(ne):
            e = <int>erasure[i]
            deg[self.eu[e]] += 1
            deg[self.ev[e]] += 1
        start.resize(self.N + 1, 0)
        for v in range(self.N):
            start[v + 1] = start[v] + deg[v]
        nb.resize(start[self.N])
        fill.resize(self.N, 0)
        for i in range(ne):  # ascending edge id
            e = <int>erasure[i]
            v = self.eu[e]
            nb[start[v] + fill[v]] = e
            fill[v] += 1
            v = self.ev[e]
            nb[start[v] + fill[v]] = e
            fill[v] += 1
        seen.resize(self.N, 0)
        par_edge.resize(self.N, -1)
        for k in range(2):  # boundary roots first, then the rest by id
            for root in range(self.N):
                if deg[root] == 0 or seen[root] or (self.bnd[root] != 0) != (k == 0):
                    continue
                seen[root] = 1
                order.push_back(root)
                head = order.size() - 1
                while head < <int>order.size():
                    v = order[head]
                    head += 1
                    for i in range(start[v], start[v + 1]):
                        e = nb[i]
                        o = self.ev[e] if self.eu[e] == v else self.eu[e]
                        if not seen[o]:
                            seen[o] = 1
                            par_edge[o] = e
                            order.push_back(o)
        toggled.resize(self.N, 0)
        for v in range(self.N):
            toggled[v] = self.is_def[v]
        corr = []
        for i in range(<int>order.size() - 1, -1, -1):
            v = order[i]
            e = par_edge[v]
            if e >= 0 and toggled[v]:
                corr.append(e)
                p = self.ev[e] if self.eu[e] == v else self.eu[e]
                if not self.bnd[p]:
                    toggled[p] = not toggled[p]
                toggled[v] = 0
        for v in range(self.N):
            if toggled[v] and not self.bnd[v]:
                raise KernelError(f"peeling left vertex {v} unmatched")
        corr.sort()
        return np.array(corr, dtype=np.int64)


def uf_decode(indptr, adj, eu, ev, w, is_boundary, defects, eps_fixed=0.0, trace=False):
    return _UF(indptr, adj, eu, ev, w, is_boundary).decode(defects, eps_fixed, trace)


def make_decoder(indptr, adj, eu, ev, w, is_boundary):
    """Reusable decoder holding scratch buffers for one graph."""
    return _UF(indptr, adj, eu, ev, w, is_boundary)


def matching_dp(dist_in, bdist_in):
    cdef double[:, :] dist = np.ascontiguousarray(dist_in, dtype=np.float64)
    cdef double[:] bdist = np.ascontiguousarray(bdist_in, dtype=np.float64)
    cdef int k = bdist.shape[0]
    cdef long size = 1L << k
    cdef long mask, rest, m, low, lj
    cdef int i, j, ch
    cdef double best, c
    cdef cnp.ndarray[cnp.float64_t] f_arr = np.zeros(size, dtype=np.float64)
    cdef cnp.ndarray[cnp.int8_t] ch_arr = np.zeros(size, dtype=np.int8)
    cdef double* f = <double*>f_arr.data
    cdef signed char* choice = <signed char*>ch_arr.data
    with nogil:
        for mask in range(1, size):
            low = mask & -mask
            i = __builtin_ctzl(low)
            rest = mask ^ low
            best = bdist[i] + f[rest]
            ch = -1
            m = rest
            while m:
                lj = m & -m
                j = __builtin_ctzl(lj)
                c = dist[i, j] + f[rest ^ lj]
                if c < best:
                    best = c
                    ch = j
                m ^= lj
            f[mask] = best
            choice[mask] = ch
    mate = np.full(k, -1, dtype=np.int64)
    mask = size - 1
    while mask:
        low = mask & -mask
        i = __builtin_ctzl(low)
        j = choice[mask]
        mask ^= low
        if j >= 0:
            mate[i] = j
            mate[j] = i
            mask ^= 1L << j
    return f[size - 1], mate

