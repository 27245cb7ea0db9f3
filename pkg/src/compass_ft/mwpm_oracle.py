"""Exact minimum-weight perfect matching for small defect sets.

Defects are matched to each other or retired at the boundary, at cost equal
to their shortest-path distance in the decoder graph. The optimum is found by
dynamic programming over defect subsets (``k <= 16``). ``decode_mwpm`` first
splits the defects into groups that can never profitably be paired across
(pair distance at least the sum of both boundary distances), so the subset DP
covers almost every trial; larger groups go to networkx's blossom matcher.
"""

from __future__ import annotations

from dataclasses import dataclass

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from . import kernels
from .decoder_graph import DecoderGraph

MAX_DP_DEFECTS = 16


class CapacityError(ValueError):
    pass


@dataclass
class DefectDistanceTable:
    defects: np.ndarray
    dist: np.ndarray  # (k, k) pairwise geodesic distances
    bdist: np.ndarray  # (k,) distance to the nearest boundary vertex
    btarget: np.ndarray  # (k,) that boundary vertex
    predecessors: np.ndarray  # (k, num_nodes) shortest-path trees

    def path(self, i: int, node: int) -> list[int]:
        """Vertices from ``node`` back to defect ``i``."""
        pred = self.predecessors[i]
        out = [int(node)]
        while out[-1] != self.defects[i]:
            p = pred[out[-1]]
            if p < 0:
                raise CapacityError(f"vertex {node} unreachable from defect {self.defects[i]}")
            out.append(int(p))
        return out


@dataclass
class MatchingCorrection:
    edges: np.ndarray
    logical_flip: int
    weight: float  # total matched path weight (the MWPM objective)
    used_blossom: bool = False


class _GraphIndex:
    def __init__(self, graph: DecoderGraph, weights: np.ndarray | None = None):
        w = graph.weight if weights is None else weights
        n = graph.num_nodes
        rows = np.concatenate([graph.eu, graph.ev])
        cols = np.concatenate([graph.ev, graph.eu])
        self.csr = csr_matrix((np.concatenate([w, w]), (rows, cols)), shape=(n, n))
        self.edge_of = {}
        for e, (u, v) in enumerate(zip(graph.eu.tolist(), graph.ev.tolist())):
            self.edge_of[(u, v)] = e
            self.edge_of[(v, u)] = e
        self.boundary = np.array(graph.boundary_nodes)


def _index(graph: DecoderGraph) -> _GraphIndex:
    idx = getattr(graph, "_mwpm_index", None)
    if idx is None:
        idx = _GraphIndex(graph)
        graph._mwpm_index = idx
    return idx


def all_pairs_defect_distances(graph: DecoderGraph, defects) -> DefectDistanceTable:
    defects = np.asarray(defects, dtype=np.int64)
    k = len(defects)
    idx = _index(graph)
    if k == 0:
        z = np.zeros((0, graph.num_nodes))
        return DefectDistanceTable(defects, np.zeros((0, 0)), np.zeros(0), np.zeros(0, int), z)
    d, pred = dijkstra(idx.csr, directed=False, indices=defects, return_predecessors=True)
    bd = d[:, idx.boundary]
    which = np.argmin(bd, axis=1)
    return DefectDistanceTable(
        defects=defects,
        dist=d[:, defects],
        bdist=bd[np.arange(k), which],
        btarget=idx.boundary[which],
        predecessors=pred,
    )


def exact_matching(table: DefectDistanceTable | tuple, k: int | None = None):
    """Optimal pairing ``(cost, mate)``; ``mate[i] = -1`` retires i at the boundary."""
    dist, bdist = (table.dist, table.bdist) if isinstance(table, DefectDistanceTable) else table
    k = len(bdist) if k is None else k
    if k > MAX_DP_DEFECTS:
        raise CapacityError(f"subset DP handles at most {MAX_DP_DEFECTS} defects, got {k}")
    if k == 0:
        return 0.0, np.zeros(0, dtype=np.int64)
    return kernels.matching_dp(dist, bdist)


def _groups(dist: np.ndarray, bdist: np.ndarray) -> list[np.ndarray]:
    k = len(bdist)
    link = dist < (bdist[:, None] + bdist[None, :])
    np.fill_diagonal(link, False)
    label = -np.ones(k, dtype=np.int64)
    out = []
    for s in range(k):
        if label[s] >= 0:
            continue
        label[s] = len(out)
        stack, members = [s], [s]
        while stack:
            i = stack.pop()
            for j in np.flatnonzero(link[i] & (label < 0)):
                label[j] = label[s]
                stack.append(j)
                members.append(j)
        out.append(np.array(sorted(members), dtype=np.int64))
    return out


def _blossom(dist: np.ndarray, bdist: np.ndarray):
    """Exact matching for groups above the DP capacity.

    Retiring every defect at the boundary costs ``sum(bdist)``; pairing i with j
    saves ``bdist[i] + bdist[j] - dist[i, j]``. The optimum is therefore a
    maximum-weight (not necessarily perfect) matching on the positive savings.
    """
    k = len(bdist)
    g = nx.Graph()
    g.add_nodes_from(range(k))
    gain = bdist[:, None] + bdist[None, :] - dist
    for i, j in zip(*np.nonzero(np.triu(gain > 0, 1))):
        g.add_edge(int(i), int(j), weight=float(gain[i, j]))
    mate = -np.ones(k, dtype=np.int64)
    cost = float(bdist.sum())
    for i, j in nx.max_weight_matching(g):
        mate[i], mate[j] = j, i
        cost -= gain[i, j]
    return cost, mate


def decode_mwpm(graph: DecoderGraph, syndrome=None, defects=None, fallback: str = "blossom"):
    """Minimum-weight correction; returns None when ``fallback == "skip"`` and capacity is exceeded."""
    if defects is None:
        defects = np.flatnonzero(np.asarray(syndrome).astype(np.uint8))
    defects = np.asarray(defects, dtype=np.int64)
    if defects.size == 0:
        return MatchingCorrection(np.zeros(0, dtype=np.int64), 0, 0.0)
    table = all_pairs_defect_distances(graph, defects)
    if not np.all(np.isfinite(table.bdist)):
        raise CapacityError("some defect cannot reach a boundary vertex")
    mate = -np.ones(len(defects), dtype=np.int64)
    cost = 0.0
    used_blossom = False
    for grp in _groups(table.dist, table.bdist):
        sub_d = table.dist[np.ix_(grp, grp)]
        sub_b = table.bdist[grp]
        if len(grp) <= MAX_DP_DEFECTS:
            c, m = exact_matching((sub_d, sub_b))
        elif fallback == "blossom":
            c, m = _blossom(sub_d, sub_b)
            used_blossom = True
        else:
            return None
        cost += c
        mate[grp] = np.where(m >= 0, grp[np.maximum(m, 0)], -1)

    idx = _index(graph)
    flipped = np.zeros(graph.num_edges, dtype=np.uint8)
    for i, j in enumerate(mate):
        if j >= 0 and j < i:
            continue
        target = table.btarget[i] if j < 0 else table.defects[j]
        nodes = table.path(i, target)
        for a, b in zip(nodes[:-1], nodes[1:]):
            flipped[idx.edge_of[(a, b)]] ^= 1
    edges = np.flatnonzero(flipped).astype(np.int64)
    flip = int(np.bitwise_xor.reduce(graph.parity[edges])) if edges.size else 0
    return MatchingCorrection(edges, flip, float(cost), used_blossom)


class MatchingDecoder:
    def __init__(self, graph: DecoderGraph, fallback: str = "blossom"):
        self.graph = graph
        self.fallback = fallback
        _index(graph)

    def decode_defects(self, defects):
        return decode_mwpm(self.graph, defects=defects, fallback=self.fallback)
