"""Union-find decoding on weighted or unweighted decoder graphs.

Syndrome validation grows one cluster per step: the odd, boundary-free
cluster with the fewest boundary edges (ties to the smaller root id). In
weighted mode the step length is the smallest remaining slack on its boundary
edges, so every step either absorbs a vertex or meets another cluster; in
unweighted mode every step is half an edge. Fully grown edges form the
erasure, which is then peeled on a spanning forest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import _pure, kernels
from .decoder_graph import DecoderGraph

WEIGHTED = "weighted"
UNWEIGHTED = "unweighted"


class DecodeError(RuntimeError):
    pass


@dataclass
class Correction:
    edges: np.ndarray
    logical_flip: int
    weight: float


@dataclass
class ClusterForest:
    """Final clusters: ``label[v]`` is the cluster of vertex v, or -1 if untouched."""

    label: np.ndarray
    parity: np.ndarray
    touches_boundary: np.ndarray

    def neutral(self) -> bool:
        return bool(np.all((self.parity == 0) | self.touches_boundary))


@dataclass
class ValidationResult:
    erasure: np.ndarray
    forest: ClusterForest
    eps_trace: np.ndarray


def _defect_array(graph: DecoderGraph, syndrome) -> np.ndarray:
    s = np.asarray(syndrome).astype(np.uint8).ravel()
    if s.size != graph.num_detectors:
        raise DecodeError(f"syndrome has {s.size} bits, graph has {graph.num_detectors} detectors")
    return np.flatnonzero(s).astype(np.int64)


def _view(graph: DecoderGraph, mode: str) -> DecoderGraph:
    if mode == UNWEIGHTED:
        return graph if graph.meta.get("unweighted") else graph.unweighted_view()
    if mode != WEIGHTED:
        raise ValueError(f"mode must be 'weighted' or 'unweighted', got {mode!r}")
    return graph


def _forest(graph: DecoderGraph, erasure: np.ndarray, defects: np.ndarray) -> ClusterForest:
    n = graph.num_nodes
    m = coo_matrix(
        (np.ones(len(erasure)), (graph.eu[erasure], graph.ev[erasure])), shape=(n, n))
    _, comp = connected_components(m, directed=False)
    involved = np.zeros(n, dtype=bool)
    involved[graph.eu[erasure]] = True
    involved[graph.ev[erasure]] = True
    involved[defects] = True
    uniq, label = np.unique(comp[involved], return_inverse=True)
    full = np.full(n, -1, dtype=np.int64)
    full[np.flatnonzero(involved)] = label
    parity = np.zeros(len(uniq), dtype=np.uint8)
    np.bitwise_xor.at(parity, full[defects], 1)
    touches = np.zeros(len(uniq), dtype=bool)
    bnd = np.flatnonzero(graph.is_boundary())
    for b in bnd:
        if full[b] >= 0:
            touches[full[b]] = True
    return ClusterForest(full, parity, touches)


def syndrome_validation(graph: DecoderGraph, defects, mode: str = WEIGHTED) -> ValidationResult:
    g = _view(graph, mode)
    defects = np.unique(np.asarray(defects, dtype=np.int64))
    indptr, adj = g.adjacency()
    eps = 0.5 if mode == UNWEIGHTED else 0.0
    try:
        _, erasure, trace = kernels.uf_decode(
            indptr, adj, g.eu, g.ev, g.weight, g.is_boundary(), defects, eps, True)
    except kernels.KernelError as exc:
        raise DecodeError(str(exc)) from exc
    return ValidationResult(erasure, _forest(g, erasure, defects), trace)


def peel(graph: DecoderGraph, erasure, defects) -> Correction:
    """Spanning-forest peeling of ``erasure``; boundary vertices absorb parity."""
    is_def = [False] * graph.num_nodes
    for d in defects:
        is_def[int(d)] = True
    try:
        edges = _pure._peel(
            graph.num_nodes, graph.eu.tolist(), graph.ev.tolist(),
            [bool(b) for b in graph.is_boundary()], is_def, sorted(int(e) for e in erasure))
    except kernels.KernelError as exc:
        raise DecodeError(str(exc)) from exc
    edges = np.array(edges, dtype=np.int64)
    return _correction(graph, edges)


def _correction(graph: DecoderGraph, edges: np.ndarray) -> Correction:
    flip = int(np.bitwise_xor.reduce(graph.parity[edges])) if edges.size else 0
    return Correction(edges, flip, float(graph.weight[edges].sum()))


class UnionFindDecoder:
    """Reusable decoder bound to one graph; keeps kernel scratch buffers alive."""

    def __init__(self, graph: DecoderGraph, mode: str = WEIGHTED):
        self.graph = graph
        self.mode = mode
        g = _view(graph, mode)
        self._g = g
        indptr, adj = g.adjacency()
        self._kernel = kernels.make_decoder(indptr, adj, g.eu, g.ev, g.weight, g.is_boundary())
        self._eps = 0.5 if mode == UNWEIGHTED else 0.0
        self._parity = graph.parity

    def decode_defects(self, defects) -> Correction:
        defects = np.asarray(defects, dtype=np.int64)
        if defects.size == 0:
            return Correction(np.zeros(0, dtype=np.int64), 0, 0.0)
        try:
            corr, _, _ = self._kernel.decode(defects, self._eps, False)
        except kernels.KernelError as exc:
            raise DecodeError(str(exc)) from exc
        return _correction(self._g, corr)

    def decode(self, syndrome) -> Correction:
        return self.decode_defects(_defect_array(self.graph, syndrome))

    def predict(self, defects) -> int:
        """Logical flip only; the Monte Carlo fast path."""
        if len(defects) == 0:
            return 0
        corr, _, _ = self._kernel.decode(defects, self._eps, False)
        return int(np.bitwise_xor.reduce(self._parity[corr])) if corr.size else 0


def decode(graph: DecoderGraph, syndrome, mode: str = WEIGHTED) -> Correction:
    return UnionFindDecoder(graph, mode).decode(syndrome)
