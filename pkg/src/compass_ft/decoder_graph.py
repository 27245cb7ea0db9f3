"""Weighted (2+1)D decoder graphs built from exhaustive single-fault enumeration.

One graph per stabilizer type: the ``"Z"`` graph has the Z-type detectors as
vertices and decodes X errors (logical parity = flip of logical Z); the
``"X"`` graph is its dual. Faults that flip a single detector connect to one
of two boundary vertices, chosen by the logical parity of the fault, so the
boundary vertices double as the two sides of the lattice.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict, deque
from dataclasses import dataclass, field

import numpy as np

from .circuits import MemoryCircuit
from .noise import MEAS_FLIP, FaultTable, NoiseParams, enumerate_fault_locations
from .pauli_sim import FaultSignatures, fault_signatures

P_CLAMP = 1e-15

TIME = "time"
SPACE = "space"
HOOK = "hook"


class FaultToleranceViolation(RuntimeError):
    """A single fault flipped three or more detectors of one type."""


class GraphError(ValueError):
    pass


def merge_probability(p1: float, p2: float) -> float:
    """Probability that exactly one of two independent mechanisms fires."""
    return p1 * (1 - p2) + (1 - p1) * p2


def edge_weight(p: float) -> float:
    p = min(max(p, P_CLAMP), 0.5 - P_CLAMP)
    return math.log((1 - p) / p)


@dataclass
class DecoderGraph:
    basis: str
    num_detectors: int
    node_stab: np.ndarray  # stabilizer index per detector node
    node_layer: np.ndarray
    eu: np.ndarray
    ev: np.ndarray
    prob: np.ndarray
    weight: np.ndarray
    parity: np.ndarray
    kind: list[str]
    meta: dict = field(default_factory=dict)

    num_boundary = 2

    def __post_init__(self):
        self._adj = None

    @property
    def num_nodes(self) -> int:
        return self.num_detectors + self.num_boundary

    @property
    def num_edges(self) -> int:
        return len(self.eu)

    @property
    def boundary_nodes(self) -> tuple[int, int]:
        """(even-parity side, odd-parity side)."""
        return self.num_detectors, self.num_detectors + 1

    def is_boundary(self) -> np.ndarray:
        out = np.zeros(self.num_nodes, dtype=np.uint8)
        out[self.num_detectors:] = 1
        return out

    def adjacency(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR (indptr, edge ids) of incident edges, ascending edge id per node."""
        if self._adj is None:
            ends = np.concatenate([self.eu, self.ev])
            eids = np.concatenate([np.arange(self.num_edges)] * 2)
            order = np.lexsort((eids, ends))
            indptr = np.zeros(self.num_nodes + 1, dtype=np.int64)
            np.add.at(indptr, ends + 1, 1)
            self._adj = (np.cumsum(indptr).astype(np.int32), eids[order].astype(np.int32))
        return self._adj

    def unweighted_view(self) -> "DecoderGraph":
        g = DecoderGraph(
            self.basis, self.num_detectors, self.node_stab, self.node_layer,
            self.eu, self.ev, self.prob, np.ones(self.num_edges), self.parity,
            self.kind, dict(self.meta, unweighted=True),
        )
        return g

    def syndrome_action(self, edges) -> np.ndarray:
        """Detector bits flipped by a set of edges (boundary vertices absorb)."""
        s = np.zeros(self.num_nodes, dtype=np.uint8)
        for e in edges:
            s[self.eu[e]] ^= 1
            s[self.ev[e]] ^= 1
        return s[: self.num_detectors]

    def to_json(self) -> dict:
        return {
            "schema_version": 1,
            "basis": self.basis,
            "nodes": [
                {"id": k, "stabilizer": int(s), "layer": int(t)}
                for k, (s, t) in enumerate(zip(self.node_stab, self.node_layer))
            ],
            "boundary": [
                {"id": self.num_detectors, "side": "even"},
                {"id": self.num_detectors + 1, "side": "odd"},
            ],
            "edges": [
                {"u": int(u), "v": int(v), "p": float(p), "w": float(w),
                 "parity": int(par), "kind": k}
                for u, v, p, w, par, k in zip(
                    self.eu, self.ev, self.prob, self.weight, self.parity, self.kind)
            ],
            "meta": self.meta,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, d: dict) -> "DecoderGraph":
        nodes = d["nodes"]
        edges = d["edges"]
        return cls(
            basis=d["basis"],
            num_detectors=len(nodes),
            node_stab=np.array([x["stabilizer"] for x in nodes], dtype=np.int64),
            node_layer=np.array([x["layer"] for x in nodes], dtype=np.int64),
            eu=np.array([e["u"] for e in edges], dtype=np.int32),
            ev=np.array([e["v"] for e in edges], dtype=np.int32),
            prob=np.array([e["p"] for e in edges], dtype=np.float64),
            weight=np.array([e["w"] for e in edges], dtype=np.float64),
            parity=np.array([e["parity"] for e in edges], dtype=np.uint8),
            kind=[e.get("kind", SPACE) for e in edges],
            meta=d.get("meta", {}),
        )

    @classmethod
    def from_edges(cls, num_detectors: int, edges, basis: str = "Z") -> "DecoderGraph":
        """Build from ``(u, v, p, parity)`` tuples; ``v`` may be a boundary id."""
        eu, ev, pr, par = zip(*edges) if edges else ((), (), (), ())
        return cls(
            basis, num_detectors,
            np.arange(num_detectors), np.zeros(num_detectors, dtype=np.int64),
            np.array(eu, dtype=np.int32), np.array(ev, dtype=np.int32),
            np.array(pr, dtype=np.float64),
            np.array([edge_weight(p) for p in pr], dtype=np.float64),
            np.array(par, dtype=np.uint8), [SPACE] * len(eu),
        )


def _static_incidence(circuit: MemoryCircuit, basis: str) -> set[tuple[int, ...]]:
    """Check sets hit by a single data-qubit error, for classifying edges."""
    code = circuit.code
    stabs = code.stabilizers(basis)
    out = set()
    for q in code.qubits():
        out.add(tuple(k for k, s in enumerate(stabs) if q in s.support()))
    return out


@dataclass
class GraphBuild:
    """Everything derived from one (circuit, params) pair."""

    circuit: MemoryCircuit
    params: NoiseParams
    table: FaultTable
    signatures: FaultSignatures

    @classmethod
    def prepare(cls, circuit: MemoryCircuit, params: NoiseParams) -> "GraphBuild":
        table = FaultTable(enumerate_fault_locations(circuit, params))
        return cls(circuit, params, table, fault_signatures(circuit, table))

    def restricted(self, basis: str):
        """Per-fault local detector pairs (-1 padded) and logical parity for ``basis``."""
        dets = self.circuit.detectors_of(basis)
        local = np.full(len(self.circuit.detectors), -1, dtype=np.int64)
        local[dets] = np.arange(len(dets))
        sig = self.signatures
        nf = len(sig)
        pairs = np.full((nf, 2), -1, dtype=np.int64)
        counts = np.zeros(nf, dtype=np.int64)
        loc_of_entry = local[sig.indices]
        fault_of_entry = np.repeat(np.arange(nf), np.diff(sig.indptr))
        keep = loc_of_entry >= 0
        fe, le = fault_of_entry[keep], loc_of_entry[keep]
        np.add.at(counts, fe, 1)
        bad = np.flatnonzero(counts > 2)
        if bad.size:
            f = int(bad[0])
            loc = self.table.locations[self.table.faults[f].location]
            raise FaultToleranceViolation(
                f"fault {self.table.faults[f].effect} at gate {loc.site} ({loc.channel}) "
                f"flips {counts[f]} {basis}-type detectors"
            )
        # position within the fault's entries
        first = np.ones(len(fe), dtype=bool)
        first[1:] = fe[1:] != fe[:-1]
        slot = np.where(first, 0, 1)
        pairs[fe, slot] = le
        parity = sig.logical_z if basis == "Z" else sig.logical_x
        return pairs, counts, parity.astype(np.uint8), dets


def build_graph(circuit: MemoryCircuit, params: NoiseParams, basis: str | None = None,
                build: GraphBuild | None = None) -> DecoderGraph:
    basis = basis or circuit.basis
    if build is None:
        build = GraphBuild.prepare(circuit, params)
    pairs, counts, parity, dets = build.restricted(basis)
    nd = len(dets)
    table = build.table

    # class key -> location -> summed (mutually exclusive) probability
    per_loc: dict[tuple[int, int, int], dict[int, float]] = defaultdict(lambda: defaultdict(float))
    meas_only: dict[tuple[int, int, int], bool] = {}
    for f in np.flatnonzero((counts > 0) & (table.fault_prob > 0)):
        a, b = int(pairs[f, 0]), int(pairs[f, 1])
        par = int(parity[f])
        if b < 0:
            key = (a, nd + par, par)
        else:
            key = (min(a, b), max(a, b), par)
        li = table.faults[f].location
        per_loc[key][li] += table.fault_prob[f]
        is_meas = table.locations[li].channel == MEAS_FLIP
        meas_only[key] = meas_only.get(key, True) and is_meas

    classes: dict[tuple[int, int], list[tuple[float, int, bool]]] = defaultdict(list)
    for (u, v, par), locs in per_loc.items():
        p = 0.0
        for li in sorted(locs):
            p = merge_probability(p, locs[li])
        classes[(u, v)].append((p, par, meas_only[(u, v, par)]))

    static = _static_incidence(circuit, basis)
    node_stab = np.array([circuit.detectors[d].stabilizer for d in dets], dtype=np.int64)
    node_layer = np.array([circuit.detectors[d].layer for d in dets], dtype=np.int64)

    eu, ev, pr, parities, kinds = [], [], [], [], []
    folded = 0
    for (u, v) in sorted(classes):
        cls = sorted(classes[(u, v)], key=lambda c: (-c[0], c[1]))
        if len(cls) > 1:
            folded += 1
        p = 0.0
        for c in cls:
            p = merge_probability(p, c[0])
        par = cls[0][1]
        if v >= nd:
            kind = SPACE if (int(node_stab[u]),) in static else (TIME if all(c[2] for c in cls) else HOOK)
        elif node_stab[u] == node_stab[v]:
            kind = TIME
        else:
            pair = tuple(sorted((int(node_stab[u]), int(node_stab[v]))))
            kind = SPACE if pair in static else HOOK
        eu.append(u)
        ev.append(v)
        pr.append(p)
        parities.append(par)
        kinds.append(kind)

    meta = {
        "n": circuit.code.n,
        "cells": circuit.code.coloring.rows(),
        "rounds": circuit.rounds,
        "memory": circuit.basis,
        "model": params.model,
        "p_gate": params.p_gate,
        "p_meas": params.p_meas,
        "p_idle": params.p_idle,
        "folded_parity_conflicts": folded,
    }
    return DecoderGraph(
        basis=basis,
        num_detectors=nd,
        node_stab=node_stab,
        node_layer=node_layer,
        eu=np.array(eu, dtype=np.int32),
        ev=np.array(ev, dtype=np.int32),
        prob=np.array(pr, dtype=np.float64),
        weight=np.array([edge_weight(p) for p in pr], dtype=np.float64),
        parity=np.array(parities, dtype=np.uint8),
        kind=kinds,
        meta=meta,
    )


def unweighted_view(graph: DecoderGraph) -> DecoderGraph:
    return graph.unweighted_view()


def _projected(graph: DecoderGraph):
    """Space projection: stabilizer-level edges (a, b, parity, kind); b = -1 is the boundary."""
    nd = graph.num_detectors
    out = set()
    for u, v, par, kind in zip(graph.eu, graph.ev, graph.parity, graph.kind):
        if kind == TIME:
            continue
        a = int(graph.node_stab[u])
        b = -1 if v >= nd else int(graph.node_stab[v])
        if a == b:
            continue
        out.add((a, b, int(par), kind))
    return out


def _boundary_bfs(edges) -> dict[tuple[int, int], int]:
    """Hops from the boundary to each (stabilizer, accumulated parity) state."""
    adj = defaultdict(list)
    dist: dict[tuple[int, int], int] = {}
    q = deque()
    for a, b, par, _ in edges:
        if b == -1:
            if (a, par) not in dist:
                dist[(a, par)] = 1
                q.append((a, par))
        else:
            adj[a].append((b, par))
            adj[b].append((a, par))
    while q:
        s, p = q.popleft()
        for t, par in adj[s]:
            st = (t, p ^ par)
            if st not in dist:
                dist[st] = dist[(s, p)] + 1
                q.append(st)
    return dist


def shortest_boundary_distance(graph: DecoderGraph) -> int:
    """Fewest space-like (incl. hook) edges in a logical path between the two boundaries."""
    edges = _projected(graph)
    sides = {par for a, b, par, _ in edges if b == -1}
    if sides != {0, 1}:
        raise GraphError("graph does not have two boundary sides")
    dist = _boundary_bfs(edges)
    best = math.inf
    for a, b, par, _ in edges:
        if b == -1 and (a, 1 ^ par) in dist:
            best = min(best, dist[(a, 1 ^ par)] + 1)
    if best is math.inf:
        raise GraphError("no logical path between boundaries")
    return int(best)


def shortest_path_uses_hook(graph: DecoderGraph) -> bool:
    """Whether some minimum-length boundary-to-boundary logical path crosses a hook edge."""
    d = shortest_boundary_distance(graph)
    edges = _projected(graph)
    dist = _boundary_bfs(edges)
    for a, b, par, kind in edges:
        if kind != HOOK:
            continue
        for p in (0, 1):
            if (a, p) not in dist:
                continue
            if b == -1:
                if p ^ par == 1 and dist[(a, p)] + 1 == d:
                    return True
                continue
            q = 1 ^ p ^ par
            if (b, q) in dist and dist[(a, p)] + 1 + dist[(b, q)] == d:
                return True
    return False
