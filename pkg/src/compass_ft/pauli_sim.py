"""Pauli-frame propagation through memory circuits.

Two engines share the same conjugation rules:

* :class:`PauliFrame` / :func:`run_trial` push one frame through the circuit
  gate by gate, injecting a concrete fault set.
* :func:`fault_signatures` pushes *every* elementary fault at once by packing
  one bit per fault into Python integers, giving each fault's detector
  signature and logical flips in a single pass.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .circuits import CNOT, MEAS_X, MEAS_Z, PREP_X, PREP_Z, ROUND, GateOp, MemoryCircuit
from .noise import MEAS_FLIP, ElementaryFault, FaultLocation, FaultTable


class PauliFrame:
    def __init__(self, num_qubits: int):
        self.x = np.zeros(num_qubits, dtype=bool)
        self.z = np.zeros(num_qubits, dtype=bool)

    def copy(self) -> "PauliFrame":
        f = PauliFrame(0)
        f.x, f.z = self.x.copy(), self.z.copy()
        return f

    def apply_pauli(self, q: int, label: str) -> None:
        if label in ("X", "Y"):
            self.x[q] ^= True
        if label in ("Z", "Y"):
            self.z[q] ^= True

    def apply(self, gate: GateOp) -> int | None:
        """Conjugate by ``gate``; measurements return their outcome flip."""
        k = gate.kind
        if k == CNOT:
            c, t = gate.qubits
            self.x[t] ^= self.x[c]
            self.z[c] ^= self.z[t]
        elif k in (PREP_Z, PREP_X):
            q = gate.qubits[0]
            self.x[q] = self.z[q] = False
        elif k == MEAS_Z:
            return int(self.x[gate.qubits[0]])
        elif k == MEAS_X:
            return int(self.z[gate.qubits[0]])
        return None


def propagate(frame: PauliFrame, gate: GateOp) -> PauliFrame:
    out = frame.copy()
    out.apply(gate)
    return out


@dataclass
class TrialOutcome:
    detectors: np.ndarray  # uint8 per circuit detector
    observable: int
    logical_z: int  # X-frame parity over the logical-Z support at the end
    logical_x: int  # Z-frame parity over the logical-X support at the end


def _logical_parities(circuit: MemoryCircuit, x: Sequence, z: Sequence):
    code = circuit.code
    lz = 0
    for c in code.logical_z.z_support:
        lz ^= x[code.qubit_index(c)]
    lx = 0
    for c in code.logical_x.x_support:
        lx ^= z[code.qubit_index(c)]
    return lz, lx


def run_trial(
    circuit: MemoryCircuit,
    faults: Iterable[ElementaryFault],
    locations: Sequence[FaultLocation],
) -> TrialOutcome:
    """Detector bits and logical flips produced by a concrete fault set."""
    after_gate: dict[int, list[tuple[FaultLocation, tuple[str, ...]]]] = {}
    for f in faults:
        loc = locations[f.location]
        after_gate.setdefault(loc.site, []).append((loc, f.effect))

    frame = PauliFrame(circuit.num_qubits)
    flips = []
    for g in circuit.gates:
        m = frame.apply(g)
        injected = after_gate.get(g.time, ())
        if m is not None:
            for loc, eff in injected:
                if eff == ("FLIP",):
                    m ^= 1
            flips.append(m)
            continue
        for loc, eff in injected:
            for q, label in zip(loc.qubits, eff):
                frame.apply_pauli(q, label)

    det = np.zeros(len(circuit.detectors), dtype=np.uint8)
    for k, d in enumerate(circuit.detectors):
        v = 0
        for m in d.measurements:
            v ^= flips[m]
        det[k] = v
    obs = 0
    for m in circuit.observable:
        obs ^= flips[m]
    lz, lx = _logical_parities(circuit, frame.x.astype(int), frame.z.astype(int))
    return TrialOutcome(det, obs, int(lz), int(lx))


@dataclass
class FaultSignatures:
    """Per-elementary-fault detector sets (CSR over circuit detectors) and logical flips."""

    indptr: np.ndarray
    indices: np.ndarray
    observable: np.ndarray
    logical_z: np.ndarray
    logical_x: np.ndarray

    def __len__(self) -> int:
        return len(self.indptr) - 1

    def detectors(self, f: int) -> np.ndarray:
        return self.indices[self.indptr[f]:self.indptr[f + 1]]


def _pattern(labels: Iterable[str], which: str) -> int:
    hits = ("X", "Y") if which == "X" else ("Z", "Y")
    v = 0
    for k, lab in enumerate(labels):
        if lab in hits:
            v |= 1 << k
    return v


def _int_rows_to_bits(rows: Sequence[int], nbits: int) -> np.ndarray:
    nbytes = (nbits + 7) // 8
    buf = b"".join(r.to_bytes(nbytes, "little") for r in rows)
    arr = np.frombuffer(buf, dtype=np.uint8).reshape(len(rows), nbytes)
    return np.unpackbits(arr, axis=1, bitorder="little")[:, :nbits]


def fault_signatures(circuit: MemoryCircuit, table: FaultTable) -> FaultSignatures:
    nf = len(table)
    inject: dict[int, list[tuple[str, int, int]]] = {}  # gate -> (component, qubit, mask)
    flip: dict[int, int] = {}
    for li, loc in enumerate(table.locations):
        s = int(table.start[li]) if nf else 0
        effects = [eff for eff, _ in loc.faults]
        if loc.channel == MEAS_FLIP:
            flip[loc.site] = flip.get(loc.site, 0) | (1 << s)
            continue
        todo = inject.setdefault(loc.site, [])
        for pos, q in enumerate(loc.qubits):
            labels = [eff[pos] for eff in effects]
            for comp in ("X", "Z"):
                pat = _pattern(labels, comp)
                if pat:
                    todo.append((comp, q, pat << s))

    xs = [0] * circuit.num_qubits
    zs = [0] * circuit.num_qubits
    rec = []
    for g in circuit.gates:
        k = g.kind
        if k == CNOT:
            c, t = g.qubits
            xs[t] ^= xs[c]
            zs[c] ^= zs[t]
        elif k in (PREP_Z, PREP_X):
            q = g.qubits[0]
            xs[q] = zs[q] = 0
        elif k == MEAS_Z:
            rec.append(xs[g.qubits[0]] ^ flip.get(g.time, 0))
        elif k == MEAS_X:
            rec.append(zs[g.qubits[0]] ^ flip.get(g.time, 0))
        for comp, q, mask in inject.get(g.time, ()):
            if comp == "X":
                xs[q] ^= mask
            else:
                zs[q] ^= mask

    det_rows = []
    for d in circuit.detectors:
        v = 0
        for m in d.measurements:
            v ^= rec[m]
        det_rows.append(v)
    obs = 0
    for m in circuit.observable:
        obs ^= rec[m]
    lz, lx = _logical_parities(circuit, xs, zs)

    tail = _int_rows_to_bits([obs, lz, lx], nf)
    pairs_f, pairs_d = [], []
    chunk = 64
    for start in range(0, len(det_rows), chunk):
        bits = _int_rows_to_bits(det_rows[start:start + chunk], nf)
        d_idx, f_idx = np.nonzero(bits)
        pairs_f.append(f_idx)
        pairs_d.append(d_idx + start)
    f_all = np.concatenate(pairs_f) if pairs_f else np.zeros(0, dtype=np.int64)
    d_all = np.concatenate(pairs_d) if pairs_d else np.zeros(0, dtype=np.int64)
    order = np.lexsort((d_all, f_all))
    f_all, d_all = f_all[order], d_all[order]
    indptr = np.zeros(nf + 1, dtype=np.int64)
    np.add.at(indptr, f_all + 1, 1)
    indptr = np.cumsum(indptr)
    return FaultSignatures(
        indptr=indptr,
        indices=d_all.astype(np.int64),
        observable=tail[0].astype(np.uint8),
        logical_z=tail[1].astype(np.uint8),
        logical_x=tail[2].astype(np.uint8),
    )
