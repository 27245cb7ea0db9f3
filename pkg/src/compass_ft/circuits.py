"""Bare-ancilla syndrome extraction and memory-experiment circuits.

Each stabilizer strip gets one ancilla. Z strips are read out by CNOTs from
the data (control) to the ancilla (target), X strips by CNOTs from the
ancilla to the data, both in zig-zag order along the strip.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from .code_model import CodeError, CompassCode, Coord, StabilizerStrip

PREP_Z = "PREP_Z"
PREP_X = "PREP_X"
CNOT = "CNOT"
MEAS_Z = "MEAS_Z"
MEAS_X = "MEAS_X"
ROUND = "ROUND"

GATE_KINDS = (PREP_Z, PREP_X, CNOT, MEAS_Z, MEAS_X, ROUND)


@dataclass(frozen=True)
class GateOp:
    kind: str
    qubits: tuple[int, ...]
    time: int
    noisy: bool = True


@dataclass(frozen=True)
class ExtractionSchedule:
    stabilizer: StabilizerStrip
    ancilla: int
    order: tuple[Coord, ...]

    @property
    def data_controls(self) -> bool:
        return self.stabilizer.basis == "Z"

    @property
    def measure_basis(self) -> str:
        return self.stabilizer.basis


@dataclass(frozen=True)
class Detector:
    basis: str  # stabilizer type, 'X' or 'Z'
    stabilizer: int  # index into code.stabilizers(basis)
    layer: int  # 1..rounds+1; layer rounds+1 compares against the ideal round
    measurements: tuple[int, ...]


@dataclass
class MemoryCircuit:
    code: CompassCode
    rounds: int
    basis: str  # memory basis, 'Z' or 'X'
    gates: list[GateOp]
    measurements: list[int]  # gate index of each measurement, in record order
    detectors: list[Detector]
    observable: tuple[int, ...]  # measurement indices of the logical readout
    ancillas: dict[tuple[str, int], int] = field(default_factory=dict)

    @property
    def num_data(self) -> int:
        return self.code.n ** 2

    @property
    def num_qubits(self) -> int:
        return self.num_data + len(self.ancillas)

    def detectors_of(self, basis: str) -> list[int]:
        return [k for k, d in enumerate(self.detectors) if d.basis == basis]

    def qubit_name(self, q: int) -> str:
        n = self.code.n
        if q < self.num_data:
            return f"d{q // n + 1}.{q % n + 1}"
        return f"a{q - self.num_data}"

    def to_text(self) -> str:
        lines = [
            "# compass-ft circuit v1",
            f"# n={self.code.n} rounds={self.rounds} memory={self.basis}",
            "# cells " + " ".join(self.code.coloring.rows()),
        ]
        seen_noisy = ideal_started = False
        for g in self.gates:
            seen_noisy = seen_noisy or g.noisy
            if seen_noisy and not g.noisy and not ideal_started:
                lines.append("IDEAL")
                ideal_started = True
            if g.kind == ROUND:
                lines.append(ROUND)
            else:
                lines.append(" ".join([g.kind, *(self.qubit_name(q) for q in g.qubits)]))
        for d in self.detectors:
            recs = " ".join(f"m{m}" for m in d.measurements)
            lines.append(f"DETECTOR {d.basis}{d.stabilizer} L{d.layer} {recs}")
        lines.append("OBSERVABLE " + " ".join(f"m{m}" for m in self.observable))
        return "\n".join(lines) + "\n"


def zigzag_order(strip: StabilizerStrip) -> list[Coord]:
    """Column-by-column (Z) or row-by-row (X) alternation along the strip."""
    if strip.basis == "Z":
        i = strip.pair
        return [(r, c) for c in range(strip.lo, strip.hi + 1) for r in (i, i + 1)]
    j = strip.pair
    return [(r, c) for r in range(strip.lo, strip.hi + 1) for c in (j, j + 1)]


def build_extraction(strip: StabilizerStrip, ancilla: int = 0) -> ExtractionSchedule:
    return ExtractionSchedule(strip, ancilla, tuple(zigzag_order(strip)))


def extraction_gates(sched: ExtractionSchedule, code: CompassCode) -> Iterator[tuple[str, tuple[int, ...]]]:
    """(kind, qubits) for one extraction; data indices from ``code.qubit_index``."""
    a = sched.ancilla
    z_type = sched.stabilizer.basis == "Z"
    yield (PREP_Z if z_type else PREP_X), (a,)
    for coord in sched.order:
        d = code.qubit_index(coord)
        yield CNOT, ((d, a) if z_type else (a, d))
    yield (MEAS_Z if z_type else MEAS_X), (a,)


def build_memory_circuit(code: CompassCode, rounds: int, basis: str = "Z") -> MemoryCircuit:
    """``rounds`` noisy extraction rounds followed by one ideal round and readout."""
    if basis not in ("Z", "X"):
        raise CodeError(f"memory basis must be 'Z' or 'X', got {basis!r}")
    if rounds < 1:
        raise CodeError(f"rounds must be >= 1, got {rounds}")
    if not code.decodable:
        raise CodeError("circuits need a fully colored code or the all-blank Bacon-Shor code")

    nd = code.n ** 2
    ancillas: dict[tuple[str, int], int] = {}
    schedules = []
    for b in ("Z", "X"):
        for k, s in enumerate(code.stabilizers(b)):
            ancillas[(b, k)] = nd + len(ancillas)
            schedules.append((b, k, build_extraction(s, ancillas[(b, k)])))

    gates: list[GateOp] = []
    measurements: list[int] = []
    # outcome[(basis, k)][t] = measurement index of round t (t = rounds+1 is ideal)
    outcome: dict[tuple[str, int], dict[int, int]] = {key: {} for key in ancillas}

    def emit(kind, qubits, noisy):
        gates.append(GateOp(kind, tuple(qubits), len(gates), noisy))
        if kind in (MEAS_Z, MEAS_X):
            measurements.append(len(gates) - 1)
            return len(measurements) - 1
        return None

    prep = PREP_Z if basis == "Z" else PREP_X
    for q in range(nd):
        emit(prep, (q,), False)

    for t in range(1, rounds + 2):
        noisy = t <= rounds
        if 1 < t <= rounds:
            emit(ROUND, (), True)
        for b, k, sched in schedules:
            for kind, qubits in extraction_gates(sched, code):
                m = emit(kind, qubits, noisy)
                if m is not None:
                    outcome[(b, k)][t] = m

    readout = MEAS_Z if basis == "Z" else MEAS_X
    data_meas = [emit(readout, (q,), False) for q in range(nd)]
    logical = code.logical_z.z_support if basis == "Z" else code.logical_x.x_support
    observable = tuple(sorted(data_meas[code.qubit_index(c)] for c in logical))

    detectors = []
    for b in ("Z", "X"):
        first = 1 if b == basis else 2
        for t in range(first, rounds + 2):
            for k in range(len(code.stabilizers(b))):
                rec = outcome[(b, k)]
                ms = (rec[t],) if t == 1 else (rec[t - 1], rec[t])
                detectors.append(Detector(b, k, t, ms))

    return MemoryCircuit(code, rounds, basis, gates, measurements, detectors, observable, ancillas)
