"""Circuit-level Pauli noise: fault locations and seeded sampling."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuits import CNOT, MEAS_X, MEAS_Z, ROUND, MemoryCircuit

FIG3 = "fig3"
BIASED = "biased"

DEPOLARIZE2 = "TwoQubitDepolarizing"
MEAS_FLIP = "MeasFlip"
IDLE_DEPHASE = "IdleDephasing"

# the 15 non-identity two-qubit Paulis, (control, target)
TWO_QUBIT_PAULIS: tuple[tuple[str, str], ...] = tuple(
    p for p in itertools.product("IXYZ", repeat=2) if p != ("I", "I")
)


class NoiseError(ValueError):
    pass


@dataclass(frozen=True)
class NoiseParams:
    p_gate: float
    p_meas: float
    p_idle: float = 0.0
    model: str = BIASED

    def __post_init__(self):
        for name in ("p_gate", "p_meas", "p_idle"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise NoiseError(f"{name} must lie in [0, 1], got {v}")
        if self.model == FIG3:
            if self.p_idle != 0.0:
                raise NoiseError("fig3 model has no idle errors (p_idle must be 0)")
            if self.p_meas != self.p_gate:
                raise NoiseError("fig3 model ties p_meas to p_gate")
        elif self.model != BIASED:
            raise NoiseError(f"unknown noise model {self.model!r}")

    @classmethod
    def fig3(cls, p: float) -> "NoiseParams":
        return cls(p, p, 0.0, FIG3)

    @classmethod
    def biased(cls, p_gate: float, p_meas: float, p_idle: float) -> "NoiseParams":
        return cls(p_gate, p_meas, p_idle, BIASED)


@dataclass(frozen=True)
class FaultLocation:
    """One noisy site.

    ``faults`` lists ``(effect, probability)`` where ``effect`` is a Pauli label
    per operand (``("X", "Z")`` for a CNOT, ``("Z",)`` for idling) or
    ``("FLIP",)`` for a measurement outcome flip. Faults at one location are
    mutually exclusive.
    """

    site: int  # gate index in circuit.gates
    channel: str
    qubits: tuple[int, ...]
    faults: tuple[tuple[tuple[str, ...], float], ...]

    @property
    def probability(self) -> float:
        return sum(p for _, p in self.faults)


def enumerate_fault_locations(circuit: MemoryCircuit, params: NoiseParams) -> list[FaultLocation]:
    """Noisy-round CNOTs, noisy-round ancilla measurements and (biased model) idle slots."""
    NoiseParams(params.p_gate, params.p_meas, params.p_idle, params.model)  # re-validate
    locs = []
    depol = tuple((p, params.p_gate / 15) for p in TWO_QUBIT_PAULIS)
    for g in circuit.gates:
        if not g.noisy:
            continue
        if g.kind == CNOT:
            locs.append(FaultLocation(g.time, DEPOLARIZE2, g.qubits, depol))
        elif g.kind in (MEAS_Z, MEAS_X):
            locs.append(FaultLocation(g.time, MEAS_FLIP, g.qubits, ((("FLIP",), params.p_meas),)))
        elif g.kind == ROUND and params.model == BIASED:
            for q in range(circuit.num_data):
                locs.append(FaultLocation(g.time, IDLE_DEPHASE, (q,), ((("Z",), params.p_idle),)))
    return locs


@dataclass(frozen=True)
class ElementaryFault:
    location: int  # index into the location list
    effect: tuple[str, ...]
    probability: float


class FaultTable:
    """Flat arrays over locations and their elementary faults, for sampling.

    Elementary fault ``f`` of location ``l`` has id ``start[l] + k``.
    """

    def __init__(self, locations: Sequence[FaultLocation]):
        self.locations = list(locations)
        counts = np.array([len(l.faults) for l in self.locations], dtype=np.int64)
        self.count = counts
        self.start = np.concatenate([[0], np.cumsum(counts)[:-1]]).astype(np.int64) if len(counts) else counts
        self.loc_prob = np.array([l.probability for l in self.locations], dtype=np.float64)
        self.faults = [
            ElementaryFault(li, eff, p)
            for li, loc in enumerate(self.locations)
            for eff, p in loc.faults
        ]
        self.fault_prob = np.array([f.probability for f in self.faults], dtype=np.float64)
        # every channel here is uniform over its alternatives
        for loc in self.locations:
            ps = {p for _, p in loc.faults}
            if len(ps) > 1:
                raise NoiseError("non-uniform channel at a single location")

    def __len__(self) -> int:
        return len(self.faults)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """Sorted ids of the elementary faults that fire in one trial."""
        if not len(self.locations):
            return np.zeros(0, dtype=np.int64)
        u = rng.random(len(self.locations))
        fired = np.flatnonzero(u < self.loc_prob)
        if not fired.size:
            return fired
        pick = (rng.random(fired.size) * self.count[fired]).astype(np.int64)
        return self.start[fired] + np.minimum(pick, self.count[fired] - 1)


def sample_faults(locations: Sequence[FaultLocation] | FaultTable, rng: np.random.Generator) -> list[ElementaryFault]:
    table = locations if isinstance(locations, FaultTable) else FaultTable(locations)
    return [table.faults[f] for f in table.sample(rng)]


def trial_rng(seed: int, *stream: int) -> np.random.Generator:
    """Independent generator for trial ``stream`` of a run seeded by ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, *stream])))
