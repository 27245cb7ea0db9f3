"""Compass codes on an n x n lattice, built from red/blue/blank cell colorings.

Qubits are addressed by 1-based ``(row, col)`` pairs. Cell ``(i, j)`` is the
plaquette whose top-left qubit is ``(i, j)``. A red cell cuts the X strip on
column pair ``(j, j+1)`` between rows ``i`` and ``i+1``; a blue cell cuts the Z
strip on row pair ``(i, i+1)`` between columns ``j`` and ``j+1``. Blank cells
leave a gauge qubit behind.
"""

from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

Coord = tuple[int, int]


class CellColor(enum.Enum):
    RED = "R"
    BLUE = "B"
    BLANK = "."


class CodeError(ValueError):
    """Raised for malformed colorings or unsupported code requests."""


@dataclass(frozen=True)
class Coloring:
    n: int
    cells: tuple[tuple[CellColor, ...], ...]

    def __post_init__(self):
        if self.n < 2:
            raise CodeError(f"lattice side must be >= 2, got {self.n}")
        if len(self.cells) != self.n - 1 or any(len(r) != self.n - 1 for r in self.cells):
            raise CodeError(f"coloring grid must be {self.n - 1}x{self.n - 1}")
        for row in self.cells:
            for c in row:
                if not isinstance(c, CellColor):
                    raise CodeError(f"bad cell value {c!r}")

    def color(self, i: int, j: int) -> CellColor:
        """Color of cell (i, j), 1-based."""
        return self.cells[i - 1][j - 1]

    @property
    def fully_colored(self) -> bool:
        return all(c is not CellColor.BLANK for row in self.cells for c in row)

    @property
    def all_blank(self) -> bool:
        return all(c is CellColor.BLANK for row in self.cells for c in row)

    def rows(self) -> list[str]:
        return ["".join(c.value for c in row) for row in self.cells]

    @classmethod
    def from_rows(cls, rows: Sequence[str]) -> "Coloring":
        n = len(rows) + 1
        try:
            cells = tuple(tuple(CellColor(ch) for ch in r) for r in rows)
        except ValueError as exc:
            raise CodeError(f"cell strings may only contain 'R', 'B', '.': {exc}") from None
        return cls(n, cells)

    @classmethod
    def uniform(cls, n: int, color: CellColor) -> "Coloring":
        return cls(n, tuple(tuple(color for _ in range(n - 1)) for _ in range(n - 1)))

    def dual(self) -> "Coloring":
        """Swap red and blue cells."""
        swap = {CellColor.RED: CellColor.BLUE, CellColor.BLUE: CellColor.RED,
                CellColor.BLANK: CellColor.BLANK}
        return Coloring(self.n, tuple(tuple(swap[c] for c in row) for row in self.cells))


def elongated_coloring(n: int, ell: int, dual: bool = False) -> Coloring:
    """Red on cells with ``i == j (mod ell)``, blue elsewhere.

    ``dual=True`` swaps the two colors, which orients the elongated code so
    that larger ``ell`` fixes more X-type gauges.
    """
    if n < 2:
        raise CodeError(f"lattice side must be >= 2, got {n}")
    if ell < 1:
        raise CodeError(f"elongation must be >= 1, got {ell}")
    on, off = (CellColor.BLUE, CellColor.RED) if dual else (CellColor.RED, CellColor.BLUE)
    cells = tuple(
        tuple(on if (i - j) % ell == 0 else off for j in range(1, n))
        for i in range(1, n)
    )
    return Coloring(n, cells)


@dataclass(frozen=True)
class PauliString:
    x_support: frozenset[Coord] = frozenset()
    z_support: frozenset[Coord] = frozenset()

    @property
    def weight(self) -> int:
        return len(self.x_support | self.z_support)

    def commutes_with(self, other: "PauliString") -> bool:
        overlap = len(self.x_support & other.z_support) + len(self.z_support & other.x_support)
        return overlap % 2 == 0

    @classmethod
    def x(cls, coords: Iterable[Coord]) -> "PauliString":
        return cls(x_support=frozenset(coords))

    @classmethod
    def z(cls, coords: Iterable[Coord]) -> "PauliString":
        return cls(z_support=frozenset(coords))


@dataclass(frozen=True)
class StabilizerStrip:
    """A two-wide strip stabilizer.

    For ``basis == "Z"`` the strip sits on rows ``(pair, pair+1)`` and spans
    columns ``lo..hi``; for ``basis == "X"`` it sits on columns
    ``(pair, pair+1)`` and spans rows ``lo..hi``.
    """

    basis: str
    pair: int
    lo: int
    hi: int

    def __post_init__(self):
        if self.basis not in ("X", "Z"):
            raise CodeError(f"basis must be 'X' or 'Z', got {self.basis!r}")
        if not 1 <= self.lo <= self.hi:
            raise CodeError(f"bad strip range {self.lo}..{self.hi}")

    @property
    def weight(self) -> int:
        return 2 * (self.hi - self.lo + 1)

    def support(self) -> list[Coord]:
        if self.basis == "Z":
            return [(r, c) for c in range(self.lo, self.hi + 1) for r in (self.pair, self.pair + 1)]
        return [(r, c) for r in range(self.lo, self.hi + 1) for c in (self.pair, self.pair + 1)]

    def pauli(self) -> PauliString:
        sup = self.support()
        return PauliString.z(sup) if self.basis == "Z" else PauliString.x(sup)

    def to_json(self) -> dict:
        key = "rows" if self.basis == "Z" else "cols"
        other = "cols" if self.basis == "Z" else "rows"
        return {"basis": self.basis, key: [self.pair, self.pair + 1], other: [self.lo, self.hi]}

    @classmethod
    def from_json(cls, d: dict) -> "StabilizerStrip":
        if d["basis"] == "Z":
            return cls("Z", d["rows"][0], d["cols"][0], d["cols"][1])
        return cls("X", d["cols"][0], d["rows"][0], d["rows"][1])


@dataclass(frozen=True)
class CompassCode:
    n: int
    coloring: Coloring
    x_stabilizers: tuple[StabilizerStrip, ...]
    z_stabilizers: tuple[StabilizerStrip, ...]
    logical_x: PauliString
    logical_z: PauliString
    residual_gauge: tuple[PauliString, ...] = field(default=())

    @property
    def decodable(self) -> bool:
        """Fully colored codes and the plain Bacon-Shor code can be decoded."""
        return self.coloring.fully_colored or self.coloring.all_blank

    def stabilizers(self, basis: str | None = None) -> tuple[StabilizerStrip, ...]:
        if basis == "X":
            return self.x_stabilizers
        if basis == "Z":
            return self.z_stabilizers
        return self.z_stabilizers + self.x_stabilizers

    def qubits(self) -> list[Coord]:
        return [(r, c) for r in range(1, self.n + 1) for c in range(1, self.n + 1)]

    def qubit_index(self, coord: Coord) -> int:
        r, c = coord
        return (r - 1) * self.n + (c - 1)

    def to_json(self) -> dict:
        return {
            "schema_version": 1,
            "n": self.n,
            "cells": self.coloring.rows(),
            "stabilizers": [s.to_json() for s in self.stabilizers()],
            "logical_x": sorted(list(c) for c in self.logical_x.x_support),
            "logical_z": sorted(list(c) for c in self.logical_z.z_support),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    @classmethod
    def from_json(cls, d: dict) -> "CompassCode":
        code = build_code(Coloring.from_rows(d["cells"]))
        if int(d["n"]) != code.n:
            raise CodeError(f"n={d['n']} disagrees with the {len(d['cells'])}-row cell grid")
        if "stabilizers" in d:
            given = {StabilizerStrip.from_json(s) for s in d["stabilizers"]}
            if given != set(code.stabilizers()):
                raise CodeError("stabilizer list does not match the coloring")
        return code


def _segments(lo: int, hi: int, cuts: Iterable[int]) -> list[tuple[int, int]]:
    # a cut at k separates k from k+1
    out, start = [], lo
    for k in sorted(cuts):
        out.append((start, k))
        start = k + 1
    out.append((start, hi))
    return out


def build_code(coloring: Coloring) -> CompassCode:
    n = coloring.n
    x_stabs = []
    for j in range(1, n):
        cuts = [i for i in range(1, n) if coloring.color(i, j) is CellColor.RED]
        x_stabs.extend(StabilizerStrip("X", j, a, b) for a, b in _segments(1, n, cuts))
    z_stabs = []
    for i in range(1, n):
        cuts = [j for j in range(1, n) if coloring.color(i, j) is CellColor.BLUE]
        z_stabs.extend(StabilizerStrip("Z", i, a, b) for a, b in _segments(1, n, cuts))
    z_stabs.sort(key=lambda s: (s.pair, s.lo))
    x_stabs.sort(key=lambda s: (s.pair, s.lo))

    gauge = []
    for i in range(1, n):
        for j in range(1, n):
            if coloring.color(i, j) is CellColor.BLANK:
                gauge.append(PauliString.x((k, c) for k in range(1, i + 1) for c in (j, j + 1)))
                gauge.append(PauliString.z((r, k) for k in range(1, j + 1) for r in (i, i + 1)))

    return CompassCode(
        n=n,
        coloring=coloring,
        x_stabilizers=tuple(x_stabs),
        z_stabilizers=tuple(z_stabs),
        logical_x=PauliString.x((i, 1) for i in range(1, n + 1)),
        logical_z=PauliString.z((1, j) for j in range(1, n + 1)),
        residual_gauge=tuple(gauge),
    )


# --- GF(2) helpers -------------------------------------------------------

def _symplectic_row(p: PauliString, n: int) -> int:
    """Bit-packed (x | z) vector with x in the low n*n bits."""
    nq = n * n
    v = 0
    for r, c in p.x_support:
        v |= 1 << ((r - 1) * n + c - 1)
    for r, c in p.z_support:
        v |= 1 << (nq + (r - 1) * n + c - 1)
    return v


def gf2_rank(rows: Iterable[int]) -> int:
    """Rank of a set of bit-packed row vectors over GF(2)."""
    pivots: dict[int, int] = {}
    rank = 0
    for v in rows:
        while v:
            top = v.bit_length() - 1
            if top in pivots:
                v ^= pivots[top]
            else:
                pivots[top] = v
                rank += 1
                break
    return rank


@dataclass
class ValidationReport:
    ok: bool
    independent_generators: int
    anticommuting_pairs: list[tuple[str, str]] = field(default_factory=list)
    logical_failures: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def validate(code: CompassCode) -> ValidationReport:
    """Check commutation relations and count independent stabilizers."""
    named = [(f"{s.basis}{k}", s.pauli()) for k, s in enumerate(code.z_stabilizers)]
    named += [(f"{s.basis}{k}", s.pauli()) for k, s in enumerate(code.x_stabilizers)]
    bad_pairs = [
        (na, nb)
        for (na, a), (nb, b) in itertools.combinations(named, 2)
        if not a.commutes_with(b)
    ]
    logical_fail = []
    for name, s in named:
        if not s.commutes_with(code.logical_x):
            logical_fail.append(f"{name} anticommutes with logical_x")
        if not s.commutes_with(code.logical_z):
            logical_fail.append(f"{name} anticommutes with logical_z")
    if code.logical_x.commutes_with(code.logical_z):
        logical_fail.append("logical_x commutes with logical_z")
    rank = gf2_rank(_symplectic_row(p, code.n) for _, p in named)
    return ValidationReport(
        ok=not bad_pairs and not logical_fail,
        independent_generators=rank,
        anticommuting_pairs=bad_pairs,
        logical_failures=logical_fail,
    )


MAX_BRUTEFORCE_N = 5


def code_distance_bruteforce(code: CompassCode, basis: str) -> int:
    """Minimum weight of a nontrivial ``basis``-type logical, by exhaustive search.

    A ``basis``-type operator is a logical iff it commutes with every
    opposite-type stabilizer and anticommutes with the opposite logical.
    """
    if code.n > MAX_BRUTEFORCE_N:
        raise CodeError(f"exhaustive distance search limited to n <= {MAX_BRUTEFORCE_N}")
    if not code.decodable:
        raise CodeError("distance search needs a fully colored or all-blank code")
    if basis not in ("X", "Z"):
        raise CodeError(f"basis must be 'X' or 'Z', got {basis!r}")
    other = "X" if basis == "Z" else "Z"
    checks = code.stabilizers(other)
    conj = code.logical_x if basis == "Z" else code.logical_z
    conj_sup = conj.x_support | conj.z_support
    # column of each qubit: bit k = check k, top bit = conjugate logical
    cols = []
    for q in code.qubits():
        v = 0
        for k, s in enumerate(checks):
            if q in s.support():
                v |= 1 << k
        if q in conj_sup:
            v |= 1 << len(checks)
        cols.append(v)
    target = 1 << len(checks)
    nq = len(cols)
    for w in range(1, nq + 1):
        for combo in itertools.combinations(range(nq), w):
            v = 0
            for q in combo:
                v ^= cols[q]
            if v == target:
                return w
    raise CodeError("no logical operator found")  # unreachable for valid codes
