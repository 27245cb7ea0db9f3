from pathlib import Path

import numpy as np
import pytest

from compass_ft.circuits import CNOT, MEAS_X, MEAS_Z, PREP_X, PREP_Z, ROUND
from compass_ft.code_model import CellColor, Coloring, build_code, elongated_coloring
from compass_ft.decoder_graph import DecoderGraph
from compass_ft.noise import enumerate_fault_locations

DATA = Path(__file__).parent / "data"


def code_for(n, ell):
    """``ell=None`` selects the all-blank Bacon-Shor code."""
    if ell is None:
        return build_code(Coloring.uniform(n, CellColor.BLANK))
    return build_code(elongated_coloring(n, ell))


def to_stim(circuit, params):
    """Translate a memory circuit and its noise into a stim circuit."""
    stim = pytest.importorskip("stim")
    out = stim.Circuit()
    by_site = {}
    for loc in enumerate_fault_locations(circuit, params):
        by_site.setdefault(loc.site, []).append(loc)
    for g in circuit.gates:
        q = list(g.qubits)
        locs = by_site.get(g.time, [])
        if g.kind == PREP_Z:
            out.append("R", q)
        elif g.kind == PREP_X:
            out.append("RX", q)
        elif g.kind == CNOT:
            out.append("CX", q)
            if locs:
                out.append("DEPOLARIZE2", q, params.p_gate)
        elif g.kind in (MEAS_Z, MEAS_X):
            p = sum(l.probability for l in locs)
            out.append("M" if g.kind == MEAS_Z else "MX", q, p)
        elif g.kind == ROUND:
            for loc in locs:
                out.append("Z_ERROR", list(loc.qubits), params.p_idle)
    nm = len(circuit.measurements)
    for d in circuit.detectors:
        out.append("DETECTOR", [stim.target_rec(m - nm) for m in d.measurements])
    out.append("OBSERVABLE_INCLUDE", [stim.target_rec(m - nm) for m in circuit.observable], 0)
    return out


def random_graph(rng, num_detectors=12, extra_edges=10, max_w=5.0, integer=False):
    """Connected random decoder graph where every detector has a boundary edge path."""
    edges = []
    nd = num_detectors
    for v in range(1, nd):
        u = int(rng.integers(0, v))
        edges.append((u, v))
    for _ in range(extra_edges):
        u, v = rng.choice(nd, 2, replace=False)
        edges.append((int(min(u, v)), int(max(u, v))))
    for _ in range(max(1, nd // 4)):
        edges.append((int(rng.integers(0, nd)), nd + int(rng.integers(0, 2))))
    seen, out = set(), []
    for u, v in edges:
        if (u, v) in seen:
            continue
        seen.add((u, v))
        w = float(rng.integers(1, int(max_w) + 1)) if integer else float(rng.uniform(0.2, max_w))
        p = 1.0 / (1.0 + np.exp(w))
        par = int(v == nd + 1)
        out.append((u, v, p, par))
    return DecoderGraph.from_edges(nd, out)


# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
