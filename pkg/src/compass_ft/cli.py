"""Command-line entry point: ``compass-ft <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

import numpy as np

from . import harness
from .circuits import build_memory_circuit
from .code_model import CodeError, CompassCode, Coloring, build_code, elongated_coloring, validate
from .decoder_graph import DecoderGraph, FaultToleranceViolation, build_graph
from .mwpm_oracle import CapacityError, decode_mwpm
from .noise import BIASED, FIG3, NoiseError, NoiseParams
from .uf_decoder import UNWEIGHTED, WEIGHTED, DecodeError, UnionFindDecoder


class UsageError(Exception):
    pass


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _strs(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def _write(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _code_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--code", help="code JSON produced by build-code")
    p.add_argument("--n", type=int, help="lattice side length")
    p.add_argument("--ell", type=int, help="elongation of the elongated coloring")
    p.add_argument("--coloring", help="explicit cell rows, comma separated (e.g. 'RB,BR')")
    p.add_argument("--dual", action="store_true", help="swap Red and Blue in the elongated coloring")


def _noise_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=[FIG3, BIASED], default=FIG3)
    p.add_argument("--p-gate", "--p", dest="p_gate", type=float, default=0.001)
    p.add_argument("--p-meas", type=float, default=None)
    p.add_argument("--p-idle", type=float, default=0.0)


def _load_code(args) -> CompassCode:
    if args.code:
        with open(args.code) as fh:
            return CompassCode.from_json(json.load(fh))
    if args.coloring:
        return build_code(Coloring.from_rows(_strs(args.coloring)))
    if args.n is None:
        raise UsageError("--n (or --code / --coloring) is required")
    return build_code(elongated_coloring(args.n, args.ell if args.ell is not None else 2, dual=args.dual))


def _noise(args) -> NoiseParams:
    if args.model == FIG3:
        if args.p_meas not in (None, args.p_gate) or args.p_idle:
            raise UsageError("--model fig3 ties p_meas to p_gate and has no idle noise; use --p")
        return NoiseParams.fig3(args.p_gate)
    p_meas = args.p_meas if args.p_meas is not None else args.p_gate
    return NoiseParams.biased(args.p_gate, p_meas, args.p_idle)


def cmd_build_code(args) -> int:
    code = _load_code(args)
    report = validate(code)
    _write(args.out, code.dumps() + "\n")
    print(f"independent generators: {report.independent_generators}; valid: {report.ok}", file=sys.stderr)
    return 0 if report.ok else 1


def cmd_gen_circuit(args) -> int:
    code = _load_code(args)
    rounds = args.rounds or code.n
    circuit = build_memory_circuit(code, rounds, args.basis)
    _write(args.out, circuit.to_text())
    return 0


def cmd_build_graph(args) -> int:
    code = _load_code(args)
    circuit = build_memory_circuit(code, args.rounds or code.n, args.basis)
    graph = build_graph(circuit, _noise(args), args.graph_basis or args.basis)
    _write(args.out, graph.dumps() + "\n")
    print(f"{graph.num_detectors} detectors, {graph.num_edges} edges", file=sys.stderr)
    return 0


def _read_syndromes(path: str, width: int):
    with (sys.stdin if path == "-" else open(path)) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if len(line) != width or set(line) - {"0", "1"}:
                raise UsageError(f"{path}:{lineno}: expected {width} bits of 0/1")
            yield np.frombuffer(line.encode(), dtype=np.uint8) - ord("0")


def cmd_decode(args) -> int:
    with open(args.graph) as fh:
        graph = DecoderGraph.from_json(json.load(fh))
    uf = UnionFindDecoder(graph, args.mode) if args.decoder == "uf" else None
    out = sys.stdout if args.out in (None, "-") else open(args.out, "w")
    try:
        for k, syn in enumerate(_read_syndromes(args.syndromes, graph.num_detectors)):
            if uf is not None:
                corr = uf.decode(syn)
                rec = {"index": k, "decoder": f"uf_{args.mode}", "edges": corr.edges.tolist(),
                       "logical_flip": corr.logical_flip, "weight": corr.weight}
            else:
                corr = decode_mwpm(graph, syn, fallback=args.fallback)
                if corr is None:
                    rec = {"index": k, "decoder": "mwpm", "skipped": True}
                else:
                    rec = {"index": k, "decoder": "mwpm", "edges": corr.edges.tolist(),
                           "logical_flip": corr.logical_flip, "weight": corr.weight}
            out.write(json.dumps(rec) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _experiment_config(args) -> harness.ExperimentConfig:
    base = {}
    if args.config:
        with open(args.config) as fh:
            base = json.load(fh)
    flags = {
        "sizes": _ints(args.n) if args.n else None,
        "ells": _ints(args.ell) if args.ell else None,
        "model": args.model,
        "p_gate": _floats(args.p_gate) if args.p_gate else None,
        "p_meas": _floats(args.p_meas) if args.p_meas else None,
        "p_idle": _floats(args.p_idle) if args.p_idle else None,
        "bases": _strs(args.basis) if args.basis else None,
        "rounds": args.rounds,
        "trials": args.trials,
        "seed": args.seed,
        "decoders": _strs(args.decoders) if args.decoders else None,
        "dual": True if args.dual else None,
        "output": args.out,
    }
    base.update({k: v for k, v in flags.items() if v is not None})
    for key in ("sizes", "p_gate"):
        if key not in base:
            raise UsageError(f"--{'n' if key == 'sizes' else 'p-gate'} is required without --config")
    return harness.ExperimentConfig.from_json(base)


def cmd_run(args) -> int:
    cfg = _experiment_config(args)
    trace_fh = open(args.trace, "w") if args.trace else None
    trace = (lambda rec: trace_fh.write(json.dumps(rec) + "\n")) if trace_fh else None
    progress = (lambda msg: print(msg, file=sys.stderr)) if args.verbose else None
    try:
        stats = harness.run_experiment(cfg, output=cfg.output, trace=trace, progress=progress)
    finally:
        if trace_fh:
            trace_fh.close()
    if not cfg.output:
        sys.stdout.write(harness.format_csv(stats))
    return 0 if len(stats) == harness.expected_rows(cfg) else 1


def cmd_threshold(args) -> int:
    stats = harness.read_csv(args.csv)
    decoders = _strs(args.decoder) if args.decoder else sorted({s.decoder for s in stats})
    bases = _strs(args.basis) if args.basis else sorted({s.basis for s in stats})
    reports = []
    for d in decoders:
        for b in bases:
            est = harness.estimate_threshold(stats, d, b, bootstrap=args.bootstrap, seed=args.seed)
            reports.append({**asdict(est), "found": est.found})
    _write(args.out, json.dumps(reports, indent=1) + "\n")
    return 0


def cmd_compare(args) -> int:
    stats = harness.read_csv(args.csv)
    reps = harness.compare_elongations(stats, args.decoder, args.basis)
    _write(args.out, json.dumps([asdict(r) for r in reps], indent=1) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="compass-ft", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-code", help="build and validate a compass code")
    _code_args(p)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_build_code)

    p = sub.add_parser("gen-circuit", help="emit the memory-experiment circuit as text")
    _code_args(p)
    p.add_argument("--rounds", type=int)
    p.add_argument("--basis", choices=["Z", "X"], default="Z")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_gen_circuit)

    p = sub.add_parser("build-graph", help="build a weighted decoder graph as JSON")
    _code_args(p)
    _noise_args(p)
    p.add_argument("--rounds", type=int)
    p.add_argument("--basis", choices=["Z", "X"], default="Z", help="memory basis")
    p.add_argument("--graph-basis", choices=["Z", "X"], help="detector family (default: memory basis)")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_build_graph)

    p = sub.add_parser("decode", help="decode syndrome bitstrings, one per line")
    p.add_argument("--graph", required=True)
    p.add_argument("--syndromes", required=True)
    p.add_argument("--mode", choices=[WEIGHTED, UNWEIGHTED], default=WEIGHTED)
    p.add_argument("--decoder", choices=["uf", "mwpm"], default="uf")
    p.add_argument("--fallback", choices=["skip", "blossom"], default="skip",
                   help="mwpm: what to do with a defect group above the DP capacity")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("run", help="run a Monte Carlo sweep and write CSV")
    p.add_argument("--config")
    p.add_argument("--n", help="sizes, comma separated")
    p.add_argument("--ell", help="elongations, comma separated")
    p.add_argument("--model", choices=[FIG3, BIASED])
    p.add_argument("--p-gate", "--p", dest="p_gate")
    p.add_argument("--p-meas")
    p.add_argument("--p-idle")
    p.add_argument("--basis", help="Z, X and/or ZX (paired shots), comma separated")
    p.add_argument("--rounds", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--decoders", help=",".join(harness.DECODERS))
    p.add_argument("--dual", action="store_true")
    p.add_argument("--out")
    p.add_argument("--trace", help="write one JSON line per trial")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("threshold", help="crossing of the two largest sizes")
    p.add_argument("--csv", required=True)
    p.add_argument("--decoder")
    p.add_argument("--basis")
    p.add_argument("--bootstrap", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("compare", help="elongation crossover in p_idle")
    p.add_argument("--csv", required=True)
    p.add_argument("--decoder")
    p.add_argument("--basis")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_compare)
    return ap


def _apply_config(parser: argparse.ArgumentParser, argv) -> argparse.Namespace:
    """Non-``run`` subcommands take ``--config`` as a JSON object of flag defaults."""
    argv = list(sys.argv[1:] if argv is None else argv)
    if len(argv) > 1 and argv[0] != "run" and "--config" in argv:
        k = argv.index("--config")
        if k + 1 >= len(argv):
            parser.error("--config needs a path")
        with open(argv[k + 1]) as fh:
            cfg = json.load(fh)
        del argv[k:k + 2]
        sub = parser._subparsers._group_actions[0].choices[argv[0]]
        known = {a.dest for a in sub._actions}
        bad = set(k.replace("-", "_") for k in cfg) - known
        if bad:
            parser.error(f"unknown config keys for {argv[0]}: {sorted(bad)}")
        sub.set_defaults(**{k.replace("-", "_"): v for k, v in cfg.items()})
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    args = _apply_config(parser, argv)
    try:
        return args.func(args)
    except (UsageError, harness.ConfigError) as exc:
        print(f"compass-ft {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (CodeError, NoiseError, FaultToleranceViolation, DecodeError, CapacityError) as exc:
        print(f"compass-ft {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
