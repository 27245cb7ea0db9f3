"""Monte Carlo memory experiments, threshold crossings and elongation comparisons."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import os
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .circuits import build_memory_circuit
from .code_model import Coloring, build_code, elongated_coloring, validate
from .decoder_graph import GraphBuild, build_graph
from .mwpm_oracle import MatchingDecoder
from .noise import BIASED, FIG3, NoiseParams, trial_rng
from .uf_decoder import UNWEIGHTED, WEIGHTED, UnionFindDecoder

SCHEMA_VERSION = 1
CSV_COLUMNS = ["n", "ell", "basis", "p_gate", "p_meas", "p_idle", "decoder",
               "trials", "failures", "p_L", "ci_low", "ci_high", "seed"]
UF_WEIGHTED = "uf_weighted"
UF_UNWEIGHTED = "uf_unweighted"
MWPM = "mwpm"
DECODERS = (UF_UNWEIGHTED, UF_WEIGHTED, MWPM)
WORKERS_ENV = "COMPASS_FT_WORKERS"
PAIRED = "ZX"  # both memory bases, paired shot by shot


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    sizes: list[int]
    p_gate: list[float]
    ells: list[int] = field(default_factory=lambda: [2])
    model: str = FIG3
    p_meas: list[float] | None = None
    p_idle: list[float] = field(default_factory=lambda: [0.0])
    bases: list[str] = field(default_factory=lambda: ["Z"])
    rounds: int | None = None  # None means rounds = n
    trials: int = 1000
    seed: int = 0
    decoders: list[str] = field(default_factory=lambda: [UF_WEIGHTED])
    coloring: list[str] | None = None  # explicit rows; overrides sizes/ells
    dual: bool = False
    mwpm_fallback: str = "skip"
    output: str | None = None
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {self.schema_version}")
        if self.coloring is not None:
            self.sizes = [len(self.coloring) + 1]
            self.ells = [0]
        for name in ("sizes", "ells", "p_gate", "p_idle", "bases", "decoders"):
            if not getattr(self, name):
                raise ConfigError(f"sweep list {name!r} is empty")
        if self.p_meas is not None and not self.p_meas:
            raise ConfigError("sweep list 'p_meas' is empty")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.model not in (FIG3, BIASED):
            raise ConfigError(f"unknown model {self.model!r}")
        for b in self.bases:
            if b not in ("Z", "X", PAIRED):
                raise ConfigError(f"unknown basis {b!r}")
        for d in self.decoders:
            if d not in DECODERS:
                raise ConfigError(f"unknown decoder {d!r}; choose from {DECODERS}")
        if self.mwpm_fallback not in ("skip", "blossom"):
            raise ConfigError("mwpm_fallback must be 'skip' or 'blossom'")
        if self.rounds is not None and self.rounds < 1:
            raise ConfigError("rounds must be >= 1")

    @classmethod
    def from_json(cls, d: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def to_json(self) -> dict:
        return asdict(self)

    def noise_points(self) -> list[NoiseParams]:
        if self.model == FIG3:
            return [NoiseParams.fig3(p) for p in self.p_gate]
        p_meas = self.p_meas if self.p_meas is not None else self.p_gate
        return [NoiseParams.biased(g, m, i)
                for g, m, i in itertools.product(self.p_gate, p_meas, self.p_idle)]

    def points(self) -> list["SweepPoint"]:
        out = []
        for n, ell, basis, params in itertools.product(
                self.sizes, self.ells, self.bases, self.noise_points()):
            out.append(SweepPoint(n, ell, basis, params, self.rounds or n))
        return out

    def coloring_for(self, n: int, ell: int) -> Coloring:
        if self.coloring is not None:
            c = Coloring.from_rows(self.coloring)
        else:
            c = elongated_coloring(n, ell, dual=self.dual)
        return c


@dataclass(frozen=True)
class SweepPoint:
    n: int
    ell: int
    basis: str
    params: NoiseParams
    rounds: int

    def key(self) -> int:
        p = self.params
        s = f"{self.n}|{self.ell}|{self.basis}|{p.model}|{p.p_gate!r}|{p.p_meas!r}|{p.p_idle!r}|{self.rounds}"
        return zlib.crc32(s.encode())


@dataclass
class TrialStats:
    n: int
    ell: int
    basis: str
    p_gate: float
    p_meas: float
    p_idle: float
    decoder: str
    trials: int
    failures: int
    p_L: float
    ci_low: float
    ci_high: float
    seed: int
    skipped: int = 0

    def row(self) -> list:
        return [getattr(self, c) for c in CSV_COLUMNS]


def wilson_interval(failures: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    if trials <= 0:
        return 0.0, 1.0
    ph = failures / trials
    denom = 1 + z * z / trials
    centre = (ph + z * z / (2 * trials)) / denom
    half = z * math.sqrt(ph * (1 - ph) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if failures == 0 else max(0.0, centre - half)
    hi = 1.0 if failures == trials else min(1.0, centre + half)
    return lo, hi


def make_stats(point: SweepPoint, decoder: str, trials: int, failures: int, skipped: int,
               seed: int) -> TrialStats:
    lo, hi = wilson_interval(failures, trials)
    p = point.params
    return TrialStats(point.n, point.ell, point.basis, p.p_gate, p.p_meas, p.p_idle, decoder,
                      trials, failures, failures / trials if trials else 0.0, lo, hi, seed, skipped)


class PointSimulator:
    """Code, circuit, graph, decoders and per-fault signatures for one sweep point."""

    def __init__(self, point: SweepPoint, coloring: Coloring, decoders, mwpm_fallback="skip"):
        self.point = point
        code = build_code(coloring)
        report = validate(code)
        if not report.ok:
            raise ConfigError(f"coloring fails validation: {report}")
        self.circuit = build_memory_circuit(code, point.rounds, point.basis)
        build = GraphBuild.prepare(self.circuit, point.params)
        self.table = build.table
        self.graph = build_graph(self.circuit, point.params, point.basis, build=build)
        pairs, _, parity, _ = build.restricted(point.basis)
        self.pairs = pairs
        self.parity = parity
        self.decoders = {}
        for d in decoders:
            if d == UF_WEIGHTED:
                self.decoders[d] = UnionFindDecoder(self.graph, WEIGHTED)
            elif d == UF_UNWEIGHTED:
                self.decoders[d] = UnionFindDecoder(self.graph, UNWEIGHTED)
            else:
                self.decoders[d] = MatchingDecoder(self.graph, mwpm_fallback)

    def sample(self, seed: int, trial: int):
        """Sampled fault ids, syndrome defects and the simulated logical flip."""
        rng = trial_rng(seed, self.point.key(), trial)
        faults = self.table.sample(rng)
        if faults.size == 0:
            return faults, faults, 0
        hit = self.pairs[faults].ravel()
        hit = hit[hit >= 0]
        counts = np.bincount(hit, minlength=self.graph.num_detectors)
        defects = np.flatnonzero(counts & 1)
        return faults, defects, int(np.bitwise_xor.reduce(self.parity[faults]))

    def predict(self, name: str, defects) -> int | None:
        dec = self.decoders[name]
        if name == MWPM:
            corr = dec.decode_defects(defects)
            return None if corr is None else corr.logical_flip
        return dec.predict(defects)

    def trial(self, seed: int, t: int):
        faults, defects, actual = self.sample(seed, t)
        preds = {name: self.predict(name, defects) for name in self.decoders}
        record = {"faults": faults.tolist(), "defects": defects.tolist(),
                  "logical_flip": actual, "predictions": preds}
        fails = {name: None if pred is None else pred != actual for name, pred in preds.items()}
        return fails, record

    def run(self, seed: int, trials: range, trace=None) -> dict[str, tuple[int, int, int]]:
        """Per decoder: (decoded trials, failures, skipped)."""
        return _tally(self, seed, trials, trace)


class PairedSimulator:
    """Zmemory and Xmemory shots paired by trial index; a shot fails if either basis fails.

    Tallies are kept for each basis as well as for the pair, so per-basis rates
    are always reported next to the combined one.
    """

    def __init__(self, point: SweepPoint, coloring: Coloring, decoders, mwpm_fallback="skip"):
        self.point = point
        self.decoders = list(decoders)
        self.parts = [PointSimulator(replace(point, basis=b), coloring, decoders, mwpm_fallback)
                      for b in ("Z", "X")]

    def trial(self, seed: int, t: int):
        fails, record = {}, {}
        for sim in self.parts:
            f, rec = sim.trial(seed, t)
            record[sim.point.basis] = rec
            for name, v in f.items():
                fails[(sim.point.basis, name)] = v
                prev = fails.get(name, False)
                fails[name] = None if v is None or prev is None else (prev or v)
        return fails, record

    def run(self, seed: int, trials: range, trace=None):
        return _tally(self, seed, trials, trace)


def _tally(sim, seed: int, trials: range, trace=None) -> dict[str, tuple[int, int, int]]:
    tallies = {}
    for t in trials:
        fails, record = sim.trial(seed, t)
        for name, failed in fails.items():
            tal = tallies.setdefault(name, [0, 0, 0])
            if failed is None:
                tal[2] += 1
            else:
                tal[0] += 1
                tal[1] += bool(failed)
        if trace is not None:
            trace({"point": point_label(sim.point), "trial": t, **record})
    return {d: tuple(v) for d, v in tallies.items()}


def make_simulator(point: SweepPoint, coloring: Coloring, decoders, mwpm_fallback="skip"):
    cls = PairedSimulator if point.basis == PAIRED else PointSimulator
    return cls(point, coloring, decoders, mwpm_fallback)


def point_label(point: SweepPoint) -> dict:
    p = point.params
    return {"n": point.n, "ell": point.ell, "basis": point.basis, "model": p.model,
            "p_gate": p.p_gate, "p_meas": p.p_meas, "p_idle": p.p_idle, "rounds": point.rounds}


def _chunk_job(args):
    point, rows, decoders, fallback, seed, lo, hi = args
    sim = make_simulator(point, Coloring.from_rows(rows), decoders, fallback)
    return sim.run(seed, range(lo, hi))


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


def simulate_point(config: ExperimentConfig, point: SweepPoint, trace=None,
                   workers: int | None = None) -> list[TrialStats]:
    coloring = config.coloring_for(point.n, point.ell)
    workers = worker_count() if workers is None else workers
    if workers > 1 and trace is None:
        step = math.ceil(config.trials / workers)
        jobs = [(point, coloring.rows(), config.decoders, config.mwpm_fallback, config.seed,
                 lo, min(lo + step, config.trials)) for lo in range(0, config.trials, step)]
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_chunk_job, jobs))
        tallies = {key: tuple(sum(p[key][k] for p in parts) for k in range(3)) for key in parts[0]}
    else:
        sim = make_simulator(point, coloring, config.decoders, config.mwpm_fallback)
        tallies = sim.run(config.seed, range(config.trials), trace)
    rows = []
    if point.basis == PAIRED:
        for b in ("Z", "X"):
            rows += [make_stats(replace(point, basis=b), d, *tallies[(b, d)], seed=config.seed)
                     for d in config.decoders]
    rows += [make_stats(point, d, *tallies[d], seed=config.seed) for d in config.decoders]
    return rows


def format_csv(stats: list[TrialStats], header: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(CSV_COLUMNS)
    for s in stats:
        w.writerow(s.row())
    return buf.getvalue()


def read_csv(path) -> list[TrialStats]:
    out = []
    with open(path, newline="") as fh:
        for r in csv.DictReader(fh):
            out.append(TrialStats(
                n=int(r["n"]), ell=int(r["ell"]), basis=r["basis"], p_gate=float(r["p_gate"]),
                p_meas=float(r["p_meas"]), p_idle=float(r["p_idle"]), decoder=r["decoder"],
                trials=int(r["trials"]), failures=int(r["failures"]), p_L=float(r["p_L"]),
                ci_low=float(r["ci_low"]), ci_high=float(r["ci_high"]), seed=int(r["seed"])))
    return out


def mirror_path(output) -> Path:
    """JSON mirror beside the CSV; distinct from a same-stem config file."""
    p = Path(output)
    return p.with_name(p.stem + ".rows.json")


def run_experiment(config: ExperimentConfig, output: str | os.PathLike | None = None,
                   trace=None, progress=None) -> list[TrialStats]:
    """Simulate every sweep point; CSV rows are flushed after each point.

    A point whose setup fails is reported through ``progress`` and skipped so the
    remaining points still run.
    """
    output = output if output is not None else config.output
    stats: list[TrialStats] = []
    errors = []
    fh = open(output, "w", newline="") if output else None
    try:
        if fh:
            fh.write(format_csv([], header=True))
            fh.flush()
        for point in config.points():
            try:
                rows = simulate_point(config, point, trace)
            except Exception as exc:  # isolate per-point failures
                errors.append({"point": point_label(point), "error": repr(exc)})
                if progress:
                    progress(f"point {point_label(point)} failed: {exc!r}")
                continue
            stats.extend(rows)
            if fh:
                fh.write(format_csv(rows, header=False))
                fh.flush()
            if progress:
                for r in rows:
                    progress(f"n={r.n} ell={r.ell} {r.basis} p=({r.p_gate:g},{r.p_meas:g},{r.p_idle:g}) "
                             f"{r.decoder}: {r.failures}/{r.trials} skipped={r.skipped}")
    finally:
        if fh:
            fh.close()
    if output:
        mirror = {
            "schema_version": SCHEMA_VERSION,
            "config": config.to_json(),
            "rows": [asdict(s) for s in stats],
            "errors": errors,
        }
        mirror_path(output).write_text(json.dumps(mirror, indent=1) + "\n")
    return stats


# --- threshold estimation ---------------------------------------------------

@dataclass
class ThresholdEstimate:
    decoder: str
    basis: str
    sizes: tuple[int, int]
    crossing: float | None
    ci_low: float | None
    ci_high: float | None
    bootstrap_no_crossing: float
    message: str = ""

    @property
    def found(self) -> bool:
        return self.crossing is not None


def _log_rate(failures: np.ndarray, trials: np.ndarray) -> np.ndarray:
    # half a failure keeps zero-count points finite
    return np.log(np.maximum(failures, 0.5) / trials)


def _crossing(p: np.ndarray, la: np.ndarray, lb: np.ndarray) -> float | None:
    """Where the larger size's log rate ``lb`` last rises through ``la``.

    Taking the last negative-to-nonnegative change skips spurious sign flips
    among the low-p points, where failure counts are small.
    """
    diff = lb - la
    neg = np.flatnonzero(diff < 0)
    if not neg.size or neg[-1] == len(p) - 1:
        return None
    k = int(neg[-1])
    t = -diff[k] / (diff[k + 1] - diff[k])
    return float(p[k] + t * (p[k + 1] - p[k]))


def estimate_threshold(stats: list[TrialStats], decoder: str | None = None, basis: str | None = None,
                       x: str = "p_gate", bootstrap: int = 1000, seed: int = 0) -> ThresholdEstimate:
    rows = [s for s in stats if (decoder is None or s.decoder == decoder)
            and (basis is None or s.basis == basis)]
    decoder = decoder or (rows[0].decoder if rows else "")
    basis = basis or (rows[0].basis if rows else "")
    sizes = sorted({s.n for s in rows})
    if len(sizes) < 2:
        return ThresholdEstimate(decoder, basis, tuple(sizes + [0, 0])[:2], None, None, None, 1.0,
                                 "need at least two sizes")
    a, b = sizes[-2], sizes[-1]
    by = {(s.n, getattr(s, x)): s for s in rows}
    grid = sorted({getattr(s, x) for s in rows if s.n == a} & {getattr(s, x) for s in rows if s.n == b})
    p = np.array(grid)
    fa = np.array([by[(a, q)].failures for q in grid], dtype=float)
    ta = np.array([by[(a, q)].trials for q in grid], dtype=float)
    fb = np.array([by[(b, q)].failures for q in grid], dtype=float)
    tb = np.array([by[(b, q)].trials for q in grid], dtype=float)
    cross = _crossing(p, _log_rate(fa, ta), _log_rate(fb, tb)) if len(grid) >= 2 else None
    rng = np.random.default_rng(seed)
    samples = []
    for _ in range(bootstrap):
        ra = rng.binomial(ta.astype(int), fa / ta)
        rb = rng.binomial(tb.astype(int), fb / tb)
        c = _crossing(p, _log_rate(ra, ta), _log_rate(rb, tb))
        if c is not None:
            samples.append(c)
    miss = 1.0 - len(samples) / bootstrap if bootstrap else 0.0
    if cross is None:
        return ThresholdEstimate(decoder, basis, (a, b), None, None, None, miss,
                                 f"no crossing in range [{p.min() if len(p) else 'nan'}, "
                                 f"{p.max() if len(p) else 'nan'}]")
    lo, hi = (np.percentile(samples, [2.5, 97.5]) if samples else (cross, cross))
    return ThresholdEstimate(decoder, basis, (a, b), cross, float(lo), float(hi), miss)


# --- elongation comparison --------------------------------------------------

@dataclass
class CrossoverReport:
    n: int
    basis: str
    decoder: str
    crossover: float | None  # smallest p_idle where some ell > 2 beats ell = 2
    winner: int | None
    surface_best_at_min: bool  # ell = 2 Wilson-separated best at the smallest p_idle
    p_min: float


def compare_elongations(stats: list[TrialStats], decoder: str | None = None,
                        basis: str | None = None, baseline: int = 2) -> list[CrossoverReport]:
    rows = [s for s in stats if (decoder is None or s.decoder == decoder)
            and (basis is None or s.basis == basis)]
    out = []
    for n, b, dec in sorted({(s.n, s.basis, s.decoder) for s in rows}):
        sub = [s for s in rows if s.n == n and s.basis == b and s.decoder == dec]
        grid = sorted({s.p_idle for s in sub})
        base = {s.p_idle: s for s in sub if s.ell == baseline}
        others = sorted({s.ell for s in sub if s.ell > baseline})
        by = {(s.ell, s.p_idle): s for s in sub}
        crossover, winner = None, None
        for pi in grid:
            if pi not in base:
                continue
            beat = [e for e in others if (e, pi) in by and by[(e, pi)].ci_high < base[pi].ci_low]
            if beat:
                crossover = pi
                winner = min(beat, key=lambda e: by[(e, pi)].p_L)
                break
        p0 = grid[0] if grid else float("nan")
        best = p0 in base and all(
            base[p0].ci_high < by[(e, p0)].ci_low for e in others if (e, p0) in by)
        out.append(CrossoverReport(n, b, dec, crossover, winner, bool(best), p0))
    return out


def expected_rows(config: ExperimentConfig) -> int:
    per_point = [3 if p.basis == PAIRED else 1 for p in config.points()]
    return sum(per_point) * len(config.decoders)
