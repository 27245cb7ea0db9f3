import json
import subprocess
import sys

import pytest

from compass_ft.cli import main
from compass_ft.harness import CSV_COLUMNS, read_csv

from .conftest import DATA


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_build_code(tmp_path, capsys):
    code, out, err = run(["build-code", "--n", "4", "--ell", "3"], capsys)
    assert code == 0 and "valid: True" in err
    d = json.loads(out)
    assert d["n"] == 4
    path = tmp_path / "c.json"
    path.write_text(out)
    code, out2, _ = run(["build-code", "--code", str(path)], capsys)
    assert code == 0 and json.loads(out2) == d


def test_build_code_rejects_bad_coloring(capsys):
    code, _, err = run(["build-code", "--coloring", "RX,RR"], capsys)
    assert code == 1 and "CodeError" in err


def test_gen_circuit_matches_golden(capsys):
    code, out, _ = run(["gen-circuit", "--n", "3", "--ell", "2", "--rounds", "2"], capsys)
    assert code == 0
    assert out == (DATA / "circuit_n3_ell2_r2_Z.txt").read_text()


def test_config_file_supplies_defaults(tmp_path, capsys):
    cfg = tmp_path / "g.json"
    cfg.write_text(json.dumps({"n": 3, "ell": 2, "rounds": 2}))
    _, out, _ = run(["gen-circuit", "--config", str(cfg)], capsys)
    assert out == (DATA / "circuit_n3_ell2_r2_Z.txt").read_text()
    cfg.write_text(json.dumps({"n": 3, "colour": "x"}))
    with pytest.raises(SystemExit):
        main(["gen-circuit", "--config", str(cfg)])


def test_graph_then_decode(tmp_path, capsys):
    gpath = tmp_path / "g.json"
    code, _, err = run(["build-graph", "--n", "3", "--p", "0.01", "--out", str(gpath)], capsys)
    assert code == 0 and "detectors" in err
    nd = len(json.loads(gpath.read_text())["nodes"])
    syn = tmp_path / "s.txt"
    syn.write_text("# comment\n" + "0" * nd + "\n" + "1" + "0" * (nd - 1) + "\n")
    for extra in ([], ["--decoder", "mwpm"], ["--mode", "unweighted"]):
        code, out, _ = run(["decode", "--graph", str(gpath), "--syndromes", str(syn)] + extra, capsys)
        recs = [json.loads(x) for x in out.splitlines()]
        assert code == 0 and [r["index"] for r in recs] == [0, 1]
        assert recs[0]["edges"] == [] and len(recs[1]["edges"]) >= 1
    syn.write_text("01\n")
    code, _, err = run(["decode", "--graph", str(gpath), "--syndromes", str(syn)], capsys)
    assert code == 2 and "expected" in err


def test_fig3_model_rejects_idle(capsys):
    code, _, err = run(["build-graph", "--n", "3", "--p", "0.01", "--p-idle", "0.001"], capsys)
    assert code == 2


def test_run_threshold_compare(tmp_path, capsys):
    csv_path = tmp_path / "r.csv"
    code, _, _ = run(["run", "--n", "3,4", "--p", "0.01,0.03", "--trials", "200", "--seed", "3",
                      "--decoders", "uf_weighted,mwpm", "--out", str(csv_path)], capsys)
    assert code == 0
    assert csv_path.read_text().splitlines()[0].split(",") == CSV_COLUMNS
    assert len(read_csv(csv_path)) == 8
    code, out, _ = run(["threshold", "--csv", str(csv_path), "--bootstrap", "20"], capsys)
    reps = json.loads(out)
    assert code == 0 and {r["decoder"] for r in reps} == {"uf_weighted", "mwpm"}
    code, out, _ = run(["compare", "--csv", str(csv_path)], capsys)
    assert code == 0 and len(json.loads(out)) == 4


def test_run_with_config_and_trace(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"sizes": [3], "p_gate": [0.01], "model": "biased", "p_idle": [0.002],
                               "bases": ["ZX"], "trials": 10}))
    trace = tmp_path / "t.jsonl"
    code, out, _ = run(["run", "--config", str(cfg), "--trace", str(trace)], capsys)
    assert code == 0
    assert [r.split(",")[2] for r in out.splitlines()[1:]] == ["Z", "X", "ZX"]
    assert len(trace.read_text().splitlines()) == 10


def test_run_config_errors(tmp_path, capsys):
    code, _, err = run(["run", "--n", "3"], capsys)
    assert code == 2
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"sizes": [3], "p_gate": [0.01], "bogus": 1}))
    code, _, err = run(["run", "--config", str(cfg)], capsys)
    assert code == 2 and "bogus" in err


def test_console_script_entry():
    out = subprocess.run([sys.executable, "-m", "compass_ft.cli", "build-code", "--n", "3"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and json.loads(out.stdout)["n"] == 3
