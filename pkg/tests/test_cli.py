import json
import subprocess
import sys
import time

import pytest

from oscidecay.cli import build_parser, main, resolve_config

TINY_NORM = ["norm", "--lambda-min", "10", "--lambda-max", "20", "--count", "5", "--node-cap", "100"]


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize(
    "p1, p2, tag, a",
    [
        ("1,0", "0,0,1", "degenerate_c", None),
        ("1,0", "2,0,0", "degenerate_b", 2.0),
        ("1,0", "1,0,-1", "non_degenerate", None),
        # swapping u and v gives u t**2 + v**2 t
        ("0,1", "1,0,0", "degenerate_c", None),
        ("1,0", "0,1,0", "non_degenerate", None),
    ],
)
def test_classify(p1, p2, tag, a, capsys):
    code, out, _ = run(["classify", "--p1", p1, "--p2", p2], capsys)
    doc = json.loads(out)
    assert code == 0
    assert doc["class"]["tag"] == tag
    assert doc["class"].get("a") == a


def test_classify_named_phase(capsys):
    code, out, _ = run(["classify", "--phase", "hyperbolic"], capsys)
    assert code == 0 and json.loads(out)["p2"] == [1.0, 0.0, -1.0]


@pytest.mark.parametrize(
    "argv, message",
    [
        (["classify", "--p1", "0,0", "--p2", "0,0,1"], "P1 must be non-zero"),
        (["classify", "--p1", "1,0", "--p2", "0,0,0"], "P2 must be non-zero"),
        (["classify", "--p1", "1,0,3", "--p2", "0,0,1"], "two"),
        (["classify", "--p1", "1,0"], "--p2"),
        (["witness", "--lambda-min", "100", "--lambda-max", "100"], "lambda"),
        (["witness", "--count", "4"], "at least 5"),
        (["witness", "--eps", "0.7"], "eps"),
        (["norm", "--phase", "case-c", "--p1", "1,0", "--p2", "0,0,1"], "either"),
    ],
)
def test_validation_errors(argv, message, capsys, tmp_path):
    code, _, err = run(argv + (["--out", str(tmp_path)] if argv[0] != "classify" else []), capsys)
    doc = json.loads(err.strip().splitlines()[-1])
    assert code == 2
    assert doc["error"] == "validation" and message in doc["message"]


def test_norm_smoke_run(tmp_path, capsys):
    out = tmp_path / "n"
    start = time.perf_counter()
    code, stdout, _ = run(TINY_NORM + ["--out", str(out)], capsys)
    elapsed = time.perf_counter() - start
    assert code == 0 and elapsed < 1.0
    report = json.loads(stdout)
    assert report["pure_power"]["slope"] == pytest.approx(-0.375, abs=0.01)
    assert {p.name for p in out.iterdir()} == {"config.json", "norm.csv", "fit.json", "norm.svg"}
    header = (out / "norm.csv").read_text().splitlines()[0]
    assert header == "lambda,quantity,mode,iterations,residual,n_t,n_uv,method,window,edge_mass,seed,error"


def test_config_replay_is_byte_identical(tmp_path, capsys):
    first, second = tmp_path / "a", tmp_path / "b"
    assert run(TINY_NORM + ["--out", str(first), "--seed", "17"], capsys)[0] == 0
    assert run(["norm", "--config", str(first / "config.json"), "--out", str(second)], capsys)[0] == 0
    assert (first / "norm.csv").read_bytes() == (second / "norm.csv").read_bytes()
    assert json.loads((second / "config.json").read_text())["seed"] == 17


def test_flags_override_config(tmp_path, capsys):
    first = tmp_path / "a"
    run(TINY_NORM + ["--out", str(first)], capsys)
    args = build_parser().parse_args(["norm", "--config", str(first / "config.json"), "--count", "6"])
    cfg = resolve_config(args)
    assert cfg.count == 6 and cfg.node_cap == 100


def test_config_for_other_command_rejected(tmp_path, capsys):
    run(TINY_NORM + ["--out", str(tmp_path)], capsys)
    code, _, err = run(["witness", "--config", str(tmp_path / "config.json")], capsys)
    assert code == 2 and "config is for" in err


def test_threads_from_environment(monkeypatch):
    monkeypatch.setenv("OSCIDECAY_THREADS", "3")
    assert resolve_config(build_parser().parse_args(["norm"])).threads == 3
    assert resolve_config(build_parser().parse_args(["norm", "--threads", "2"])).threads == 2
    monkeypatch.setenv("OSCIDECAY_THREADS", "many")
    with pytest.raises(Exception, match="OSCIDECAY_THREADS"):
        resolve_config(build_parser().parse_args(["norm"]))


def test_non_convergence_exit_code(tmp_path, capsys):
    out = tmp_path / "n"
    code, _, _ = run(TINY_NORM + ["--max-iter", "2", "--tol", "1e-14", "--out", str(out)], capsys)
    assert code == 3
    text = (out / "norm.csv").read_text()
    assert "NonConvergenceError" in text
    report = json.loads((out / "fit.json").read_text())
    assert report["rows_failed"] == 5 and "error" in report["pure_power"]


def test_witness_norm_f_mode(tmp_path, capsys):
    out = tmp_path / "w"
    code, stdout, _ = run(["witness", "--mode", "norm_f", "--eps", "0.05", "--out", str(out)], capsys)
    assert code == 0
    assert json.loads(stdout)["slope"] == pytest.approx(-0.25, abs=1e-9)
    assert (out / "witness.csv").read_text().splitlines()[0] == "lambda,quantity,mode,norm_f,grid_nt,eps,error"


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "oscidecay", "classify", "--phase", "case-c"],
        capture_output=True, text=True, cwd=tmp_path, timeout=60,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["class"]["tag"] == "degenerate_c"
