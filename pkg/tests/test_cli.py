import argparse
import io
import json
import subprocess
import sys

import pytest

from vdp.cli import main, parse_delta


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


@pytest.fixture(autouse=True)
def toy_group(monkeypatch):
    monkeypatch.setenv("VDP_GROUP", "toy61")


# ---------------------------------------------------------------- params
def test_params_epsilon():
    code, out = run("params", "--epsilon", "1.0", "--delta", "9.765625e-4")
    assert code == 0 and "n_b     = 763" in out


def test_params_coins():
    code, out = run("params", "--coins", "1024", "--delta", "9.765625e-4")
    assert code == 0 and "epsilon = 0.8629" in out


def test_params_too_few_coins(capsys):
    code, _ = run("params", "--epsilon", "100", "--delta", "0.5")
    assert code == 2 and "n_b > 30" in capsys.readouterr().err


def test_params_needs_input():
    assert run("params")[0] == 2


@pytest.mark.parametrize("text,value", [("2^-10", 2 ** -10), ("2**-10", 2 ** -10), ("0.001", 0.001),
                                        ("9.765625e-4", 2 ** -10), (" 2 ^ -3 ", 0.125)])
def test_delta_syntax(text, value):
    assert parse_delta(text) == value


@pytest.mark.parametrize("text", ["2^10", "abc", "0", "1", "-0.1"])
def test_bad_delta(text):
    with pytest.raises(argparse.ArgumentTypeError):
        parse_delta(text)
    assert run("params", "--epsilon", "1", "--delta", text)[0] == 2


# ---------------------------------------------------------------- run / verify
def test_run_defaults_and_reverify(tmp_path):
    path = tmp_path / "t.json"
    code, out = run("run", "--seed", "3", "--out", str(path))
    assert code == 0 and "verdict: accepted" in out
    doc = json.loads(path.read_text())
    assert (doc["header"]["K"], doc["header"]["n"], doc["header"]["M"]) == (2, 100, 1)
    assert run("verify", "--in", str(path))[0] == 0


def test_run_same_seed_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run("run", "--seed", "9", "--n", "10", "--coins", "31", "--out", str(a))
    run("run", "--seed", "9", "--n", "10", "--coins", "31", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_run_adversary_exit_3():
    code, out = run("run", "--seed", "1", "--n", "10", "--coins", "31", "--adversary", "prover1:tamper_output")
    assert code == 3 and "blame: prover:1" in out


def test_run_bad_adversary_exit_2():
    assert run("run", "--adversary", "prover1:fly")[0] == 2


def test_verify_bit_flip_exit_3(tmp_path):
    path = tmp_path / "t.json"
    run("run", "--seed", "4", "--n", "5", "--coins", "31", "--out", str(path))
    doc = json.loads(path.read_text())
    body = doc["messages"][-1]["body"]
    body["y"] = body["y"][:-3] + ("B" if body["y"][-3] != "B" else "C") + body["y"][-2:]
    path.write_text(json.dumps(doc))
    code, out = run("verify", "--in", str(path))
    assert code == 3 and "rejected at output_check" in out


def test_verify_truncated_exit_2(tmp_path):
    path = tmp_path / "t.json"
    run("run", "--seed", "4", "--n", "5", "--coins", "31", "--out", str(path))
    path.write_bytes(path.read_bytes()[:200])
    assert run("verify", "--in", str(path))[0] == 2
    assert run("verify", "--in", str(tmp_path / "missing.json"))[0] == 2


def test_histogram_run():
    code, out = run("run", "--seed", "2", "--n", "8", "--bins", "3", "--coins", "31")
    assert code == 0 and out.count("estimate") == 3


# ---------------------------------------------------------------- config file
def test_config_overrides_flags(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"k": 1, "n": 4, "coins": 31, "delta": "2^-8"}))
    out_path = tmp_path / "t.json"
    code, _ = run("--config", str(cfg), "run", "--k", "3", "--seed", "1", "--out", str(out_path))
    assert code == 0
    header = json.loads(out_path.read_text())["header"]
    assert header["K"] == 1 and header["n_b"] == 31 and header["delta"] == 2 ** -8


@pytest.mark.parametrize("content", ['{"nope": 1}', '{"k": 0}', '{"group": "p256"}', "[1]", "{"])
def test_config_errors(tmp_path, content):
    cfg = tmp_path / "c.json"
    cfg.write_text(content)
    assert run("--config", str(cfg), "run")[0] == 2


# ---------------------------------------------------------------- bench / audit / attacks
def test_bench_budget(tmp_path):
    path = tmp_path / "b.csv"
    code, out = run("bench", "--group", "toy61", "--coins", "64", "--n", "100", "--budget", "1",
                    "--out", str(path))
    assert code == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "phase,n,n_b,M,K,mean_ms,std_ms"
    assert [l.split(",")[0] for l in lines[1:]] == ["sigma_prove", "sigma_verify", "morra", "aggregate", "check"]


def test_bench_sweep_coins_shape():
    code, out = run("bench", "--group", "toy61", "--sweep", "coins", "--n", "10", "--reps", "1",
                    "--phases", "sigma_prove,sigma_verify")
    assert code == 0
    rows = out.splitlines()[1:]
    assert [int(r.split(",")[2]) for r in rows[::2]] == [1024, 2048, 4096, 8192, 16384]


def test_bench_bad_phase():
    assert run("bench", "--phases", "sigma_prove,lunch")[0] == 2


def test_audit_command(tmp_path):
    path = tmp_path / "a.json"
    code, out = run("audit", "--coins", "100", "--trials", "20000", "--mechanism", "ideal", "--out", str(path))
    assert code == 0 and "PASS" in out
    report = json.loads(path.read_text())
    assert report["passed"] and report["epsilon_hat"] <= report["epsilon"]
    assert sum(report["histogram"]["X"].values()) == 20000


def test_audit_too_few_trials():
    assert run("audit", "--coins", "100", "--trials", "10")[0] == 2


def test_attacks_command():
    code, out = run("attacks", "--trials", "2")
    assert code == 0 and "ignore undetected" in out and out.count("detected 2/2") == 5


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "vdp.cli", "params", "--coins", "100"], capture_output=True,
                         text=True)
    assert res.returncode == 0 and "2.7613" in res.stdout
