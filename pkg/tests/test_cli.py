import json

import numpy as np
import pytest
from click.testing import CliRunner

from pine.cli import main
from pine.vectors import VectorFile, write_vector_file


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def vec_file(tmp_path):
    path = tmp_path / "vec.txt"
    write_vector_file(path, VectorFile(np.arange(-8, 8, dtype=np.int64), 400, 0))
    return path


def test_params_command(runner):
    result = runner.invoke(main, ["params", "--d", "1000000", "--b-bits", "30",
                                  "--field", "f64", "--rho-bits", "50",
                                  "--delta-bits", "50"])
    assert result.exit_code == 0, result.output
    out = json.loads(result.output)
    assert (out["r"], out["tau"], out["t"]) == (51, 1.0, 1)


def test_params_infeasible_exit_3(runner):
    result = runner.invoke(main, ["params", "--d", "100", "--b-bits", "30",
                                  "--field", "custom", "--modulus",
                                  str(2**31 - 1)])
    assert result.exit_code == 3


def test_usage_error_exit_2(runner):
    result = runner.invoke(main, ["params"])  # missing --d
    assert result.exit_code == 2


def test_prove_verify_roundtrip(runner, vec_file, tmp_path):
    proof = tmp_path / "proof.pine"
    result = runner.invoke(main, ["prove", "--input", str(vec_file),
                                  "--out", str(proof), "--seed", "5"])
    assert result.exit_code == 0, result.output
    assert proof.exists()
    for verifier in ("both", "0", "1"):
        check = runner.invoke(main, ["verify", "--proof", str(proof),
                                     "--verifier", verifier])
        assert check.exit_code == 0, check.output
        assert json.loads(check.output)["accept"]


def test_verify_tampered_exit_1(runner, vec_file, tmp_path):
    proof = tmp_path / "proof.pine"
    assert runner.invoke(main, ["prove", "--input", str(vec_file),
                                "--out", str(proof), "--seed", "5"]).exit_code == 0
    blob = bytearray(proof.read_bytes())
    blob[len(blob) // 3] ^= 0x10
    bad = tmp_path / "bad.pine"
    bad.write_bytes(bytes(blob))
    check = runner.invoke(main, ["verify", "--proof", str(bad)])
    assert check.exit_code == 1
    assert not json.loads(check.output)["accept"]


def test_prove_dzk_variant(runner, vec_file, tmp_path):
    proof = tmp_path / "dzk.pine"
    result = runner.invoke(main, ["prove", "--input", str(vec_file),
                                  "--out", str(proof), "--variant", "dzk",
                                  "--eps", "1.0", "--delta-bits", "2",
                                  "--seed", "1"])
    assert result.exit_code == 0, result.output
    check = runner.invoke(main, ["verify", "--proof", str(proof)])
    assert check.exit_code == 0


def test_float_input_encoding(runner, tmp_path):
    floats = tmp_path / "floats.txt"
    floats.write_text("0.5 -0.25 0.1 0.05\n")
    proof = tmp_path / "f.pine"
    result = runner.invoke(main, ["prove", "--input", str(floats),
                                  "--out", str(proof), "--float-input",
                                  "--precision", "10", "--seed", "2"])
    assert result.exit_code == 0, result.output
    out = json.loads(result.output)
    assert out["norm_bound_sq"] == 2**20
    assert runner.invoke(main, ["verify", "--proof", str(proof)]).exit_code == 0


def test_seed_env_fallback(runner, vec_file, tmp_path, monkeypatch):
    monkeypatch.setenv("PINE_SEED", "77")
    p1 = tmp_path / "a.pine"
    p2 = tmp_path / "b.pine"
    assert runner.invoke(main, ["prove", "--input", str(vec_file),
                                "--out", str(p1)]).exit_code == 0
    assert runner.invoke(main, ["prove", "--input", str(vec_file),
                                "--out", str(p2)]).exit_code == 0
    assert p1.read_bytes() == p2.read_bytes()


def test_simulate_command(runner):
    result = runner.invoke(main, ["simulate", "--strategy", "over_norm",
                                  "--trials", "3", "--d", "16", "--b-bits", "8",
                                  "--kwarg", "delta_b=1", "--seed", "4"])
    assert result.exit_code == 0, result.output
    out = json.loads(result.output)
    assert out["accepts"] == 0


def test_bench_command_deterministic(runner):
    a = runner.invoke(main, ["bench", "--table", "intro"])
    b = runner.invoke(main, ["bench", "--table", "intro"])
    assert a.exit_code == 0 and a.output == b.output
    assert "statistical ZK, overhead" in a.output
