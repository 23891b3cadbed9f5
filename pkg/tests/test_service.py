import base64
from fastapi.testclient import TestClient

from pine.service import app

client = TestClient(app)


def test_healthz():
    resp = client.get("/healthz")
    assert resp.status_code == 200
    assert resp.json()["status"] == "ok"


def test_params_statistical():
    resp = client.post("/params", json={
        "d": 10**6, "b_bits": 30, "field": "f64",
        "rho_bits": 50, "delta_bits": 50})
    assert resp.status_code == 200
    out = resp.json()
    assert (out["t"], out["r"], out["tau"]) == (1, 51, 1.0)
    assert abs(out["alpha"] - 7.99996948) < 1e-6
    assert out["sizes"]["msg1"] == 2 * 10**6 * 51


def test_params_dzk():
    resp = client.post("/params", json={
        "variant": "dzk", "d": 100, "norm_bound_sq": 10000,
        "eps": 1.0, "delta_bits": 3, "rho_bits": 50})
    assert resp.status_code == 200
    out = resp.json()
    assert out["min_modulus"] > 4 * 10000
    assert "sizes" in out


def test_params_infeasible_409():
    resp = client.post("/params", json={
        "d": 100, "b_bits": 30, "field": "custom", "modulus": 2**31 - 1,
        "rho_bits": 50, "delta_bits": 50})
    assert resp.status_code == 409
    assert resp.json()["detail"]["error"]["code"] == "infeasible"


def test_params_usage_errors():
    resp = client.post("/params", json={"d": 100, "field": "f64"})
    assert resp.status_code == 400  # no bound given
    resp = client.post("/params", json={"variant": "dzk", "d": 100, "b_bits": 10})
    assert resp.status_code == 400  # dzk without eps


def test_prove_verify_roundtrip():
    vec = list(range(-10, 10))
    resp = client.post("/prove", json={"vector": vec, "norm_bound_sq": 2000,
                                       "seed": 7})
    assert resp.status_code == 200
    proof_b64 = resp.json()["proof_b64"]
    check = client.post("/verify", json={"proof_b64": proof_b64})
    assert check.status_code == 200
    assert check.json() == {"accept": True, "cause": "accept", "verifier": "both"}
    # per-verifier local phase
    for j in ("0", "1"):
        local = client.post("/verify", json={"proof_b64": proof_b64,
                                             "verifier": j})
        assert local.json()["accept"] and local.json()["needs_exchange"]
    # tampered byte rejects
    blob = bytearray(base64.b64decode(proof_b64))
    blob[len(blob) // 2] ^= 0x40
    bad = client.post("/verify", json={
        "proof_b64": base64.b64encode(bytes(blob)).decode()})
    assert bad.status_code == 200 and not bad.json()["accept"]


def test_prove_verify_dzk():
    vec = [3, -2, 1, 0, 4, -1, 2, 2]
    resp = client.post("/prove", json={
        "variant": "dzk", "vector": vec, "norm_bound_sq": 100,
        "eps": 1.0, "delta_bits": 2, "seed": 9})
    assert resp.status_code == 200
    check = client.post("/verify", json={"proof_b64": resp.json()["proof_b64"]})
    assert check.json()["accept"]


def test_verify_garbage_400():
    resp = client.post("/verify", json={"proof_b64": "AAAA"})
    assert resp.status_code == 400


def test_simulate_endpoint():
    resp = client.post("/simulate", json={
        "strategy": "over_norm", "trials": 4, "d": 16, "b_bits": 8,
        "seed": 3, "strategy_kwargs": {"delta_b": 1}})
    assert resp.status_code == 200
    out = resp.json()
    assert out["accepts"] == 0 and out["trials"] == 4
    assert "csv" in out


def test_bench_intro():
    resp = client.post("/bench", json={"table": "intro"})
    assert resp.status_code == 200
    out = resp.json()
    stat = dict(zip(out["rows"]["dimensions"], out["rows"]["statistical_pct"]))
    assert abs(stat[10**6] - 0.49) <= 0.05
    assert "d=10^7" in out["text"]


def test_bench_single():
    resp = client.post("/bench", json={"table": "single", "d": 10**5,
                                       "b_bits": 30})
    assert resp.status_code == 200
    report = resp.json()["report"]
    assert report["baseline_bits"] == 64 * 10**5
