"""Command line front end: a thin client of the FastAPI service.

Without ``--server`` the commands call the service in-process; with it
they talk to a running ``pine serve`` instance over HTTP.  Exit codes:
0 accept/success, 1 reject, 2 usage error, 3 infeasible parameters.
"""

from __future__ import annotations

import base64
import json
import os
import sys
from pathlib import Path

import click

EXIT_REJECT = 1
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3


def _client(server: str | None):
    if server:
        import httpx

        return httpx.Client(base_url=server, timeout=None)
    from fastapi.testclient import TestClient

    from .service import app

    return TestClient(app)


def _post(server: str | None, path: str, payload: dict) -> dict:
    with _client(server) as client:
        resp = client.post(path, json=payload)
    if resp.status_code == 200:
        return resp.json()
    try:
        detail = resp.json().get("detail", {})
    except Exception:
        detail = {"error": {"code": "http", "detail": resp.text}}
    err = detail.get("error", detail) if isinstance(detail, dict) else {"detail": detail}
    print(json.dumps({"error": err}), file=sys.stderr)
    code = err.get("code") if isinstance(err, dict) else None
    sys.exit(EXIT_INFEASIBLE if code == "infeasible" else EXIT_USAGE)


def _seed_option(seed: int | None) -> int:
    if seed is not None:
        return seed
    env = os.environ.get("PINE_SEED")
    return int(env) if env else 0


_field_opt = click.option("--field", type=click.Choice(["f64", "f128", "custom"]),
                          default="f64", show_default=True)
_modulus_opt = click.option("--modulus", type=int, default=None,
                            help="prime modulus when --field custom")
_rho_opt = click.option("--rho-bits", type=float, default=50, show_default=True,
                        help="target soundness error 2^-rho_bits")
_delta_opt = click.option("--delta-bits", type=float, default=50, show_default=True,
                          help="target completeness/ZK error 2^-delta_bits")
_server_opt = click.option("--server", default=None,
                           help="base URL of a running service (default: in-process)")


@click.group()
def main() -> None:
    """Zero-knowledge Euclidean-norm verification for secret-shared vectors."""


@main.command()
@click.option("--d", "dimension", type=int, required=True)
@click.option("--b-bits", type=int, default=None, help="squared-norm bound as B = 2^b_bits")
@click.option("--norm-bound-sq", type=int, default=None)
@click.option("--variant", type=click.Choice(["statistical", "dzk"]),
              default="statistical", show_default=True)
@click.option("--eps", type=float, default=None, help="dzk privacy parameter")
@_field_opt
@_modulus_opt
@_rho_opt
@_delta_opt
@_server_opt
def params(dimension, b_bits, norm_bound_sq, variant, eps, field, modulus,
           rho_bits, delta_bits, server):
    """Select protocol parameters and print them with message sizes."""
    out = _post(server, "/params", {
        "variant": variant, "d": dimension, "b_bits": b_bits,
        "norm_bound_sq": norm_bound_sq, "field": field, "modulus": modulus,
        "rho_bits": rho_bits, "delta_bits": delta_bits, "eps": eps})
    click.echo(json.dumps(out, indent=2))


@main.command()
@click.option("--input", "input_path", type=click.Path(exists=True), required=True,
              help="vector file (text or binary)")
@click.option("--out", "out_path", type=click.Path(), required=True,
              help="where to write the proof bundle")
@click.option("--variant", type=click.Choice(["statistical", "dzk"]),
              default="statistical", show_default=True)
@click.option("--eps", type=float, default=None)
@click.option("--float-input", is_flag=True,
              help="treat the file as unit-norm floats, fixed-point encode them")
@click.option("--precision", type=int, default=15, show_default=True,
              help="fixed-point bits for --float-input")
@click.option("--seed", type=int, default=None, help="defaults to $PINE_SEED or 0")
@_field_opt
@_modulus_opt
@_rho_opt
@_delta_opt
@_server_opt
def prove(input_path, out_path, variant, eps, float_input, precision, seed,
          field, modulus, rho_bits, delta_bits, server):
    """Read a vector file and write a one-shot proof bundle."""
    from .vectors import encode_unit_floats, read_vector_file

    if float_input:
        values = [float(t) for t in Path(input_path).read_text().split()]
        vec = encode_unit_floats(values, precision)
    else:
        vec = read_vector_file(input_path)
    out = _post(server, "/prove", {
        "variant": variant, "vector": [int(v) for v in vec.entries],
        "norm_bound_sq": vec.norm_bound_sq, "field": field, "modulus": modulus,
        "rho_bits": rho_bits, "delta_bits": delta_bits, "eps": eps,
        "seed": _seed_option(seed)})
    Path(out_path).write_bytes(base64.b64decode(out["proof_b64"]))
    click.echo(json.dumps({"written": out_path, "bytes": out["proof_bytes"],
                           "d": out["d"], "norm_bound_sq": out["norm_bound_sq"]}))


@main.command()
@click.option("--proof", "proof_path", type=click.Path(exists=True), required=True)
@click.option("--verifier", type=click.Choice(["both", "0", "1"]), default="both",
              show_default=True)
@_rho_opt
@_delta_opt
@_server_opt
def verify(proof_path, verifier, rho_bits, delta_bits, server):
    """Check a proof bundle; exit 0 on accept, 1 on reject."""
    blob = Path(proof_path).read_bytes()
    out = _post(server, "/verify", {
        "proof_b64": base64.b64encode(blob).decode(), "verifier": verifier,
        "rho_bits": rho_bits, "delta_bits": delta_bits})
    click.echo(json.dumps(out))
    if not out["accept"]:
        sys.exit(EXIT_REJECT)


@main.command()
@click.option("--variant", type=click.Choice(["statistical", "dzk"]),
              default="statistical", show_default=True)
@click.option("--strategy", default="honest", show_default=True,
              help="honest | over_norm | wraparound_vector | bit_cheater | fs_tamper | coin")
@click.option("--trials", type=int, default=100, show_default=True)
@click.option("--d", "dimension", type=int, default=100, show_default=True)
@click.option("--b-bits", type=int, default=10, show_default=True)
@click.option("--eps", type=float, default=None)
@click.option("--mode", type=click.Choice(["fs", "interactive"]), default="fs",
              show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True,
              help="parallel worker processes for the trials")
@click.option("--seed", type=int, default=None)
@click.option("--kwarg", "kwargs_list", multiple=True,
              help="strategy knob as key=value (repeatable)")
@_field_opt
@_modulus_opt
@_rho_opt
@_delta_opt
@_server_opt
def simulate(variant, strategy, trials, dimension, b_bits, eps, mode, jobs, seed,
             kwargs_list, field, modulus, rho_bits, delta_bits, server):
    """Run a Monte-Carlo campaign and print the acceptance rate + CSV row."""
    kw = {}
    for item in kwargs_list:
        key, _, value = item.partition("=")
        try:
            kw[key] = int(value)
        except ValueError:
            kw[key] = value
    out = _post(server, "/simulate", {
        "variant": variant, "strategy": strategy, "trials": trials,
        "d": dimension, "b_bits": b_bits, "field": field, "modulus": modulus,
        "rho_bits": rho_bits, "delta_bits": delta_bits, "eps": eps,
        "seed": _seed_option(seed), "mode": mode, "jobs": jobs,
        "strategy_kwargs": kw})
    click.echo(json.dumps(out, indent=2))


@main.command()
@click.option("--table", type=click.Choice(["intro", "single"]), default="intro",
              show_default=True)
@click.option("--variant", type=click.Choice(["statistical", "dzk"]),
              default="statistical", show_default=True)
@click.option("--d", "dimension", type=int, default=None,
              help="dimension for --table single")
@click.option("--b-bits", type=int, default=30, show_default=True)
@click.option("--eps", type=float, default=0.1, show_default=True)
@click.option("--seed", type=int, default=None)
@_field_opt
@_modulus_opt
@_rho_opt
@_delta_opt
@_server_opt
def bench(table, variant, dimension, b_bits, eps, seed, field, modulus,
          rho_bits, delta_bits, server):
    """Print the communication-overhead tables of the cost model."""
    out = _post(server, "/bench", {
        "table": table, "variant": variant, "d": dimension, "b_bits": b_bits,
        "field": field, "modulus": modulus, "rho_bits": rho_bits,
        "delta_bits": delta_bits, "eps": eps, "seed": _seed_option(seed)})
    if "text" in out:
        click.echo(out["text"])
    else:
        click.echo(json.dumps(out, indent=2))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8008, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
