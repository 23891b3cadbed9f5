import math

import numpy as np
import pytest

from pine import fiat_shamir as fs
from pine.field import GOLDILOCKS_PRIME, PRIME_128, sqrt_ceil
from pine.norm import (DEFAULT_ETA, InfeasibleParamsError,
                       NormParams, constraint_catalog, layout_for,
                       message_sizes, ni_prove, ni_verify, ni_verify_finish,
                       ni_verify_local, params_from_header, quad_soundness_log2,
                       run_fs, run_interactive, select_params,
                       total_soundness_bound, _params_header)

Q64 = GOLDILOCKS_PRIME


def small_params(d=24, b_exp=14, seed_bound=None):
    return select_params(d, 1 << b_exp, Q64, 2.0 ** -50, 2.0 ** -50)


def honest_vector(params, seed=0):
    rng = np.random.default_rng(seed)
    d = params.dimension
    scale = max(1, math.isqrt(params.norm_bound_sq // d))
    x = rng.integers(-scale, scale + 1, size=d)
    assert int(np.sum(x.astype(object) ** 2)) <= params.norm_bound_sq
    return x


def test_default_eta_reproduces_alpha_anchor():
    assert abs(math.sqrt(math.log(2 / DEFAULT_ETA)) - 7.99996948) < 1e-6
    assert abs(math.log2(DEFAULT_ETA) + 91.33) < 0.01


def test_select_params_reproduces_reference_rows():
    p50 = select_params(10**6, 2**30, Q64, 2.0 ** -50, 2.0 ** -50)
    assert (p50.quad_reps, p50.repetitions, p50.tau) == (1, 51, 1.0)
    p100 = select_params(10**6, 2**30, Q64, 2.0 ** -100, 2.0 ** -100)
    assert p100.quad_reps == 2 and p100.repetitions == 107
    assert round(p100.tau, 4) == 0.9907
    # the wider dimension bumps one repetition
    p100b = select_params(10**7, 2**30, Q64, 2.0 ** -100, 2.0 ** -100)
    assert p100b.repetitions == 108 and p100b.quad_reps == 2
    # mixed errors: rho 2^-50, delta 2^-100 allows one masked failure
    # (the bound-form quadratic term puts r at 57, tau = 56/57 = 0.9825)
    pmix = select_params(10**4, 2**30, Q64, 2.0 ** -50, 2.0 ** -100)
    assert pmix.repetitions - pmix.success_count == 1
    assert pmix.repetitions == 57 and round(pmix.tau, 4) == 0.9825


def test_select_params_deterministic():
    a = select_params(12345, 2**28, Q64, 2.0 ** -60, 2.0 ** -60)
    b = select_params(12345, 2**28, Q64, 2.0 ** -60, 2.0 ** -60)
    assert a == b


def test_select_params_128bit_field():
    p = select_params(10**6, 2**30, PRIME_128, 2.0 ** -100, 2.0 ** -100)
    # a 128-bit field absorbs the quadratic term at a single repetition
    assert p.quad_reps == 1 and p.repetitions == 107


def test_infeasible_field_named():
    with pytest.raises(InfeasibleParamsError) as err:
        select_params(100, 2**30, 2**31, 2.0 ** -50, 2.0 ** -50)
    assert "81*B*ln(2/eta)" in str(err.value)


def test_error_budget_respected():
    p = select_params(1000, 2**20, Q64, 2.0 ** -50, 2.0 ** -50)
    assert total_soundness_bound(p) <= 2.0 ** -50


def test_message_sizes_conformance_grid():
    """Criterion 9: exact msg1/msg3, bounded msg2/msg4, exact quad slice."""
    grid = [(d, b, rb, db)
            for d in (10**3, 10**4, 10**5, 10**6, 10**7)
            for b in (20, 30)
            for (rb, db) in ((50, 50), (100, 100))]
    assert len(grid) == 20
    logq = 64
    for d, b_exp, rb, db in grid:
        p = select_params(d, 1 << b_exp, Q64, 2.0 ** -rb, 2.0 ** -db)
        s = message_sizes(p)
        assert s.msg1_bits == 2 * d * p.repetitions
        assert s.msg3_bits == p.quad_reps * logq
        assert s.msg2_bits <= s.msg2_bound_bits
        assert s.msg4_bits <= s.msg4_bound_bits
        lay = layout_for(p)
        assert s.quad_slice_elements == 4 * sqrt_ceil(lay.n_vars + 1) + 1
        assert s.msg4_bits == p.quad_reps * s.quad_slice_elements * logq


def test_constraint_catalog_counts():
    p = select_params(10**6, 2**30, Q64, 2.0 ** -50, 2.0 ** -50)
    cat = constraint_catalog(p)
    lay = layout_for(p)
    r, b, nb = p.repetitions, lay.wrap_bits, p.norm_range_elements
    assert cat.n_vars == 10**6 + 2 * r + nb + r * b
    assert cat.m_constraints == 1 + r + (nb + r + r * b)
    assert cat.m_constraints <= cat.m_bound
    assert cat.n_vars <= cat.n_bound
    # n_eff from the soundness clause: d + log q (r+2)/2 = d + 1696 at r=51
    n_eff = 10**6 + 64 * (r + 2) / 2
    assert abs(n_eff - (10**6 + 1696)) < 1e-9


def test_interactive_and_fs_honest_accept():
    params = small_params()
    x = honest_vector(params)
    assert run_interactive(params, x, seed=1).accept
    res = run_fs(params, x, seed=2)
    assert res.accept and res.proof_bytes


def test_boundary_norm_accepts():
    params = select_params(64, 2**16, Q64, 2.0 ** -50, 2.0 ** -50)
    x = np.full(64, 32, dtype=np.int64)  # 64 * 1024 = 2^16 exactly
    assert int(np.sum(x.astype(object) ** 2)) == params.norm_bound_sq
    assert run_fs(params, x, seed=3).accept
    assert run_interactive(params, x, seed=4).accept


def test_over_norm_rejected():
    params = select_params(64, 2**16, Q64, 2.0 ** -50, 2.0 ** -50)
    x = np.full(64, 32, dtype=np.int64)
    x[0] = 33  # sum sq = B + 65
    res = run_fs(params, x, seed=5, cheat_truncate_bits=True)
    assert not res.accept


def test_fs_challenges_replay_in_interactive_engine():
    """The interactive verifier accepts the same transcript under FS coins."""
    params = small_params()
    x = honest_vector(params, seed=9)
    cfg = fs.FsConfig()
    rng = np.random.Generator(np.random.PCG64(7))
    proof = ni_prove(params, x, rng, cfg)
    # re-derive the challenges exactly as the verifiers do
    seeds = []
    for i in range(1, 4):
        seeds.append(fs.combine_commitments(cfg, i, proof.round_hashes[i - 1][0],
                                            proof.round_hashes[i - 1][1]))
    f = params.field()
    lay = layout_for(params)
    z = fs.expand_sign_matrix(cfg, seeds[0], params.repetitions, params.dimension)
    rc = fs.expand_field_elements(cfg, seeds[1], params.quad_reps, f)
    block = sqrt_ceil(lay.n_vars + 1)
    rho = fs.expand_field_elements(cfg, seeds[2], params.quad_reps, f, floor=block)
    res = run_interactive(params, x, seed=11,
                          challenges={"z": z, "rc": rc, "rho": rho})
    assert res.accept


def test_ni_proof_header_roundtrip():
    params = small_params()
    rebuilt = params_from_header(_params_header(params), params.rho, params.delta)
    assert rebuilt == params


def test_ni_verify_two_phase_and_cross_wiring():
    params = small_params()
    x = honest_vector(params, seed=13)
    rng = np.random.Generator(np.random.PCG64(13))
    proof = ni_prove(params, x, rng)
    st0, msg0 = ni_verify_local(params, proof, 0)
    st1, msg1 = ni_verify_local(params, proof, 1)
    assert ni_verify_finish(st0, msg1) == (True, "accept")
    assert ni_verify_finish(st1, msg0) == (True, "accept")
    # cross-wired input shares: swap the two payloads
    wired = fs.NiProof(proof.variant, proof.kappa_bits, proof.header,
                       (proof.x_payloads[1], proof.x_payloads[0]),
                       proof.stage_payloads, proof.blinds, proof.round_hashes)
    ok, cause = ni_verify(params, wired)
    assert not ok and cause == "fs-inconsistent"
    # stale blinds
    stale = fs.NiProof(proof.variant, proof.kappa_bits, proof.header,
                       proof.x_payloads, proof.stage_payloads,
                       [(b"\x00" * 32, b"\x00" * 32)] * 3, proof.round_hashes)
    ok, cause = ni_verify(params, stale)
    assert not ok and cause == "fs-inconsistent"


def test_ni_verify_rejects_wrong_params():
    params = small_params()
    x = honest_vector(params, seed=17)
    rng = np.random.Generator(np.random.PCG64(17))
    proof = ni_prove(params, x, rng)
    other = NormParams(dimension=params.dimension,
                       norm_bound_sq=params.norm_bound_sq * 2,
                       modulus=params.modulus, rho=params.rho, delta=params.delta,
                       eta=params.eta, repetitions=params.repetitions,
                       success_count=params.success_count,
                       quad_reps=params.quad_reps)
    ok, cause = ni_verify(other, proof)
    assert not ok and cause == "malformed"


def test_quad_soundness_log2_matches_formula():
    got = quad_soundness_log2(10**6, Q64, 51, 1)
    n_eff = 10**6 + 64 * 53 / 2
    base = 2 * math.sqrt(n_eff) / (Q64 - 2 * math.sqrt(n_eff)) + 64 * 53 / (2 * Q64)
    assert abs(got - math.log2(base)) < 1e-9


def test_zero_vector_completes_any_share():
    """Composition precondition at the session level.

    For an arbitrary share vector held by one verifier there is an input
    (the zero vector, shared as the exact complement) on which the honest
    prover makes both verifiers accept.
    """
    params = small_params()
    f = params.field()
    rng = np.random.Generator(np.random.PCG64(21))
    arbitrary = f.rand(rng, params.dimension)
    x = np.zeros(params.dimension, dtype=np.int64)
    complement = f.sub(f.zeros(params.dimension), arbitrary)
    fresh = ni_prove_with_shares(params, x, (arbitrary, complement),
                                 np.random.Generator(np.random.PCG64(23)))
    ok, cause = ni_verify(params, fresh)
    assert ok, cause


def ni_prove_with_shares(params, x, shares, rng):
    from pine.norm import NormProver

    prover = NormProver(params, x, rng)
    prover.x_shares = shares
    config = fs.FsConfig()
    f = params.field()
    x_payloads = (f.to_bytes(shares[0]), f.to_bytes(shares[1]))
    blinds = [(fs.sample_blind(config, rng), fs.sample_blind(config, rng))
              for _ in range(3)]
    stages, hashes = [], []

    def _round(i):
        pi0 = b"".join(s[0] for s in stages)
        pi1 = b"".join(s[1] for s in stages)
        r0 = fs.view_commitment(config, i, 0, x_payloads[0], blinds[i - 1][0], pi0)
        r1 = fs.view_commitment(config, i, 1, x_payloads[1], blinds[i - 1][1], pi1)
        hashes.append((r0, r1))
        return fs.combine_commitments(config, i, r0, r1)

    stages.append((b"", b""))
    z = fs.expand_sign_matrix(config, _round(1), params.repetitions,
                              params.dimension)
    msg2 = prover.message2(z)
    stages.append((msg2.slice_bytes(0, f), msg2.slice_bytes(1, f)))
    rc = fs.expand_field_elements(config, _round(2), params.quad_reps, f)
    proofs = prover.message4(rc, msg2)
    stages.append((NormProver.msg4_bytes(proofs, 0, f),
                   NormProver.msg4_bytes(proofs, 1, f)))
    _round(3)
    from pine.norm import _params_header
    return fs.NiProof("statistical", config.kappa_bits, _params_header(params),
                      x_payloads, stages, blinds, hashes)
