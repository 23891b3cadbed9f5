"""Acceptance gate: every criterion at its stated tolerance.

Each test prints one PASS/FAIL line.  Run with ``pytest -s
tests/test_acceptance.py`` to see the report; the suite is also the
reference for every pinned tolerance.
"""

import contextlib
import math
import time

import numpy as np
import pytest

from pine.costs import intro_table
from pine.dzk import (DzkSessionParams, dzk_params, sample_truncated_gaussian,
                      select_quad_reps)
from pine.field import GOLDILOCKS_PRIME, get_field, sqrt_ceil
from pine.harness import SessionConfig, run_session, window_pass_rate
from pine.norm import (NormParams, message_sizes, layout_for, ni_prove,
                       ni_verify, quad_soundness_log2, run_interactive, run_fs,
                       select_params, _constraint_system)
from pine.fiat_shamir import NiProof
from pine.wraparound import (err_complete_log2, err_sound, err_sound_log2,
                             sample_challenge)

Q64 = GOLDILOCKS_PRIME


@contextlib.contextmanager
def criterion(number: int, label: str):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {number:2d}: FAIL - {label}")
        raise
    print(f"ACCEPTANCE {number:2d}: PASS - {label}")


def test_criterion_01_completeness_campaign():
    with criterion(1, "1000 honest statistical sessions accept within 60 s"):
        params = select_params(100, 2**20, Q64, 2.0 ** -50, 2.0 ** -50)
        assert (params.repetitions, params.quad_reps) == (51, 1)
        start = time.monotonic()
        accepts = 0
        for seed in range(1000):
            out, _ = run_session(SessionConfig("statistical", params, seed))
            accepts += out.accept
        elapsed = time.monotonic() - start
        assert accepts == 1000, f"{accepts}/1000 accepts"
        assert elapsed <= 60.0, f"took {elapsed:.1f}s"


def test_criterion_02_dzk_perfect_completeness():
    with criterion(2, "1000 honest dzk sessions accept"):
        noise = dzk_params(1.0, 0.1, 400, 20)
        params = DzkSessionParams(noise=noise, modulus=Q64,
                                  quad_reps=select_quad_reps(20, Q64, 2.0 ** -50))
        accepts = 0
        for seed in range(1000):
            out, _ = run_session(SessionConfig("dzk", params, seed))
            accepts += out.accept
        assert accepts == 1000, f"{accepts}/1000 accepts"


def test_criterion_03_wraparound_completeness_bound():
    with criterion(3, "honest window pass rate >= 0.945 at eta = 0.05"):
        eta = 0.05
        alpha = math.sqrt(math.log(2 / eta))
        assert abs(alpha - 1.92) < 0.01
        bound = 2**20
        x = np.full(256, 64, dtype=np.int64)          # sum of squares = B
        assert int(np.sum(x.astype(object) ** 2)) == bound
        radius = alpha * math.sqrt(bound)
        rate = window_pass_rate(x, Q64, -radius, radius, 10**5, seed=303)
        assert rate >= 0.95 - 0.005, f"rate {rate}"


def test_criterion_04_wraparound_soundness_bound():
    with criterion(4, "overflowing vectors pass rate <= 0.52 in both regimes"):
        q, d, bound, eta = 12289, 50, 18, 0.05
        alpha = math.sqrt(math.log(2 / eta))
        radius = alpha * math.sqrt(bound)
        # regime I: one coordinate far beyond the window
        x1 = np.zeros(d, dtype=np.int64)
        x1[0] = math.isqrt(q) + 1
        assert int(np.sum(x1.astype(object) ** 2)) >= q
        assert abs(x1).max() > 2 * radius
        rate1 = window_pass_rate(x1, q, -radius, radius, 10**5, seed=404)
        # regime II: every coordinate inside it, overflow by count
        v = math.floor(2 * radius)
        count = math.ceil(q / (v * v))
        assert count <= d
        x2 = np.zeros(d, dtype=np.int64)
        x2[:count] = v
        assert int(np.sum(x2.astype(object) ** 2)) >= q
        rate2 = window_pass_rate(x2, q, -radius, radius, 10**5, seed=405)
        assert rate1 <= 0.52, f"large-max rate {rate1}"
        assert rate2 <= 0.52, f"bounded-max rate {rate2}"


def _toy_params():
    # q = 257, d = 2, B = 5: two repetitions at tau = 1, window [-3, 4]
    return NormParams(dimension=2, norm_bound_sq=5, modulus=257,
                      rho=0.5, delta=0.5, eta=0.5, repetitions=2,
                      success_count=2, quad_reps=1)


def test_criterion_05_brute_force_soundness_oracle():
    with criterion(5, "exhaustive cheat enumeration below the soundness formula"):
        params = _toy_params()
        f = get_field(257)
        lay = layout_for(params)
        assert lay.wrap_bits == 3 and lay.norm_bits == 3
        n, m = lay.n_vars, lay.m_constraints
        block = sqrt_ceil(n + 1)
        rho_domain = 257 - (block + 1)
        rho_term = 2 * block / rho_domain
        formula = err_sound(2, 1.0) + 2.0 ** quad_soundness_log2(2, 257, 2, 1)

        # the over-norm witness: no integer pair reaches 6, so the smallest
        # squared norm beyond B = 5 is 8 = 2^2 + 2^2
        x = np.array([2, 2], dtype=np.int64)
        norm_sq = 8
        radius = params.wraparound.window_radius
        assert radius == 3

        # Exhaustive all-bits strategy space, gated by the two linear checks:
        # masks must sum to tau*r (only (1,1) with genuine bits) and the
        # range check forces v' + u' = 5, so v' in 0..5.  Window encodings
        # are free in 0..7 per repetition.  For each challenge, take the
        # cheating prover's best acceptance: the exact count of collapse
        # challenges that kill the residual, plus the polynomial spot-check
        # escape on the rest.
        worst = 0.0
        expected = 0.0
        entries = [-1, 0, 1]
        probs = {-1: 0.25, 0: 0.5, 1: 0.25}
        rc_vander = np.arange(257, dtype=np.int64)
        for z00 in entries:
            for z01 in entries:
                for z10 in entries:
                    for z11 in entries:
                        z = np.array([[z00, z01], [z10, z11]], dtype=np.int8)
                        pz = probs[z00] * probs[z01] * probs[z10] * probs[z11]
                        y = z.astype(np.int64) @ x
                        best = 0.0
                        for v1 in range(8):
                            for v2 in range(8):
                                s1 = (int(y[0]) + radius - v1) % 257
                                s2 = (int(y[1]) + radius - v2) % 257
                                for vp in range(6):
                                    eps_a = (norm_sq - vp) % 257
                                    assert eps_a != 0  # soundness core
                                    poly = (eps_a + s1 * rc_vander
                                            + s2 * rc_vander * rc_vander) % 257
                                    p_rc = int((poly == 0).sum()) / 257
                                    acc = p_rc + (1 - p_rc) * rho_term
                                    best = max(best, acc)
                        worst = max(worst, best)
                        expected += pz * best
        # non-bit strategies violate a bitness constraint, so their collapse
        # polynomial is nonzero of degree < m: at most m-1 roots
        nonbit_bound = (m - 1) / 257 + rho_term
        oracle = max(worst, nonbit_bound)
        assert expected <= oracle <= formula, (expected, oracle, formula)

        # and a maximally-informed prover never slips through in practice
        accepts = 0
        for seed in range(10**4):
            res = run_interactive(params, x, seed=seed,
                                  cheat_truncate_bits=True, force_masks=True)
            accepts += res.accept
        assert accepts == 0, f"{accepts} cheat accepts"


def test_criterion_06_quadratic_soundness_exhaustive_rho():
    with criterion(6, "false-target acceptance over all rho <= 0.0355"):
        from pine.quadratic import (_interp_cache, prove_inner_product,
                                    verify_inner_product)
        from pine.sharing import share_vector

        f = get_field(257)
        rng = np.random.default_rng(6)
        u = f.array([1, 2, 3, 4])
        v = f.array([4, 3, 2, 1])
        proof = prove_inner_product(f, u, v, rng)
        L = proof.block_count
        # best cheat: shift h by a polynomial with 2L in-domain roots whose
        # point-sum repairs the (false) target 21 instead of 20
        roots = list(range(L + 1, L + 1 + 2 * L))
        delta = f.array([1])
        for r in roots:
            lead = np.concatenate([f.zeros(1), delta])
            tail = np.concatenate([f.mul(delta, f.array([(-r) % 257] * len(delta))),
                                   f.zeros(1)])
            delta = f.add(lead, tail)
        psums = _interp_cache(f, L)["psums"]
        shift = int(f.dot(delta, psums[: len(delta)]))
        scale = f.mul_scalar(1, f.inv_scalar(shift))
        delta = f.mul(delta, f.array([scale] * len(delta)))
        h0 = f.add(proof.h_coeff_shares[0],
                   np.concatenate([delta, f.zeros(2 * L + 1 - len(delta))]))
        proof.h_coeff_shares = (h0, proof.h_coeff_shares[1])
        u_sh = share_vector(f, u, rng)
        v_sh = share_vector(f, v, rng)
        accepts = 0
        domain = [rho for rho in range(257) if rho > L]
        for rho in domain:
            ok, _, _ = verify_inner_product(
                f, proof, (u_sh[0].values, u_sh[1].values),
                (v_sh[0].values, v_sh[1].values), 21, rho)
            accepts += ok
        rate = accepts / len(domain)
        assert rate <= 0.0355, f"rate {rate}"


def test_criterion_07_error_formula_exactness():
    with criterion(7, "binomial-tail error formulas hit their pinned values"):
        assert err_sound(51, 1.0) == 2.0 ** -51
        assert -100.5 <= err_sound_log2(107, 0.9907) <= -99.5
        assert -86 <= err_complete_log2(51, 1.0, 2.0 ** -91.33) <= -85


def test_criterion_08_parameter_reproduction():
    with criterion(8, "reference parameter rows and the alpha anchor reproduce"):
        p50 = select_params(10**6, 2**30, Q64, 2.0 ** -50, 2.0 ** -50)
        assert (p50.quad_reps, p50.repetitions, p50.tau) == (1, 51, 1.0)
        p100 = select_params(10**6, 2**30, Q64, 2.0 ** -100, 2.0 ** -100)
        assert p100.quad_reps == 2 and p100.repetitions == 107
        assert round(p100.tau, 4) == 0.9907
        alpha = math.sqrt(math.log(2.0 / p50.eta))
        assert abs(alpha - 7.99996948) < 1e-6


def test_criterion_09_message_size_conformance():
    with criterion(9, "emitted sizes exact or within the bound formulas"):
        grid = [(d, b, e) for d in (10**3, 10**4, 10**5, 10**6, 10**7)
                for b in (20, 30) for e in (50, 100)]
        assert len(grid) == 20
        for d, b_exp, err_bits in grid:
            p = select_params(d, 1 << b_exp, Q64, 2.0 ** -err_bits,
                              2.0 ** -err_bits)
            s = message_sizes(p)
            assert s.msg1_bits == 2 * d * p.repetitions
            assert s.msg3_bits == p.quad_reps * 64
            assert s.msg2_bits <= s.msg2_bound_bits
            assert s.msg4_bits <= s.msg4_bound_bits
            lay = layout_for(p)
            assert s.quad_slice_elements == 4 * sqrt_ceil(lay.n_vars + 1) + 1


def test_criterion_10_cost_model_table():
    with criterion(10, "overhead table matches the reference statistical row"):
        rows = intro_table()
        got = dict(zip(rows["dimensions"], rows["statistical_pct"]))
        assert abs(got[10**6] - 0.49) <= 0.05, got[10**6]
        assert abs(got[10**7] - 0.13) <= 0.03, got[10**7]
        for d, want in {10**4: 22.0, 10**5: 3.18, 10**6: 0.49, 10**7: 0.13}.items():
            assert abs(got[d] - want) / want <= 0.35, (d, got[d], want)


def test_criterion_11_fs_tamper_resistance():
    with criterion(11, "one flipped byte rejects >= 990/1000; clean always accepts"):
        params = select_params(16, 2**12, Q64, 2.0 ** -50, 2.0 ** -50)
        rng = np.random.default_rng(11)
        x = rng.integers(-10, 11, size=16)
        # untampered round trips always accept
        for seed in range(50):
            assert run_fs(params, x, seed=seed).accept
        # tamper campaign: fresh proof, one uniformly random byte flipped
        rejects = 0
        prove_rng = np.random.Generator(np.random.PCG64(1100))
        for trial in range(1000):
            proof = ni_prove(params, x, prove_rng)
            blob = bytearray(proof.to_bytes())
            pos = int(rng.integers(0, len(blob)))
            blob[pos] ^= 1 + int(rng.integers(0, 255))
            try:
                ok, _ = ni_verify(params, NiProof.from_bytes(bytes(blob)))
            except Exception:
                ok = False
            rejects += not ok
        assert rejects >= 990, f"only {rejects}/1000 rejects"


def test_criterion_12_dzk_sampler():
    with criterion(12, "truncated-Gaussian caps, rejection rate, share norms"):
        delta, d, bound, eps = 0.1, 100, 100, 1.0
        noise = dzk_params(eps, delta, bound, d)
        rng = np.random.default_rng(12)
        # raw rejection frequency of the underlying Gaussian
        raw = rng.normal(0.0, noise.sigma, size=(10**5, d))
        sq = np.einsum("ij,ij->i", raw, raw)
        reject_rate = float((sq > noise.big_delta).mean())
        assert reject_rate <= delta / (8 * math.e) + 0.003, reject_rate
        # accepted draws never violate the cap; spot-check the sampler API
        for _ in range(200):
            r = sample_truncated_gaussian(d, noise.sigma, noise.big_delta, rng)
            assert float(r @ r) <= noise.big_delta
        # 1e5 honest sharings keep both share norms at or below the cap
        x = np.ones(d, dtype=np.int64)   # squared norm d/...<= B
        assert int(np.sum(x ** 2)) <= bound
        accepted = raw[sq <= noise.big_delta][: 10**5]
        ceil = np.ceil(accepted)
        lam_sq = noise.lam ** 2
        norm0 = np.einsum("ij,ij->i", ceil, ceil)          # ||-ceil(R)||^2
        shifted = x[None, :] + ceil
        norm1 = np.einsum("ij,ij->i", shifted, shifted)    # ||X + ceil(R)||^2
        assert int((norm0 > lam_sq).sum()) == 0
        assert int((norm1 > lam_sq).sum()) == 0
