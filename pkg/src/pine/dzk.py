"""Norm verification with differentially-private (noisy) secret sharing.

Instead of uniform shares, the client samples truncated Gaussian noise R
(conditioned on ||R||_2 <= sqrt(big_delta)), rounds it up, and shares X as
(-ceil(R), X + ceil(R)).  Each share then has L2 norm at most
lam = sqrt(B) + sqrt(big_delta) + sqrt(d), which each verifier checks
locally on its own share; for q > 4*lam^2 the squared norm of any pair of
accepted shares cannot wrap modulo q, so the whole wraparound machinery
disappears.  What remains is the [0, B] range check on the squared norm
plus the quadratic batch tying it to the shared bits -- three messages,
perfect completeness.

Secrecy is differential rather than statistical: a verifier's view shifts
by at most an (eps, delta)-factor when the input changes, inherited from
the Gaussian mechanism with sigma = sqrt(2 ln(1.25/(delta/2)))/eps * sqrt(B).
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import fiat_shamir as fs
from .field import PrimeField, get_field, log2_modulus, sqrt_ceil
from .quadratic import (QuadraticConstraint, QuadraticSystem,
                        inner_product_decide, inner_product_exchange,
                        prove_inner_product, sample_rho)
from .norm import SessionResult, VerifierMessage


class DzkError(ValueError):
    pass


def c_factor(eps: float, delta: float) -> float:
    """Gaussian-mechanism noise multiplier sqrt(2 ln(1.25/delta)) / eps."""
    if not (0 < delta < 1) or eps <= 0:
        raise DzkError("eps must be positive and delta in (0, 1)")
    return math.sqrt(2.0 * math.log(1.25 / delta)) / eps


def _norm_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def c_factor_analytic(eps: float, delta: float) -> float:
    """Tight noise multiplier from the exact Gaussian-mechanism condition.

    The mechanism at multiplier c (sigma = c * sensitivity) is
    (eps, delta)-private iff
    Phi(1/(2c) - eps*c) - e^eps * Phi(-1/(2c) - eps*c) <= delta;
    bisects down from the closed form, which is always sufficient.
    """

    def leakage(c: float) -> float:
        return (_norm_cdf(1 / (2 * c) - eps * c)
                - math.exp(eps) * _norm_cdf(-1 / (2 * c) - eps * c))

    hi = c_factor(eps, delta)
    lo = hi / 100.0
    if leakage(lo) <= delta:
        return lo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if leakage(mid) <= delta:
            hi = mid
        else:
            lo = mid
    return hi


def dzk_params(eps: float, delta: float, norm_bound_sq: int, dimension: int,
               big_delta: float | None = None,
               calibration: str = "closed") -> "DzkParams":
    """Derive the noise scale, truncation radius, and minimal field size.

    ``big_delta`` may be pinned (it only needs to be at least the derived
    value for the truncation-rate guarantee to hold).  ``calibration``
    selects the noise multiplier: "closed" for the standard closed form,
    "analytic" for the tight numerical one.
    """
    if not (0 < eps < 1 or eps >= 1) or not (0 < delta < 1):
        raise DzkError("need eps > 0 and delta in (0, 1)")
    if norm_bound_sq < 1 or dimension < 1:
        raise DzkError("need B >= 1 and d >= 1")
    if calibration == "closed":
        mult = c_factor(eps, delta / 2)
    elif calibration == "analytic":
        mult = c_factor_analytic(eps, delta / 2)
    else:
        raise DzkError(f"unknown calibration {calibration!r}")
    sigma = mult * math.sqrt(norm_bound_sq)
    log_term = math.log(8.0 * math.e / delta)
    derived = dimension * sigma * sigma * (
        1.0 + 2.0 * math.sqrt(log_term / dimension) + 2.0 * log_term / dimension)
    if big_delta is None:
        big_delta = derived
    return DzkParams(eps=eps, delta=delta, norm_bound_sq=norm_bound_sq,
                     dimension=dimension, sigma=sigma, big_delta=big_delta)


@dataclass(frozen=True)
class DzkParams:
    eps: float
    delta: float
    norm_bound_sq: int
    dimension: int
    sigma: float
    big_delta: float

    @property
    def lam(self) -> float:
        """Per-share L2 norm cap sqrt(B) + sqrt(big_delta) + sqrt(d)."""
        return (math.sqrt(self.norm_bound_sq) + math.sqrt(self.big_delta)
                + math.sqrt(self.dimension))

    @property
    def min_modulus(self) -> int:
        """Smallest q compatible with the no-wraparound argument (q > 4 lam^2)."""
        return math.floor(4.0 * self.lam * self.lam) + 1

    @property
    def min_modulus_bits(self) -> int:
        return self.min_modulus.bit_length()

    def suggested_modulus(self) -> int:
        """The least prime admissible as q."""
        import sympy

        return int(sympy.nextprime(self.min_modulus - 1))


def sample_truncated_gaussian(dimension: int, sigma: float, big_delta: float,
                              rng: np.random.Generator,
                              max_tries: int = 1000) -> np.ndarray:
    """Gaussian vector conditioned on squared norm at most ``big_delta``.

    Plain rejection; with big_delta at its derived value the rejection
    probability is at most delta/(8e), so retries are rare.
    """
    if sigma == 0.0:
        return np.zeros(dimension)
    for _ in range(max_tries):
        r = rng.normal(0.0, sigma, size=dimension)
        if float(r @ r) <= big_delta:
            return r
    raise DzkError(f"rejection sampling failed {max_tries} times; "
                   "big_delta is too small for this sigma")


@dataclass
class NoisyShares:
    """share0 = -ceil(R), share1 = X + ceil(R); both norms <= lam."""

    share0: np.ndarray
    share1: np.ndarray


def dzk_share(x_signed: np.ndarray, params: DzkParams,
              rng: np.random.Generator) -> NoisyShares:
    x = np.asarray(x_signed, dtype=np.int64)
    if len(x) != params.dimension:
        raise DzkError("vector length disagrees with parameters")
    noise = np.ceil(sample_truncated_gaussian(
        params.dimension, params.sigma, params.big_delta, rng)).astype(np.int64)
    return NoisyShares(share0=-noise, share1=x + noise)


def share_norm_ok(share_signed: np.ndarray, params: DzkParams) -> bool:
    norm_sq = int(np.sum(np.asarray(share_signed, dtype=object) ** 2))
    return norm_sq <= params.lam ** 2


def quad_soundness_log2(dimension: int, modulus: int, quad_reps: int) -> float:
    """log2 of the batch soundness bound with n = d + 2 log q variables."""
    logq = log2_modulus(modulus)
    root = 2 * math.sqrt(dimension + 2 * logq)
    base = root / (modulus - root) + (2 * logq + 1) / modulus
    return quad_reps * math.log2(base)


def select_quad_reps(dimension: int, modulus: int, rho: float,
                     max_reps: int = 16) -> int:
    for t in range(1, max_reps + 1):
        if quad_soundness_log2(dimension, modulus, t) <= math.log2(rho):
            return t
    raise DzkError(f"soundness {rho:.3g} unreachable within {max_reps} repetitions")


@dataclass(frozen=True)
class DzkSessionParams:
    """Noise parameters plus the concrete field and repetition count."""

    noise: DzkParams
    modulus: int
    quad_reps: int

    def __post_init__(self) -> None:
        if self.modulus <= self.noise.min_modulus - 1:
            raise DzkError(
                f"q = {self.modulus} is not above 4*lam^2 = {self.noise.min_modulus - 1}; "
                "shares could wrap")
        if self.modulus <= 3 * self.noise.norm_bound_sq + 2:
            raise DzkError("q too small for the [0, B] range check")

    @property
    def dimension(self) -> int:
        return self.noise.dimension

    @property
    def norm_bound_sq(self) -> int:
        return self.noise.norm_bound_sq

    @property
    def norm_bit_count(self) -> int:
        return self.norm_bound_sq.bit_length()

    @property
    def norm_power_of_two(self) -> bool:
        return self.norm_bound_sq + 1 == 1 << self.norm_bit_count

    @property
    def norm_range_elements(self) -> int:
        return self.norm_bit_count * (1 if self.norm_power_of_two else 2)

    @property
    def n_vars(self) -> int:
        return self.dimension + self.norm_range_elements

    def field(self) -> PrimeField:
        return get_field(self.modulus)


@lru_cache(maxsize=32)
def _dzk_system(params: DzkSessionParams) -> QuadraticSystem:
    """Constraints: squared-norm recomposition, then bitness of v' (and u')."""
    f = params.field()
    d, nb = params.dimension, params.norm_bit_count
    terms = {(1 + i, 1 + i): 1 for i in range(d)}
    for j in range(nb):
        terms[(0, 1 + d + j)] = (-(1 << j)) % f.q
    cons = [QuadraticConstraint.from_terms(f, terms, 0)]
    cons += [QuadraticConstraint.bitness(f, 1 + d + j)
             for j in range(params.norm_range_elements)]
    return QuadraticSystem(f, cons, params.n_vars)


@dataclass(frozen=True)
class DzkMessageSizes:
    shares_bits: int
    msg1_extra_bits: int   # range-proof bits, per verifier
    msg2_bits: int         # rc challenges
    msg3_bits: int         # quad proof slices, per verifier
    exchange_bits: int
    fs_extra_bits: int
    quad_slice_elements: int

    @property
    def client_bits(self) -> int:
        return self.msg1_extra_bits + self.msg3_bits + self.fs_extra_bits


FS_ROUNDS_DZK = 2


def message_sizes(params: DzkSessionParams, kappa_bits: int = 256,
                  with_fs: bool = True) -> DzkMessageSizes:
    logq = log2_modulus(params.modulus)
    t = params.quad_reps
    block = sqrt_ceil(params.n_vars + 1)
    exchange = (0 if params.norm_power_of_two else 1) + t * (2 * block + 2)
    return DzkMessageSizes(
        shares_bits=params.dimension * logq,
        msg1_extra_bits=params.norm_range_elements * logq,
        msg2_bits=t * logq,
        msg3_bits=t * (4 * block + 1) * logq,
        exchange_bits=exchange * logq,
        fs_extra_bits=2 * FS_ROUNDS_DZK * kappa_bits if with_fs else 0,
        quad_slice_elements=4 * block + 1,
    )


# -- prover / verifier --------------------------------------------------------------


class DzkProver:
    def __init__(self, params: DzkSessionParams, x_signed: np.ndarray,
                 rng: np.random.Generator, cheat_truncate_bits: bool = False):
        self.params = params
        self.field = params.field()
        self.rng = rng
        self.x_signed = np.asarray(x_signed, dtype=np.int64)
        self.shares = dzk_share(self.x_signed, params.noise, rng)
        self.cheat_truncate_bits = cheat_truncate_bits
        self._witness_bits: tuple[int, int] | None = None

    def message1_bits(self) -> tuple[np.ndarray, np.ndarray | None, np.ndarray,
                                     np.ndarray | None]:
        """Shared slack bits (v', u') for the claim sum X_i^2 in [0, B]."""
        p = self.params
        f = self.field
        norm_sq = int(np.sum(self.x_signed.astype(object) ** 2))
        v = norm_sq % f.q
        u = (p.norm_bound_sq - norm_sq) % f.q
        nb = p.norm_bit_count
        if self.cheat_truncate_bits:
            v %= 1 << nb
            u %= 1 << nb
        if max(v, 0 if p.norm_power_of_two else u) >= 1 << nb:
            raise DzkError("squared norm exceeds the claimed range")
        self._witness_bits = (v, u)
        vbits = np.asarray([(v >> j) & 1 for j in range(nb)], dtype=np.uint64)
        v0 = f.rand(self.rng, vbits.shape)
        v1 = f.sub(f.array(vbits), v0)
        if p.norm_power_of_two:
            return v0, None, v1, None
        ubits = np.asarray([(u >> j) & 1 for j in range(nb)], dtype=np.uint64)
        u0 = f.rand(self.rng, ubits.shape)
        u1 = f.sub(f.array(ubits), u0)
        return v0, u0, v1, u1

    def witness_vector(self) -> np.ndarray:
        p = self.params
        f = self.field
        v, u = self._witness_bits
        vals = [1] + [int(t) % f.q for t in f.from_signed(self.x_signed)]
        vals += [(v >> j) & 1 for j in range(p.norm_bit_count)]
        if not p.norm_power_of_two:
            vals += [(u >> j) & 1 for j in range(p.norm_bit_count)]
        return f.array(vals)

    def message3(self, rc_values: np.ndarray):
        p = self.params
        f = self.field
        system = _dzk_system(p)
        x_ext = self.witness_vector()
        proofs = []
        for i in range(p.quad_reps):
            rows, cols, vals, _ = system.combine(int(rc_values[i]))
            v_full = f.coo_matvec(rows, cols, vals, x_ext, len(x_ext))
            proofs.append(prove_inner_product(f, x_ext, v_full, self.rng))
        return proofs

    def bits_payload(self, j: int, bit_shares) -> bytes:
        f = self.field
        v0, u0, v1, u1 = bit_shares
        v, u = (v0, u0) if j == 0 else (v1, u1)
        out = f.to_bytes(v)
        if u is not None:
            out += f.to_bytes(u)
        return out

    def quad_payload(self, j: int, proofs) -> bytes:
        f = self.field
        parts = []
        for pr in proofs:
            rf, rg, h = pr.slice_for(j)
            parts += [f.to_bytes(rf), f.to_bytes(rg), f.to_bytes(h)]
        return b"".join(parts)


def parse_bits_payload(data: bytes, params: DzkSessionParams):
    f = params.field()
    w = f.spec.nbytes
    nb = params.norm_bit_count
    if len(data) != params.norm_range_elements * w:
        raise ValueError("bad range-bits payload size")
    v = f.from_bytes(data[: nb * w])
    u = None if params.norm_power_of_two else f.from_bytes(data[nb * w:])
    return v, u


def parse_quad_payload(data: bytes, params: DzkSessionParams):
    f = params.field()
    block = sqrt_ceil(params.n_vars + 1)
    w = f.spec.nbytes
    per = (4 * block + 1) * w
    if len(data) != per * params.quad_reps:
        raise ValueError("bad quad payload size")
    out = []
    for i in range(params.quad_reps):
        chunk = data[i * per:(i + 1) * per]
        rf = f.from_bytes(chunk[: block * w])
        rg = f.from_bytes(chunk[block * w: 2 * block * w])
        h = f.from_bytes(chunk[2 * block * w:])
        out.append((rf, rg, h))
    return out, block


class DzkVerifier:
    def __init__(self, params: DzkSessionParams, verifier_index: int,
                 x_share: np.ndarray):
        self.params = params
        self.j = verifier_index
        self.field = params.field()
        self.x_share = self.field.array(x_share)
        self.failure: str | None = None
        signed = self.field.to_signed(self.x_share)
        if not share_norm_ok(signed, params.noise):
            self.failure = "share-norm"
        self._x_ext = None
        self._bits = None

    def consume_bits(self, norm_v: np.ndarray, norm_u: np.ndarray | None) -> None:
        f = self.field
        const = f.array([1 if self.j == 0 else 0])
        parts = [const, self.x_share, norm_v]
        if norm_u is not None:
            parts.append(norm_u)
        self._x_ext = np.concatenate([f.array(t) for t in parts])
        self._bits = (norm_v, norm_u)

    def exchange(self, rc_values, rho_values, quad_slices, block) -> VerifierMessage:
        p = self.params
        f = self.field
        norm_v, norm_u = self._bits
        range_share = None
        if not p.norm_power_of_two:
            weights = f.array([1 << j for j in range(p.norm_bit_count)])
            range_share = int(f.add_scalar(int(f.dot(weights, norm_v)),
                                           int(f.dot(weights, norm_u))))
        system = _dzk_system(p)
        quad = []
        for i in range(p.quad_reps):
            rows, cols, vals, _ = system.combine(int(rc_values[i]))
            v_share = f.coo_matvec(rows, cols, vals, self._x_ext, len(self._x_ext))
            quad.append(inner_product_exchange(
                f, quad_slices[i], self._x_ext, v_share, int(rho_values[i]), block))
        return VerifierMessage(0, range_share, quad)

    def decide(self, own: VerifierMessage, peer: VerifierMessage,
               rc_values) -> tuple[bool, str]:
        p = self.params
        f = self.field
        if self.failure:
            return False, self.failure
        if own.range_share is not None:
            total = f.add_scalar(own.range_share, peer.range_share)
            if total != p.norm_bound_sq % f.q:
                return False, "range-linear"
        system = _dzk_system(p)
        for i in range(p.quad_reps):
            _, _, _, target = system.combine(int(rc_values[i]))
            ex0 = own.quad[i] if self.j == 0 else peer.quad[i]
            ex1 = peer.quad[i] if self.j == 0 else own.quad[i]
            ok, cause = inner_product_decide(f, ex0, ex1, target)
            if not ok:
                return False, cause
        return True, "accept"


# -- drivers ---------------------------------------------------------------------


def _params_header(params: DzkSessionParams) -> bytes:
    return struct.pack("<QQdddd", params.dimension, params.quad_reps,
                       params.noise.eps, params.noise.delta, params.noise.sigma,
                       params.noise.big_delta) \
        + params.norm_bound_sq.to_bytes(32, "little") \
        + params.modulus.to_bytes(32, "little")


def params_from_header(header: bytes) -> DzkSessionParams:
    d, t, eps, delta, sigma, big_delta = struct.unpack_from("<QQdddd", header, 0)
    off = struct.calcsize("<QQdddd")
    bound = int.from_bytes(header[off:off + 32], "little")
    modulus = int.from_bytes(header[off + 32:off + 64], "little")
    noise = DzkParams(eps=eps, delta=delta, norm_bound_sq=bound, dimension=d,
                      sigma=sigma, big_delta=big_delta)
    return DzkSessionParams(noise=noise, modulus=modulus, quad_reps=t)


def run_interactive(params: DzkSessionParams, x_signed: np.ndarray, seed: int,
                    cheat_truncate_bits: bool = False,
                    share_override: NoisyShares | None = None) -> SessionResult:
    f = params.field()
    streams = np.random.SeedSequence(seed).spawn(2)
    prover_rng = np.random.Generator(np.random.PCG64(streams[0]))
    coins = np.random.Generator(np.random.PCG64(streams[1]))
    prover = DzkProver(params, x_signed, prover_rng,
                       cheat_truncate_bits=cheat_truncate_bits)
    if share_override is not None:
        prover.shares = share_override
    try:
        bit_shares = prover.message1_bits()
    except DzkError:
        return SessionResult(False, "range-overflow", {}, [])
    rc = f.rand(coins, params.quad_reps)
    proofs = prover.message3(rc)
    block = sqrt_ceil(params.n_vars + 1)
    rho = f.array([sample_rho(f, block, coins) for _ in range(params.quad_reps)])

    x_fields = (f.from_signed(prover.shares.share0),
                f.from_signed(prover.shares.share1))
    messages = []
    verifiers = []
    for j in (0, 1):
        ver = DzkVerifier(params, j, x_fields[j])
        v, u0, v1, u1 = bit_shares
        norm_v = v if j == 0 else v1
        norm_u = (u0 if j == 0 else u1)
        ver.consume_bits(norm_v, norm_u)
        slices = [p.slice_for(j) for p in proofs]
        messages.append(ver.exchange(rc, rho, slices, block))
        verifiers.append(ver)
    ok0, cause0 = verifiers[0].decide(messages[0], messages[1], rc)
    ok1, cause1 = verifiers[1].decide(messages[1], messages[0], rc)
    accept = ok0 and ok1
    cause = "accept" if accept else (cause0 if not ok0 else cause1)
    sizes = message_sizes(params, with_fs=False)
    bits = {"msg1": sizes.shares_bits + sizes.msg1_extra_bits,
            "msg2": sizes.msg2_bits, "msg3": sizes.msg3_bits,
            "exchange": sizes.exchange_bits}
    return SessionResult(accept, cause, bits, [])


def ni_prove(params: DzkSessionParams, x_signed: np.ndarray,
             rng: np.random.Generator, config: fs.FsConfig | None = None,
             cheat_truncate_bits: bool = False) -> fs.NiProof:
    """One-shot proof; never aborts (completeness is perfect)."""
    config = config or fs.FsConfig()
    f = params.field()
    prover = DzkProver(params, x_signed, rng,
                       cheat_truncate_bits=cheat_truncate_bits)
    x_payloads = (f.to_bytes(f.from_signed(prover.shares.share0)),
                  f.to_bytes(f.from_signed(prover.shares.share1)))
    blinds = [(fs.sample_blind(config, rng), fs.sample_blind(config, rng))
              for _ in range(FS_ROUNDS_DZK)]
    stages: list[tuple[bytes, bytes]] = []
    hashes: list[tuple[bytes, bytes]] = []

    def _round(i: int) -> bytes:
        pi0 = b"".join(s[0] for s in stages)
        pi1 = b"".join(s[1] for s in stages)
        r0 = fs.view_commitment(config, i, 0, x_payloads[0], blinds[i - 1][0], pi0)
        r1 = fs.view_commitment(config, i, 1, x_payloads[1], blinds[i - 1][1], pi1)
        hashes.append((r0, r1))
        return fs.combine_commitments(config, i, r0, r1)

    bit_shares = prover.message1_bits()
    stages.append((prover.bits_payload(0, bit_shares),
                   prover.bits_payload(1, bit_shares)))
    seed1 = _round(1)
    rc = fs.expand_field_elements(config, seed1, params.quad_reps, f)
    proofs = prover.message3(rc)
    stages.append((prover.quad_payload(0, proofs), prover.quad_payload(1, proofs)))
    _round(2)
    return fs.NiProof("dzk", config.kappa_bits, _params_header(params),
                      x_payloads, stages, blinds, hashes)


def ni_verify_local(params: DzkSessionParams, proof: fs.NiProof, verifier_index: int,
                    config: fs.FsConfig | None = None):
    from .norm import _NiVerifierState  # same exchange state machine

    config = config or fs.FsConfig(kappa_bits=proof.kappa_bits)
    j = verifier_index
    f = params.field()
    peer = [proof.round_hashes[i][1 - j] for i in range(proof.rounds)]

    def fail(cause: str):
        return _NiVerifierState(None, None, None, peer, cause), None

    if proof.header != _params_header(params) or proof.variant != "dzk" \
            or proof.rounds != FS_ROUNDS_DZK:
        return fail("malformed")
    try:
        x_share = f.from_bytes(proof.x_payloads[j])
        if len(x_share) != params.dimension:
            return fail("malformed")
        seeds = []
        for i in range(1, proof.rounds + 1):
            own = fs.view_commitment(config, i, j, proof.x_payloads[j],
                                     proof.blinds[i - 1][j],
                                     proof.transcript_for(j, i))
            if own != proof.round_hashes[i - 1][j]:
                return fail("fs-inconsistent")
            pair = [None, None]
            pair[j] = own
            pair[1 - j] = proof.round_hashes[i - 1][1 - j]
            seeds.append(fs.combine_commitments(config, i, pair[0], pair[1]))
        ver = DzkVerifier(params, j, x_share)
        if ver.failure:
            return fail(ver.failure)
        norm_v, norm_u = parse_bits_payload(proof.stage_payloads[0][j], params)
        ver.consume_bits(norm_v, norm_u)
        rc = fs.expand_field_elements(config, seeds[0], params.quad_reps, f)
        slices, block = parse_quad_payload(proof.stage_payloads[1][j], params)
        rho = fs.expand_field_elements(config, seeds[1], params.quad_reps, f,
                                       floor=block)
        msg = ver.exchange(rc, rho, slices, block)
    except (ValueError, fs.FsError):
        return fail("malformed")
    msg.round_hashes = [proof.round_hashes[i][j] for i in range(proof.rounds)]
    state = _NiVerifierState(ver, msg, rc, peer)
    return state, msg


def ni_verify(params: DzkSessionParams, proof: fs.NiProof,
              config: fs.FsConfig | None = None) -> tuple[bool, str]:
    from .norm import ni_verify_finish

    st0, msg0 = ni_verify_local(params, proof, 0, config)
    st1, msg1 = ni_verify_local(params, proof, 1, config)
    ok0, cause0 = ni_verify_finish(st0, msg1)
    ok1, cause1 = ni_verify_finish(st1, msg0)
    if ok0 and ok1:
        return True, "accept"
    return False, cause0 if not ok0 else cause1


def run_fs(params: DzkSessionParams, x_signed: np.ndarray, seed: int,
           config: fs.FsConfig | None = None,
           cheat_truncate_bits: bool = False) -> SessionResult:
    config = config or fs.FsConfig()
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    try:
        proof = ni_prove(params, x_signed, rng, config,
                         cheat_truncate_bits=cheat_truncate_bits)
    except DzkError:
        return SessionResult(False, "range-overflow", {}, [])
    blob = proof.to_bytes()
    accept, cause = ni_verify(params, fs.NiProof.from_bytes(blob), config)
    sizes = message_sizes(params, config.kappa_bits)
    bits = {"msg1": sizes.shares_bits + sizes.msg1_extra_bits,
            "msg2": sizes.msg2_bits, "msg3": sizes.msg3_bits,
            "exchange": sizes.exchange_bits, "fs_extra": sizes.fs_extra_bits}
    return SessionResult(accept, cause, bits, [("proof", blob)], proof_bytes=blob)
