"""The composed statistical norm-bound protocol and its parameter search.

A client holding an integer vector X proves to two verifiers (each holding
one additive share) that sum_i X_i^2 <= B over the integers.  Four
messages:

  1. verifiers -> prover: the wraparound challenge matrix (2dr bits);
  2. prover -> verifiers: wraparound window bits and mask bits, plus the
     bit decompositions showing sum X_i^2 in [0, B] mod q;
  3. verifiers -> prover: one batch-collapse challenge per quadratic
     repetition (t log q bits);
  4. prover -> verifiers: t inner-product proof slices.

The quadratic batch then certifies, in one shot: the squared norm equals
its claimed bit recomposition, each masked window test g_k * S_k = 0
holds, and every shared "bit" really is one.  Challenges come either from
a seeded shared-coin stream (interactive mode) or from the distributed
Fiat-Shamir transform (one-shot proofs).
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import fiat_shamir as fs
from .field import PrimeField, get_field, log2_modulus, sqrt_ceil
from .quadratic import (InnerProductProof, QuadraticConstraint, QuadraticSystem,
                        VerifierExchange, inner_product_decide,
                        inner_product_exchange, prove_inner_product, sample_rho)
from .wraparound import (WraparoundAbort, WraparoundParams, compute_sk_share,
                         challenge_to_bytes, dot_products, err_complete_log2,
                         err_sound_log2, sample_challenge)

# Per-repetition completeness error of the wraparound test, anchored so the
# window half-width coefficient sqrt(ln(2/eta)) is exactly 7.99996948; that
# puts eta at 2^-91.33 and keeps honest-failure mass negligible at every
# search point used by the cost tables.
DEFAULT_ALPHA = 7.99996948
DEFAULT_ETA = 2.0 * math.exp(-DEFAULT_ALPHA**2)


class InfeasibleParamsError(ValueError):
    """No parameter assignment meets the requested errors at this field size."""

    def __init__(self, constraint: str):
        super().__init__(f"infeasible: {constraint}")
        self.constraint = constraint


@dataclass(frozen=True)
class NormParams:
    """Everything both parties must agree on before a session."""

    dimension: int
    norm_bound_sq: int
    modulus: int
    rho: float
    delta: float
    eta: float
    repetitions: int
    success_count: int
    quad_reps: int

    def __post_init__(self) -> None:
        if self.dimension < 1 or self.norm_bound_sq < 1:
            raise ValueError("dimension and norm bound must be positive")
        if self.quad_reps < 1:
            raise ValueError("need at least one quadratic repetition")

    @property
    def tau(self) -> float:
        return self.success_count / self.repetitions

    @property
    def wraparound(self) -> WraparoundParams:
        return WraparoundParams(
            dimension=self.dimension, norm_bound_sq=self.norm_bound_sq,
            modulus=self.modulus, repetitions=self.repetitions, eta=self.eta,
            success_count=self.success_count)

    @property
    def norm_bit_count(self) -> int:
        """Bits needed for the [0, B] slack values."""
        return self.norm_bound_sq.bit_length()

    @property
    def norm_power_of_two(self) -> bool:
        return self.norm_bound_sq + 1 == 1 << self.norm_bit_count

    @property
    def norm_range_elements(self) -> int:
        return self.norm_bit_count * (1 if self.norm_power_of_two else 2)

    def field(self) -> PrimeField:
        return get_field(self.modulus)

    def check_conditions(self) -> list[str]:
        """Violated field-size conditions, empty when all hold."""
        bad = list(self.wraparound.check_field_conditions())
        q = self.modulus
        floor_81 = 81 * self.norm_bound_sq * math.log(2.0 / self.eta)
        if q < floor_81:
            bad.append(f"q >= 81*B*ln(2/eta) = {floor_81:.6g}")
        if q < 1000:
            bad.append("q >= 1000")
        if q < 3 * self.repetitions:
            bad.append(f"q >= 3r = {3 * self.repetitions}")
        if q <= 3 * self.norm_bound_sq + 2:
            bad.append(f"q > 3B+2 = {3 * self.norm_bound_sq + 2}")
        return bad

    def validate(self) -> None:
        bad = self.check_conditions()
        if bad:
            raise InfeasibleParamsError("; ".join(bad))


# -- variable layout and constraint batch -------------------------------------------


@dataclass(frozen=True)
class VariableLayout:
    """Index map into the extended witness vector (index 0 is the constant 1).

    Order: X (d), mask bits g (r), locally-computed window slacks S (r),
    squared-norm slack bits v' (and u' unless the range is a power of two),
    then the wraparound window bits row-major by repetition.
    """

    dimension: int
    repetitions: int
    wrap_bits: int
    norm_bits: int
    norm_power_of_two: bool

    @property
    def x0(self) -> int:
        return 1

    @property
    def g0(self) -> int:
        return 1 + self.dimension

    @property
    def s0(self) -> int:
        return self.g0 + self.repetitions

    @property
    def vprime0(self) -> int:
        return self.s0 + self.repetitions

    @property
    def uprime0(self) -> int | None:
        return None if self.norm_power_of_two else self.vprime0 + self.norm_bits

    @property
    def wrap0(self) -> int:
        extra = 0 if self.norm_power_of_two else self.norm_bits
        return self.vprime0 + self.norm_bits + extra

    def wrap_index(self, rep: int, bit: int) -> int:
        return self.wrap0 + rep * self.wrap_bits + bit

    @property
    def n_vars(self) -> int:
        return self.wrap0 - 1 + self.repetitions * self.wrap_bits

    @property
    def m_constraints(self) -> int:
        return 1 + self.repetitions + (self.n_vars - self.dimension - self.repetitions)


def layout_for(params: NormParams) -> VariableLayout:
    return VariableLayout(
        dimension=params.dimension, repetitions=params.repetitions,
        wrap_bits=params.wraparound.bits_per_check,
        norm_bits=params.norm_bit_count,
        norm_power_of_two=params.norm_power_of_two)


@lru_cache(maxsize=32)
def _constraint_system(params: NormParams) -> QuadraticSystem:
    """The session-independent quadratic batch for these parameters.

    Constraint order: squared-norm recomposition; the r masked window
    claims g_k * S_k = 0; bitness of v', u', g, and the window bits.
    """
    f = params.field()
    lay = layout_for(params)
    cons: list[QuadraticConstraint] = []
    terms = {(lay.x0 + i, lay.x0 + i): 1 for i in range(lay.dimension)}
    for j in range(lay.norm_bits):
        terms[(0, lay.vprime0 + j)] = (-(1 << j)) % f.q
    cons.append(QuadraticConstraint.from_terms(f, terms, 0))
    for k in range(lay.repetitions):
        cons.append(QuadraticConstraint.from_terms(
            f, {(lay.g0 + k, lay.s0 + k): 1}, 0))
    bit_vars = list(range(lay.vprime0, lay.vprime0 + lay.norm_bits))
    if lay.uprime0 is not None:
        bit_vars += list(range(lay.uprime0, lay.uprime0 + lay.norm_bits))
    bit_vars += list(range(lay.g0, lay.g0 + lay.repetitions))
    bit_vars += [lay.wrap_index(k, j) for k in range(lay.repetitions)
                 for j in range(lay.wrap_bits)]
    cons.extend(QuadraticConstraint.bitness(f, i) for i in bit_vars)
    return QuadraticSystem(f, cons, lay.n_vars)


@dataclass(frozen=True)
class ConstraintCatalog:
    n_vars: int
    m_constraints: int
    n_bound: float
    m_bound: float


def constraint_catalog(params: NormParams) -> ConstraintCatalog:
    """Actual counts next to the closed-form bounds used in the analysis."""
    lay = layout_for(params)
    m_bound = (2 * math.ceil(math.log2(
        4 * math.sqrt(params.norm_bound_sq * math.log(2 / params.eta)) + 2))
        * (params.repetitions + 2))
    return ConstraintCatalog(lay.n_vars, lay.m_constraints,
                             params.dimension + m_bound, m_bound)


# -- message sizes ---------------------------------------------------------------


@dataclass(frozen=True)
class MessageSizes:
    """Exact emitted bit counts next to the analytic upper bounds."""

    msg1_bits: int
    msg2_bits: int
    msg3_bits: int
    msg4_bits: int
    msg2_bound_bits: float
    msg4_bound_bits: int
    exchange_bits: int
    fs_extra_bits: int
    quad_slice_elements: int

    @property
    def client_bits(self) -> int:
        """Client -> one server traffic beyond the input shares."""
        return self.msg2_bits + self.msg4_bits + self.fs_extra_bits


FS_ROUNDS_STATISTICAL = 3


def message_sizes(params: NormParams, kappa_bits: int = 256,
                  with_fs: bool = True) -> MessageSizes:
    lay = layout_for(params)
    logq = log2_modulus(params.modulus)
    r, t = params.repetitions, params.quad_reps
    msg2_elems = r * lay.wrap_bits + r + params.norm_range_elements
    block = sqrt_ceil(lay.n_vars + 1)
    msg4_elems = t * (4 * block + 1)
    n_eff = params.dimension + logq * (r + 2) / 2
    msg4_bound = t * (4 * math.ceil(math.sqrt(n_eff)) + 1) * logq
    # one linear check for the mask-bit count, one for the norm range unless
    # its width is a power of two, plus the per-repetition quad exchange
    exchange_elems = 1 + (0 if params.norm_power_of_two else 1) + t * (2 * block + 2)
    fs_extra = 2 * FS_ROUNDS_STATISTICAL * kappa_bits if with_fs else 0
    return MessageSizes(
        msg1_bits=2 * params.dimension * r,
        msg2_bits=msg2_elems * logq,
        msg3_bits=t * logq,
        msg4_bits=msg4_elems * logq,
        msg2_bound_bits=(r / 2 + 2) * logq * logq,
        msg4_bound_bits=msg4_bound,
        exchange_bits=exchange_elems * logq,
        fs_extra_bits=fs_extra,
        quad_slice_elements=4 * block + 1,
    )


# -- parameter selection ------------------------------------------------------------


def quad_soundness_log2(dimension: int, modulus: int, repetitions: int,
                        quad_reps: int) -> float:
    """log2 of the quadratic batch's contribution to the soundness error."""
    logq = log2_modulus(modulus)
    n_eff = dimension + logq * (repetitions + 2) / 2
    root = 2 * math.sqrt(n_eff)
    base = root / (modulus - root) + logq * (repetitions + 2) / (2 * modulus)
    return quad_reps * math.log2(base)


def select_params(dimension: int, norm_bound_sq: int, modulus: int, rho: float,
                  delta: float, eta: float = DEFAULT_ETA) -> NormParams:
    """Cheapest (r, tau, t) meeting soundness rho and completeness/ZK delta.

    Scans t in 1..8 and the allowed-failure count f = r - tau*r upward; for
    each pair the minimal r whose exact binomial tails satisfy both error
    budgets wins, and candidates are ranked by client communication.
    Deterministic: ties break toward smaller t, then smaller r.
    """
    if rho <= 0 or delta <= 0:
        raise InfeasibleParamsError("error targets must be positive")
    floor_81 = 81 * norm_bound_sq * math.log(2.0 / eta)
    if modulus < floor_81:
        raise InfeasibleParamsError(
            f"field condition 81*B*ln(2/eta) = {floor_81:.6g} exceeds q = {modulus}")
    log2_rho = math.log2(rho)
    log2_delta = math.log2(delta)
    f_cap = min(64, math.ceil(-log2_delta / max(1e-9, -math.log2(eta))) + 3)
    r_cap = 8192
    best: tuple[int, int, int, NormParams] | None = None
    for t in range(1, 9):
        for f in range(0, f_cap + 1):
            found = None
            for r in range(max(1, 2 * f + 1), r_cap + 1):
                quad_l2 = quad_soundness_log2(dimension, modulus, r, t)
                if quad_l2 > log2_rho:
                    break  # grows with r; this t cannot reach rho
                tau = (r - f) / r
                total = np.logaddexp2(err_sound_log2(r, tau), quad_l2)
                if total <= log2_rho:
                    found = r
                    break
            if found is None:
                continue
            tau = (found - f) / found
            if err_complete_log2(found, tau, eta) > log2_delta:
                continue  # completeness worsens with r; try more masking
            cand = NormParams(
                dimension=dimension, norm_bound_sq=norm_bound_sq,
                modulus=modulus, rho=rho, delta=delta, eta=eta,
                repetitions=found, success_count=found - f, quad_reps=t)
            if 3 * found > modulus:
                continue
            bits = message_sizes(cand).client_bits
            key = (bits, t, found, cand)
            if best is None or key[:3] < best[:3]:
                best = key
            break  # larger f only costs more at this t
    if best is None:
        raise InfeasibleParamsError(
            f"no (r, tau, t) meets soundness {rho:.3g} and completeness {delta:.3g} "
            f"at q = {modulus} with eta = {eta:.3g}")
    params = best[3]
    params.validate()
    return params


def total_soundness_bound(params: NormParams) -> float:
    """The analytic acceptance bound for any cheating prover."""
    wrap = 2.0 ** err_sound_log2(params.repetitions, params.tau)
    quad = 2.0 ** quad_soundness_log2(params.dimension, params.modulus,
                                      params.repetitions, params.quad_reps)
    return wrap + quad


# -- prover ---------------------------------------------------------------------


def share_input(params: NormParams, x_signed: np.ndarray,
                rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    f = params.field()
    x_field = f.from_signed(np.asarray(x_signed))
    x0 = f.rand(rng, x_field.shape)
    return x0, f.sub(x_field, x0)


@dataclass
class Msg2:
    """Prover's second message, held as per-verifier share arrays."""

    wrap_bits: tuple[np.ndarray, np.ndarray]      # (r, b) each
    masks: tuple[np.ndarray, np.ndarray]          # (r,) each
    norm_v: tuple[np.ndarray, np.ndarray]         # (b',) each
    norm_u: tuple[np.ndarray, np.ndarray] | None  # (b',) each unless power of two

    def slice_bytes(self, j: int, field: PrimeField) -> bytes:
        parts = [field.to_bytes(self.wrap_bits[j]), field.to_bytes(self.masks[j]),
                 field.to_bytes(self.norm_v[j])]
        if self.norm_u is not None:
            parts.append(field.to_bytes(self.norm_u[j]))
        return b"".join(parts)


def parse_msg2_slice(data: bytes, params: NormParams):
    f = params.field()
    lay = layout_for(params)
    w = f.spec.nbytes
    r, b, nb = lay.repetitions, lay.wrap_bits, lay.norm_bits
    expected = (r * b + r + params.norm_range_elements) * w
    if len(data) != expected:
        raise ValueError(f"message-2 slice is {len(data)} bytes, expected {expected}")
    pos = 0

    def take(count):
        nonlocal pos
        out = f.from_bytes(data[pos:pos + count * w])
        pos += count * w
        return out

    wrap = take(r * b).reshape(r, b)
    masks = take(r)
    norm_v = take(nb)
    norm_u = None if params.norm_power_of_two else take(nb)
    return wrap, masks, norm_v, norm_u


class NormProver:
    """Client side of one session; holds the full witness."""

    def __init__(self, params: NormParams, x_signed: np.ndarray,
                 rng: np.random.Generator, cheat_truncate_bits: bool = False):
        self.params = params
        self.field = params.field()
        self.rng = rng
        self.x_signed = np.asarray(x_signed, dtype=np.int64)
        if len(self.x_signed) != params.dimension:
            raise ValueError("vector length disagrees with parameters")
        self.cheat_truncate_bits = cheat_truncate_bits
        self.x_shares = share_input(params, self.x_signed, rng)
        self._witness = None

    def message2(self, z: np.ndarray, force_masks: bool = False) -> Msg2:
        """Wraparound bits + mask bits + squared-norm slack bits.

        ``force_masks`` turns the honest abort into the maximally-informed
        cheating strategy: mask as many failures as the budget allows and
        leave the rest claimed as successes.
        """
        p = self.params
        f = self.field
        wrap = p.wraparound
        y = dot_products(self.x_signed, z)
        lo, hi = wrap.window
        ok = (y >= lo) & (y <= hi)
        budget = p.repetitions - p.success_count
        failures = int((~ok).sum())
        if failures > budget and not force_masks:
            raise WraparoundAbort(
                f"{failures} failed repetitions exceed mask budget {budget}")
        g = ok.astype(np.int64)
        if failures > budget:
            # cheating: claim enough failed repetitions as successes
            doomed = np.nonzero(~ok)[0][: failures - budget]
            g[doomed] = 1
        extra = budget - int((g == 0).sum())
        for k in range(p.repetitions - 1, -1, -1):
            if extra <= 0:
                break
            if g[k] == 1:
                g[k] = 0
                extra -= 1
        v = np.where(ok, y - lo, 2 * wrap.window_radius).astype(np.int64)
        b = wrap.bits_per_check
        bits = ((v[:, None] >> np.arange(b)[None, :]) & 1).astype(np.uint64)

        norm_sq = int(np.sum(self.x_signed.astype(object) ** 2))
        vprime = norm_sq % f.q
        uprime = (p.norm_bound_sq - norm_sq) % f.q
        nb = p.norm_bit_count
        if self.cheat_truncate_bits:
            vprime %= 1 << nb
            uprime %= 1 << nb
        if max(vprime, uprime if not p.norm_power_of_two else 0) >= 1 << nb:
            raise WraparoundAbort("squared norm exceeds claimed range")
        vbits = np.asarray([(vprime >> j) & 1 for j in range(nb)], dtype=np.uint64)

        def _split(arr):
            s0 = f.rand(self.rng, np.shape(arr))
            return s0, f.sub(f.array(arr), s0)

        self._witness = (y, v, g, vprime, uprime)
        norm_u = None
        if not p.norm_power_of_two:
            ubits = np.asarray([(uprime >> j) & 1 for j in range(nb)], dtype=np.uint64)
            norm_u = _split(ubits)
        return Msg2(_split(bits), _split(g), _split(vbits), norm_u)

    def witness_vector(self, msg2: Msg2) -> np.ndarray:
        """Full extended witness [1, X, g, S, v', u', window bits].

        Reconstructed from the message-2 shares rather than the honest
        intermediate values, so a (cheating) caller that perturbed the
        message still produces the witness the verifiers will see.
        """
        p = self.params
        f = self.field
        y, _, _, _, _ = self._witness
        wrap = p.wraparound
        g_vals = f.add(msg2.masks[0], msg2.masks[1])
        bit_vals = f.add(msg2.wrap_bits[0], msg2.wrap_bits[1])
        weights = f.array([1 << j for j in range(wrap.bits_per_check)])
        recomposed = f.sum(f.mul(bit_vals, weights[None, :]), axis=1)
        y_field = f.from_signed(y)
        s_vals = f.sub(f.add(y_field, f.array([wrap.window_radius] * p.repetitions)),
                       recomposed)
        vprime_vals = f.add(msg2.norm_v[0], msg2.norm_v[1])
        parts = [f.array([1]), f.from_signed(self.x_signed), g_vals, s_vals,
                 vprime_vals]
        if msg2.norm_u is not None:
            parts.append(f.add(msg2.norm_u[0], msg2.norm_u[1]))
        parts.append(bit_vals.reshape(-1))
        return np.concatenate(parts)

    def message4(self, rc_values: np.ndarray, msg2: Msg2) -> list[InnerProductProof]:
        p = self.params
        f = self.field
        system = _constraint_system(p)
        x_ext = self.witness_vector(msg2)
        proofs = []
        for i in range(p.quad_reps):
            rows, cols, vals, _ = system.combine(int(rc_values[i]))
            v_full = f.coo_matvec(rows, cols, vals, x_ext, len(x_ext))
            proofs.append(prove_inner_product(f, x_ext, v_full, self.rng))
        return proofs

    @staticmethod
    def msg4_bytes(proofs: list[InnerProductProof], j: int, field: PrimeField) -> bytes:
        parts = []
        for pr in proofs:
            rf, rg, h = pr.slice_for(j)
            parts += [field.to_bytes(rf), field.to_bytes(rg), field.to_bytes(h)]
        return b"".join(parts)


def parse_msg4_slice(data: bytes, params: NormParams) -> list[tuple]:
    f = params.field()
    lay = layout_for(params)
    block = sqrt_ceil(lay.n_vars + 1)
    w = f.spec.nbytes
    per = (4 * block + 1) * w
    if len(data) != per * params.quad_reps:
        raise ValueError(f"message-4 slice is {len(data)} bytes, expected "
                         f"{per * params.quad_reps}")
    out = []
    for i in range(params.quad_reps):
        chunk = data[i * per:(i + 1) * per]
        rf = f.from_bytes(chunk[: block * w])
        rg = f.from_bytes(chunk[block * w: 2 * block * w])
        h = f.from_bytes(chunk[2 * block * w:])
        out.append((rf, rg, h))
    return out, block


# -- verifier ---------------------------------------------------------------------


@dataclass
class VerifierMessage:
    """One verifier's half of the single simultaneous exchange."""

    success_share: int
    range_share: int | None
    quad: list[VerifierExchange]
    round_hashes: list[bytes] | None = None

    def to_bytes(self, field: PrimeField) -> bytes:
        parts = [field.to_bytes(field.array([self.success_share]))]
        if self.range_share is not None:
            parts.append(field.to_bytes(field.array([self.range_share])))
        for ex in self.quad:
            parts += [field.to_bytes(ex.f_rho), field.to_bytes(ex.g_rho),
                      field.to_bytes(field.array([ex.h_rho, ex.h_sum]))]
        if self.round_hashes:
            parts += list(self.round_hashes)
        return b"".join(parts)


class NormVerifier:
    """One verifier's local computation; sees only its own shares."""

    def __init__(self, params: NormParams, verifier_index: int, x_share: np.ndarray):
        self.params = params
        self.j = verifier_index
        self.field = params.field()
        self.x_share = params.field().array(x_share)
        if len(self.x_share) != params.dimension:
            raise ValueError("share length disagrees with parameters")
        self.failure: str | None = None
        self._x_ext: np.ndarray | None = None
        self._msg2 = None

    def consume_msg2(self, z: np.ndarray, wrap_bits: np.ndarray, masks: np.ndarray,
                     norm_v: np.ndarray, norm_u: np.ndarray | None) -> None:
        p = self.params
        f = self.field
        lay = layout_for(p)
        s_share = compute_sk_share(self.x_share, z, wrap_bits, p.wraparound,
                                   self.j, f)
        const = f.array([1 if self.j == 0 else 0])
        parts = [const, self.x_share, masks, s_share, norm_v]
        if norm_u is not None:
            parts.append(norm_u)
        parts.append(wrap_bits.reshape(-1))
        self._x_ext = np.concatenate([f.array(t) for t in parts])
        assert len(self._x_ext) == lay.n_vars + 1
        self._msg2 = (masks, norm_v, norm_u)

    def exchange(self, rc_values: np.ndarray, rho_values: np.ndarray,
                 msg4_slices: list[tuple], block: int) -> VerifierMessage:
        p = self.params
        f = self.field
        masks, norm_v, norm_u = self._msg2
        success_share = int(f.sum(masks))
        range_share = None
        if not p.norm_power_of_two:
            weights = f.array([1 << j for j in range(p.norm_bit_count)])
            range_share = int(f.add_scalar(int(f.dot(weights, norm_v)),
                                           int(f.dot(weights, norm_u))))
        system = _constraint_system(p)
        quad = []
        for i in range(p.quad_reps):
            rows, cols, vals, _ = system.combine(int(rc_values[i]))
            v_share = f.coo_matvec(rows, cols, vals, self._x_ext, len(self._x_ext))
            quad.append(inner_product_exchange(
                f, msg4_slices[i], self._x_ext, v_share, int(rho_values[i]), block))
        return VerifierMessage(success_share, range_share, quad)

    def decide(self, own: VerifierMessage, peer: VerifierMessage,
               rc_values: np.ndarray) -> tuple[bool, str]:
        p = self.params
        f = self.field
        if self.failure:
            return False, self.failure
        if f.add_scalar(own.success_share, peer.success_share) \
                != p.success_count % f.q:
            return False, "success-count"
        if own.range_share is not None:
            total = f.add_scalar(own.range_share, peer.range_share)
            if total != p.norm_bound_sq % f.q:
                return False, "range-linear"
        system = _constraint_system(p)
        for i in range(p.quad_reps):
            _, _, _, target = system.combine(int(rc_values[i]))
            ex0 = own.quad[i] if self.j == 0 else peer.quad[i]
            ex1 = peer.quad[i] if self.j == 0 else own.quad[i]
            ok, cause = inner_product_decide(f, ex0, ex1, target)
            if not ok:
                return False, cause
        return True, "accept"


# -- drivers: interactive coins and Fiat-Shamir -------------------------------------


@dataclass
class SessionResult:
    accept: bool
    cause: str
    message_bits: dict[str, int]
    transcript: list[tuple[str, bytes]]
    proof_bytes: bytes | None = None


def _emitted_bits(params: NormParams, msg2: Msg2, proofs) -> dict[str, int]:
    sizes = message_sizes(params)
    return {"msg1": sizes.msg1_bits, "msg2": sizes.msg2_bits,
            "msg3": sizes.msg3_bits, "msg4": sizes.msg4_bits,
            "exchange": sizes.exchange_bits}


def run_interactive(params: NormParams, x_signed: np.ndarray, seed: int,
                    challenges: dict | None = None,
                    cheat_truncate_bits: bool = False,
                    force_masks: bool = False,
                    msg2_tamper=None) -> SessionResult:
    """Drive prover and both verifiers with seeded shared public coins.

    ``challenges`` may pin any of "z", "rc", "rho" for cross-checking the
    interactive engine against Fiat-Shamir-derived coins.  ``msg2_tamper``
    is a prover-side corruption hook applied to the second message before
    the witness is extended (a consistent cheating prover, not transport
    noise).
    """
    f = params.field()
    lay = layout_for(params)
    streams = np.random.SeedSequence(seed).spawn(2)
    prover_rng = np.random.Generator(np.random.PCG64(streams[0]))
    coins = np.random.Generator(np.random.PCG64(streams[1]))
    challenges = challenges or {}

    prover = NormProver(params, x_signed, prover_rng,
                        cheat_truncate_bits=cheat_truncate_bits)
    z = challenges.get("z")
    if z is None:
        z = sample_challenge(params.wraparound, coins)
    transcript = [("msg1", challenge_to_bytes(z))]
    try:
        msg2 = prover.message2(z, force_masks=force_masks)
    except WraparoundAbort:
        return SessionResult(False, "wraparound-abort",
                             {"msg1": 2 * params.dimension * params.repetitions},
                             transcript)
    if msg2_tamper is not None:
        msg2_tamper(msg2)
    transcript.append(("msg2.0", msg2.slice_bytes(0, f)))
    transcript.append(("msg2.1", msg2.slice_bytes(1, f)))

    rc = challenges.get("rc")
    if rc is None:
        rc = f.rand(coins, params.quad_reps)
    transcript.append(("msg3", f.to_bytes(rc)))
    proofs = prover.message4(rc, msg2)
    transcript.append(("msg4.0", NormProver.msg4_bytes(proofs, 0, f)))
    transcript.append(("msg4.1", NormProver.msg4_bytes(proofs, 1, f)))

    block = sqrt_ceil(lay.n_vars + 1)
    rho = challenges.get("rho")
    if rho is None:
        rho = f.array([sample_rho(f, block, coins) for _ in range(params.quad_reps)])

    verifiers = []
    messages = []
    for j in (0, 1):
        ver = NormVerifier(params, j, prover.x_shares[j])
        ver.consume_msg2(z, msg2.wrap_bits[j], msg2.masks[j],
                         msg2.norm_v[j], None if msg2.norm_u is None
                         else msg2.norm_u[j])
        slices = [p.slice_for(j) for p in proofs]
        messages.append(ver.exchange(rc, rho, slices, block))
        verifiers.append(ver)
    transcript.append(("exchange.0", messages[0].to_bytes(f)))
    transcript.append(("exchange.1", messages[1].to_bytes(f)))

    ok0, cause0 = verifiers[0].decide(messages[0], messages[1], rc)
    ok1, cause1 = verifiers[1].decide(messages[1], messages[0], rc)
    accept = ok0 and ok1
    cause = "accept" if accept else (cause0 if not ok0 else cause1)
    return SessionResult(accept, cause, _emitted_bits(params, msg2, proofs),
                         transcript)


def _params_header(params: NormParams) -> bytes:
    return struct.pack("<QQQQd", params.dimension, params.repetitions,
                       params.success_count, params.quad_reps, params.eta) \
        + params.norm_bound_sq.to_bytes(32, "little") \
        + params.modulus.to_bytes(32, "little")


def _params_match(header: bytes, params: NormParams) -> bool:
    return header == _params_header(params)


def params_from_header(header: bytes, rho: float = 2.0**-50,
                       delta: float = 2.0**-50) -> NormParams:
    """Rebuild session parameters from a proof header.

    The error targets are not part of the wire format (they only drive
    parameter selection), so the caller supplies them for bookkeeping.
    """
    d, r, sc, t, eta = struct.unpack_from("<QQQQd", header, 0)
    off = struct.calcsize("<QQQQd")
    bound = int.from_bytes(header[off:off + 32], "little")
    modulus = int.from_bytes(header[off + 32:off + 64], "little")
    return NormParams(dimension=d, norm_bound_sq=bound, modulus=modulus,
                      rho=rho, delta=delta, eta=eta, repetitions=r,
                      success_count=sc, quad_reps=t)


def ni_prove(params: NormParams, x_signed: np.ndarray, rng: np.random.Generator,
             config: fs.FsConfig | None = None, max_retries: int = 8,
             cheat_truncate_bits: bool = False,
             force_masks: bool = False) -> fs.NiProof:
    """One-shot proof via the distributed Fiat-Shamir transform.

    A wraparound abort (probability err_complete, negligible at real
    parameters) is retried with fresh blinds, which re-randomizes the
    derived challenge matrix; each retry is an independent transcript.
    """
    config = config or fs.FsConfig()
    f = params.field()
    lay = layout_for(params)
    last_abort = None
    for _ in range(max_retries):
        prover = NormProver(params, x_signed, rng,
                            cheat_truncate_bits=cheat_truncate_bits)
        x_payloads = (f.to_bytes(prover.x_shares[0]), f.to_bytes(prover.x_shares[1]))
        blinds = [(fs.sample_blind(config, rng), fs.sample_blind(config, rng))
                  for _ in range(FS_ROUNDS_STATISTICAL)]
        stages: list[tuple[bytes, bytes]] = []
        hashes: list[tuple[bytes, bytes]] = []

        def _round(i: int) -> bytes:
            pi0 = b"".join(s[0] for s in stages)
            pi1 = b"".join(s[1] for s in stages)
            r0 = fs.view_commitment(config, i, 0, x_payloads[0], blinds[i - 1][0], pi0)
            r1 = fs.view_commitment(config, i, 1, x_payloads[1], blinds[i - 1][1], pi1)
            hashes.append((r0, r1))
            return fs.combine_commitments(config, i, r0, r1)

        stages.append((b"", b""))
        seed1 = _round(1)
        z = fs.expand_sign_matrix(config, seed1, params.repetitions,
                                  params.dimension)
        try:
            msg2 = prover.message2(z, force_masks=force_masks)
        except WraparoundAbort as exc:
            last_abort = exc
            continue
        stages.append((msg2.slice_bytes(0, f), msg2.slice_bytes(1, f)))
        seed2 = _round(2)
        rc = fs.expand_field_elements(config, seed2, params.quad_reps, f)
        proofs = prover.message4(rc, msg2)
        stages.append((NormProver.msg4_bytes(proofs, 0, f),
                       NormProver.msg4_bytes(proofs, 1, f)))
        _round(3)
        return fs.NiProof("statistical", config.kappa_bits, _params_header(params),
                          x_payloads, stages, blinds, hashes)
    raise WraparoundAbort(f"aborted {max_retries} times: {last_abort}")


@dataclass
class _NiVerifierState:
    verifier: NormVerifier | None
    own_msg: VerifierMessage | None
    rc: np.ndarray | None
    peer_hashes: list[bytes]
    failure: str | None = None


def ni_verify_local(params: NormParams, proof: fs.NiProof, verifier_index: int,
                    config: fs.FsConfig | None = None,
                    x_share_override: np.ndarray | None = None
                    ) -> tuple[_NiVerifierState, VerifierMessage | None]:
    """Local phase: recompute own commitments, derive challenges, run checks.

    Returns the state plus the exchange message; a ``None`` message means
    the slice already failed locally (the state carries the cause).
    """
    config = config or fs.FsConfig(kappa_bits=proof.kappa_bits)
    j = verifier_index
    f = params.field()
    lay = layout_for(params)
    peer = [proof.round_hashes[i][1 - j] for i in range(proof.rounds)]

    def fail(cause: str):
        return _NiVerifierState(None, None, None, peer, cause), None

    if not _params_match(proof.header, params) or proof.variant != "statistical" \
            or proof.rounds != FS_ROUNDS_STATISTICAL:
        return fail("malformed")
    try:
        x_share = f.from_bytes(proof.x_payloads[j]) \
            if x_share_override is None else f.array(x_share_override)
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
        z = fs.expand_sign_matrix(config, seeds[0], params.repetitions,
                                  params.dimension)
        wrap_bits, masks, norm_v, norm_u = parse_msg2_slice(
            proof.stage_payloads[1][j], params)
        rc = fs.expand_field_elements(config, seeds[1], params.quad_reps, f)
        slices, block = parse_msg4_slice(proof.stage_payloads[2][j], params)
        rho = fs.expand_field_elements(config, seeds[2], params.quad_reps, f,
                                       floor=block)
        ver = NormVerifier(params, j, x_share)
        ver.consume_msg2(z, wrap_bits, masks, norm_v, norm_u)
        msg = ver.exchange(rc, rho, slices, block)
    except (ValueError, fs.FsError):
        return fail("malformed")
    my_hashes = [proof.round_hashes[i][j] for i in range(proof.rounds)]
    msg.round_hashes = my_hashes
    return _NiVerifierState(ver, msg, rc, peer), msg


def ni_verify_finish(state: _NiVerifierState,
                     peer_msg: VerifierMessage | None) -> tuple[bool, str]:
    if state.failure:
        return False, state.failure
    if peer_msg is None:
        return False, "malformed"
    if peer_msg.round_hashes != state.peer_hashes:
        # the peer's recomputed commitments disagree with what the proof
        # bundle claimed on its behalf
        return False, "fs-inconsistent"
    return state.verifier.decide(state.own_msg, peer_msg, state.rc)


def ni_verify(params: NormParams, proof: fs.NiProof,
              config: fs.FsConfig | None = None) -> tuple[bool, str]:
    """Run both verifiers and the simultaneous exchange in-process."""
    st0, msg0 = ni_verify_local(params, proof, 0, config)
    st1, msg1 = ni_verify_local(params, proof, 1, config)
    ok0, cause0 = ni_verify_finish(st0, msg1)
    ok1, cause1 = ni_verify_finish(st1, msg0)
    if ok0 and ok1:
        return True, "accept"
    return False, cause0 if not ok0 else cause1


def run_fs(params: NormParams, x_signed: np.ndarray, seed: int,
           config: fs.FsConfig | None = None,
           cheat_truncate_bits: bool = False,
           force_masks: bool = False) -> SessionResult:
    """Full one-shot session: prove, serialize, verify both slices."""
    config = config or fs.FsConfig()
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    try:
        proof = ni_prove(params, x_signed, rng, config,
                         cheat_truncate_bits=cheat_truncate_bits,
                         force_masks=force_masks)
    except WraparoundAbort:
        return SessionResult(False, "wraparound-abort", {}, [])
    blob = proof.to_bytes()
    reparsed = fs.NiProof.from_bytes(blob)
    accept, cause = ni_verify(params, reparsed, config)
    sizes = message_sizes(params, config.kappa_bits)
    bits = {"msg1": sizes.msg1_bits, "msg2": sizes.msg2_bits,
            "msg3": sizes.msg3_bits, "msg4": sizes.msg4_bits,
            "exchange": sizes.exchange_bits, "fs_extra": sizes.fs_extra_bits}
    return SessionResult(accept, cause, bits, [("proof", blob)], proof_bytes=blob)
