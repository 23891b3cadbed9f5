"""Wraparound detection: randomized dot-product tests against modular overflow.

The squared norm of a shared vector is only checkable modulo q.  To rule
out the sum having wrapped past q, the verifiers draw r random vectors Z
with entries -1/0/+1 (probabilities 1/4, 1/2, 1/4) and the prover shows
each dot product Y_k = <Z_k, X> stays inside a small window.  If the true
squared norm is at most B, each test passes with probability >= 1 - eta;
if it is at least q, no prover strategy passes a single test with
probability better than 1/2.

Failed tests are masked: the prover shares a bit g_k per repetition and
must leave exactly ``success_count`` of them set, so the verifiers learn
only whether enough repetitions passed, never which ones.  The masked
window membership itself becomes the quadratic claim g_k * S_k = 0 checked
downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .field import PrimeField, get_field
from .sharing import Share


class WraparoundError(ValueError):
    pass


class WraparoundAbort(Exception):
    """Honest-prover abort: more failed repetitions than the mask budget."""


_Z_TABLE = np.array([0, 0, 1, -1], dtype=np.int8)  # 2-bit decode, P(0)=1/2


@dataclass(frozen=True)
class WraparoundParams:
    """Parameters of the repeated dot-product test.

    ``eta`` is the per-repetition completeness error target; the window
    half-width derives from it as alpha = sqrt(ln(2/eta)), scaled by
    sqrt(B).  The checked interval is widened to a power-of-two span
    [-A, W-A-1] with A = ceil(alpha*sqrt(B)) and W the least power of two
    covering 2A+1, so each repetition needs only ``bits_per_check`` shared
    bits and no equality check.  Widening only helps completeness (the
    effective per-repetition error is 2*exp(-(A/sqrt(B))^2) <= eta);
    soundness is re-validated at the widened window via
    ``check_field_conditions``.
    """

    dimension: int
    norm_bound_sq: int
    modulus: int
    repetitions: int
    eta: float
    success_count: int

    def __post_init__(self) -> None:
        if not (0 < self.success_count <= self.repetitions):
            raise WraparoundError("success count must be in 1..repetitions")
        if self.repetitions > 1 and 2 * self.success_count <= self.repetitions:
            raise WraparoundError("success fraction must exceed 1/2")
        if not (0 < self.eta < 1):
            raise WraparoundError("eta must be in (0, 1)")

    @property
    def tau(self) -> float:
        return self.success_count / self.repetitions

    @property
    def alpha(self) -> float:
        return math.sqrt(math.log(2.0 / self.eta))

    @property
    def window_radius(self) -> int:
        """A = ceil(alpha * sqrt(B))."""
        return math.ceil(self.alpha * math.sqrt(self.norm_bound_sq))

    @property
    def bits_per_check(self) -> int:
        """b with 2^b the least power of two >= 2A+1."""
        return (2 * self.window_radius + 1 - 1).bit_length()

    @property
    def window(self) -> tuple[int, int]:
        """Checked interval [lo, hi] for Y_k, of power-of-two width."""
        a = self.window_radius
        return (-a, (1 << self.bits_per_check) - a - 1)

    @property
    def effective_alpha(self) -> float:
        lo, hi = self.window
        return min(-lo, hi) / math.sqrt(self.norm_bound_sq)

    def check_field_conditions(self) -> list[str]:
        """Violated lower bounds on q, empty when all hold.

        The base conditions are q >= max{B*ln(2/eta)/4000,
        2600*sqrt(B*ln(2/eta)), 2r}; the widened window additionally needs
        them at its own (larger) half-width, and the per-repetition range
        check needs q > 3*(2^b - 1) + 2.
        """
        q = self.modulus
        bln = self.norm_bound_sq * math.log(2.0 / self.eta)
        lo, hi = self.window
        wide = max(-lo, hi) / math.sqrt(self.norm_bound_sq)  # soundness alpha
        wide_sq_b = wide * wide * self.norm_bound_sq
        bad = []
        if q < bln / 4000:
            bad.append(f"q >= B*ln(2/eta)/4000 = {bln / 4000:.6g}")
        if q < 2600 * math.sqrt(bln):
            bad.append(f"q >= 2600*sqrt(B*ln(2/eta)) = {2600 * math.sqrt(bln):.6g}")
        if q < 2 * self.repetitions:
            bad.append(f"q >= 2r = {2 * self.repetitions}")
        if q < wide_sq_b / 4000:
            bad.append(f"q >= widened alpha^2*B/4000 = {wide_sq_b / 4000:.6g}")
        if q < 2600 * math.sqrt(wide_sq_b):
            bad.append(f"q >= 2600*widened alpha*sqrt(B) = {2600 * math.sqrt(wide_sq_b):.6g}")
        span = (1 << self.bits_per_check) - 1
        if q <= 3 * span + 2:
            bad.append(f"q > 3*(2^b - 1) + 2 = {3 * span + 2}")
        return bad

    def validate(self) -> None:
        bad = self.check_field_conditions()
        if bad:
            raise WraparoundError("field size too small: " + "; ".join(bad))


@dataclass
class WraparoundProof:
    """Per-verifier payloads: window bit shares (r x b) and mask-bit shares (r)."""

    v_bit_shares: tuple[np.ndarray, np.ndarray]
    g_shares: tuple[np.ndarray, np.ndarray]
    bits_per_check: int


def sample_challenge(params: WraparoundParams, rng: np.random.Generator) -> np.ndarray:
    """r x d challenge matrix with i.i.d. entries -1 w.p. 1/4, 0 w.p. 1/2, +1 w.p. 1/4."""
    raw = rng.integers(0, 4, size=(params.repetitions, params.dimension))
    return _Z_TABLE[raw]


def challenge_to_bytes(z: np.ndarray) -> bytes:
    """Pack the challenge at 2 bits per entry (00->0, 01->+1, 10->-1)."""
    codes = np.zeros(z.shape, dtype=np.uint8)
    codes[z == 1] = 1
    codes[z == -1] = 2
    flat = codes.ravel()
    pad = (-len(flat)) % 4
    if pad:
        flat = np.concatenate([flat, np.zeros(pad, dtype=np.uint8)])
    grouped = flat.reshape(-1, 4)
    packed = (grouped[:, 0] | (grouped[:, 1] << 2)
              | (grouped[:, 2] << 4) | (grouped[:, 3] << 6))
    return packed.astype(np.uint8).tobytes()


def challenge_from_bytes(data: bytes, repetitions: int, dimension: int) -> np.ndarray:
    packed = np.frombuffer(data, dtype=np.uint8)
    codes = np.empty(len(packed) * 4, dtype=np.uint8)
    codes[0::4] = packed & 3
    codes[1::4] = (packed >> 2) & 3
    codes[2::4] = (packed >> 4) & 3
    codes[3::4] = (packed >> 6) & 3
    codes = codes[: repetitions * dimension]
    out = np.zeros(codes.shape, dtype=np.int8)
    out[codes == 1] = 1
    out[codes == 2] = -1
    return out.reshape(repetitions, dimension)


def dot_products(x_signed: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Integer dot products Y_k = sum_i Z[k,i] * x[i] (prover side)."""
    return z.astype(np.int64) @ np.asarray(x_signed, dtype=np.int64)


def prove_wraparound(x_signed: np.ndarray, z: np.ndarray, params: WraparoundParams,
                     rng: np.random.Generator) -> WraparoundProof:
    """Honest prover: window bits plus mask bits with exactly the allowed zeros.

    Raises :class:`WraparoundAbort` when more repetitions fail than the mask
    budget (r - success_count) covers; surviving extra successes are masked
    last-first so the zero count is exact.
    """
    f = get_field(params.modulus)
    y = dot_products(x_signed, z)
    lo, hi = params.window
    ok = (y >= lo) & (y <= hi)
    budget = params.repetitions - params.success_count
    failures = int((~ok).sum())
    if failures > budget:
        raise WraparoundAbort(f"{failures} failed repetitions exceed mask budget {budget}")

    g = ok.astype(np.int64)
    extra = budget - failures
    if extra:
        for k in range(params.repetitions - 1, -1, -1):
            if g[k] == 1:
                g[k] = 0
                extra -= 1
                if extra == 0:
                    break

    # Window slack V_k = Y_k - lo for passing tests; failed tests encode the
    # fixed value 2A (always in range) so their bits are still bits.
    v = np.where(ok, y - lo, 2 * params.window_radius).astype(np.int64)
    b = params.bits_per_check
    bits = ((v[:, None] >> np.arange(b)[None, :]) & 1).astype(np.uint64)

    bits0 = f.rand(rng, bits.shape)
    bits1 = f.sub(f.array(bits), bits0)
    g_arr = f.array(g)
    g0 = f.rand(rng, g_arr.shape)
    g1 = f.sub(g_arr, g0)
    return WraparoundProof((bits0, bits1), (g0, g1), b)


def compute_sk_share(x_share: np.ndarray, z: np.ndarray, v_bit_share: np.ndarray,
                     params: WraparoundParams, verifier_index: int,
                     field: PrimeField | None = None) -> np.ndarray:
    """This verifier's share of S_k = Y_k + A - sum_j 2^j v_{k,j} (mod q).

    Purely local: a signed combination of the X shares, the public constant
    A (assigned to verifier 0), and the bit shares.
    """
    f = field or get_field(params.modulus)
    if v_bit_share.shape != (params.repetitions, params.bits_per_check):
        raise WraparoundError("bit share shape disagrees with parameters")
    y_share = f.signed_matmul(z, x_share)
    weights = f.array([1 << j for j in range(params.bits_per_check)])
    recomposed = f.mul(v_bit_share, weights[None, :])
    recomposed = f.sum(recomposed, axis=1)
    s = f.sub(y_share, recomposed)
    if verifier_index == 0:
        s = f.add(s, f.array([params.window_radius % f.q] * params.repetitions))
    return s


def success_count_share(g_share: np.ndarray, verifier_index: int,
                        field: PrimeField) -> Share:
    return Share(verifier_index, int(field.sum(g_share)))


def success_count_check(g_shares: tuple[np.ndarray, np.ndarray],
                        params: WraparoundParams,
                        field: PrimeField | None = None) -> bool:
    """Linear equality sum_k g_k = success_count over the exchanged shares."""
    f = field or get_field(params.modulus)
    s0 = success_count_share(g_shares[0], 0, f)
    s1 = success_count_share(g_shares[1], 1, f)
    return f.add_scalar(s0.value, s1.value) == params.success_count % f.q


def real_wraparound_view(params: WraparoundParams, verifier_index: int,
                         x_share: np.ndarray, x_signed: np.ndarray,
                         rng: np.random.Generator):
    """Verifier ``verifier_index``'s view of one honest subprotocol run.

    Returns (Z, its bit shares, its mask shares, the peer's half of the
    mask-count equality, its local window-slack shares); raises
    :class:`WraparoundAbort` exactly when the honest prover would.
    """
    f = get_field(params.modulus)
    z = sample_challenge(params, rng)
    proof = prove_wraparound(x_signed, z, params, rng)
    j = verifier_index
    own = success_count_share(proof.g_shares[j], j, f)
    peer_sum = f.sub_scalar(params.success_count, own.value)
    s_share = compute_sk_share(np.asarray(x_share), z, proof.v_bit_shares[j],
                               params, j, f)
    return z, proof.v_bit_shares[j], proof.g_shares[j], peer_sum, s_share


def simulate_wraparound_view(params: WraparoundParams, verifier_index: int,
                             x_share: np.ndarray, rng: np.random.Generator):
    """Input-oblivious simulator for one verifier's subprotocol view.

    Uses the canonical accepting assignment of the zero vector: the first
    ``success_count`` repetitions carry the window slack of Y = 0, the rest
    the fixed failure encoding; shares of either are fresh uniform elements,
    and the peer's equality message is the unique completion of the mask
    count.  Conditioned on the real prover not aborting, this distribution
    equals the real view exactly.
    """
    f = get_field(params.modulus)
    z = sample_challenge(params, rng)
    r, b = params.repetitions, params.bits_per_check
    bit_share = f.rand(rng, (r, b))
    g_share = f.rand(rng, r)
    j = verifier_index
    own = success_count_share(g_share, j, f)
    peer_sum = f.sub_scalar(params.success_count, own.value)
    s_share = compute_sk_share(np.asarray(x_share), z, bit_share, params, j, f)
    return z, bit_share, g_share, peer_sum, s_share


# -- error formulas ------------------------------------------------------------
#
# Both completeness and soundness errors are exact binomial tails.  The
# Chernoff forms exp(-2(1-eta-tau)^2 r) and exp(-2(tau-1/2)^2 r) can be very
# loose near eta ~ 0, so the parameter search evaluates the tails directly:
# soundness in exact integer arithmetic, completeness by summing the (tiny)
# failure-side terms in the log domain via lgamma.


def _check_tail_args(repetitions: int, tau: float) -> int:
    if repetitions < 1:
        raise WraparoundError("need at least one repetition")
    threshold = math.floor(tau * repetitions + 0.5)
    # Accept display-rounded thresholds (e.g. tau printed to 4 decimals);
    # reject genuine non-integers like tau*r = 1.5.
    if abs(threshold - tau * repetitions) > 0.05:
        raise WraparoundError(f"tau*r = {tau * repetitions} is not an integer")
    return threshold


def err_sound_log2(repetitions: int, tau: float) -> float:
    """log2 P[Binomial(r, 1/2) >= tau*r], computed exactly over the integers."""
    threshold = _check_tail_args(repetitions, tau)
    total = sum(math.comb(repetitions, j) for j in range(threshold, repetitions + 1))
    if total == 0:
        return -math.inf
    return _log2_int(total) - repetitions


def err_sound(repetitions: int, tau: float) -> float:
    """Cheating-prover pass probability over r repetitions at threshold tau."""
    return 2.0 ** err_sound_log2(repetitions, tau)


def err_complete_log2(repetitions: int, tau: float, eta: float) -> float:
    """log2 P[Binomial(r, 1-eta) < tau*r]: the honest abort probability.

    Summed from the small (failure) side, term k = P[exactly k failures] for
    k > r - tau*r, each in the log domain; no catastrophic cancellation even
    for eta ~ 2^-90.
    """
    if eta == 0:
        return -math.inf
    threshold = _check_tail_args(repetitions, tau)
    max_fail = repetitions - threshold
    log2_eta = math.log2(eta)
    log2_1m = math.log1p(-eta) / math.log(2.0)
    total = -math.inf
    for k in range(max_fail + 1, repetitions + 1):
        term = (_log2_int(math.comb(repetitions, k))
                + k * log2_eta + (repetitions - k) * log2_1m)
        total = np.logaddexp2(total, term)
        if term < total - 64:  # later terms only shrink
            break
    return float(total)


def err_complete(repetitions: int, tau: float, eta: float) -> float:
    return 2.0 ** err_complete_log2(repetitions, tau, eta)


def _log2_int(n: int) -> float:
    if n.bit_length() <= 900:
        return math.log2(n)
    shift = n.bit_length() - 900
    return math.log2(n >> shift) + shift
