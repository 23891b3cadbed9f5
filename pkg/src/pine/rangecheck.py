"""One-message range check for linear combinations of prover-held values.

To show sum_i a_i * Q_i lands in [lo, hi] mod q, the prover bit-decomposes
the two slack values V = sum - lo and U = hi - sum and secret-shares the
bits.  The verifiers check one linear equality over the shared bits,
(sum_j v_j 2^j) + (sum_j u_j 2^j) = hi - lo; everything else the claim
needs -- that the shares really hold bits, and that the v-bits recompose to
sum - lo -- is deferred to the quadratic batch via ``residual_constraints``.

When the interval width hi - lo + 1 is a power of two, the U bits and the
equality check are dropped entirely: "V fits in b bits" is already
equivalent to the claim.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import PrimeField
from .sharing import Share, ShareVector, share_vector


class RangeCheckError(ValueError):
    pass


@dataclass(frozen=True)
class RangeClaim:
    """Public statement: sum_i coeffs[i] * Q_i in [lower, upper] mod q.

    Bounds are signed representatives.  Requires q > 3*(upper-lower) + 2 so
    that a passing transcript pins the sum into the interval without modular
    ambiguity.
    """

    field: PrimeField
    coeffs: np.ndarray
    lower: int
    upper: int

    def __post_init__(self) -> None:
        if self.lower > self.upper:
            raise RangeCheckError(f"empty range [{self.lower}, {self.upper}]")
        if self.field.q <= 3 * (self.upper - self.lower) + 2:
            raise RangeCheckError(
                f"field size {self.field.q} too small for width "
                f"{self.upper - self.lower + 1}: need q > 3*(upper-lower)+2")

    @property
    def width(self) -> int:
        return self.upper - self.lower + 1

    @property
    def bit_count(self) -> int:
        # 0 bits for a singleton range: V = U = 0 and the check degenerates.
        return (self.width - 1).bit_length()

    @property
    def power_of_two_mode(self) -> bool:
        return self.width == (1 << self.bit_count)


@dataclass
class RangeProof:
    """Per-verifier bit shares for V (always) and U (unless power-of-two)."""

    v_bit_shares: tuple[ShareVector, ShareVector]
    u_bit_shares: tuple[ShareVector, ShareVector] | None
    bit_count: int
    power_of_two_mode: bool

    def slice_for(self, verifier_index: int) -> tuple[np.ndarray, np.ndarray | None]:
        v = self.v_bit_shares[verifier_index].values
        u = None if self.u_bit_shares is None else self.u_bit_shares[verifier_index].values
        return v, u

    def element_count(self) -> int:
        return self.bit_count * (1 if self.power_of_two_mode else 2)


def prove_range(q_values: np.ndarray, claim: RangeClaim,
                rng: np.random.Generator) -> RangeProof:
    """Honest prover message: shared bit decompositions of V and U.

    ``q_values`` are the prover-known summands as field elements.  A cheating
    prover may emit arbitrary share values instead; nothing here validates
    them -- detection happens in the linear check and the quadratic batch.
    """
    f = claim.field
    b = claim.bit_count
    total = int(f.dot(claim.coeffs, f.array(q_values)))
    v = (total - claim.lower) % f.q
    bits_v = _bits_mod(v, b)
    v_shares = share_vector(f, bits_v, rng)
    if claim.power_of_two_mode:
        return RangeProof(v_shares, None, b, True)
    u = (claim.upper - total) % f.q
    bits_u = _bits_mod(u, b)
    u_shares = share_vector(f, bits_u, rng)
    return RangeProof(v_shares, u_shares, b, False)


def _bits_mod(value: int, width: int) -> np.ndarray:
    if value >= (1 << width):
        raise RangeCheckError(
            f"slack value {value} exceeds {width}-bit range; claim does not hold")
    return np.asarray([(value >> j) & 1 for j in range(width)], dtype=np.uint64)


def bit_weights(field: PrimeField, width: int) -> np.ndarray:
    return field.array([1 << j for j in range(width)])


def verifier_linear_share(proof_slice: tuple[np.ndarray, np.ndarray | None],
                          claim: RangeClaim, verifier_index: int) -> Share:
    """This verifier's share of (sum v_j 2^j) + (sum u_j 2^j)."""
    f = claim.field
    v, u = proof_slice
    weights = bit_weights(f, claim.bit_count)
    acc = int(f.dot(weights, f.array(v)))
    if u is not None:
        acc = f.add_scalar(acc, int(f.dot(weights, f.array(u))))
    return Share(verifier_index, acc)


def verify_range_linear(proof: RangeProof, claim: RangeClaim) -> bool:
    """Run both verifiers' halves of the linear equality and decide.

    Vacuously accepts in power-of-two mode, where no equality is checked.
    """
    if claim.power_of_two_mode:
        return True
    f = claim.field
    z0 = verifier_linear_share(proof.slice_for(0), claim, 0)
    z1 = verifier_linear_share(proof.slice_for(1), claim, 1)
    target = (claim.upper - claim.lower) % f.q
    return f.add_scalar(z0.value, z1.value) == target


@dataclass(frozen=True)
class LinearRelation:
    """Deferred relation: sum_i coeffs[i]*Q_i - lower = sum_j 2^j * v_j (mod q).

    ``input_indices`` name the Q variables and ``v_bit_indices`` the fresh bit
    variables inside whatever global variable vector the caller maintains.
    """

    input_indices: tuple[int, ...]
    input_coeffs: tuple[int, ...]
    v_bit_indices: tuple[int, ...]
    offset: int  # the claim's lower bound


@dataclass(frozen=True)
class BitnessClaim:
    """Deferred claim that variable ``index`` holds a bit: x^2 - x = 0."""

    index: int


@dataclass(frozen=True)
class RangeResiduals:
    linear: LinearRelation
    bitness: tuple[BitnessClaim, ...]


def residual_constraints(claim: RangeClaim, input_indices: list[int],
                         v_bit_indices: list[int],
                         u_bit_indices: list[int] | None) -> RangeResiduals:
    """What remains to be proven after the linear check passes.

    Emits the recomposition relation tying the v bits back to the inputs,
    plus one bitness claim per shared bit.  In power-of-two mode there are
    no u bits, so only ``bit_count`` bitness claims appear.
    """
    if len(v_bit_indices) != claim.bit_count:
        raise RangeCheckError("v bit index count disagrees with claim width")
    if not claim.power_of_two_mode and (u_bit_indices is None
                                        or len(u_bit_indices) != claim.bit_count):
        raise RangeCheckError("u bit index count disagrees with claim width")
    linear = LinearRelation(
        input_indices=tuple(input_indices),
        input_coeffs=tuple(int(c) for c in claim.coeffs),
        v_bit_indices=tuple(v_bit_indices),
        offset=claim.lower,
    )
    bits = [BitnessClaim(i) for i in v_bit_indices]
    if not claim.power_of_two_mode:
        bits += [BitnessClaim(i) for i in (u_bit_indices or [])]
    return RangeResiduals(linear, tuple(bits))
