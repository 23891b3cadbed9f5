"""Distributed Fiat-Shamir transform: challenges from blinded verifier views.

Interaction is removed by deriving each public-coin challenge from hashes
of the two verifiers' views.  The prover picks a fresh blinding value
nu_{i,j} per round and verifier, commits each view as

    r_{i,j} = H(i, j, x_j, nu_{i,j}, pi_{i,j})

where x_j is verifier j's input share and pi_{i,j} the prover messages it
has received so far, and sets the round-i challenge seed to

    r_i = H(i, _|_, r_{i,0}, r_{i,1}).

Each verifier can recompute its own r_{i,j} (it is handed nu_{i,j}), takes
the peer's commitment from the proof bundle, and cross-checks commitments
in the single simultaneous verifier exchange.  The blinds keep the
commitments from leaking the views they bind.

Challenge seeds expand into protocol randomness by rejection sampling on a
fixed-block hash stream; the exact byte layout is documented on each
expander so independent implementations interoperate.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

from .field import PrimeField

_DOMAIN = b"PINE-FS1"


class FsError(ValueError):
    pass


@dataclass(frozen=True)
class FsConfig:
    """Hash choice and security parameter for the transform."""

    hash_name: str = "sha256"
    kappa_bits: int = 256

    def __post_init__(self) -> None:
        if self.kappa_bits < 128:
            raise FsError("security parameter below 128 bits")
        if self.kappa_bits % 8:
            raise FsError("kappa must be a whole number of bytes")
        hashlib.new(self.hash_name)  # fails fast on unknown digests

    @property
    def kappa_bytes(self) -> int:
        return self.kappa_bits // 8


def _digest(config: FsConfig, data: bytes) -> bytes:
    return hashlib.new(config.hash_name, data).digest()


def _stretch(config: FsConfig, data: bytes, nbytes: int) -> bytes:
    """First nbytes of the block stream H(data || be32(0)), H(data || be32(1)), ..."""
    out = bytearray()
    counter = 0
    while len(out) < nbytes:
        out += _digest(config, data + struct.pack(">I", counter))
        counter += 1
    return bytes(out[:nbytes])


def hash_stream(config: FsConfig, seed: bytes, nbytes: int) -> bytes:
    """Deterministic byte stream used by all challenge expansions."""
    return _stretch(config, _DOMAIN + b"expand" + seed, nbytes)


def view_commitment(config: FsConfig, round_index: int, verifier_index: int,
                    x_payload: bytes, blind: bytes, transcript: bytes) -> bytes:
    """r_{i,j}: kappa-bit commitment to one verifier's view of round i."""
    if len(blind) != config.kappa_bytes:
        raise FsError("blind length disagrees with kappa")
    data = (_DOMAIN + b"view" + struct.pack(">IB", round_index, verifier_index)
            + struct.pack(">Q", len(x_payload)) + x_payload
            + blind
            + struct.pack(">Q", len(transcript)) + transcript)
    return _stretch(config, data, config.kappa_bytes)


def combine_commitments(config: FsConfig, round_index: int,
                        r0: bytes, r1: bytes) -> bytes:
    """r_i = H(i, _|_, r_{i,0}, r_{i,1}); the round's challenge seed."""
    data = _DOMAIN + b"coin" + struct.pack(">IB", round_index, 0xFF) + r0 + r1
    return _stretch(config, data, config.kappa_bytes)


def derive_round_challenge(config: FsConfig, round_index: int,
                           share_view_0: tuple[bytes, bytes],
                           share_view_1: tuple[bytes, bytes],
                           blind_0: bytes, blind_1: bytes) -> bytes:
    """Full derivation from both views: returns the round's challenge seed.

    Each view is (input-share payload, prover transcript so far).
    """
    r0 = view_commitment(config, round_index, 0, share_view_0[0], blind_0,
                         share_view_0[1])
    r1 = view_commitment(config, round_index, 1, share_view_1[0], blind_1,
                         share_view_1[1])
    return combine_commitments(config, round_index, r0, r1)


# -- challenge expansions --------------------------------------------------------


def expand_field_elements(config: FsConfig, seed: bytes, count: int,
                          field: PrimeField, floor: int = -1) -> np.ndarray:
    """``count`` uniform elements of GF(q) with value > ``floor``.

    Byte layout: the stream is consumed in ceil(bitlen(q)/8)-byte chunks,
    each read little-endian; a chunk is rejected unless floor < value < q.
    """
    width = field.spec.nbytes
    out = []
    offset = 0
    buf = b""
    while len(out) < count:
        if offset + width > len(buf):
            need = max(64, (count - len(out)) * width * 2)
            buf = hash_stream(config, seed, len(buf) + need)
        v = int.from_bytes(buf[offset:offset + width], "little")
        offset += width
        if floor < v < field.q:
            out.append(v)
    return field.array(out)


def expand_sign_matrix(config: FsConfig, seed: bytes, rows: int,
                       cols: int) -> np.ndarray:
    """rows x cols matrix over {-1, 0, +1} with probabilities (1/4, 1/2, 1/4).

    Byte layout: each byte yields four 2-bit codes, least significant pair
    first; 01 -> +1, 10 -> -1, and both 00 and 11 -> 0, so two uniform bits
    hit the target distribution exactly with nothing discarded.
    """
    need = rows * cols
    raw = np.frombuffer(hash_stream(config, seed, (need + 3) // 4), dtype=np.uint8)
    codes = np.empty(len(raw) * 4, dtype=np.uint8)
    codes[0::4] = raw & 3
    codes[1::4] = (raw >> 2) & 3
    codes[2::4] = (raw >> 4) & 3
    codes[3::4] = (raw >> 6) & 3
    vals = np.zeros(len(codes), dtype=np.int8)
    vals[codes == 1] = 1
    vals[codes == 2] = -1
    return vals[:need].reshape(rows, cols)


def sample_blind(config: FsConfig, rng: np.random.Generator) -> bytes:
    return rng.bytes(config.kappa_bytes)


# -- non-interactive proof container ----------------------------------------------

_MAGIC = b"PINE"
_VERSION = 1
_VARIANTS = {"statistical": 0, "dzk": 1}
_VARIANT_NAMES = {v: k for k, v in _VARIANTS.items()}


@dataclass
class NiProof:
    """One-shot proof bundle for both verifiers.

    ``stage_payloads[i]`` holds the per-verifier prover bytes sent before
    round-(i+1)'s challenge (empty when the challenge precedes any prover
    message).  ``round_hashes`` stores every r_{i,j} so each verifier can
    derive challenges without the peer's view; honesty of the stored peer
    values is confirmed in the verifier exchange.
    """

    variant: str
    kappa_bits: int
    header: bytes
    x_payloads: tuple[bytes, bytes]
    stage_payloads: list[tuple[bytes, bytes]]
    blinds: list[tuple[bytes, bytes]]
    round_hashes: list[tuple[bytes, bytes]]

    @property
    def rounds(self) -> int:
        return len(self.stage_payloads)

    def transcript_for(self, verifier_index: int, upto_round: int) -> bytes:
        """Concatenated prover messages to one verifier before a round."""
        return b"".join(self.stage_payloads[i][verifier_index]
                        for i in range(upto_round))

    def to_bytes(self) -> bytes:
        if self.variant not in _VARIANTS:
            raise FsError(f"unknown variant {self.variant!r}")
        parts = [_MAGIC, struct.pack(">BBHB", _VERSION, _VARIANTS[self.variant],
                                     self.kappa_bits, self.rounds)]

        def blob(b: bytes) -> bytes:
            return struct.pack(">Q", len(b)) + b

        parts.append(blob(self.header))
        parts.append(blob(self.x_payloads[0]))
        parts.append(blob(self.x_payloads[1]))
        for i in range(self.rounds):
            parts.append(blob(self.stage_payloads[i][0]))
            parts.append(blob(self.stage_payloads[i][1]))
            parts.append(self.blinds[i][0])
            parts.append(self.blinds[i][1])
            parts.append(self.round_hashes[i][0])
            parts.append(self.round_hashes[i][1])
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data: bytes) -> "NiProof":
        if data[:4] != _MAGIC:
            raise FsError("bad magic")
        version, variant_code, kappa_bits, rounds = struct.unpack_from(">BBHB", data, 4)
        if version != _VERSION:
            raise FsError(f"unsupported version {version}")
        if variant_code not in _VARIANT_NAMES:
            raise FsError(f"unknown variant code {variant_code}")
        if kappa_bits < 128 or kappa_bits % 8:
            raise FsError("bad kappa in header")
        pos = 9
        kb = kappa_bits // 8

        def take_blob() -> bytes:
            nonlocal pos
            (n,) = struct.unpack_from(">Q", data, pos)
            pos += 8
            if pos + n > len(data):
                raise FsError("truncated proof")
            out = data[pos:pos + n]
            pos += n
            return out

        def take_fixed(n: int) -> bytes:
            nonlocal pos
            if pos + n > len(data):
                raise FsError("truncated proof")
            out = data[pos:pos + n]
            pos += n
            return out

        header = take_blob()
        x0 = take_blob()
        x1 = take_blob()
        stages, blinds, hashes = [], [], []
        for _ in range(rounds):
            stages.append((take_blob(), take_blob()))
            blinds.append((take_fixed(kb), take_fixed(kb)))
            hashes.append((take_fixed(kb), take_fixed(kb)))
        if pos != len(data):
            raise FsError("trailing bytes after proof")
        return cls(_VARIANT_NAMES[variant_code], kappa_bits, header, (x0, x1),
                   stages, blinds, hashes)
