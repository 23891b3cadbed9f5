"""Additive 2-of-2 secret sharing and the linear-equality subprotocol.

A secret x in GF(q) is split as x = x0 + x1 (mod q) with x0 uniform, so
either share alone is a uniform field element.  Linear equalities over
shared values are decided by the two verifiers exchanging their locally
computed combination shares -- one field element each way -- and comparing
the reconstructed value against the public target.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .field import PrimeField


class ShareError(ValueError):
    """Misuse of the sharing API (mismatched indices or lengths)."""


@dataclass(frozen=True)
class Share:
    """One verifier's additive share of a single field element."""

    verifier_index: int
    value: int

    def __post_init__(self) -> None:
        if self.verifier_index not in (0, 1):
            raise ShareError(f"verifier index must be 0 or 1, got {self.verifier_index}")


@dataclass
class ShareVector:
    """One verifier's shares of a fixed-length vector."""

    verifier_index: int
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.verifier_index not in (0, 1):
            raise ShareError(f"verifier index must be 0 or 1, got {self.verifier_index}")

    def __len__(self) -> int:
        return len(self.values)

    def to_bytes(self, field: PrimeField) -> bytes:
        header = struct.pack("<BQ", self.verifier_index, len(self.values))
        return header + field.to_bytes(self.values)

    @classmethod
    def from_bytes(cls, data: bytes, field: PrimeField) -> "ShareVector":
        idx, length = struct.unpack_from("<BQ", data, 0)
        values = field.from_bytes(data[9:])
        if len(values) != length:
            raise ShareError("share vector length disagrees with header")
        return cls(idx, values)


def share(field: PrimeField, x: int, rng: np.random.Generator) -> tuple[Share, Share]:
    """Split one element; share 0 is uniform, share 1 completes the sum."""
    s0 = int(field.rand(rng))
    s1 = field.sub_scalar(int(x), s0)
    return Share(0, s0), Share(1, s1)


def share_vector(field: PrimeField, xs: np.ndarray,
                 rng: np.random.Generator) -> tuple[ShareVector, ShareVector]:
    xs = field.array(xs)
    s0 = field.rand(rng, xs.shape)
    s1 = field.sub(xs, s0)
    return ShareVector(0, s0), ShareVector(1, s1)


def reconstruct(s0: Share, s1: Share, field: PrimeField) -> int:
    if s0.verifier_index == s1.verifier_index:
        raise ShareError("reconstruct needs one share from each verifier")
    return field.add_scalar(s0.value, s1.value)


def reconstruct_vector(v0: ShareVector, v1: ShareVector, field: PrimeField) -> np.ndarray:
    if v0.verifier_index == v1.verifier_index:
        raise ShareError("reconstruct needs one share from each verifier")
    if len(v0) != len(v1):
        raise ShareError("share vectors differ in length")
    return field.add(v0.values, v1.values)


def local_linear(field: PrimeField, coeffs: np.ndarray, shares: ShareVector) -> Share:
    """This verifier's share of sum_i coeffs[i] * X[i], computed locally."""
    coeffs = field.array(coeffs)
    if len(coeffs) != len(shares):
        raise ShareError("coefficient and share lengths differ")
    return Share(shares.verifier_index, int(field.dot(coeffs, shares.values)))


def linear_equality_check(z0: Share, z1: Share, target: int, field: PrimeField) -> bool:
    """Accept iff the exchanged combination shares sum to the public target."""
    return reconstruct(z0, z1, field) == int(target) % field.q
