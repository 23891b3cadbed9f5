"""Vector file formats for the CLI: text and binary, plus float encoding.

Text files: comment lines start with '#'; the first data line is the
header ``d B precision`` and the remaining whitespace-separated tokens are
the d signed integer entries.  Binary files start with the magic
``PINEVEC1`` followed by d (u64 LE), B (32-byte LE), precision (u32 LE)
and d int64 LE entries.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

_MAGIC = b"PINEVEC1"


@dataclass
class VectorFile:
    entries: np.ndarray      # int64, signed
    norm_bound_sq: int
    precision_bits: int

    @property
    def dimension(self) -> int:
        return len(self.entries)


def encode_unit_floats(values, precision_bits: int = 15) -> VectorFile:
    """Fixed-point encoding of a vector of L2 norm at most 1.

    Each coordinate is scaled by 2^precision and rounded; the implied
    squared-norm bound is 2^(2*precision).
    """
    scale = 1 << precision_bits
    ints = np.asarray(np.rint(np.asarray(values, dtype=float) * scale), dtype=np.int64)
    return VectorFile(ints, 1 << (2 * precision_bits), precision_bits)


def write_vector_file(path: str | Path, vec: VectorFile, binary: bool = False) -> None:
    path = Path(path)
    if binary:
        blob = _MAGIC + struct.pack("<Q", vec.dimension) \
            + int(vec.norm_bound_sq).to_bytes(32, "little") \
            + struct.pack("<I", vec.precision_bits) \
            + vec.entries.astype("<i8").tobytes()
        path.write_bytes(blob)
        return
    lines = ["# pine vector: d B precision, then d signed integers",
             f"{vec.dimension} {vec.norm_bound_sq} {vec.precision_bits}",
             " ".join(str(int(v)) for v in vec.entries)]
    path.write_text("\n".join(lines) + "\n")


def read_vector_file(path: str | Path) -> VectorFile:
    path = Path(path)
    raw = path.read_bytes()
    if raw.startswith(_MAGIC):
        (d,) = struct.unpack_from("<Q", raw, 8)
        bound = int.from_bytes(raw[16:48], "little")
        (prec,) = struct.unpack_from("<I", raw, 48)
        entries = np.frombuffer(raw, dtype="<i8", offset=52, count=d).astype(np.int64)
        return VectorFile(entries, bound, prec)
    tokens: list[str] = []
    for line in raw.decode().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            tokens.extend(line.split())
    if len(tokens) < 3:
        raise ValueError("vector file needs a 'd B precision' header")
    d, bound, prec = int(tokens[0]), int(tokens[1]), int(tokens[2])
    entries = np.asarray([int(t) for t in tokens[3:3 + d]], dtype=np.int64)
    if len(entries) != d:
        raise ValueError(f"expected {d} entries, found {len(entries)}")
    return VectorFile(entries, bound, prec)
