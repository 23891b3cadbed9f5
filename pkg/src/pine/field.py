"""Prime-field arithmetic with a canonical signed-integer embedding.

All protocol values live in GF(q) for a prime q.  Elements are stored as
canonical integers in [0, q) -- as numpy ``uint64`` arrays when q fits in
64 bits, as object arrays of Python ints otherwise.  Every vector routine
here is total on both representations; the hot paths (the default 64-bit
modulus) are fully vectorized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

# Default moduli.  The 64-bit field uses the "Goldilocks" prime, chosen so
# that 2^64 = 2^32 - 1 (mod q) makes 128-bit reduction carry-free on uint64
# limbs.  The 128-bit field is the largest prime below 2^128.
GOLDILOCKS_PRIME = 2**64 - 2**32 + 1
PRIME_128 = 2**128 - 159

_U32_MASK = np.uint64(0xFFFFFFFF)
_GL = np.uint64(GOLDILOCKS_PRIME)
_GL_EPS = np.uint64(2**32 - 1)  # 2^64 mod q


class FieldError(ValueError):
    """Domain error in field arithmetic (e.g. inversion of zero)."""


@dataclass(frozen=True)
class FieldSpec:
    """A prime modulus together with its wire width.

    ``bit_length`` is ceil(log2 q); serialized elements occupy
    ceil(bit_length / 8) little-endian bytes.
    """

    modulus: int

    def __post_init__(self) -> None:
        if self.modulus < 1000:
            # The composed protocol's soundness analysis needs q >= 1000;
            # toy fields for tests are created with ``unchecked_spec``.
            raise FieldError(f"modulus {self.modulus} below protocol floor 1000")

    @property
    def bit_length(self) -> int:
        return self.modulus.bit_length()

    @property
    def nbytes(self) -> int:
        return (self.bit_length + 7) // 8


def unchecked_spec(modulus: int) -> FieldSpec:
    """FieldSpec for small test moduli, bypassing the q >= 1000 floor."""
    spec = object.__new__(FieldSpec)
    object.__setattr__(spec, "modulus", modulus)
    return spec


FIELD64 = FieldSpec(GOLDILOCKS_PRIME)
FIELD128 = FieldSpec(PRIME_128)


def bit_decompose(value: int, width: int) -> list[int]:
    """Little-endian bits of ``value``; raises if it does not fit in ``width``."""
    if value < 0 or value >= (1 << width):
        raise FieldError(f"value {value} does not fit in {width} bits")
    return [(value >> j) & 1 for j in range(width)]


def bit_recompose(bits: Sequence[int]) -> int:
    return sum(int(b) << j for j, b in enumerate(bits))


def _gl_reduce128(hi: np.ndarray, lo: np.ndarray) -> np.ndarray:
    # hi*2^64 + lo mod q, using 2^64 = 2^32 - 1 and 2^96 = -1 (mod q).
    # uint64 wraparound is intentional throughout.
    with np.errstate(over="ignore"):
        hi_hi = hi >> np.uint64(32)
        hi_lo = hi & _U32_MASK
        t0 = lo - hi_hi
        t0 = np.where(lo < hi_hi, t0 - _GL_EPS, t0)
        t1 = hi_lo * _GL_EPS
        res = t0 + t1
        res = np.where(res < t1, res + _GL_EPS, res)
        return np.where(res >= _GL, res - _GL, res)


def _gl_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        a_lo = a & _U32_MASK
        a_hi = a >> np.uint64(32)
        b_lo = b & _U32_MASK
        b_hi = b >> np.uint64(32)
        ll = a_lo * b_lo
        lh = a_lo * b_hi
        hl = a_hi * b_lo
        hh = a_hi * b_hi
        t = ll + (lh << np.uint64(32))
        c1 = (t < ll).astype(np.uint64)
        lo = t + (hl << np.uint64(32))
        c2 = (lo < t).astype(np.uint64)
        hi = hh + (lh >> np.uint64(32)) + (hl >> np.uint64(32)) + c1 + c2
    return _gl_reduce128(hi, lo)


class PrimeField:
    """Arithmetic over GF(q) on numpy arrays of canonical elements.

    Three execution paths share one interface: small moduli (q < 2^32) use
    plain uint64 arithmetic, the Goldilocks modulus uses limb splitting, and
    anything else falls back to object arrays of Python ints.
    """

    def __init__(self, spec: FieldSpec):
        self.spec = spec
        self.q = spec.modulus
        self._small = self.q < 2**32
        self._goldilocks = self.q == GOLDILOCKS_PRIME
        self._native = self._small or self._goldilocks
        self._dtype = np.uint64 if self._native else object

    def __repr__(self) -> str:  # pragma: no cover
        return f"PrimeField(q={self.q})"

    # -- element construction ------------------------------------------------

    def array(self, values: Iterable[int] | np.ndarray) -> np.ndarray:
        if not self._native:
            if isinstance(values, np.ndarray) and values.dtype == object:
                return values % self.q
            return np.asarray([int(v) % self.q for v in values], dtype=object)
        if isinstance(values, np.ndarray):
            if values.dtype == np.uint64:
                return values
            if np.issubdtype(values.dtype, np.unsignedinteger):
                return values.astype(np.uint64)
            if np.issubdtype(values.dtype, np.signedinteger):
                return (values.astype(object) % self.q).astype(np.uint64)
            values = values.ravel().tolist()
        # never let numpy infer float64 from large Python ints: that would
        # silently round field elements near 2^64
        flat = [int(v) % self.q for v in values]
        return np.asarray(flat, dtype=np.uint64)

    def zeros(self, shape) -> np.ndarray:
        if self._native:
            return np.zeros(shape, dtype=np.uint64)
        out = np.empty(shape, dtype=object)
        out[...] = 0
        return out

    def from_signed(self, values: Iterable[int] | np.ndarray) -> np.ndarray:
        """Embed signed integers as canonical elements (i mod q)."""
        if isinstance(values, np.ndarray) and np.issubdtype(values.dtype, np.integer):
            if self._native:
                return (values.astype(object) % self.q).astype(np.uint64)
            return values.astype(object) % self.q
        return self.array([int(v) for v in values])

    def to_signed(self, values: np.ndarray | int):
        """Signed representatives in [-floor(q/2), floor(q/2)]."""
        half = self.q // 2
        if np.isscalar(values) or isinstance(values, (int, np.integer)):
            v = int(values)
            return v if v <= half else v - self.q
        out = np.asarray([int(v) if int(v) <= half else int(v) - self.q
                          for v in np.ravel(values)], dtype=object)
        try:
            out = out.astype(np.int64)
        except OverflowError:
            pass
        return out.reshape(np.shape(values))

    # -- scalar helpers --------------------------------------------------------

    def add_scalar(self, a: int, b: int) -> int:
        return (a + b) % self.q

    def sub_scalar(self, a: int, b: int) -> int:
        return (a - b) % self.q

    def mul_scalar(self, a: int, b: int) -> int:
        return (a * b) % self.q

    def neg_scalar(self, a: int) -> int:
        return (-a) % self.q

    def inv_scalar(self, a: int) -> int:
        if a % self.q == 0:
            raise FieldError("inversion of zero")
        return pow(a, self.q - 2, self.q)

    def pow_scalar(self, a: int, e: int) -> int:
        return pow(a, e, self.q)

    # -- vector arithmetic -----------------------------------------------------

    def add(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self._goldilocks:
            with np.errstate(over="ignore"):
                a, b = np.broadcast_arrays(np.asarray(a, np.uint64), np.asarray(b, np.uint64))
                s = a + b
                s = np.where(s < a, s + _GL_EPS, s)
                return np.where(s >= _GL, s - _GL, s)
        if self._small:
            return (np.asarray(a, np.uint64) + np.asarray(b, np.uint64)) % np.uint64(self.q)
        return (np.asarray(a, object) + np.asarray(b, object)) % self.q

    def sub(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self._goldilocks:
            with np.errstate(over="ignore"):
                a, b = np.broadcast_arrays(np.asarray(a, np.uint64), np.asarray(b, np.uint64))
                d = a - b
                return np.where(a < b, d - _GL_EPS, d)
        if self._small:
            q = np.uint64(self.q)
            return (np.asarray(a, np.uint64) + q - np.asarray(b, np.uint64)) % q
        return (np.asarray(a, object) - np.asarray(b, object)) % self.q

    def neg(self, a: np.ndarray) -> np.ndarray:
        return self.sub(self.zeros(np.shape(a)), a)

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self._goldilocks:
            a, b = np.broadcast_arrays(np.asarray(a, np.uint64), np.asarray(b, np.uint64))
            return _gl_mul(a, b)
        if self._small:
            return (np.asarray(a, np.uint64) * np.asarray(b, np.uint64)) % np.uint64(self.q)
        return (np.asarray(a, object) * np.asarray(b, object)) % self.q

    def sum(self, a: np.ndarray, axis=None) -> np.ndarray | int:
        if self._goldilocks:
            with np.errstate(over="ignore"):
                a = np.asarray(a, np.uint64)
                lo = np.add.reduce(a & _U32_MASK, axis=axis, dtype=np.uint64)
                hi = np.add.reduce(a >> np.uint64(32), axis=axis, dtype=np.uint64)
                hi128 = hi >> np.uint64(32)
                mid = (hi & _U32_MASK) << np.uint64(32)
                lo128 = np.asarray(lo + mid, np.uint64)
                carry = (lo128 < mid).astype(np.uint64)
                out = _gl_reduce128(np.asarray(hi128 + carry, np.uint64), lo128)
            return out if axis is not None else out[()]
        if self._small:
            # Elements < 2^32, so uint64 sums are exact up to 2^32 terms.
            out = np.add.reduce(np.asarray(a, np.uint64), axis=axis) % np.uint64(self.q)
            return out if axis is not None else int(out)
        out = np.add.reduce(np.asarray(a, object), axis=axis) % self.q
        return out

    def dot(self, a: np.ndarray, b: np.ndarray):
        return self.sum(self.mul(a, b))

    def powers(self, base: int, count: int) -> np.ndarray:
        """[1, base, base^2, ..., base^(count-1)]."""
        out = [1] * count
        for k in range(1, count):
            out[k] = (out[k - 1] * base) % self.q
        return self.array(out)

    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Field matrix product of (m, k) by (k, n), chunked over k."""
        m, kk = a.shape
        k2, n = b.shape
        assert kk == k2
        if not self._native:
            return (np.asarray(a, object) @ np.asarray(b, object)) % self.q
        acc = self.zeros((m, n))
        chunk = max(1, (1 << 22) // max(1, m * n))
        for k0 in range(0, kk, chunk):
            k1 = min(kk, k0 + chunk)
            part = self.mul(a[:, k0:k1, None], b[None, k0:k1, :])
            acc = self.add(acc, self.sum(part, axis=1))
        return acc

    def matvec(self, a: np.ndarray, x: np.ndarray) -> np.ndarray:
        return self.matmul(a, x.reshape(-1, 1))[:, 0]

    def signed_matmul(self, z: np.ndarray, x: np.ndarray) -> np.ndarray:
        """sum_i z[k,i] * x[i] mod q for z with entries in {-1, 0, +1}.

        Uses integer accumulation (no field multiplications); z rows stay in
        int8 so large challenge matrices never get widened wholesale.
        """
        z = np.asarray(z, dtype=np.int8)
        rows = z.shape[0]
        if not self._native:
            out = []
            for k in range(rows):
                acc = 0
                zk = z[k]
                for i in np.nonzero(zk)[0]:
                    acc += int(zk[i]) * int(x[i])
                out.append(acc % self.q)
            return np.asarray(out, dtype=object)
        if self._small:
            s = z.astype(np.int64) @ np.asarray(x, np.uint64).astype(np.int64)
            return (s % self.q).astype(np.uint64)
        xl = (np.asarray(x, np.uint64) & _U32_MASK).astype(np.int64)
        xh = (np.asarray(x, np.uint64) >> np.uint64(32)).astype(np.int64)
        out = np.empty(rows, dtype=np.uint64)
        for k in range(rows):
            zk = z[k].astype(np.int64)
            sl = int(zk @ xl)
            sh = int(zk @ xh)
            out[k] = ((sh << 32) + sl) % self.q
        return out

    def coo_matvec(self, rows: np.ndarray, cols: np.ndarray, vals: np.ndarray,
                   x: np.ndarray, n_out: int) -> np.ndarray:
        """y[r] += vals * x[cols] scattered by ``rows``, all mod q."""
        prods = self.mul(vals, np.asarray(x)[cols])
        if not self._native:
            out = [0] * n_out
            for r, p in zip(rows, prods):
                out[int(r)] = (out[int(r)] + int(p)) % self.q
            return np.asarray(out, dtype=object)
        lo_acc = np.zeros(n_out, dtype=np.int64)
        hi_acc = np.zeros(n_out, dtype=np.int64)
        np.add.at(lo_acc, rows, (prods & _U32_MASK).astype(np.int64))
        np.add.at(hi_acc, rows, (prods >> np.uint64(32)).astype(np.int64))
        if self._small:
            return ((hi_acc.astype(object) * (1 << 32) + lo_acc) % self.q).astype(np.uint64)
        with np.errstate(over="ignore"):
            lo_u = lo_acc.astype(np.uint64)
            hi_u = hi_acc.astype(np.uint64)
            hi128 = hi_u >> np.uint64(32)
            mid = (hi_u & _U32_MASK) << np.uint64(32)
            lo128 = lo_u + mid
            carry = (lo128 < mid).astype(np.uint64)
            return _gl_reduce128(hi128 + carry, lo128)

    # -- randomness ------------------------------------------------------------

    def rand(self, rng: np.random.Generator, shape=()) -> np.ndarray:
        """Uniform elements from a seeded generator handle."""
        if self._small:
            return rng.integers(0, self.q, size=shape, dtype=np.uint64)
        if self._goldilocks:
            out = rng.integers(0, 2**64, size=shape, dtype=np.uint64)
            bad = out >= _GL
            while np.any(bad):
                out[bad] = rng.integers(0, 2**64, size=int(bad.sum()), dtype=np.uint64)
                bad = out >= _GL
            return out
        n = int(np.prod(shape)) if shape else 1
        vals = []
        width = self.spec.nbytes
        while len(vals) < n:
            v = int.from_bytes(rng.bytes(width), "little")
            if v < self.q:
                vals.append(v)
        arr = np.asarray(vals, dtype=object)
        return arr.reshape(shape) if shape else arr[0]

    # -- serialization ----------------------------------------------------------

    def to_bytes(self, a: np.ndarray) -> bytes:
        """Fixed-width little-endian encoding, ceil(bit_length/8) bytes each."""
        width = self.spec.nbytes
        flat = np.ravel(np.asarray(a))
        if self._native and width in (1, 2, 4, 8):
            return flat.astype(f"<u{width}").tobytes()
        return b"".join(int(v).to_bytes(width, "little") for v in flat)

    def from_bytes(self, data: bytes) -> np.ndarray:
        width = self.spec.nbytes
        if len(data) % width:
            raise FieldError("byte string is not a whole number of elements")
        if self._native and width in (1, 2, 4, 8):
            return np.frombuffer(data, dtype=f"<u{width}").astype(np.uint64)
        vals = [int.from_bytes(data[i:i + width], "little")
                for i in range(0, len(data), width)]
        return np.asarray(vals, dtype=object)


_FIELD_CACHE: dict[int, PrimeField] = {}


def get_field(modulus_or_spec) -> PrimeField:
    """Shared PrimeField instances keyed by modulus."""
    if isinstance(modulus_or_spec, FieldSpec):
        q = modulus_or_spec.modulus
        spec = modulus_or_spec
    else:
        q = int(modulus_or_spec)
        spec = FieldSpec(q) if q >= 1000 else unchecked_spec(q)
    if q not in _FIELD_CACHE:
        _FIELD_CACHE[q] = PrimeField(spec)
    return _FIELD_CACHE[q]


def log2_modulus(q: int) -> int:
    """Wire width of one element in bits (ceil log2 q)."""
    return q.bit_length()


def sqrt_ceil(n: int) -> int:
    r = math.isqrt(n)
    return r if r * r == n else r + 1
