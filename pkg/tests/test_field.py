import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pine.field import (FIELD64, FIELD128, GOLDILOCKS_PRIME, PRIME_128,
                        FieldError, FieldSpec, bit_decompose, bit_recompose,
                        get_field, sqrt_ceil, unchecked_spec)

Q = GOLDILOCKS_PRIME
f64 = get_field(Q)
f17 = get_field(17)
f128 = get_field(PRIME_128)

elements = st.integers(min_value=0, max_value=Q - 1)


def test_spec_constants():
    assert FIELD64.bit_length == 64 and FIELD64.nbytes == 8
    assert FIELD128.bit_length == 128 and FIELD128.nbytes == 16
    assert unchecked_spec(17).bit_length == 5
    with pytest.raises(FieldError):
        FieldSpec(17)  # protocol floor


def test_default_moduli_are_prime():
    import sympy

    assert sympy.isprime(GOLDILOCKS_PRIME)
    assert sympy.isprime(PRIME_128)


def test_small_field_ops_examples():
    assert int(f17.mul(f17.array([3]), f17.array([5]))[0]) == 15
    assert f17.inv_scalar(2) == 9
    assert f17.mul_scalar(2, f17.inv_scalar(2)) == 1
    assert f17.neg_scalar(0) == 0
    with pytest.raises(FieldError):
        f17.inv_scalar(0)


def test_signed_embedding_examples():
    assert f17.to_signed(16) == -1
    assert f17.to_signed(8) == 8
    assert f64.to_signed(Q - 5) == -5
    assert int(f17.from_signed([-5])[0]) == 12
    assert int(f17.from_signed([17])[0]) == 0
    assert int(f17.from_signed([100])[0]) == 15


@given(st.lists(elements, min_size=1, max_size=50))
@settings(max_examples=40, deadline=None)
def test_signed_roundtrip(vals):
    arr = f64.array(vals)
    back = f64.from_signed(f64.to_signed(arr))
    assert all(int(a) == int(b) for a, b in zip(arr, back))


@given(st.lists(elements, min_size=1, max_size=30),
       st.lists(elements, min_size=1, max_size=30))
@settings(max_examples=60, deadline=None)
def test_goldilocks_ops_match_python(a_vals, b_vals):
    n = min(len(a_vals), len(b_vals))
    a = f64.array(a_vals[:n])
    b = f64.array(b_vals[:n])
    assert all(int(x) == (int(u) * int(v)) % Q for x, u, v in zip(f64.mul(a, b), a, b))
    assert all(int(x) == (int(u) + int(v)) % Q for x, u, v in zip(f64.add(a, b), a, b))
    assert all(int(x) == (int(u) - int(v)) % Q for x, u, v in zip(f64.sub(a, b), a, b))
    assert int(f64.sum(a)) == sum(int(x) for x in a) % Q
    assert int(f64.dot(a, b)) == sum(int(u) * int(v) for u, v in zip(a, b)) % Q


def test_goldilocks_edge_values():
    edge = [0, 1, 2, Q - 1, Q - 2, 2**32, 2**32 - 1, 2**32 + 1, 2**63, Q // 2]
    a = f64.array(edge)
    for u in edge:
        prods = f64.mul(a, f64.array([u] * len(edge)))
        assert all(int(x) == (int(v) * u) % Q for x, v in zip(prods, a))


def test_signed_addition_homomorphism():
    # to_signed(a + b) = to_signed(a) + to_signed(b)   (mod q)
    rng = np.random.default_rng(3)
    a = f64.rand(rng, 200)
    b = f64.rand(rng, 200)
    lhs = f64.to_signed(f64.add(a, b))
    for x, u, v in zip(np.ravel(lhs), a, b):
        assert (int(x) - f64.to_signed(int(u)) - f64.to_signed(int(v))) % Q == 0


def test_array_never_routes_through_float():
    # regression: plain np.asarray would round ints near 2^64 via float64
    vals = [Q - 1, Q - 48, Q - 2048, 2**63 + 12345, 7]
    assert [int(t) for t in f64.array(vals)] == vals
    neg = [-(1 << j) % Q for j in range(40)]
    assert [int(t) for t in f64.array(neg)] == neg


def test_big_field_ops():
    a = f128.array([PRIME_128 - 1])
    b = f128.array([PRIME_128 - 2])
    assert int(f128.mul(a, b)[0]) == ((PRIME_128 - 1) * (PRIME_128 - 2)) % PRIME_128
    assert f128.inv_scalar(3) * 3 % PRIME_128 == 1


def test_matmul_and_coo_against_oracle():
    rng = np.random.default_rng(0)
    a = f64.rand(rng, (5, 7))
    b = f64.rand(rng, (7, 4))
    c = f64.matmul(a, b)
    for i in range(5):
        for j in range(4):
            want = sum(int(a[i, k]) * int(b[k, j]) for k in range(7)) % Q
            assert int(c[i, j]) == want
    rows = np.array([0, 0, 2, 1, 2], dtype=np.int64)
    cols = np.array([1, 2, 0, 1, 2], dtype=np.int64)
    vals = f64.rand(rng, 5)
    x = f64.rand(rng, 3)
    y = f64.coo_matvec(rows, cols, vals, x, 3)
    want = [0, 0, 0]
    for r, cc, v in zip(rows, cols, vals):
        want[r] = (want[r] + int(v) * int(x[cc])) % Q
    assert [int(t) for t in y] == want


def test_signed_matmul_against_oracle():
    rng = np.random.default_rng(1)
    z = rng.integers(-1, 2, size=(6, 11)).astype(np.int8)
    x = f64.rand(rng, 11)
    got = f64.signed_matmul(z, x)
    for k in range(6):
        want = sum(int(z[k, i]) * int(x[i]) for i in range(11)) % Q
        assert int(got[k]) == want


def test_bit_decompose_examples():
    assert bit_decompose(7, 3) == [1, 1, 1]
    assert bit_decompose(0, 4) == [0, 0, 0, 0]
    assert bit_decompose(10, 4) == [0, 1, 0, 1]
    with pytest.raises(FieldError):
        bit_decompose(16, 4)


@given(st.integers(min_value=0, max_value=2**40 - 1))
@settings(max_examples=60, deadline=None)
def test_bit_roundtrip(v):
    assert bit_recompose(bit_decompose(v, 40)) == v


def test_serialization_widths():
    rng = np.random.default_rng(2)
    for f in (f17, f64, f128):
        arr = f.rand(rng, 9)
        blob = f.to_bytes(arr)
        assert len(blob) == 9 * f.spec.nbytes
        back = f.from_bytes(blob)
        assert all(int(a) == int(b) for a, b in zip(arr, back))


def test_rand_uniform_range():
    rng = np.random.default_rng(4)
    draws = f17.rand(rng, 10000)
    assert draws.max() < 17 and len(np.unique(draws)) == 17


def test_sqrt_ceil():
    assert sqrt_ceil(0) == 0
    assert sqrt_ceil(1) == 1
    assert sqrt_ceil(2) == 2
    assert sqrt_ceil(4) == 2
    assert sqrt_ceil(1001133 + 1) == 1001
