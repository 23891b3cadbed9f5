"""Batched quadratic-constraint verification with sqrt-size communication.

A batch of m claims sum_{i,j} c_{k,i,j} X'_i X'_j = a_k over shared values
(index 0 is the constant 1) is collapsed into one inner-product claim
<X', A X'> = b by a random challenge rc: any violated constraint survives
the collapse except with probability < m/q.  The inner product itself is
proven by grouping the two vectors into L = ceil(sqrt(n+1)) blocks,
extending each block to a degree-L polynomial through one fresh random
point (the mask that keeps revealed evaluations uniform), and sending the
coefficients of h = sum_j f_j * g_j.  The verifiers confirm
sum_{t=1..L} h(t) = b via shares of h and spot-check h(rho) =
sum_j f_j(rho) g_j(rho) at a random rho outside the interpolation points,
exchanging 2L+2 field elements once.

Prover message: 4L+1 field elements per verifier (2L masks + 2L+1
coefficients).  Soundness per repetition: 2L/(q-L-1) + m/q; parallel
repetition raises it to the t-th power.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import PrimeField, sqrt_ceil


class QuadraticError(ValueError):
    pass


@dataclass
class QuadraticConstraint:
    """One claim sum c[i,j] * X'_i * X'_j = target, with X'_0 = 1.

    Coefficients are sparse, stored as parallel (rows, cols, vals) arrays of
    variable indices in 0..n and field elements.
    """

    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    target: int

    @classmethod
    def from_terms(cls, field: PrimeField, terms: dict[tuple[int, int], int],
                   target: int) -> "QuadraticConstraint":
        rows = np.asarray([i for i, _ in terms], dtype=np.int64)
        cols = np.asarray([j for _, j in terms], dtype=np.int64)
        vals = field.array([v for v in terms.values()])
        return cls(rows, cols, vals, target % field.q)

    @classmethod
    def bitness(cls, field: PrimeField, index: int) -> "QuadraticConstraint":
        """x^2 - x = 0 certifying that variable ``index`` holds a bit."""
        return cls.from_terms(field, {(index, index): 1, (0, index): -1 % field.q}, 0)


class QuadraticSystem:
    """A fixed constraint batch in concatenated-sparse form.

    Flattening once lets every challenge combination be a single gather and
    multiply instead of m per-constraint passes.
    """

    def __init__(self, field: PrimeField, constraints: list[QuadraticConstraint],
                 n_vars: int):
        if not constraints:
            raise QuadraticError("need at least one constraint")
        self.field = field
        self.n_vars = n_vars
        self.m = len(constraints)
        self.rows = np.concatenate([c.rows for c in constraints])
        self.cols = np.concatenate([c.cols for c in constraints])
        self.vals = np.concatenate([field.array(c.vals) for c in constraints])
        self.entry_constraint = np.concatenate([
            np.full(len(c.rows), k, dtype=np.int64) for k, c in enumerate(constraints)])
        self.targets = field.array([c.target for c in constraints])
        hi = int(max(self.rows.max(), self.cols.max()))
        if hi > n_vars:
            raise QuadraticError(f"constraint index {hi} exceeds variable count {n_vars}")

    @property
    def nnz(self) -> int:
        return len(self.rows)

    def combine(self, rc: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
        """Random linear combination sum_k rc^(k-1) * C_k -> (rows, cols, vals, b)."""
        f = self.field
        pows = f.powers(rc, self.m)
        vals = f.mul(self.vals, pows[self.entry_constraint])
        b = int(f.dot(pows, self.targets))
        return self.rows, self.cols, vals, b

    def residuals(self, x_ext: np.ndarray) -> np.ndarray:
        """Per-constraint residual sum c X'X' - a over full (unshared) values."""
        f = self.field
        prods = f.mul(f.mul(self.vals, np.asarray(x_ext)[self.rows]),
                      np.asarray(x_ext)[self.cols])
        ones = f.zeros(self.nnz)
        ones[...] = 1
        acc = f.coo_matvec(self.entry_constraint, np.arange(self.nnz, dtype=np.int64),
                           prods, ones, self.m)
        return f.sub(acc, self.targets)


def combine_constraints(field: PrimeField, constraints: list[QuadraticConstraint],
                        rc: int, n_vars: int):
    """Convenience wrapper: flatten and collapse a batch at challenge ``rc``."""
    return QuadraticSystem(field, constraints, n_vars).combine(rc)


def local_matrix_apply(field: PrimeField, coo, x_ext_share: np.ndarray) -> np.ndarray:
    """Verifier-local Z = A * X' on shares (linear, so shares map to shares)."""
    rows, cols, vals, _ = coo if len(coo) == 4 else (*coo, None)
    return field.coo_matvec(rows, cols, vals, x_ext_share, len(x_ext_share))


# -- Lagrange machinery --------------------------------------------------------
#
# Interpolation points are the field elements 0..L (and 0..2L for h); the
# spot-check challenge rho is drawn outside them.  All matrices below depend
# only on (q, L) and are cached.

_CACHE: dict[tuple[int, int], dict] = {}


def _coeff_matrix(field: PrimeField, npoints: int) -> np.ndarray:
    """M with coefficients = M @ values for points 0..npoints-1, O(n^2)."""
    q = field.q
    pts = list(range(npoints))
    master = [1]  # product poly, low-degree first
    for p in pts:
        nxt = [0] * (len(master) + 1)
        for k, c in enumerate(master):
            nxt[k] = (nxt[k] - p * c) % q
            nxt[k + 1] = (nxt[k + 1] + c) % q
        master = nxt
    m = field.zeros((npoints, npoints))
    for t, p in enumerate(pts):
        # synthetic division: master / (X - p)
        quot = [0] * npoints
        carry = master[npoints]
        for k in range(npoints - 1, -1, -1):
            quot[k] = carry
            carry = (master[k] + p * carry) % q
        denom = 1
        for s in pts:
            if s != t:
                denom = denom * (p - s) % q
        w = field.inv_scalar(denom)
        for k in range(npoints):
            m[k, t] = field.mul_scalar(quot[k], w)
    return m


def _interp_cache(field: PrimeField, block: int) -> dict:
    key = (field.q, block)
    cached = _CACHE.get(key)
    if cached is not None:
        return cached
    q = field.q
    n = block + 1
    coeff = _coeff_matrix(field, n)
    coeff_h = _coeff_matrix(field, 2 * block + 1)
    # extension matrix: values at 0..L -> values at L+1..2L
    ext = field.zeros((block, n))
    weights = []
    for t in range(n):
        denom = 1
        for s in range(n):
            if s != t:
                denom = denom * (t - s) % q
        weights.append(field.inv_scalar(denom))
    for i in range(block):
        x = block + 1 + i
        px = 1
        for s in range(n):
            px = px * (x - s) % q
        for t in range(n):
            ext[i, t] = px * weights[t] % q * field.inv_scalar(x - t) % q
    # power sums over the data points 1..L, for sum_t h(t) from h coefficients
    psums = field.zeros(2 * block + 1)
    for t in range(1, block + 1):
        acc = 1
        for k in range(2 * block + 1):
            psums[k] = field.add_scalar(int(psums[k]), acc)
            acc = acc * t % q
    cached = {"coeff": coeff, "coeff_h": coeff_h, "ext": ext,
              "weights": weights, "psums": psums}
    _CACHE[key] = cached
    return cached


def lagrange_weights_at(field: PrimeField, block: int, x: int) -> np.ndarray:
    """Evaluation weights: f(x) = sum_t w_t(x) * f(t) for points 0..block."""
    cache = _interp_cache(field, block)
    q = field.q
    x = int(x) % q
    if x <= block:
        raise QuadraticError(f"evaluation point {x} collides with interpolation points")
    px = 1
    for s in range(block + 1):
        px = px * (x - s) % q
    diffs = field.array([(x - t) % q for t in range(block + 1)])
    inv_diffs = batch_inverse(field, diffs)
    out = field.mul(field.mul(inv_diffs, field.array(cache["weights"])),
                    field.array([px] * (block + 1)))
    return out


def batch_inverse(field: PrimeField, arr: np.ndarray) -> np.ndarray:
    """Montgomery batch inversion: one field inversion for n elements."""
    n = len(arr)
    prefix = field.zeros(n)
    acc = 1
    for i in range(n):
        prefix[i] = acc
        acc = field.mul_scalar(acc, int(arr[i]))
    inv_all = field.inv_scalar(acc)
    out = field.zeros(n)
    for i in range(n - 1, -1, -1):
        out[i] = field.mul_scalar(inv_all, int(prefix[i]))
        inv_all = field.mul_scalar(inv_all, int(arr[i]))
    return out


# -- the inner-product argument --------------------------------------------------


@dataclass
class InnerProductProof:
    """Shared prover message: block masks and h coefficients (4L+1 elements)."""

    f_mask_shares: tuple[np.ndarray, np.ndarray]
    g_mask_shares: tuple[np.ndarray, np.ndarray]
    h_coeff_shares: tuple[np.ndarray, np.ndarray]
    block_count: int

    def slice_for(self, j: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (self.f_mask_shares[j], self.g_mask_shares[j], self.h_coeff_shares[j])

    def element_count(self) -> int:
        return 4 * self.block_count + 1


@dataclass
class VerifierExchange:
    """One verifier's simultaneous message: 2L+2 field elements."""

    f_rho: np.ndarray
    g_rho: np.ndarray
    h_rho: int
    h_sum: int

    def element_count(self) -> int:
        return len(self.f_rho) + len(self.g_rho) + 2


def _block_values(field: PrimeField, vec: np.ndarray, masks: np.ndarray,
                  block: int) -> np.ndarray:
    """(L, L+1) value table: column 0 the masks, columns 1..L the data blocks."""
    padded = field.zeros(block * block)
    padded[: len(vec)] = field.array(vec)
    table = field.zeros((block, block + 1))
    table[:, 0] = masks
    table[:, 1:] = padded.reshape(block, block)
    return table


def prove_inner_product(field: PrimeField, u: np.ndarray, v: np.ndarray,
                        rng: np.random.Generator) -> InnerProductProof:
    """Prover side for the claim <u, v> = b (b implied by honest inputs).

    Each block polynomial passes through one uniform extra point, so any
    single evaluation revealed later is marginally uniform.
    """
    if len(u) != len(v):
        raise QuadraticError("inner-product vectors differ in length")
    block = sqrt_ceil(len(u))
    cache = _interp_cache(field, block)
    rf = field.rand(rng, block)
    rg = field.rand(rng, block)
    u_tab = _block_values(field, u, rf, block)
    v_tab = _block_values(field, v, rg, block)
    # h values at 0..L come straight from the tables, at L+1..2L from the
    # Lagrange extension of each block polynomial.
    u_ext = field.matmul(u_tab, cache["ext"].T)
    v_ext = field.matmul(v_tab, cache["ext"].T)
    h_lo = field.sum(field.mul(u_tab, v_tab), axis=0)
    h_hi = field.sum(field.mul(u_ext, v_ext), axis=0)
    h_vals = np.concatenate([h_lo, h_hi])
    h_coeffs = field.matvec(cache["coeff_h"], h_vals)

    def _split(arr):
        s0 = field.rand(rng, arr.shape)
        return s0, field.sub(arr, s0)

    return InnerProductProof(_split(rf), _split(rg), _split(h_coeffs), block)


def inner_product_exchange(field: PrimeField, proof_slice, u_share: np.ndarray,
                           v_share: np.ndarray, rho: int,
                           block: int) -> VerifierExchange:
    """Verifier-local evaluations at rho; all linear in held shares."""
    rf_share, rg_share, h_share = proof_slice
    cache = _interp_cache(field, block)
    lam = lagrange_weights_at(field, block, rho)
    u_tab = _block_values(field, u_share, rf_share, block)
    v_tab = _block_values(field, v_share, rg_share, block)
    f_rho = field.matvec(u_tab, lam)
    g_rho = field.matvec(v_tab, lam)
    pows = field.powers(rho, 2 * block + 1)
    h_rho = int(field.dot(h_share, pows))
    h_sum = int(field.dot(h_share, cache["psums"]))
    return VerifierExchange(f_rho, g_rho, h_rho, h_sum)


def inner_product_decide(field: PrimeField, ex0: VerifierExchange,
                         ex1: VerifierExchange, target: int) -> tuple[bool, str]:
    """Combine the two exchanges: sum check then polynomial identity at rho."""
    if int(field.add_scalar(ex0.h_sum, ex1.h_sum)) != target % field.q:
        return False, "quad-sumcheck"
    f_rho = field.add(ex0.f_rho, ex1.f_rho)
    g_rho = field.add(ex0.g_rho, ex1.g_rho)
    h_rho = field.add_scalar(ex0.h_rho, ex1.h_rho)
    if int(field.dot(f_rho, g_rho)) != h_rho:
        return False, "quad-poly"
    return True, "accept"


def verify_inner_product(field: PrimeField, proof: InnerProductProof,
                         u_shares: tuple[np.ndarray, np.ndarray],
                         v_shares: tuple[np.ndarray, np.ndarray],
                         target: int, rho: int) -> tuple[bool, str, tuple]:
    """Both verifiers' halves plus the decision, for direct use in tests."""
    ex0 = inner_product_exchange(field, proof.slice_for(0), u_shares[0],
                                 v_shares[0], rho, proof.block_count)
    ex1 = inner_product_exchange(field, proof.slice_for(1), u_shares[1],
                                 v_shares[1], rho, proof.block_count)
    ok, cause = inner_product_decide(field, ex0, ex1, target)
    return ok, cause, (ex0, ex1)


def sample_rho(field: PrimeField, block: int, rng: np.random.Generator) -> int:
    """Uniform over GF(q) minus the interpolation points 0..L."""
    while True:
        rho = int(field.rand(rng))
        if rho > block:
            return rho


def soundness_bound(n_vars: int, m: int, q: int, t: int = 1) -> float:
    """(2 sqrt(n) / (q - sqrt(n)) + m/q)^t for the batch protocol."""
    rt = n_vars ** 0.5
    return (2 * rt / (q - rt) + m / q) ** t


def run_quadratic_protocol(field: PrimeField, constraints: list[QuadraticConstraint],
                           x_full: np.ndarray,
                           x_shares: tuple[np.ndarray, np.ndarray],
                           t: int, rng: np.random.Generator) -> tuple[bool, str]:
    """Full t-fold batch over shared variables (prover knows all values).

    ``x_full``/``x_shares`` exclude the constant; index 0 is appended here
    with the fixed share split (1, 0).
    """
    if t < 1:
        raise QuadraticError("need at least one repetition")
    n_vars = len(x_full)
    system = QuadraticSystem(field, constraints, n_vars)
    x_ext = np.concatenate([field.array([1]), field.array(x_full)])
    ext0 = np.concatenate([field.array([1]), field.array(x_shares[0])])
    ext1 = np.concatenate([field.array([0]), field.array(x_shares[1])])
    for _ in range(t):
        rc = int(field.rand(rng))
        rows, cols, vals, b = system.combine(rc)
        v_full = field.coo_matvec(rows, cols, vals, x_ext, len(x_ext))
        v0 = field.coo_matvec(rows, cols, vals, ext0, len(ext0))
        v1 = field.coo_matvec(rows, cols, vals, ext1, len(ext1))
        proof = prove_inner_product(field, x_ext, v_full, rng)
        rho = sample_rho(field, proof.block_count, rng)
        ok, cause, _ = verify_inner_product(field, proof, (ext0, ext1), (v0, v1), b, rho)
        if not ok:
            return False, cause
    return True, "accept"
