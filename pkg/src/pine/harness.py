"""In-process three-party simulator: honest runs, adversaries, Monte Carlo.

One session = one client/prover plus both verifiers, driven through either
the interactive (shared-coin) or the one-shot Fiat-Shamir flow, entirely
in memory.  A session is a pure function of its seed; transcripts replay
byte-identically.  Adversary strategies plug in as named prover
corruptions, each the maximally-informed cheat for its target subprotocol.
"""

from __future__ import annotations

import json
import math
import struct
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import dzk as dzk_mod
from . import norm as norm_mod
from .dzk import DzkSessionParams
from .field import get_field
from .norm import NormParams, SessionResult

STRATEGIES = ("honest", "over_norm", "wraparound_vector", "bit_cheater",
              "fs_tamper", "coin")


class HarnessError(ValueError):
    pass


@dataclass(frozen=True)
class SessionConfig:
    """Everything that determines a run; the seed fixes all randomness."""

    variant: str                      # "statistical" | "dzk"
    params: NormParams | DzkSessionParams
    seed: int
    adversary: str | None = None
    adversary_kwargs: tuple = ()      # sorted (key, value) pairs, hashable
    mode: str = "fs"                  # "fs" | "interactive"

    def kwargs(self) -> dict:
        return dict(self.adversary_kwargs)

    @staticmethod
    def pack_kwargs(kw: dict) -> tuple:
        return tuple(sorted(kw.items()))


@dataclass
class Outcome:
    accept: bool
    cause: str
    message_bits: dict[str, int]
    wall_time_s: float


@dataclass
class Transcript:
    """Ordered, labelled message bytes of one session."""

    entries: list[tuple[str, bytes]]

    MAGIC = b"PINETR01"

    def to_bytes(self) -> bytes:
        parts = [self.MAGIC, struct.pack(">I", len(self.entries))]
        for label, payload in self.entries:
            lb = label.encode()
            parts.append(struct.pack(">H", len(lb)) + lb)
            parts.append(struct.pack(">Q", len(payload)) + payload)
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Transcript":
        if data[:8] != cls.MAGIC:
            raise HarnessError("bad transcript magic")
        (count,) = struct.unpack_from(">I", data, 8)
        pos = 12
        entries = []
        for _ in range(count):
            (ln,) = struct.unpack_from(">H", data, pos)
            pos += 2
            label = data[pos:pos + ln].decode()
            pos += ln
            (pn,) = struct.unpack_from(">Q", data, pos)
            pos += 8
            entries.append((label, data[pos:pos + pn]))
            pos += pn
        return cls(entries)

    def to_json(self) -> str:
        return json.dumps({label: payload.hex() for label, payload in self.entries},
                          indent=2)


# -- adversarial inputs ---------------------------------------------------------


def over_norm_vector(dimension: int, norm_bound_sq: int, delta_b: int) -> np.ndarray:
    """Integer vector with squared norm exactly norm_bound_sq + delta_b."""
    target = norm_bound_sq + delta_b
    x = np.zeros(dimension, dtype=np.int64)
    remaining = target
    for i in range(dimension):
        v = math.isqrt(remaining)
        x[i] = v
        remaining -= v * v
        if remaining == 0:
            break
    if remaining:
        raise HarnessError(f"cannot hit squared norm {target} with {dimension} coords")
    return x


def wraparound_vector(dimension: int, norm_bound_sq: int, modulus: int,
                      eta: float, case: str = "large_max") -> np.ndarray:
    """Vector with sum of squares >= q, per adversarial regime.

    ``large_max``: one coordinate beyond twice the window radius;
    ``bounded_max``: every coordinate within it, overflowing by count.
    """
    alpha = math.sqrt(math.log(2.0 / eta))
    cap = 2 * alpha * math.sqrt(norm_bound_sq)
    x = np.zeros(dimension, dtype=np.int64)
    if case == "large_max":
        big = math.isqrt(modulus) + 1
        if big <= cap:
            raise HarnessError("field too large for a single-coordinate overflow")
        x[0] = big
        return x
    if case == "bounded_max":
        v = math.floor(cap)
        count = math.ceil(modulus / (v * v))
        if count > dimension:
            raise HarnessError(
                f"need {count} coordinates of magnitude {v} but only have {dimension}")
        x[:count] = v
        return x
    raise HarnessError(f"unknown wraparound case {case!r}")


def _flip_bit_value(msg2, field, rep: int = 0, bit: int = 0, delta: int = 1):
    """Prover-side corruption: shift one shared wraparound bit off {0,1}."""
    arr = msg2.wrap_bits[0]
    arr[rep, bit] = field.add_scalar(int(arr[rep, bit]), delta)


# -- the session runner ------------------------------------------------------------


def run_session(config: SessionConfig) -> tuple[Outcome, Transcript]:
    t0 = time.monotonic()
    if config.variant == "statistical":
        result = _run_statistical(config)
    elif config.variant == "dzk":
        result = _run_dzk(config)
    else:
        raise HarnessError(f"unknown variant {config.variant!r}")
    outcome = Outcome(result.accept, result.cause, result.message_bits,
                      time.monotonic() - t0)
    return outcome, Transcript(result.transcript)


def _honest_input(params, seed: int) -> np.ndarray:
    """A gradient-like vector with squared norm <= B, seed-determined."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, 0xC11E47))))
    d, bound = params.dimension, params.norm_bound_sq
    scale = max(1, math.isqrt(bound // max(1, d)))
    x = rng.integers(-scale, scale + 1, size=d)
    while int(np.sum(x.astype(object) ** 2)) > bound:
        x //= 2
    return x


def _run_statistical(config: SessionConfig) -> SessionResult:
    params: NormParams = config.params
    kw = config.kwargs()
    adv = config.adversary or "honest"
    if adv == "honest":
        x = kw.get("x")
        if x is None:
            x = _honest_input(params, config.seed)
        runner = norm_mod.run_fs if config.mode == "fs" else norm_mod.run_interactive
        return runner(params, x, config.seed)
    if adv == "over_norm":
        x = over_norm_vector(params.dimension, params.norm_bound_sq,
                             int(kw.get("delta_b", 1)))
        if config.mode == "fs":
            return norm_mod.run_fs(params, x, config.seed, cheat_truncate_bits=True)
        return norm_mod.run_interactive(params, x, config.seed,
                                        cheat_truncate_bits=True)
    if adv == "wraparound_vector":
        x = wraparound_vector(params.dimension, params.norm_bound_sq,
                              params.modulus, params.eta,
                              kw.get("case", "large_max"))
        if config.mode == "fs":
            return norm_mod.run_fs(params, x, config.seed,
                                   cheat_truncate_bits=True, force_masks=True)
        return norm_mod.run_interactive(params, x, config.seed,
                                        cheat_truncate_bits=True, force_masks=True)
    if adv == "bit_cheater":
        x = kw.get("x")
        if x is None:
            x = _honest_input(params, config.seed)
        f = get_field(params.modulus)
        tamper = lambda msg2: _flip_bit_value(
            msg2, f, int(kw.get("rep", 0)), int(kw.get("bit", 0)),
            int(kw.get("delta", 1)))
        return norm_mod.run_interactive(params, x, config.seed, msg2_tamper=tamper)
    if adv == "fs_tamper":
        return _run_fs_tamper(config)
    if adv == "coin":
        rng = np.random.Generator(np.random.PCG64(config.seed))
        heads = bool(rng.integers(0, 2))
        return SessionResult(heads, "accept" if heads else "coin-tails", {}, [])
    raise HarnessError(f"unknown adversary {adv!r}")


def _run_fs_tamper(config: SessionConfig) -> SessionResult:
    """Honest proof, one byte flipped in transit, then full verification."""
    params = config.params
    kw = config.kwargs()
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(config.seed)))
    x = kw.get("x")
    if x is None:
        x = _honest_input(params, config.seed)
    if config.variant == "dzk":
        proof = dzk_mod.ni_prove(params, x, rng)
    else:
        proof = norm_mod.ni_prove(params, x, rng)
    blob = bytearray(proof.to_bytes())
    position = kw.get("position")
    if position is None:
        position = int(rng.integers(0, len(blob)))
    flip = int(kw.get("flip", 0))
    if flip == 0:
        flip = 1 + int(rng.integers(0, 255))
    blob[position % len(blob)] ^= flip
    verify = dzk_mod.ni_verify if config.variant == "dzk" else norm_mod.ni_verify
    try:
        from .fiat_shamir import NiProof

        accept, cause = verify(params, NiProof.from_bytes(bytes(blob)))
    except Exception:
        accept, cause = False, "malformed"
    return SessionResult(accept, cause, {}, [("tampered-proof", bytes(blob))])


def _run_dzk(config: SessionConfig) -> SessionResult:
    params: DzkSessionParams = config.params
    kw = config.kwargs()
    adv = config.adversary or "honest"
    if adv == "honest":
        x = kw.get("x")
        if x is None:
            x = _honest_input(params, config.seed)
        runner = dzk_mod.run_fs if config.mode == "fs" else dzk_mod.run_interactive
        return runner(params, x, config.seed)
    if adv == "over_norm":
        x = over_norm_vector(params.dimension, params.norm_bound_sq,
                             int(kw.get("delta_b", 1)))
        if config.mode == "fs":
            return dzk_mod.run_fs(params, x, config.seed, cheat_truncate_bits=True)
        return dzk_mod.run_interactive(params, x, config.seed,
                                       cheat_truncate_bits=True)
    if adv == "fs_tamper":
        return _run_fs_tamper(config)
    raise HarnessError(f"adversary {adv!r} not available for the dzk variant")


# -- Monte Carlo --------------------------------------------------------------------


@dataclass
class MonteCarloResult:
    strategy: str
    trials: int
    accepts: int
    rate: float
    wilson_low: float
    wilson_high: float

    def csv_row(self, params_label: str = "") -> str:
        return (f"{self.strategy},{params_label},{self.trials},{self.accepts},"
                f"{self.rate:.6f},{self.wilson_low:.6f},{self.wilson_high:.6f}")


def wilson_interval(accepts: int, trials: int, z: float = 1.959963984540054
                    ) -> tuple[float, float]:
    """95% score interval for a binomial proportion."""
    if trials < 1:
        raise HarnessError("need at least one trial")
    phat = accepts / trials
    denom = 1 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    low = 0.0 if accepts == 0 else max(0.0, center - half)
    high = 1.0 if accepts == trials else min(1.0, center + half)
    return low, high


def _mc_chunk(config: SessionConfig, seeds: list[int]) -> int:
    accepts = 0
    for s in seeds:
        cfg = SessionConfig(config.variant, config.params, s, config.adversary,
                            config.adversary_kwargs, config.mode)
        outcome, _ = run_session(cfg)
        accepts += outcome.accept
    return accepts


def monte_carlo(config: SessionConfig, trials: int, jobs: int = 1) -> MonteCarloResult:
    """Acceptance rate over independent seeded sessions with a 95% interval."""
    if trials < 1:
        raise HarnessError("need at least one trial")
    seeds = [config.seed + i for i in range(trials)]
    if jobs <= 1:
        accepts = _mc_chunk(config, seeds)
    else:
        chunks = [seeds[i::jobs] for i in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            accepts = sum(pool.map(_mc_chunk, [config] * len(chunks), chunks))
    low, high = wilson_interval(accepts, trials)
    return MonteCarloResult(config.adversary or "honest", trials, accepts,
                            accepts / trials, low, high)


# -- vectorized single-repetition estimators ----------------------------------------


def window_pass_rate(x_signed: np.ndarray, modulus: int, lo: float, hi: float,
                     trials: int, seed: int, chunk: int = 20000) -> float:
    """Empirical P[ <Z, X> mod q lands in [lo, hi] ] over random sign vectors.

    The modular value is taken as its signed representative; one repetition
    of the wraparound test per trial, fully vectorized.
    """
    x = np.asarray(x_signed, dtype=np.int64)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, 0x5A))))
    table = np.array([0, 0, 1, -1], dtype=np.int8)
    hits = 0
    done = 0
    half = modulus // 2
    while done < trials:
        n = min(chunk, trials - done)
        z = table[rng.integers(0, 4, size=(n, len(x)))]
        y = z.astype(np.int64) @ x
        if modulus > 2**62:
            y_mod = y.astype(object) % modulus
            y_signed = np.where(y_mod > half, y_mod - modulus, y_mod)
        else:
            y_mod = np.mod(y, modulus)
            y_signed = np.where(y_mod > half, y_mod - modulus, y_mod)
        hits += int(np.count_nonzero((y_signed >= lo) & (y_signed <= hi)))
        done += n
    return hits / trials
