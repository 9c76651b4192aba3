"""
Desk-scale ECB experiments.

Without chaining there is no side information, so the generic ways to decode a compressed
ECB block are exhaustive: enumerate likely plaintexts and re-encrypt them (strategy 1), or
enumerate the ciphertexts that compress to the observed value and decrypt them
(strategy 2). The lab pairs both with a truncation compressor over the toy cipher.
"""

import logging
import math
from collections.abc import Callable, Iterator
from dataclasses import dataclass

import numpy as np
import pandas as pd

from core.cipher_core import BitBlock, CipherFamily, ToyFeistelPermutation, generate_key
from core.exceptions import ConfigurationError
from core.source_models import FiniteDistribution, guessing_entropy

logger = logging.getLogger(__name__)

Oracle = Callable[[BitBlock], BitBlock]


@dataclass(frozen=True)
class TruncationCompressor:
    "Keeps the first t of m ciphertext bits."

    t: int
    m: int

    def __post_init__(self):
        if not 1 <= self.t <= self.m:
            raise ConfigurationError(f"Need 1 <= t <= m, got t={self.t}, m={self.m}")

    def __call__(self, y: BitBlock) -> BitBlock:
        if y.width != self.m:
            raise ConfigurationError(f"Compressor expects {self.m}-bit blocks, got {y.width}")
        return truncate_compress(y, self.t)

    def preimages(self, c: BitBlock) -> Iterator[BitBlock]:
        "All m-bit completions of c, in ascending order of the appended bits."
        free = self.m - self.t
        prefix = c.to_int() << free
        for suffix in range(1 << free):
            yield BitBlock.from_int(prefix | suffix, self.m)

    def preimage_count(self) -> int:
        return 1 << (self.m - self.t)


@dataclass(frozen=True)
class ExhaustiveRun:
    queries_made: int
    recovered: bool
    strategy: int
    candidate: BitBlock | None = None

    def __post_init__(self):
        if self.recovered and self.queries_made < 1:
            raise ConfigurationError("A recovered run must have made at least one query")


def truncate_compress(y: BitBlock, t: int) -> BitBlock:
    if not 1 <= t <= y.width:
        raise ConfigurationError(f"Cannot keep {t} bits of a {y.width}-bit block")
    return BitBlock(y.bits[:t])


def exhaustive_strategy1(
    c: BitBlock, dist: FiniteDistribution, enc_oracle: Oracle, compressor: TruncationCompressor
) -> ExhaustiveRun:
    "Encrypts candidates in decreasing order of probability until one compresses to c."
    queries = 0
    for candidate in dist.by_descending_probability():
        queries += 1
        if compressor(enc_oracle(candidate)) == c:
            return ExhaustiveRun(queries, True, 1, candidate)
    return ExhaustiveRun(queries, False, 1)


def exhaustive_strategy2(
    c: BitBlock,
    dec_oracle: Oracle,
    compressor: TruncationCompressor,
    membership_test: Callable[[BitBlock], bool],
) -> ExhaustiveRun:
    "Decrypts the preimages of c in order and stops at the first plaintext the test accepts."
    queries = 0
    for y in compressor.preimages(c):
        queries += 1
        candidate = dec_oracle(y)
        if membership_test(candidate):
            return ExhaustiveRun(queries, True, 2, candidate)
    return ExhaustiveRun(queries, False, 2)


def birthday_bound(support_size: int, t: int) -> float:
    "1 - exp(-N(N-1) / 2^(t+1)): chance two of N random t-bit prefixes coincide."
    return -math.expm1(-support_size * (support_size - 1) / 2.0 ** (t + 1))


@dataclass(frozen=True)
class CollisionEstimate:
    monte_carlo: float
    closed_form: float
    trials: int
    collisions: int


def collision_probability(support_size: int, t: int, trials: int, seed: int, m: int = 24) -> CollisionEstimate:
    """
    Fraction of random toy-cipher keys under which two ciphertexts of a fixed random
    support share their t-bit prefix, beside the birthday closed form.
    """
    if trials < 1:
        raise ConfigurationError("trials must be positive")
    if not 1 <= t <= m:
        raise ConfigurationError(f"Need 1 <= t <= m, got t={t}, m={m}")
    if support_size > 1 << m:
        raise ConfigurationError(f"Support of {support_size} does not fit in {m} bits")
    rng = np.random.default_rng(seed)
    support = rng.choice(1 << m, size=support_size, replace=False).astype(np.uint64)
    collisions = 0
    for _ in range(trials):
        cipher = ToyFeistelPermutation(generate_key(CipherFamily.TOY, m, rng))
        prefixes = cipher.forward_ints(support) >> np.uint64(m - t)
        if np.unique(prefixes).size < support_size:
            collisions += 1
    estimate = CollisionEstimate(collisions / trials, birthday_bound(support_size, t), trials, collisions)
    logger.info(
        f"Collision rate N={support_size}, t={t}: {estimate.monte_carlo:.5f} (closed form {estimate.closed_form:.5f})"
    )
    return estimate


def strategy1_wrong_key_rate(support_size: int, t: int, m: int, trials: int, seed: int) -> CollisionEstimate:
    """
    Fraction of random keys (each with a fresh uniform support) under which strategy 1
    returns the wrong plaintext for at least one support element, beside the birthday
    closed form. The encryption oracle is a per-key table over the support.
    """
    if trials < 1:
        raise ConfigurationError("trials must be positive")
    rng = np.random.default_rng(seed)
    compressor = TruncationCompressor(t, m)
    wrong_keys = 0
    for _ in range(trials):
        cipher = ToyFeistelPermutation(generate_key(CipherFamily.TOY, m, rng))
        dist = FiniteDistribution.uniform(support_size, m, rng)
        blocks = dist.blocks()
        encrypted = cipher.forward_ints(np.array([b.to_int() for b in blocks], dtype=np.uint64))
        table = {b: BitBlock.from_int(int(y), m) for b, y in zip(blocks, encrypted, strict=True)}
        if any(
            exhaustive_strategy1(compressor(table[x]), dist, table.__getitem__, compressor).candidate != x
            for x in blocks
        ):
            wrong_keys += 1
    estimate = CollisionEstimate(wrong_keys / trials, birthday_bound(support_size, t), trials, wrong_keys)
    logger.info(
        f"Strategy 1 wrong-plaintext keys N={support_size}, t={t}: {estimate.monte_carlo:.5f} "
        f"(closed form {estimate.closed_form:.5f})"
    )
    return estimate


def strategy1_experiment(support_size: int, t: int, m: int, trials: int, seed: int) -> pd.DataFrame:
    """
    Per trial: fresh key and uniform support, X drawn from the support, strategy 1 run on
    the truncated ciphertext. Columns: trial, queries, recovered, correct.
    """
    rng = np.random.default_rng(seed)
    compressor = TruncationCompressor(t, m)
    records = []
    for trial in range(trials):
        cipher = ToyFeistelPermutation(generate_key(CipherFamily.TOY, m, rng))
        dist = FiniteDistribution.uniform(support_size, m, rng)
        x = dist.sample(rng)
        run = exhaustive_strategy1(compressor(cipher.forward(x)), dist, cipher.forward, compressor)
        records.append(
            {"trial": trial, "queries": run.queries_made, "recovered": run.recovered, "correct": run.candidate == x}
        )
    frame = pd.DataFrame.from_records(records)
    logger.info(
        f"Strategy 1: mean queries {frame['queries'].mean():.2f} over {trials} trials "
        f"(guessing entropy {(support_size + 1) / 2:.2f})"
    )
    return frame


def strategy2_experiment(support_size: int, t: int, m: int, trials: int, seed: int) -> pd.DataFrame:
    "Same set-up as strategy 1, decoding by preimage enumeration with support lookup."
    rng = np.random.default_rng(seed)
    compressor = TruncationCompressor(t, m)
    records = []
    for trial in range(trials):
        cipher = ToyFeistelPermutation(generate_key(CipherFamily.TOY, m, rng))
        dist = FiniteDistribution.uniform(support_size, m, rng)
        x = dist.sample(rng)
        run = exhaustive_strategy2(compressor(cipher.forward(x)), cipher.inverse, compressor, dist.contains)
        records.append(
            {"trial": trial, "queries": run.queries_made, "recovered": run.recovered, "correct": run.candidate == x}
        )
    frame = pd.DataFrame.from_records(records)
    logger.info(f"Strategy 2: mean queries {frame['queries'].mean():.2f} over {trials} trials")
    return frame


def expected_strategy1_queries(dist: FiniteDistribution) -> float:
    "Expected strategy-1 query count when compression is injective on the support."
    return guessing_entropy(dist)
