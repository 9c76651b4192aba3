"""
Plaintext sources and entropy functionals.

All randomness goes through numpy's PCG64 `Generator` seeded from a `SeedSequence`, so
Monte-Carlo runs are reproducible across platforms. Parallel trials clone a source with
`spawn`, which hands each child an independent seed.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.stats import entropy

from core.chain_modes import PlaintextSequence
from core.cipher_core import BitBlock
from core.exceptions import ConfigurationError, FormatError

logger = logging.getLogger(__name__)


@dataclass
class BernoulliSource:
    """
    i.i.d. bits with Pr(1) = p. Probabilities above 0.5 are stored as 1 - p with the
    `complement` flag set, so `p` always lies in [0, 0.5].
    """

    p: float
    seed: int | np.random.SeedSequence | None = None
    complement: bool = False
    _rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if not 0 <= self.p <= 1:
            raise ConfigurationError(f"Bit probability must be in [0, 1], got {self.p}")
        if self.p > 0.5:
            self.p, self.complement = 1 - self.p, not self.complement
        self._rng = np.random.default_rng(self.seed)

    @property
    def one_probability(self) -> float:
        return 1 - self.p if self.complement else self.p

    def sample_bits(self, shape: tuple[int, ...]) -> np.ndarray:
        bits = (self._rng.random(shape) < self.p).astype(np.uint8)
        return bits ^ np.uint8(1) if self.complement else bits

    def spawn(self, count: int) -> list["BernoulliSource"]:
        seq = self.seed if isinstance(self.seed, np.random.SeedSequence) else np.random.SeedSequence(self.seed)
        return [BernoulliSource(self.p, child, self.complement) for child in seq.spawn(count)]


def sample_blocks(src: BernoulliSource, n: int, m: int) -> PlaintextSequence:
    "n blocks of m i.i.d. bits drawn from the source."
    if n < 1 or m < 1:
        raise ConfigurationError(f"Need n >= 1 and m >= 1, got n={n}, m={m}")
    return PlaintextSequence.from_array(src.sample_bits((n, m)))


def binary_entropy(p: float) -> float:
    "H_b(p) in bits."
    if not 0 <= p <= 1:
        raise ConfigurationError(f"Probability must be in [0, 1], got {p}")
    return float(entropy([p, 1 - p], base=2))


@dataclass(frozen=True)
class FiniteDistribution:
    support: tuple[tuple[BitBlock, float], ...]

    def __post_init__(self):
        support = tuple(self.support)
        if not support:
            raise ConfigurationError("Empty distribution support")
        if abs(sum(prob for _, prob in support) - 1.0) > 1e-9:
            raise ConfigurationError("Probabilities must sum to 1")
        if any(prob < 0 for _, prob in support):
            raise ConfigurationError("Negative probability in distribution")
        blocks = [b for b, _ in support]
        if len(set(blocks)) != len(blocks):
            raise ConfigurationError("Support entries must be distinct")
        if len({b.width for b in blocks}) != 1:
            raise ConfigurationError("Support blocks must share one width")
        object.__setattr__(self, "support", support)

    @property
    def width(self) -> int:
        return self.support[0][0].width

    def __len__(self) -> int:
        return len(self.support)

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([prob for _, prob in self.support])

    def blocks(self) -> list[BitBlock]:
        return [b for b, _ in self.support]

    def by_descending_probability(self) -> list[BitBlock]:
        "Support ordered by decreasing probability; ties keep file order."
        order = np.argsort(-self.probabilities, kind="stable")
        return [self.support[i][0] for i in order]

    def contains(self, block: BitBlock) -> bool:
        return block in self._members

    @cached_property
    def _members(self) -> frozenset[BitBlock]:
        return frozenset(self.blocks())

    def sample(self, rng: np.random.Generator) -> BitBlock:
        return self.support[int(rng.choice(len(self.support), p=self.probabilities))][0]

    @classmethod
    def uniform(cls, size: int, width: int, rng: np.random.Generator) -> "FiniteDistribution":
        "Uniform distribution over `size` distinct random blocks."
        if size > 1 << width:
            raise ConfigurationError(f"Cannot pick {size} distinct {width}-bit blocks")
        values = rng.choice(1 << width, size=size, replace=False)
        return cls(tuple((BitBlock.from_int(int(v), width), 1.0 / size) for v in values))

    @classmethod
    def point_mass(cls, block: BitBlock) -> "FiniteDistribution":
        return cls(((block, 1.0),))


def guessing_entropy(dist: FiniteDistribution) -> float:
    "Expected number of guesses when guessing in decreasing order of probability."
    ordered = np.sort(dist.probabilities)[::-1]
    return float(np.sum(np.arange(1, ordered.size + 1) * ordered))


def load_distribution(path: str | Path, width: int | None = None) -> FiniteDistribution:
    "One `hex-block probability` pair per line; blank lines and '#' comments are skipped."
    support = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise FormatError(f"{path}:{lineno}: expected 'hex-block probability'")
        try:
            support.append((BitBlock.from_hex(parts[0], width), float(parts[1])))
        except ValueError as e:
            raise FormatError(f"{path}:{lineno}: {e}") from e
    logger.debug(f"Loaded distribution with {len(support)} entries from {path}")
    return FiniteDistribution(tuple(support))
