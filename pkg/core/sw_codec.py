"""
LDPC-based Slepian-Wolf codec.

The encoder maps a block y to its syndrome s = H·y over GF(2). The decoder recovers y from
s and side information z, modelling z as y observed through a binary symmetric channel
with crossover p. Belief propagation runs in the LLR domain on whole batches of frames;
the check-node update folds the syndrome bit into the sign of the outgoing message.
"""

import hashlib
import json
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path

import numpy as np
from pydantic import BaseModel, Field
from scipy.sparse import csr_matrix

from core import alist_io
from core._compat import StrEnum
from core.cipher_core import BitBlock
from core.exceptions import ConfigurationError, ConstructionError, DecodeFailure

logger = logging.getLogger(__name__)

Syndrome = np.ndarray

DEFAULT_MAX_ITERATIONS = 100
ML_MAX_WIDTH = 24
MIN_SUM_SCALE = 0.8
_MIN_CROSSOVER = 1e-9
_TANH_CLIP = 1.0 - 1e-12
_MIN_SUM_CAP = 30.0
_TINY = 1e-300


@dataclass(frozen=True)
class DegreeDistribution:
    "Edge-perspective degree distributions: (degree, fraction of edges) pairs."

    lambda_: tuple[tuple[int, float], ...]
    rho: tuple[tuple[int, float], ...]
    name: str = "custom"

    def __post_init__(self):
        for label, pairs in (("lambda", self.lambda_), ("rho", self.rho)):
            if not pairs:
                raise ConfigurationError(f"Empty {label} distribution")
            if abs(sum(f for _, f in pairs) - 1.0) > 1e-9:
                raise ConfigurationError(f"{label} fractions must sum to 1")
            for degree, fraction in pairs:
                if degree < 2:
                    raise ConfigurationError(f"{label} degree {degree} is below 2")
                if not 0 < fraction <= 1:
                    raise ConfigurationError(f"{label} fraction {fraction} outside (0, 1]")

    @classmethod
    def regular(cls, dv: int, dc: int) -> "DegreeDistribution":
        return cls(((dv, 1.0),), ((dc, 1.0),), name=f"regular-{dv}-{dc}")


# lambda(x) = 0.3317x + 0.2376x^2 + 0.4307x^5, rho(x) = 0.6535x^5 + 0.3465x^6
RATE_HALF = DegreeDistribution(((2, 0.3317), (3, 0.2376), (6, 0.4307)), ((6, 0.6535), (7, 0.3465)), name="r05")
# lambda(x) = 0.4249x + 0.0311x^2 + 0.5440x^4, rho(x) = 0.8187x^3 + 0.1813x^4
RATE_THREE_QUARTERS = DegreeDistribution(
    ((2, 0.4249), (3, 0.0311), (5, 0.5440)), ((4, 0.8187), (5, 0.1813)), name="r075"
)
DISTRIBUTIONS = {"r05": RATE_HALF, "r075": RATE_THREE_QUARTERS}


def design_rate(dist: DegreeDistribution) -> float:
    "Design code rate 1 - (sum rho_j/j) / (sum lambda_i/i)."
    lam = sum(f / d for d, f in dist.lambda_)
    rho = sum(f / d for d, f in dist.rho)
    return 1.0 - rho / lam


def variable_degree_sequence(n_vars: int, dist: DegreeDistribution) -> np.ndarray:
    """
    Converts edge fractions to node counts (node fraction at degree i ∝ lambda_i / i) and
    rounds with the largest-remainder method so the counts sum to n_vars exactly.
    Returned in non-decreasing degree order.
    """
    degrees = np.array([d for d, _ in dist.lambda_])
    weights = np.array([f / d for d, f in dist.lambda_])
    quotas = n_vars * weights / weights.sum()
    counts = np.floor(quotas).astype(np.int64)
    shortfall = n_vars - int(counts.sum())
    # stable sort keeps lower degrees first among equal remainders
    order = np.argsort(-(quotas - counts), kind="stable")
    counts[order[:shortfall]] += 1
    sequence = np.repeat(degrees, counts)
    return np.sort(sequence, kind="stable")


@dataclass(frozen=True, eq=False)
class ParityCheckMatrix:
    "Sparse H stored as the sorted variable indices of each check."

    n_vars: int
    n_checks: int
    check_rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.n_vars <= 0 or self.n_checks <= 0:
            raise ConfigurationError("Matrix dimensions must be positive")
        rows = tuple(tuple(sorted(int(v) for v in row)) for row in self.check_rows)
        if len(rows) != self.n_checks:
            raise ConfigurationError(f"Expected {self.n_checks} check rows, got {len(rows)}")
        var_degree = np.zeros(self.n_vars, dtype=np.int64)
        for c, row in enumerate(rows):
            if not row:
                raise ConfigurationError(f"Check {c} has no edges")
            if len(set(row)) != len(row):
                raise ConfigurationError(f"Duplicate edge in check {c}")
            if row[0] < 0 or row[-1] >= self.n_vars:
                raise ConfigurationError(f"Variable index out of range in check {c}")
            var_degree[list(row)] += 1
        if np.any(var_degree == 0):
            raise ConfigurationError(f"Variables without edges: {np.flatnonzero(var_degree == 0)[:10].tolist()}")
        object.__setattr__(self, "check_rows", rows)

    @classmethod
    def from_dense(cls, dense: np.ndarray) -> "ParityCheckMatrix":
        dense = np.asarray(dense)
        if dense.ndim != 2:
            raise ConfigurationError("Dense parity-check matrix must be 2-D")
        rows = tuple(tuple(np.flatnonzero(row % 2).tolist()) for row in dense)
        return cls(dense.shape[1], dense.shape[0], rows)

    @classmethod
    def from_alist(cls, text: str) -> "ParityCheckMatrix":
        return cls(*alist_io.loads(text))

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.n_checks, self.n_vars), dtype=np.uint8)
        dense[self.edge_checks, self.edge_vars] = 1
        return dense

    def to_alist(self) -> str:
        return alist_io.dumps(self.n_vars, self.n_checks, self.check_rows)

    def digest(self) -> bytes:
        "SHA-256 of the canonical alist text."
        return hashlib.sha256(self.to_alist().encode("utf-8")).digest()

    @cached_property
    def edge_checks(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_checks), [len(row) for row in self.check_rows])

    @cached_property
    def edge_vars(self) -> np.ndarray:
        return np.fromiter((v for row in self.check_rows for v in row), dtype=np.int64)

    @cached_property
    def check_ptr(self) -> np.ndarray:
        return np.concatenate(([0], np.cumsum([len(row) for row in self.check_rows])[:-1])).astype(np.int64)

    @cached_property
    def var_order(self) -> np.ndarray:
        return np.argsort(self.edge_vars, kind="stable")

    @cached_property
    def var_ptr(self) -> np.ndarray:
        degrees = self.variable_degrees()
        return np.concatenate(([0], np.cumsum(degrees)[:-1])).astype(np.int64)

    @cached_property
    def _csr(self) -> csr_matrix:
        indptr = np.concatenate(([0], np.cumsum([len(row) for row in self.check_rows])))
        data = np.ones(self.edge_vars.size, dtype=np.int32)
        return csr_matrix((data, self.edge_vars, indptr), shape=(self.n_checks, self.n_vars))

    @property
    def n_edges(self) -> int:
        return int(self.edge_vars.size)

    def variable_degrees(self) -> np.ndarray:
        return np.bincount(self.edge_vars, minlength=self.n_vars)

    def check_degrees(self) -> np.ndarray:
        return np.array([len(row) for row in self.check_rows])

    def variable_neighbors(self) -> list[list[int]]:
        neighbors: list[list[int]] = [[] for _ in range(self.n_vars)]
        for c, row in enumerate(self.check_rows):
            for v in row:
                neighbors[v].append(c)
        return neighbors

    def syndrome(self, bits: np.ndarray) -> np.ndarray:
        "H·bits mod 2 for one frame (1-D) or a batch of frames (rows of a 2-D array)."
        bits = np.asarray(bits)
        if bits.shape[-1] != self.n_vars:
            raise ConfigurationError(f"Expected {self.n_vars} bits per frame, got {bits.shape[-1]}")
        product = self._csr @ np.atleast_2d(bits).astype(np.int32).T
        result = (np.asarray(product).T % 2).astype(np.uint8)
        return result[0] if bits.ndim == 1 else result

    def girth(self) -> int | None:
        "Length of the shortest cycle in the Tanner graph, or None when it has none."
        var_adj = self.variable_neighbors()
        best = math.inf
        # nodes: variables are v, checks are n_vars + c
        for root in range(self.n_vars):
            dist = {root: 0}
            parent = {root: -1}
            frontier = [root]
            while frontier and 2 * dist[frontier[0]] + 1 < best:
                next_frontier = []
                for node in frontier:
                    if node < self.n_vars:
                        neighbors = [self.n_vars + c for c in var_adj[node]]
                    else:
                        neighbors = list(self.check_rows[node - self.n_vars])
                    for nb in neighbors:
                        if nb == parent[node]:
                            continue
                        if nb in dist:
                            best = min(best, dist[node] + dist[nb] + 1)
                        else:
                            dist[nb] = dist[node] + 1
                            parent[nb] = node
                            next_frontier.append(nb)
                frontier = next_frontier
        return None if best == math.inf else int(best)

    @cached_property
    def _coset_table(self) -> np.ndarray:
        "Syndrome (as an integer) of every n_vars-bit word; index = word read MSB-first."
        words = np.arange(1 << self.n_vars, dtype=np.uint32)
        table = np.zeros(words.size, dtype=np.uint32)
        for c, row in enumerate(self.check_rows):
            mask = sum(1 << (self.n_vars - 1 - v) for v in row)
            parity = (np.bitwise_count(words & np.uint32(mask)) & 1).astype(np.uint32)
            table |= parity << np.uint32(self.n_checks - 1 - c)
        return table


def peg_construct(
    n_vars: int,
    n_checks: int,
    dist: DegreeDistribution | np.ndarray,
    seed: int = 0,
) -> ParityCheckMatrix:
    """
    Progressive edge growth. Variables are processed in index order (the degree sequence is
    non-decreasing); each new edge goes to a check at maximal distance in the current graph.
    Among those, the lowest-degree checks win, then the ones whose closing cycle has the
    largest approximate cycle extrinsic message degree (sum of d - 2 over its variables),
    then the lowest check index. A nonzero seed replaces the last rule by a seeded draw
    among the tied checks, which yields a different (not merely relabelled) graph.
    """
    if isinstance(dist, DegreeDistribution):
        degrees = variable_degree_sequence(n_vars, dist)
    else:
        degrees = np.asarray(dist, dtype=np.int64)
    if degrees.size != n_vars:
        raise ConstructionError(f"Degree sequence has {degrees.size} entries for {n_vars} variables")
    total_edges = int(degrees.sum())
    if total_edges < n_checks:
        raise ConstructionError(f"{total_edges} edges cannot cover {n_checks} check nodes")
    if degrees.min() < 1 or degrees.max() > n_checks:
        raise ConstructionError(f"Variable degrees must lie in [1, {n_checks}]")

    rng = np.random.default_rng(seed) if seed else None
    ace_weight = degrees - 2
    var_adj: list[list[int]] = [[] for _ in range(n_vars)]
    chk_adj: list[list[int]] = [[] for _ in range(n_checks)]
    chk_degree = np.zeros(n_checks, dtype=np.int64)
    all_checks = np.arange(n_checks)
    no_cycle = np.zeros(n_checks, dtype=np.int64)

    for v in range(n_vars):
        for k in range(int(degrees[v])):
            if k == 0:
                candidates, ace = all_checks, no_cycle
            else:
                candidates, ace = _farthest_checks(v, ace_weight, var_adj, chk_adj, n_checks)
            c = _pick_check(candidates, ace, chk_degree, rng)
            var_adj[v].append(c)
            chk_adj[c].append(v)
            chk_degree[c] += 1

    if np.any(chk_degree == 0):
        raise ConstructionError(f"{int(np.sum(chk_degree == 0))} check nodes received no edges")
    logger.info(f"PEG construction done: {n_vars} variables, {n_checks} checks, {total_edges} edges (seed {seed})")
    return ParityCheckMatrix(n_vars, n_checks, tuple(tuple(row) for row in chk_adj))


def _pick_check(
    candidates: np.ndarray,
    ace: np.ndarray,
    chk_degree: np.ndarray,
    rng: np.random.Generator | None,
) -> int:
    degree = chk_degree[candidates]
    lightest = degree == degree.min()
    pool, pool_ace = candidates[lightest], ace[lightest]
    pool = np.sort(pool[pool_ace == pool_ace.max()])
    if rng is None:
        return int(pool[0])
    return int(rng.choice(pool))


def _farthest_checks(
    v: int,
    ace_weight: np.ndarray,
    var_adj: list[list[int]],
    chk_adj: list[list[int]],
    n_checks: int,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Layered breadth-first expansion from v. Returns the checks a new edge may join and, for
    each, the smallest ACE sum along a shortest path from v (zero when no cycle closes).
    """
    reached = np.zeros(n_checks, dtype=bool)
    frontier = {c: 0 for c in var_adj[v]}
    reached[list(frontier)] = True
    seen_vars = {v}
    while True:
        layer_vars: dict[int, int] = {}
        for c, path_ace in frontier.items():
            for u in chk_adj[c]:
                if u in seen_vars:
                    continue
                value = path_ace + int(ace_weight[u])
                if value < layer_vars.get(u, value + 1):
                    layer_vars[u] = value
        seen_vars.update(layer_vars)
        layer_checks: dict[int, int] = {}
        for u, path_ace in layer_vars.items():
            for c in var_adj[u]:
                if not reached[c] and path_ace < layer_checks.get(c, path_ace + 1):
                    layer_checks[c] = path_ace
        if not layer_checks:
            unreached = np.flatnonzero(~reached)
            return unreached, np.zeros(unreached.size, dtype=np.int64)
        reached[list(layer_checks)] = True
        if reached.all():
            return np.fromiter(layer_checks, dtype=np.int64), np.fromiter(layer_checks.values(), dtype=np.int64)
        frontier = layer_checks


class DecoderKind(StrEnum):
    BP = "bp"
    ML = "ml"


class CheckRule(StrEnum):
    TANH = "tanh"
    MIN_SUM = "min-sum"


@dataclass(frozen=True)
class DecodeResult:
    bits: BitBlock
    success: bool
    iterations: int = 0

    def unwrap(self) -> BitBlock:
        if not self.success:
            raise DecodeFailure(f"Decoding failed after {self.iterations} iterations", last_estimate=self.bits)
        return self.bits


@dataclass(frozen=True)
class BatchDecodeResult:
    bits: np.ndarray
    success: np.ndarray
    iterations: np.ndarray

    def __len__(self) -> int:
        return int(self.success.size)

    def frame(self, i: int) -> DecodeResult:
        return DecodeResult(BitBlock(self.bits[i]), bool(self.success[i]), int(self.iterations[i]))


class CodecDescriptor(BaseModel):
    "Sidecar record identifying a codec."

    m: int = Field(..., description="Variable-node count (block width).")
    n_checks: int = Field(..., description="Check-node count (syndrome length).")
    distribution_id: str | None = Field(None, description="Degree distribution the matrix was grown from.")
    seed: int | None = Field(None, description="PEG seed.")
    digest: str = Field(..., description="Hex SHA-256 of the canonical alist text.")


@dataclass(frozen=True)
class SyndromeCodec:
    matrix: ParityCheckMatrix
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    decoder: DecoderKind = DecoderKind.BP
    check_rule: CheckRule = CheckRule.TANH
    distribution_id: str | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ConfigurationError("max_iterations must be at least 1")
        if not 0 < self.matrix.n_checks < self.matrix.n_vars:
            raise ConfigurationError(f"Rate {self.matrix.n_checks}/{self.matrix.n_vars} is outside (0, 1)")
        if self.decoder == DecoderKind.ML and self.matrix.n_vars > ML_MAX_WIDTH:
            raise ConfigurationError(f"Exhaustive ML decoding is limited to {ML_MAX_WIDTH} bits")

    @property
    def width(self) -> int:
        return self.matrix.n_vars

    @property
    def n_checks(self) -> int:
        return self.matrix.n_checks

    @property
    def rate(self) -> Fraction:
        return Fraction(self.matrix.n_checks, self.matrix.n_vars)

    def digest(self) -> bytes:
        return self.matrix.digest()

    def descriptor(self) -> CodecDescriptor:
        return CodecDescriptor(
            m=self.width,
            n_checks=self.n_checks,
            distribution_id=self.distribution_id,
            seed=self.seed,
            digest=self.digest().hex(),
        )

    def encode(self, y: BitBlock) -> Syndrome:
        return syndrome_encode(self, y)

    def encode_many(self, bits: np.ndarray) -> np.ndarray:
        return self.matrix.syndrome(np.atleast_2d(bits))

    def decode(self, s: Syndrome, z: BitBlock, p: float) -> DecodeResult:
        if self.decoder == DecoderKind.ML:
            return ml_decode_bruteforce(self.matrix, s, z, p)
        return bp_decode(self, s, z, p)

    def decode_many(self, syndromes: np.ndarray, side_info: np.ndarray, p: float) -> BatchDecodeResult:
        if self.decoder == DecoderKind.ML:
            return ml_decode_many(self.matrix, syndromes, side_info, p)
        return bp_decode_many(self, syndromes, side_info, p)


def syndrome_encode(codec: SyndromeCodec, y: BitBlock) -> Syndrome:
    if y.width != codec.width:
        raise ConfigurationError(f"Codec expects {codec.width}-bit blocks, got {y.width}")
    return codec.matrix.syndrome(y.bits)


def _check_crossover(p: float):
    if not 0 <= p < 0.5:
        raise ConfigurationError(f"Crossover probability must be in [0, 0.5), got {p}")


def _tanh_rule(matrix: ParityCheckMatrix, v2c: np.ndarray, syndrome_sign: np.ndarray) -> np.ndarray:
    t = np.tanh(0.5 * v2c)
    negative = (t < 0).astype(np.int64)
    log_mag = np.log(np.maximum(np.abs(t), _TINY))
    check_log_mag = np.add.reduceat(log_mag, matrix.check_ptr, axis=1)
    check_negative = np.add.reduceat(negative, matrix.check_ptr, axis=1)
    ext_mag = np.minimum(np.exp(check_log_mag[:, matrix.edge_checks] - log_mag), _TANH_CLIP)
    ext_negative = (check_negative[:, matrix.edge_checks] - negative) % 2
    sign = np.where(ext_negative == 1, -1.0, 1.0) * syndrome_sign
    return 2.0 * np.arctanh(sign * ext_mag)


def _min_sum_rule(matrix: ParityCheckMatrix, v2c: np.ndarray, syndrome_sign: np.ndarray) -> np.ndarray:
    mag = np.abs(v2c)
    negative = (v2c < 0).astype(np.int64)
    min1 = np.minimum.reduceat(mag, matrix.check_ptr, axis=1)
    is_min = mag == min1[:, matrix.edge_checks]
    n_min = np.add.reduceat(is_min.astype(np.int64), matrix.check_ptr, axis=1)
    min2 = np.minimum.reduceat(np.where(is_min, np.inf, mag), matrix.check_ptr, axis=1)
    min2 = np.where(n_min > 1, min1, min2)
    ext_mag = np.where(is_min, min2[:, matrix.edge_checks], min1[:, matrix.edge_checks])
    ext_mag = np.minimum(ext_mag, _MIN_SUM_CAP)
    check_negative = np.add.reduceat(negative, matrix.check_ptr, axis=1)
    ext_negative = (check_negative[:, matrix.edge_checks] - negative) % 2
    sign = np.where(ext_negative == 1, -1.0, 1.0) * syndrome_sign
    return MIN_SUM_SCALE * sign * ext_mag


def bp_decode_many(codec: SyndromeCodec, syndromes: np.ndarray, side_info: np.ndarray, p: float) -> BatchDecodeResult:
    """
    Belief propagation on a batch of frames. Each frame stops as soon as its hard decision
    satisfies H·y = s; frames still unsatisfied after max_iterations are failures and keep
    their last hard decision.
    """
    _check_crossover(p)
    matrix = codec.matrix
    s = np.atleast_2d(np.asarray(syndromes, dtype=np.uint8))
    z = np.atleast_2d(np.asarray(side_info, dtype=np.uint8))
    if s.shape[1] != matrix.n_checks or z.shape[1] != matrix.n_vars or s.shape[0] != z.shape[0]:
        raise ConfigurationError(f"Syndrome/side-info shapes {s.shape}/{z.shape} do not fit the codec")

    decided = z.copy()
    success = np.all(matrix.syndrome(z) == s, axis=1)
    iterations = np.zeros(z.shape[0], dtype=np.int64)
    active = np.flatnonzero(~success)
    if active.size == 0:
        return BatchDecodeResult(decided, success, iterations)

    rule = _min_sum_rule if codec.check_rule == CheckRule.MIN_SUM else _tanh_rule
    q = max(p, _MIN_CROSSOVER)
    channel_llr = (1.0 - 2.0 * z[active]) * math.log((1.0 - q) / q)
    syndrome_sign = 1.0 - 2.0 * s[active][:, matrix.edge_checks]
    s_active = s[active]
    c2v = np.zeros((active.size, matrix.n_edges))
    totals = channel_llr.copy()

    for it in range(1, codec.max_iterations + 1):
        v2c = totals[:, matrix.edge_vars] - c2v
        c2v = rule(matrix, v2c, syndrome_sign)
        totals = channel_llr + np.add.reduceat(c2v[:, matrix.var_order], matrix.var_ptr, axis=1)
        hard = (totals < 0).astype(np.uint8)
        done = np.all(matrix.syndrome(hard) == s_active, axis=1)
        decided[active] = hard
        iterations[active] = it
        success[active[done]] = True
        if done.all():
            break
        keep = ~done
        active = active[keep]
        channel_llr, syndrome_sign, s_active = channel_llr[keep], syndrome_sign[keep], s_active[keep]
        c2v, totals = c2v[keep], totals[keep]

    logger.debug(f"BP decoded {z.shape[0]} frames, {int(np.sum(~success))} failures")
    return BatchDecodeResult(decided, success, iterations)


def bp_decode(codec: SyndromeCodec, s: Syndrome, z: BitBlock, p: float) -> DecodeResult:
    if z.width != codec.width:
        raise ConfigurationError(f"Codec expects {codec.width}-bit side information, got {z.width}")
    return bp_decode_many(codec, np.asarray(s)[None, :], z.bits[None, :], p).frame(0)


def ml_decode_bruteforce(matrix: ParityCheckMatrix, s: Syndrome, z: BitBlock, p: float) -> DecodeResult:
    """
    Maximum-likelihood decoding by enumerating the coset {y : H·y = s}. For p < 0.5 the BSC
    likelihood falls with Hamming distance to z, so the closest coset member wins; ties go to
    the lexicographically smallest word. Fails only when s is not a reachable syndrome.
    """
    if matrix.n_vars > ML_MAX_WIDTH:
        raise ConfigurationError(f"Exhaustive ML decoding is limited to {ML_MAX_WIDTH} bits, got {matrix.n_vars}")
    _check_crossover(p)
    if z.width != matrix.n_vars or np.asarray(s).size != matrix.n_checks:
        raise ConfigurationError("Syndrome or side information does not fit the matrix")
    s_int = BitBlock(s).to_int()
    candidates = np.flatnonzero(matrix._coset_table == s_int)
    if candidates.size == 0:
        return DecodeResult(z, False, 0)
    distances = np.bitwise_count(candidates.astype(np.uint32) ^ np.uint32(z.to_int()))
    best = int(candidates[np.argmin(distances)])
    return DecodeResult(BitBlock.from_int(best, matrix.n_vars), True, 0)


def ml_decode_many(
    matrix: ParityCheckMatrix, syndromes: np.ndarray, side_info: np.ndarray, p: float
) -> BatchDecodeResult:
    s = np.atleast_2d(np.asarray(syndromes, dtype=np.uint8))
    z = np.atleast_2d(np.asarray(side_info, dtype=np.uint8))
    decided = np.empty_like(z)
    success = np.zeros(z.shape[0], dtype=bool)
    for i in range(z.shape[0]):
        result = ml_decode_bruteforce(matrix, s[i], BitBlock(z[i]), p)
        decided[i] = result.bits.bits
        success[i] = result.success
    return BatchDecodeResult(decided, success, np.zeros(z.shape[0], dtype=np.int64))


def build_codec(
    m: int,
    rate: Fraction | float,
    dist_id: str = "r05",
    seed: int = 0,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    check_rule: CheckRule = CheckRule.TANH,
) -> SyndromeCodec:
    "PEG code with ceil(rate·m) checks grown from one of the named distributions."
    if dist_id not in DISTRIBUTIONS:
        raise ConfigurationError(f"Unknown degree distribution '{dist_id}', expected one of {sorted(DISTRIBUTIONS)}")
    n_checks = math.ceil(Fraction(rate).limit_denominator(1 << 20) * m)
    matrix = peg_construct(m, n_checks, DISTRIBUTIONS[dist_id], seed=seed)
    return SyndromeCodec(matrix, max_iterations, DecoderKind.BP, check_rule, dist_id, seed)


def save_codec(codec: SyndromeCodec, path: str | Path) -> Path:
    "Writes the alist file and a JSON descriptor beside it; returns the descriptor path."
    path = Path(path)
    path.write_text(codec.matrix.to_alist(), encoding="utf-8")
    descriptor_path = path.with_suffix(".json")
    descriptor_path.write_text(codec.descriptor().model_dump_json(indent=2), encoding="utf-8")
    logger.info(f"Saved codec {codec.width}x{codec.n_checks} to {path}")
    return descriptor_path


def load_codec(
    path: str | Path,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    decoder: DecoderKind = DecoderKind.BP,
    check_rule: CheckRule = CheckRule.TANH,
) -> SyndromeCodec:
    path = Path(path)
    matrix = ParityCheckMatrix.from_alist(path.read_text(encoding="utf-8"))
    distribution_id, seed = None, None
    descriptor_path = path.with_suffix(".json")
    if descriptor_path.exists():
        descriptor = CodecDescriptor(**json.loads(descriptor_path.read_text(encoding="utf-8")))
        if descriptor.digest != matrix.digest().hex():
            logger.warning(f"Descriptor digest at {descriptor_path} does not match {path}; ignoring descriptor")
        else:
            distribution_id, seed = descriptor.distribution_id, descriptor.seed
    return SyndromeCodec(matrix, max_iterations, decoder, check_rule, distribution_id, seed)
