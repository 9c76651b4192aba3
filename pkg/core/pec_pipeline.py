"""
Post-encryption compression for chained modes.

Compression never sees the key: every `compress_*` function is a pure function of the
ciphertext and the codec. Decoding needs the key and the source statistics p.

Block indices are 0-based. Plaintext index i is X_{i+1}; "chain index" j names the
ciphertext chain with j = 0 for the IV and j >= 1 for Y_j. When a frame cannot be
decoded, the optional `on_failure(chain_index)` hook may return the uncompressed block
so decoding can continue; returning None stops decoding at that block.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Protocol

import numpy as np

from core._compat import StrEnum
from core.chain_modes import ChainedCiphertext, Mode, PlaintextSequence, ofb_keystream
from core.cipher_core import BitBlock, BlockPermutation
from core.exceptions import ConfigurationError, DecodeFailure
from core.source_models import binary_entropy
from core.sw_codec import SyndromeCodec

logger = logging.getLogger(__name__)


class FailureHook(Protocol):
    "Called with the chain index of the ciphertext block whose syndrome did not decode."

    def __call__(self, chain_index: int) -> BitBlock | None: ...


@dataclass(frozen=True, eq=False)
class CompressedStream:
    """
    Mode-tagged compressed ciphertext.

    `iv_field` is the IV syndrome for CBC and the raw IV bits for OFB and CFB.
    `block_syndromes` holds C(Y_1)..C(Y_{n-1}) for CBC, C(Y_1)..C(Y_n) for CFB and a single
    syndrome of the concatenated Y^n for OFB. `raw_tail` is Y_n, CBC only.
    """

    mode: Mode
    width: int
    n_blocks: int
    rate: Fraction
    codec_digest: bytes
    iv_field: np.ndarray
    block_syndromes: tuple[np.ndarray, ...]
    raw_tail: BitBlock | None = None

    def __post_init__(self):
        if self.mode == Mode.ECB:
            raise ConfigurationError("ECB ciphertexts are not compressed")
        if self.n_blocks < 1 or self.width < 1:
            raise ConfigurationError("Stream needs at least one block of positive width")
        if len(self.codec_digest) != 32:
            raise ConfigurationError("Codec digest must be 32 bytes")
        object.__setattr__(self, "rate", Fraction(self.rate))
        object.__setattr__(self, "iv_field", np.asarray(self.iv_field, dtype=np.uint8))
        object.__setattr__(self, "block_syndromes", tuple(np.asarray(s, dtype=np.uint8) for s in self.block_syndromes))
        expected = {
            Mode.CBC: self.n_blocks - 1,
            Mode.CFB: self.n_blocks,
            Mode.OFB: 1,
        }[self.mode]
        if len(self.block_syndromes) != expected:
            raise ConfigurationError(f"{self.mode.name} stream needs {expected} block syndromes")
        if (self.mode == Mode.CBC) != (self.raw_tail is not None):
            raise ConfigurationError("A raw tail block is carried by CBC streams and only by them")
        if self.payload_bit_length != payload_bit_length(self.mode, self.n_blocks, self.width, self.rate):
            raise ConfigurationError("Stream fields do not add up to the payload length for its mode")

    def payload_bits(self) -> np.ndarray:
        parts = [self.iv_field, *self.block_syndromes]
        if self.raw_tail is not None:
            parts.append(self.raw_tail.bits)
        return np.concatenate(parts).astype(np.uint8)

    @property
    def payload_bit_length(self) -> int:
        tail = self.raw_tail.width if self.raw_tail is not None else 0
        return int(self.iv_field.size + sum(s.size for s in self.block_syndromes) + tail)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CompressedStream):
            return NotImplemented
        return (
            (self.mode, self.width, self.n_blocks, self.rate, self.codec_digest)
            == (other.mode, other.width, other.n_blocks, other.rate, other.codec_digest)
            and np.array_equal(self.payload_bits(), other.payload_bits())
        )


class BlockStatus(StrEnum):
    RECOVERED = "recovered"
    FALLBACK = "fallback"
    FAILED = "failed"
    NOT_REACHED = "not_reached"


@dataclass(frozen=True)
class PecResult:
    """
    Per-block outcome of a decode. `failed_block_index` is a plaintext index: for CBC it equals
    the chain index of the failed syndrome, for CFB it is one less.
    """

    blocks: tuple[BitBlock | None, ...]
    statuses: tuple[BlockStatus, ...]
    failed_block_index: int | None = None

    def __post_init__(self):
        has_failure = BlockStatus.FAILED in self.statuses
        if has_failure != (self.failed_block_index is not None):
            raise ConfigurationError("failed_block_index must be set exactly when a block failed")

    @property
    def succeeded(self) -> bool:
        return self.failed_block_index is None

    @property
    def plaintext(self) -> PlaintextSequence:
        self.raise_for_failure()
        return PlaintextSequence(tuple(b for b in self.blocks if b is not None))

    def raise_for_failure(self):
        if self.failed_block_index is not None:
            raise DecodeFailure(f"Decoding failed at block {self.failed_block_index}", self.failed_block_index)


def payload_bit_length(mode: Mode, n: int, m: int, rate: Fraction) -> int:
    "Exact payload size: CBC n·m·R + m, CFB and OFB m + n·m·R."
    syndrome_bits = Fraction(rate) * n * m
    if syndrome_bits.denominator != 1:
        raise ConfigurationError(f"Rate {rate} does not give whole syndromes for n={n}, m={m}")
    return int(syndrome_bits) + m


def _check_stream(cs: CompressedStream, mode: Mode, codec: SyndromeCodec, cipher: BlockPermutation, codec_width: int):
    if cs.mode != mode:
        raise ConfigurationError(f"Expected a {mode.name} stream, got {cs.mode.name}")
    if cs.codec_digest != codec.digest():
        raise ConfigurationError("Stream was compressed with a different codec")
    if codec.width != codec_width:
        raise ConfigurationError(f"Codec width {codec.width} does not fit this stream (need {codec_width})")
    if cipher.width != cs.width:
        raise ConfigurationError(f"Cipher width {cipher.width} does not match stream width {cs.width}")


def compress_cbc(ct: ChainedCiphertext, codec: SyndromeCodec) -> CompressedStream:
    "(C(IV), C(Y_1), ..., C(Y_{n-1}), Y_n)."
    if ct.mode != Mode.CBC:
        raise ConfigurationError(f"Expected a CBC ciphertext, got {ct.mode.name}")
    if codec.width != ct.width:
        raise ConfigurationError(f"Codec width {codec.width} does not match block width {ct.width}")
    head = ct.blocks[:-1]
    syndromes = tuple(codec.encode_many(np.stack([y.bits for y in head]))) if head else ()
    return CompressedStream(
        Mode.CBC, ct.width, len(ct), codec.rate, codec.digest(), codec.encode(ct.iv), syndromes, ct.blocks[-1]
    )


def decode_cbc(
    cs: CompressedStream,
    cipher: BlockPermutation,
    codec: SyndromeCodec,
    p: float,
    on_failure: FailureHook | None = None,
) -> PecResult:
    """
    Right-to-left joint decryption and decoding. X~_n = B^-1(Y_n); Y_{j} is decoded from its
    syndrome with side information X~_{j+1}, which yields X_{j+1} = Y_j xor X~_{j+1} and the
    next side information X~_j = B^-1(Y_j). A failure leaves that block and every lower one
    unrecovered.
    """
    _check_stream(cs, Mode.CBC, codec, cipher, cs.width)
    n = cs.n_blocks
    blocks: list[BitBlock | None] = [None] * n
    statuses = [BlockStatus.NOT_REACHED] * n
    failed = None
    syndromes = (cs.iv_field, *cs.block_syndromes)
    side = cipher.inverse(cs.raw_tail)
    for j in range(n - 1, -1, -1):
        result = codec.decode(syndromes[j], side, p)
        y = result.bits
        statuses[j] = BlockStatus.RECOVERED
        if not result.success:
            y = on_failure(j) if on_failure is not None else None
            if y is None:
                logger.info(f"CBC decode failed at chain index {j}; {j + 1} block(s) unrecovered")
                statuses[j] = BlockStatus.FAILED
                failed = j
                break
            statuses[j] = BlockStatus.FALLBACK
        blocks[j] = y ^ side
        if j > 0:
            side = cipher.inverse(y)
    return PecResult(tuple(blocks), tuple(statuses), failed)


def compress_ofb(ct: ChainedCiphertext, codec_nm: SyndromeCodec) -> CompressedStream:
    "(IV, C(Y_1 || ... || Y_n)) with one syndrome over all n·m bits."
    if ct.mode != Mode.OFB:
        raise ConfigurationError(f"Expected an OFB ciphertext, got {ct.mode.name}")
    if codec_nm.width != len(ct) * ct.width:
        raise ConfigurationError(f"OFB codec must span n·m = {len(ct) * ct.width} bits, has {codec_nm.width}")
    joined = np.concatenate([y.bits for y in ct.blocks])
    return CompressedStream(
        Mode.OFB, ct.width, len(ct), codec_nm.rate, codec_nm.digest(), ct.iv.bits, (codec_nm.matrix.syndrome(joined),)
    )


def decode_ofb(cs: CompressedStream, cipher: BlockPermutation, codec_nm: SyndromeCodec, p: float) -> PecResult:
    "Regenerates the keystream from the IV and decodes Y^n with it as side information."
    _check_stream(cs, Mode.OFB, codec_nm, cipher, cs.n_blocks * cs.width)
    stream = ofb_keystream(cipher, BitBlock(cs.iv_field), cs.n_blocks)
    side = BitBlock(np.concatenate([k.bits for k in stream]))
    result = codec_nm.decode(cs.block_syndromes[0], side, p)
    if not result.success:
        logger.info(f"OFB decode failed for a {cs.n_blocks}-block stream")
        return PecResult((None,) * cs.n_blocks, (BlockStatus.FAILED,) * cs.n_blocks, 0)
    plain = (result.bits ^ side).bits.reshape(cs.n_blocks, cs.width)
    return PecResult(tuple(BitBlock(row) for row in plain), (BlockStatus.RECOVERED,) * cs.n_blocks)


def compress_cfb(ct: ChainedCiphertext, codec: SyndromeCodec) -> CompressedStream:
    "(IV, C(Y_1), ..., C(Y_n))."
    if ct.mode != Mode.CFB:
        raise ConfigurationError(f"Expected a CFB ciphertext, got {ct.mode.name}")
    if codec.width != ct.width:
        raise ConfigurationError(f"Codec width {codec.width} does not match block width {ct.width}")
    syndromes = tuple(codec.encode_many(np.stack([y.bits for y in ct.blocks])))
    return CompressedStream(Mode.CFB, ct.width, len(ct), codec.rate, codec.digest(), ct.iv.bits, syndromes)


def decode_cfb(
    cs: CompressedStream,
    cipher: BlockPermutation,
    codec: SyndromeCodec,
    p: float,
    on_failure: FailureHook | None = None,
) -> PecResult:
    """
    Left-to-right: K~_1 = B(IV); Y_i is decoded with side information K~_i, X_i = K~_i xor Y_i
    and K~_{i+1} = B(Y_i). A failure leaves that block and every later one unrecovered.
    """
    _check_stream(cs, Mode.CFB, codec, cipher, cs.width)
    n = cs.n_blocks
    blocks: list[BitBlock | None] = [None] * n
    statuses = [BlockStatus.NOT_REACHED] * n
    failed = None
    keystream = cipher.forward(BitBlock(cs.iv_field))
    for i in range(n):
        chain_index = i + 1
        result = codec.decode(cs.block_syndromes[i], keystream, p)
        y = result.bits
        statuses[i] = BlockStatus.RECOVERED
        if not result.success:
            y = on_failure(chain_index) if on_failure is not None else None
            if y is None:
                logger.info(f"CFB decode failed at chain index {chain_index}; {n - i} block(s) unrecovered")
                statuses[i] = BlockStatus.FAILED
                failed = i
                break
            statuses[i] = BlockStatus.FALLBACK
        blocks[i] = keystream ^ y
        if i + 1 < n:
            keystream = cipher.forward(y)
    return PecResult(tuple(blocks), tuple(statuses), failed)


def compress(ct: ChainedCiphertext, codec: SyndromeCodec) -> CompressedStream:
    handlers = {Mode.CBC: compress_cbc, Mode.OFB: compress_ofb, Mode.CFB: compress_cfb}
    if ct.mode not in handlers:
        raise ConfigurationError("ECB ciphertexts cannot be compressed generically")
    return handlers[ct.mode](ct, codec)


def decode(
    cs: CompressedStream,
    cipher: BlockPermutation,
    codec: SyndromeCodec,
    p: float,
    on_failure: FailureHook | None = None,
) -> PecResult:
    if cs.mode == Mode.CBC:
        return decode_cbc(cs, cipher, codec, p, on_failure)
    if cs.mode == Mode.CFB:
        return decode_cfb(cs, cipher, codec, p, on_failure)
    return decode_ofb(cs, cipher, codec, p)


def required_rate(p: float, m: int | None = None) -> float:
    """
    Smallest usable rate for an i.i.d. Bernoulli(p) plaintext: H(X_i)/m = H_b(p). The block
    width does not change the per-bit bound.
    """
    return binary_entropy(p)


def compression_factor(n: int, m: int, rate: float | Fraction, alphabet_bits: float = 1.0) -> float:
    """
    Input/output length ratio of the CBC scheme for n blocks:
    (n+1)·m·log|X| / (n·m·R + m·log|X|), tending to log|X|/R as n grows.
    """
    if n < 1 or m < 1:
        raise ConfigurationError("n and m must be positive")
    if math.isinf(n):
        return alphabet_bits / float(rate)
    return (n + 1) * m * alphabet_bits / (n * m * float(rate) + m * alphabet_bits)
