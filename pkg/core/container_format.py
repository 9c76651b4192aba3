"""
PEC1 binary container.

    magic "PEC1" | version u8 = 1 | mode u8 (1=CBC, 2=OFB, 3=CFB) | m u32 LE | n u64 LE
    | rate_num u32 LE | rate_den u32 LE | codec digest (32 bytes)
    | payload bits packed MSB-first, zero-padded to a byte boundary at the end only

Payload order follows `CompressedStream.payload_bits()`.
"""

import logging
import struct
from fractions import Fraction
from pathlib import Path

import numpy as np

from core.chain_modes import Mode
from core.cipher_core import BitBlock
from core.exceptions import FormatError
from core.pec_pipeline import CompressedStream, payload_bit_length

logger = logging.getLogger(__name__)

MAGIC = b"PEC1"
VERSION = 1
HEADER = struct.Struct("<4sBBIQII32s")


def serialize(cs: CompressedStream) -> bytes:
    header = HEADER.pack(
        MAGIC,
        VERSION,
        int(cs.mode),
        cs.width,
        cs.n_blocks,
        cs.rate.numerator,
        cs.rate.denominator,
        cs.codec_digest,
    )
    return header + np.packbits(cs.payload_bits()).tobytes()


def deserialize(data: bytes) -> CompressedStream:
    if len(data) < HEADER.size:
        raise FormatError(f"Container is {len(data)} bytes, shorter than the {HEADER.size}-byte header")
    magic, version, mode_byte, m, n, rate_num, rate_den, digest = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"Bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"Unsupported container version {version}")
    if mode_byte not in (Mode.CBC, Mode.OFB, Mode.CFB):
        raise FormatError(f"Unknown mode byte {mode_byte}")
    if m == 0 or n == 0 or rate_den == 0 or rate_num == 0 or rate_num >= rate_den:
        raise FormatError("Invalid width, block count or rate in header")
    mode = Mode(mode_byte)
    rate = Fraction(rate_num, rate_den)

    try:
        total_bits = payload_bit_length(mode, n, m, rate)
    except ValueError as e:
        raise FormatError(str(e)) from e
    payload = np.frombuffer(data, dtype=np.uint8, offset=HEADER.size)
    if payload.size != (total_bits + 7) // 8:
        raise FormatError(f"Payload is {payload.size} bytes, expected {(total_bits + 7) // 8}")
    bits = np.unpackbits(payload)
    if np.any(bits[total_bits:]):
        raise FormatError("Non-zero padding bits after payload")
    bits = bits[:total_bits]

    if mode == Mode.OFB:
        aggregate = int(rate * n * m)
        return CompressedStream(mode, m, n, rate, digest, bits[:m], (bits[m : m + aggregate],))

    syndrome_bits = rate * m
    if syndrome_bits.denominator != 1:
        raise FormatError(f"Rate {rate} does not give whole {m}-bit block syndromes")
    k = int(syndrome_bits)
    if mode == Mode.CFB:
        syndromes = tuple(bits[m + i * k : m + (i + 1) * k] for i in range(n))
        return CompressedStream(mode, m, n, rate, digest, bits[:m], syndromes)
    syndromes = tuple(bits[(i + 1) * k : (i + 2) * k] for i in range(n - 1))
    tail = BitBlock(bits[n * k : n * k + m])
    return CompressedStream(mode, m, n, rate, digest, bits[:k], syndromes, tail)


def write_stream(path: str | Path, cs: CompressedStream):
    data = serialize(cs)
    Path(path).write_bytes(data)
    logger.debug(f"Wrote {cs.mode.name} stream ({len(data)} bytes) to {path}")


def read_stream(path: str | Path) -> CompressedStream:
    return deserialize(Path(path).read_bytes())
