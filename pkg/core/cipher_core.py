"""
Keyed m-bit permutations.

Two families are provided: AES-128 (FIPS-197, through the `cryptography` package) and a
small-block toy cipher used for exhaustive experiments. The toy cipher is an 8-round
Feistel network over a ⌈m/2⌉/⌊m/2⌋ split; its round function is

    F_i(x) = top `out_bits` of mix64(x XOR rotl64(K, 8·i) XOR RC_i)

where K is the key read as a big-endian 64-bit integer (right-padded with zeros), RC_i are
fixed constants and mix64 is the splitmix64 finalizer. All arithmetic is modulo 2^64, so
results are bit-exact on every platform.

Bit order inside a block is most-significant-bit first within each byte, bytes in natural
order.
"""

import logging
import secrets
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from core._compat import StrEnum
from core.exceptions import ConfigurationError, FormatError

logger = logging.getLogger(__name__)

AES_BLOCK_BITS = 128
AES_KEY_BYTES = 16
TOY_MIN_WIDTH = 4
TOY_MAX_WIDTH = 32
TOY_MAX_KEY_BYTES = 8
TOY_ROUNDS = 8

_MASK64 = (1 << 64) - 1
_ROUND_CONSTANTS = (
    0x243F6A8885A308D3,
    0x13198A2E03707344,
    0xA4093822299F31D0,
    0x082EFA98EC4E6C89,
    0x452821E638D01377,
    0xBE5466CF34E90C6C,
    0xC0AC29B7C97C50DD,
    0x3F84D5B5B5470917,
)


@dataclass(frozen=True, eq=False)
class BitBlock:
    "Fixed-width block of bits, stored as a read-only uint8 array of 0/1 values."

    bits: np.ndarray

    def __post_init__(self):
        arr = np.array(self.bits, dtype=np.uint8).reshape(-1)
        if arr.size < 1:
            raise ConfigurationError("BitBlock needs at least one bit")
        if np.any(arr > 1):
            raise ConfigurationError("BitBlock entries must be 0 or 1")
        arr.setflags(write=False)
        object.__setattr__(self, "bits", arr)

    @property
    def width(self) -> int:
        return int(self.bits.size)

    def __len__(self) -> int:
        return self.width

    @classmethod
    def zeros(cls, width: int) -> "BitBlock":
        return cls(np.zeros(width, dtype=np.uint8))

    @classmethod
    def random(cls, width: int, rng: np.random.Generator) -> "BitBlock":
        return cls(rng.integers(0, 2, size=width, dtype=np.uint8))

    @classmethod
    def from_int(cls, value: int, width: int) -> "BitBlock":
        if width < 1:
            raise ConfigurationError(f"Invalid block width {width}")
        if value < 0 or value >> width:
            raise ConfigurationError(f"Value {value} does not fit in {width} bits")
        n_bytes = (width + 7) // 8
        packed = (value << (8 * n_bytes - width)).to_bytes(n_bytes, "big")
        return cls(np.unpackbits(np.frombuffer(packed, dtype=np.uint8))[:width])

    @classmethod
    def from_bytes(cls, data: bytes, width: int | None = None) -> "BitBlock":
        width = 8 * len(data) if width is None else width
        if len(data) != (width + 7) // 8:
            raise ConfigurationError(f"{len(data)} bytes cannot hold exactly a {width}-bit block")
        return cls(np.unpackbits(np.frombuffer(data, dtype=np.uint8))[:width])

    @classmethod
    def from_hex(cls, text: str, width: int | None = None) -> "BitBlock":
        text = text.strip().lower().removeprefix("0x")
        width = 4 * len(text) if width is None else width
        return cls.from_int(int(text, 16), width)

    def to_int(self) -> int:
        n_bytes = (self.width + 7) // 8
        return int.from_bytes(np.packbits(self.bits).tobytes(), "big") >> (8 * n_bytes - self.width)

    def to_bytes(self) -> bytes:
        return np.packbits(self.bits).tobytes()

    def hex(self) -> str:
        return format(self.to_int(), f"0{(self.width + 3) // 4}x")

    def __xor__(self, other: "BitBlock") -> "BitBlock":
        if not isinstance(other, BitBlock):
            return NotImplemented
        if other.width != self.width:
            raise ConfigurationError(f"Cannot XOR a {self.width}-bit block with a {other.width}-bit block")
        return BitBlock(self.bits ^ other.bits)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitBlock):
            return NotImplemented
        return self.width == other.width and bool(np.array_equal(self.bits, other.bits))

    def __hash__(self) -> int:
        return hash((self.width, self.bits.tobytes()))

    def __repr__(self) -> str:
        return f"BitBlock(width={self.width}, hex={self.hex()})"


class CipherFamily(StrEnum):
    AES128 = "aes128"
    TOY = "toy"


@dataclass(frozen=True)
class CipherKey:
    key_bytes: bytes
    family: CipherFamily
    width: int

    def __post_init__(self):
        if self.family == CipherFamily.AES128:
            if len(self.key_bytes) != AES_KEY_BYTES:
                raise ConfigurationError(f"AES-128 needs a {AES_KEY_BYTES}-byte key, got {len(self.key_bytes)}")
            if self.width != AES_BLOCK_BITS:
                raise ConfigurationError(f"AES-128 block width is {AES_BLOCK_BITS}, got {self.width}")
        else:
            if not 1 <= len(self.key_bytes) <= TOY_MAX_KEY_BYTES:
                raise ConfigurationError(f"Toy cipher key must be 1..{TOY_MAX_KEY_BYTES} bytes")
            if not TOY_MIN_WIDTH <= self.width <= TOY_MAX_WIDTH:
                raise ConfigurationError(f"Toy cipher width must be in [{TOY_MIN_WIDTH}, {TOY_MAX_WIDTH}]")


class BlockPermutation(ABC):
    "Keyed bijection on width-bit blocks."

    @property
    @abstractmethod
    def width(self) -> int: ...

    @abstractmethod
    def forward(self, block: BitBlock) -> BitBlock: ...

    @abstractmethod
    def inverse(self, block: BitBlock) -> BitBlock: ...

    def _check_width(self, block: BitBlock):
        if block.width != self.width:
            raise ConfigurationError(f"Cipher width is {self.width} bits, block has {block.width}")


class Aes128Permutation(BlockPermutation):
    def __init__(self, key: CipherKey):
        if key.family != CipherFamily.AES128:
            raise ConfigurationError(f"Expected an AES-128 key, got {key.family}")
        self._cipher = Cipher(algorithms.AES(key.key_bytes), modes.ECB())

    @property
    def width(self) -> int:
        return AES_BLOCK_BITS

    def forward(self, block: BitBlock) -> BitBlock:
        self._check_width(block)
        encryptor = self._cipher.encryptor()
        return BitBlock.from_bytes(encryptor.update(block.to_bytes()) + encryptor.finalize())

    def inverse(self, block: BitBlock) -> BitBlock:
        self._check_width(block)
        decryptor = self._cipher.decryptor()
        return BitBlock.from_bytes(decryptor.update(block.to_bytes()) + decryptor.finalize())


def _mix64(x: np.ndarray) -> np.ndarray:
    x = x + np.uint64(0x9E3779B97F4A7C15)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


class ToyFeistelPermutation(BlockPermutation):
    "8-round Feistel permutation on 4..32-bit blocks."

    def __init__(self, key: CipherKey):
        if key.family != CipherFamily.TOY:
            raise ConfigurationError(f"Expected a toy-cipher key, got {key.family}")
        self._width = key.width
        self._left_bits = (key.width + 1) // 2
        self._right_bits = key.width // 2
        k = int.from_bytes(key.key_bytes.ljust(TOY_MAX_KEY_BYTES, b"\0"), "big")
        self._round_keys = tuple(
            np.uint64((((k << (8 * i)) | (k >> (64 - 8 * i))) & _MASK64) ^ rc) for i, rc in enumerate(_ROUND_CONSTANTS)
        )

    @property
    def width(self) -> int:
        return self._width

    def _round(self, i: int, x: np.ndarray, out_bits: int) -> np.ndarray:
        return _mix64(x ^ self._round_keys[i]) >> np.uint64(64 - out_bits)

    def forward_ints(self, values: np.ndarray) -> np.ndarray:
        "Encrypts an array of integers in [0, 2^width) in one vectorized pass."
        v = np.atleast_1d(np.asarray(values, dtype=np.uint64))
        left = v >> np.uint64(self._right_bits)
        right = v & np.uint64((1 << self._right_bits) - 1)
        lw, rw = self._left_bits, self._right_bits
        for i in range(TOY_ROUNDS):
            left, right = right, left ^ self._round(i, right, lw)
            lw, rw = rw, lw
        return (left << np.uint64(rw)) | right

    def inverse_ints(self, values: np.ndarray) -> np.ndarray:
        v = np.atleast_1d(np.asarray(values, dtype=np.uint64))
        left = v >> np.uint64(self._right_bits)
        right = v & np.uint64((1 << self._right_bits) - 1)
        lw, rw = self._left_bits, self._right_bits
        for i in reversed(range(TOY_ROUNDS)):
            left, right = right ^ self._round(i, left, rw), left
            lw, rw = rw, lw
        return (left << np.uint64(rw)) | right

    def forward(self, block: BitBlock) -> BitBlock:
        self._check_width(block)
        return BitBlock.from_int(int(self.forward_ints(np.array([block.to_int()]))[0]), self._width)

    def inverse(self, block: BitBlock) -> BitBlock:
        self._check_width(block)
        return BitBlock.from_int(int(self.inverse_ints(np.array([block.to_int()]))[0]), self._width)


def permutation_for(key: CipherKey) -> BlockPermutation:
    if key.family == CipherFamily.AES128:
        return Aes128Permutation(key)
    return ToyFeistelPermutation(key)


def aes128_forward(key: CipherKey, block: BitBlock) -> BitBlock:
    return Aes128Permutation(key).forward(block)


def aes128_inverse(key: CipherKey, block: BitBlock) -> BitBlock:
    return Aes128Permutation(key).inverse(block)


def toy_forward(key: CipherKey, block: BitBlock) -> BitBlock:
    return ToyFeistelPermutation(key).forward(block)


def toy_inverse(key: CipherKey, block: BitBlock) -> BitBlock:
    return ToyFeistelPermutation(key).inverse(block)


def generate_key(
    family: CipherFamily, width: int | None = None, rng: np.random.Generator | None = None
) -> CipherKey:
    """Draws a fresh key. Without `rng` the bytes come from the OS CSPRNG."""
    if family == CipherFamily.AES128:
        n_bytes, width = AES_KEY_BYTES, AES_BLOCK_BITS
    else:
        n_bytes, width = TOY_MAX_KEY_BYTES, width or 16
    material = rng.bytes(n_bytes) if rng is not None else secrets.token_bytes(n_bytes)
    return CipherKey(material, family, width)


def write_key(path: str | Path, key: CipherKey):
    Path(path).write_text(key.key_bytes.hex() + "\n", encoding="utf-8")
    logger.debug(f"Wrote {key.family} key to {path}")


def read_key(path: str | Path, family: CipherFamily = CipherFamily.AES128, width: int | None = None) -> CipherKey:
    text = Path(path).read_text(encoding="utf-8").strip()
    try:
        material = bytes.fromhex(text)
    except ValueError as e:
        raise FormatError(f"Key file {path} is not hex-encoded: {e}") from e
    if width is None:
        width = AES_BLOCK_BITS if family == CipherFamily.AES128 else 16
    return CipherKey(material, family, width)
