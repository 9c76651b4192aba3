"""
Modes of operation (ECB, CBC, OFB, CFB) over any `BlockPermutation`.

Inputs are whole blocks only. IVs are either supplied by the caller, drawn from a seeded
numpy Generator (benchmarks), or drawn from the OS CSPRNG.
"""

import logging
import secrets
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path

import numpy as np

from core.cipher_core import BitBlock, BlockPermutation
from core.exceptions import ConfigurationError, FormatError

logger = logging.getLogger(__name__)


class Mode(IntEnum):
    "Values double as the mode byte of the PEC1 container (ECB is never compressed)."

    ECB = 0
    CBC = 1
    OFB = 2
    CFB = 3


@dataclass(frozen=True)
class PlaintextSequence:
    blocks: tuple[BitBlock, ...]

    def __post_init__(self):
        blocks = tuple(self.blocks)
        if not blocks:
            raise ConfigurationError("A plaintext sequence needs at least one block")
        widths = {b.width for b in blocks}
        if len(widths) != 1:
            raise ConfigurationError(f"Mixed block widths in plaintext: {sorted(widths)}")
        object.__setattr__(self, "blocks", blocks)

    @property
    def width(self) -> int:
        return self.blocks[0].width

    def __len__(self) -> int:
        return len(self.blocks)

    def to_array(self) -> np.ndarray:
        return np.stack([b.bits for b in self.blocks])

    @classmethod
    def from_array(cls, bits: np.ndarray) -> "PlaintextSequence":
        return cls(tuple(BitBlock(row) for row in np.atleast_2d(bits)))


@dataclass(frozen=True)
class ChainedCiphertext:
    mode: Mode
    blocks: tuple[BitBlock, ...]
    iv: BitBlock | None = None

    def __post_init__(self):
        blocks = tuple(self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if not blocks:
            raise ConfigurationError("A ciphertext needs at least one block")
        if len({b.width for b in blocks}) != 1:
            raise ConfigurationError("Mixed block widths in ciphertext")
        if self.mode == Mode.ECB and self.iv is not None:
            raise ConfigurationError("ECB ciphertexts carry no IV")
        if self.mode != Mode.ECB:
            if self.iv is None:
                raise ConfigurationError(f"{self.mode.name} ciphertexts need an IV")
            if self.iv.width != blocks[0].width:
                raise ConfigurationError("IV width differs from block width")

    @property
    def width(self) -> int:
        return self.blocks[0].width

    def __len__(self) -> int:
        return len(self.blocks)


def _check_widths(cipher: BlockPermutation, plaintext: PlaintextSequence):
    if plaintext.width != cipher.width:
        raise ConfigurationError(f"Cipher width {cipher.width} does not match block width {plaintext.width}")


def _resolve_iv(cipher: BlockPermutation, iv: BitBlock | None, rng: np.random.Generator | None) -> BitBlock:
    if iv is not None:
        if iv.width != cipher.width:
            raise ConfigurationError(f"IV width {iv.width} does not match cipher width {cipher.width}")
        return iv
    if rng is not None:
        return BitBlock.random(cipher.width, rng)
    return BitBlock.from_bytes(secrets.token_bytes((cipher.width + 7) // 8), cipher.width)


def _check_mode(ct: ChainedCiphertext, expected: Mode, cipher: BlockPermutation):
    if ct.mode != expected:
        raise ConfigurationError(f"Expected a {expected.name} ciphertext, got {ct.mode.name}")
    if ct.width != cipher.width:
        raise ConfigurationError(f"Cipher width {cipher.width} does not match block width {ct.width}")


def cbc_encrypt(
    cipher: BlockPermutation,
    plaintext: PlaintextSequence,
    iv: BitBlock | None = None,
    rng: np.random.Generator | None = None,
) -> ChainedCiphertext:
    "Y_i = B_K(X_i xor Y_{i-1}) with Y_0 = IV."
    _check_widths(cipher, plaintext)
    iv = _resolve_iv(cipher, iv, rng)
    previous = iv
    out = []
    for x in plaintext.blocks:
        previous = cipher.forward(x ^ previous)
        out.append(previous)
    return ChainedCiphertext(Mode.CBC, tuple(out), iv)


def cbc_decrypt(cipher: BlockPermutation, ct: ChainedCiphertext) -> PlaintextSequence:
    _check_mode(ct, Mode.CBC, cipher)
    chain = (ct.iv, *ct.blocks)
    return PlaintextSequence(tuple(cipher.inverse(chain[i]) ^ chain[i - 1] for i in range(1, len(chain))))


def ofb_keystream(cipher: BlockPermutation, iv: BitBlock, n: int) -> tuple[BitBlock, ...]:
    "K_1 = B_K(IV), K_i = B_K(K_{i-1}); independent of the plaintext."
    stream = []
    current = iv
    for _ in range(n):
        current = cipher.forward(current)
        stream.append(current)
    return tuple(stream)


def ofb_encrypt(
    cipher: BlockPermutation,
    plaintext: PlaintextSequence,
    iv: BitBlock | None = None,
    rng: np.random.Generator | None = None,
) -> ChainedCiphertext:
    _check_widths(cipher, plaintext)
    iv = _resolve_iv(cipher, iv, rng)
    stream = ofb_keystream(cipher, iv, len(plaintext))
    return ChainedCiphertext(Mode.OFB, tuple(x ^ k for x, k in zip(plaintext.blocks, stream, strict=True)), iv)


def ofb_decrypt(cipher: BlockPermutation, ct: ChainedCiphertext) -> PlaintextSequence:
    _check_mode(ct, Mode.OFB, cipher)
    stream = ofb_keystream(cipher, ct.iv, len(ct))
    return PlaintextSequence(tuple(y ^ k for y, k in zip(ct.blocks, stream, strict=True)))


def cfb_encrypt(
    cipher: BlockPermutation,
    plaintext: PlaintextSequence,
    iv: BitBlock | None = None,
    rng: np.random.Generator | None = None,
) -> ChainedCiphertext:
    "K_i = B_K(Y_{i-1}) with Y_0 = IV; Y_i = X_i xor K_i."
    _check_widths(cipher, plaintext)
    iv = _resolve_iv(cipher, iv, rng)
    previous = iv
    out = []
    for x in plaintext.blocks:
        previous = x ^ cipher.forward(previous)
        out.append(previous)
    return ChainedCiphertext(Mode.CFB, tuple(out), iv)


def cfb_keystream_from_plaintext(
    cipher: BlockPermutation, plaintext: PlaintextSequence, iv: BitBlock
) -> tuple[BitBlock, ...]:
    "Keystream in plaintext form: K_1 = B_K(IV), K_i = B_K(X_{i-1} xor K_{i-1})."
    stream = [cipher.forward(iv)]
    for x in plaintext.blocks[:-1]:
        stream.append(cipher.forward(x ^ stream[-1]))
    return tuple(stream)


def cfb_decrypt(cipher: BlockPermutation, ct: ChainedCiphertext) -> PlaintextSequence:
    _check_mode(ct, Mode.CFB, cipher)
    chain = (ct.iv, *ct.blocks)
    return PlaintextSequence(tuple(chain[i] ^ cipher.forward(chain[i - 1]) for i in range(1, len(chain))))


def ecb_encrypt(cipher: BlockPermutation, plaintext: PlaintextSequence) -> ChainedCiphertext:
    _check_widths(cipher, plaintext)
    return ChainedCiphertext(Mode.ECB, tuple(cipher.forward(x) for x in plaintext.blocks))


def ecb_decrypt(cipher: BlockPermutation, ct: ChainedCiphertext) -> PlaintextSequence:
    _check_mode(ct, Mode.ECB, cipher)
    return PlaintextSequence(tuple(cipher.inverse(y) for y in ct.blocks))


def encrypt(
    mode: Mode,
    cipher: BlockPermutation,
    plaintext: PlaintextSequence,
    iv: BitBlock | None = None,
    rng: np.random.Generator | None = None,
) -> ChainedCiphertext:
    if mode == Mode.ECB:
        return ecb_encrypt(cipher, plaintext)
    chained = {Mode.CBC: cbc_encrypt, Mode.OFB: ofb_encrypt, Mode.CFB: cfb_encrypt}
    return chained[mode](cipher, plaintext, iv, rng)


def decrypt(cipher: BlockPermutation, ct: ChainedCiphertext) -> PlaintextSequence:
    handlers = {Mode.ECB: ecb_decrypt, Mode.CBC: cbc_decrypt, Mode.OFB: ofb_decrypt, Mode.CFB: cfb_decrypt}
    return handlers[ct.mode](cipher, ct)


def _block_bytes(width: int) -> int:
    if width % 8:
        raise ConfigurationError(f"Raw file I/O needs a byte-aligned width, got {width}")
    return width // 8


def _split_blocks(data: bytes, width: int) -> tuple[BitBlock, ...]:
    size = _block_bytes(width)
    if not data or len(data) % size:
        raise FormatError(f"{len(data)} bytes is not a whole number of {width}-bit blocks")
    return tuple(BitBlock.from_bytes(data[i : i + size]) for i in range(0, len(data), size))


def read_plaintext(path: str | Path, width: int) -> PlaintextSequence:
    return PlaintextSequence(_split_blocks(Path(path).read_bytes(), width))


def write_plaintext(path: str | Path, plaintext: PlaintextSequence):
    Path(path).write_bytes(b"".join(b.to_bytes() for b in plaintext.blocks))


def write_ciphertext(path: str | Path, ct: ChainedCiphertext):
    "IV first (absent for ECB), then the blocks."
    head = [ct.iv] if ct.iv is not None else []
    Path(path).write_bytes(b"".join(b.to_bytes() for b in (*head, *ct.blocks)))
    logger.debug(f"Wrote {ct.mode.name} ciphertext with {len(ct)} blocks to {path}")


def read_ciphertext(path: str | Path, mode: Mode, width: int) -> ChainedCiphertext:
    blocks = _split_blocks(Path(path).read_bytes(), width)
    if mode == Mode.ECB:
        return ChainedCiphertext(mode, blocks)
    if len(blocks) < 2:
        raise FormatError(f"{mode.name} ciphertext file needs an IV and at least one block")
    return ChainedCiphertext(mode, blocks[1:], blocks[0])
