from pathlib import Path

import numpy as np

from core.cipher_core import BitBlock, BlockPermutation
from core.sw_codec import ParityCheckMatrix

DATA_DIR = Path(__file__).parent / "data"

# 7x4 Hamming code in the usual column order (column j is the binary form of j + 1)
HAMMING_7_4 = np.array(
    [
        [0, 0, 0, 1, 1, 1, 1],
        [0, 1, 1, 0, 0, 1, 1],
        [1, 0, 1, 0, 1, 0, 1],
    ],
    dtype=np.uint8,
)


class IdentityPermutation(BlockPermutation):
    "B(x) = x, which makes every chaining recursion easy to follow by hand."

    def __init__(self, width: int):
        self._width = width

    @property
    def width(self) -> int:
        return self._width

    def forward(self, block: BitBlock) -> BitBlock:
        self._check_width(block)
        return block

    def inverse(self, block: BitBlock) -> BitBlock:
        self._check_width(block)
        return block


def two_word_code_16() -> ParityCheckMatrix:
    """
    H = [P^T | I_14] for the [16, 2, 10] code with information rows
    1111111111 0000 and 00000 111111111. Cosets hold four words, so ML decoding is exact
    and cheap while still correcting up to four flips.
    """
    p1 = np.array([1] * 10 + [0] * 4, dtype=np.uint8)
    p2 = np.array([0] * 5 + [1] * 9, dtype=np.uint8)
    dense = np.concatenate([p1[:, None], p2[:, None], np.eye(14, dtype=np.uint8)], axis=1)
    return ParityCheckMatrix.from_dense(dense)


def random_dense(rng: np.random.Generator, n_checks: int, n_vars: int) -> np.ndarray:
    "Random 0/1 matrix with no empty rows or columns."
    while True:
        dense = (rng.random((n_checks, n_vars)) < 0.3).astype(np.uint8)
        if dense.any(axis=0).all() and dense.any(axis=1).all():
            return dense
