import logging

import numpy as np
import pytest

from core.cipher_core import CipherFamily, CipherKey, ToyFeistelPermutation
from core.sw_codec import DecoderKind, ParityCheckMatrix, SyndromeCodec
from tests.helpers import DATA_DIR, two_word_code_16


@pytest.fixture(autouse=True)
def _quiet_library_logs(caplog):
    caplog.set_level(logging.WARNING)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def toy_key16() -> CipherKey:
    return CipherKey(bytes.fromhex("0123456789abcdef"), CipherFamily.TOY, 16)


@pytest.fixture(scope="session")
def toy16(toy_key16) -> ToyFeistelPermutation:
    return ToyFeistelPermutation(toy_key16)


@pytest.fixture(scope="session")
def code16() -> ParityCheckMatrix:
    return two_word_code_16()


@pytest.fixture(scope="session")
def ml_codec16(code16) -> SyndromeCodec:
    return SyndromeCodec(code16, decoder=DecoderKind.ML)


@pytest.fixture(scope="session")
def bp_codec16(code16) -> SyndromeCodec:
    return SyndromeCodec(code16, decoder=DecoderKind.BP)


@pytest.fixture(scope="session")
def tiny_codec() -> SyndromeCodec:
    return SyndromeCodec(ParityCheckMatrix.from_alist((DATA_DIR / "tiny.alist").read_text(encoding="utf-8")))
