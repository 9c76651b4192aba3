import inspect
import math
from fractions import Fraction

import numpy as np
import pytest

from core.chain_modes import ChainedCiphertext, Mode, PlaintextSequence, encrypt
from core.cipher_core import Aes128Permutation, BitBlock, CipherFamily, generate_key
from core.container_format import serialize
from core.exceptions import ConfigurationError, DecodeFailure
from core.fer_bench import fer_estimate
from core.pec_pipeline import (
    BlockStatus,
    CompressedStream,
    compress,
    compress_cbc,
    compress_cfb,
    compress_ofb,
    compression_factor,
    decode,
    decode_cbc,
    decode_cfb,
    decode_ofb,
    payload_bit_length,
    required_rate,
)
from core.source_models import binary_entropy
from core.sw_codec import DecodeResult, SyndromeCodec, build_codec


def bernoulli_plaintext(rng: np.random.Generator, n: int, m: int, p: float) -> PlaintextSequence:
    return PlaintextSequence.from_array((rng.random((n, m)) < p).astype(np.uint8))


def chain_block(ct: ChainedCiphertext, j: int) -> BitBlock:
    "Chain index j: 0 is the IV, j >= 1 is Y_j."
    return ct.iv if j == 0 else ct.blocks[j - 1]


@pytest.fixture(scope="module")
def ofb_codec() -> SyndromeCodec:
    return build_codec(320, 0.75, "r075", seed=0)


@pytest.fixture
def fail_on_calls(monkeypatch):
    "Makes the n-th codec decode calls (0-based, in decode order) report failure."

    def install(*indices: int) -> list[int]:
        original = SyndromeCodec.decode
        calls: list[int] = []

        def decode(self, s, z, p):
            result = original(self, s, z, p)
            calls.append(len(calls))
            if calls[-1] in indices:
                return DecodeResult(result.bits, False, self.max_iterations)
            return result

        monkeypatch.setattr(SyndromeCodec, "decode", decode)
        return calls

    return install


def _roundtrip_failures(mode, cipher, codec, rng, streams, n=20, p=0.03) -> int:
    bad = 0
    for _ in range(streams):
        x = bernoulli_plaintext(rng, n, 16, p)
        ct = encrypt(mode, cipher, x, rng=rng)
        result = decode(compress(ct, codec), cipher, codec, p)
        if not result.succeeded or result.plaintext != x:
            bad += 1
    return bad


class TestRoundtrip:
    @pytest.mark.parametrize("mode", [Mode.CBC, Mode.CFB])
    def test_block_modes_with_exhaustive_decoder(self, mode, toy16, ml_codec16, rng):
        assert _roundtrip_failures(mode, toy16, ml_codec16, rng, streams=50) <= 1

    def test_ofb_with_long_frame(self, toy16, ofb_codec, rng):
        assert _roundtrip_failures(Mode.OFB, toy16, ofb_codec, rng, streams=50) <= 1

    @pytest.mark.slow
    @pytest.mark.parametrize("mode", [Mode.CBC, Mode.CFB, Mode.OFB])
    def test_five_hundred_streams(self, mode, toy16, ml_codec16, ofb_codec, rng):
        codec = ofb_codec if mode == Mode.OFB else ml_codec16
        assert _roundtrip_failures(mode, toy16, codec, rng, streams=500) <= 5

    @pytest.mark.parametrize("mode", [Mode.CBC, Mode.CFB])
    def test_all_zero_plaintext_at_zero_crossover(self, mode, toy16, ml_codec16, rng):
        x = PlaintextSequence((BitBlock.zeros(16),) * 5)
        ct = encrypt(mode, toy16, x, rng=rng)
        result = decode(compress(ct, ml_codec16), toy16, ml_codec16, 0.0)
        assert result.succeeded
        assert result.plaintext == x
        assert result.statuses == (BlockStatus.RECOVERED,) * 5

    def test_single_block_cbc_is_iv_syndrome_plus_raw_block(self, toy16, ml_codec16, rng):
        x = bernoulli_plaintext(rng, 1, 16, 0.02)
        ct = encrypt(Mode.CBC, toy16, x, rng=rng)
        cs = compress_cbc(ct, ml_codec16)
        assert cs.block_syndromes == ()
        assert cs.raw_tail == ct.blocks[0]
        assert decode_cbc(cs, toy16, ml_codec16, 0.02).plaintext == x

    @pytest.mark.parametrize("mode", [Mode.CBC, Mode.CFB, Mode.OFB])
    def test_aes_roundtrip_at_rate_half(self, rng, mode):
        n = 4
        cipher = Aes128Permutation(generate_key(CipherFamily.AES128, rng=rng))
        codec = build_codec(n * 128 if mode == Mode.OFB else 128, 0.5, "r05", seed=0)
        x = bernoulli_plaintext(rng, n, 128, 0.01)
        cs = compress(encrypt(mode, cipher, x, rng=rng), codec)
        assert cs.payload_bit_length == 128 + n * 64
        assert decode(cs, cipher, codec, 0.01).plaintext == x

    @pytest.mark.slow
    def test_ofb_single_long_code_beats_per_block_codes(self):
        aggregate = fer_estimate(build_codec(2048, 0.5, "r05", seed=0), 0.04, 2000, seed=8)
        per_block = fer_estimate(build_codec(128, 0.5, "r05", seed=0), 0.04, 4000, seed=8)
        per_stream = 1 - (1 - per_block.point) ** 16
        assert aggregate.point < per_stream
        assert aggregate.point <= 0.01


class TestPayloadLength:
    def test_formula_over_random_shapes(self, rng):
        for _ in range(50):
            n = int(rng.integers(1, 200))
            m = int(rng.choice([128, 1024]))
            rate = Fraction(1, 2) if rng.random() < 0.5 else Fraction(3, 4)
            expected = int(n * m * rate) + m
            assert payload_bit_length(Mode.CBC, n, m, rate) == expected
            assert payload_bit_length(Mode.CFB, n, m, rate) == expected

    def test_twenty_blocks_of_1024(self):
        assert payload_bit_length(Mode.CBC, 20, 1024, Fraction(1, 2)) == 11264

    @pytest.mark.parametrize("rate, dist", [(0.5, "r05"), (0.75, "r075")])
    def test_compressed_cbc_streams(self, rng, rate, dist):
        codec = build_codec(128, rate, dist, seed=0)
        cipher = Aes128Permutation(generate_key(CipherFamily.AES128, rng=rng))
        for _ in range(10):
            n = int(rng.integers(1, 12))
            cs = compress_cbc(encrypt(Mode.CBC, cipher, bernoulli_plaintext(rng, n, 128, 0.1), rng=rng), codec)
            assert cs.payload_bits().size == int(n * 128 * Fraction(rate)) + 128
            assert len(serialize(cs)) == 58 + math.ceil(cs.payload_bits().size / 8)

    @pytest.mark.slow
    def test_compressed_cbc_streams_long_blocks(self, rng):
        codec = build_codec(1024, 0.5, "r05", seed=0)
        ct = ChainedCiphertext(
            Mode.CBC,
            tuple(BitBlock.random(1024, rng) for _ in range(20)),
            BitBlock.random(1024, rng),
        )
        assert compress_cbc(ct, codec).payload_bit_length == 11264

    def test_rate_must_give_whole_syndromes(self):
        with pytest.raises(ConfigurationError):
            payload_bit_length(Mode.CBC, 3, 10, Fraction(1, 3))

    def test_ofb_carries_iv_and_one_syndrome(self, toy16, ofb_codec, rng):
        ct = encrypt(Mode.OFB, toy16, bernoulli_plaintext(rng, 20, 16, 0.03), rng=rng)
        cs = compress_ofb(ct, ofb_codec)
        assert cs.payload_bit_length == 16 + 240
        assert np.array_equal(cs.iv_field, ct.iv.bits)


class TestKeyIndependence:
    @pytest.mark.parametrize("fn", [compress, compress_cbc, compress_cfb, compress_ofb])
    def test_compressors_take_no_key(self, fn):
        names = list(inspect.signature(fn).parameters)
        assert len(names) == 2
        assert names[0] == "ct"
        assert not any("key" in n or "cipher" in n for n in names)

    def test_output_is_deterministic(self, toy16, ml_codec16, rng):
        ct = encrypt(Mode.CBC, toy16, bernoulli_plaintext(rng, 10, 16, 0.1), rng=rng)
        first = serialize(compress(ct, ml_codec16))
        assert all(serialize(compress(ct, ml_codec16)) == first for _ in range(100))


class TestErrorPropagation:
    def test_cbc_failure_leaves_lower_blocks(self, toy16, ml_codec16, rng, fail_on_calls):
        x = bernoulli_plaintext(rng, 6, 16, 0.02)
        cs = compress_cbc(encrypt(Mode.CBC, toy16, x, rng=rng), ml_codec16)
        fail_on_calls(2)
        result = decode_cbc(cs, toy16, ml_codec16, 0.02)
        assert result.failed_block_index == 3
        assert result.statuses == (
            BlockStatus.NOT_REACHED,
            BlockStatus.NOT_REACHED,
            BlockStatus.NOT_REACHED,
            BlockStatus.FAILED,
            BlockStatus.RECOVERED,
            BlockStatus.RECOVERED,
        )
        assert result.blocks[:4] == (None,) * 4
        assert result.blocks[4:] == x.blocks[4:]

    def test_cfb_failure_leaves_higher_blocks(self, toy16, ml_codec16, rng, fail_on_calls):
        x = bernoulli_plaintext(rng, 6, 16, 0.02)
        cs = compress_cfb(encrypt(Mode.CFB, toy16, x, rng=rng), ml_codec16)
        fail_on_calls(2)
        result = decode_cfb(cs, toy16, ml_codec16, 0.02)
        assert result.failed_block_index == 2
        assert result.statuses[:3] == (BlockStatus.RECOVERED, BlockStatus.RECOVERED, BlockStatus.FAILED)
        assert result.statuses[3:] == (BlockStatus.NOT_REACHED,) * 3
        assert result.blocks[:2] == x.blocks[:2]
        assert result.blocks[2:] == (None,) * 4

    @pytest.mark.parametrize("mode", [Mode.CBC, Mode.CFB])
    def test_fallback_hook_resumes_decoding(self, mode, toy16, ml_codec16, rng, fail_on_calls):
        x = bernoulli_plaintext(rng, 6, 16, 0.02)
        ct = encrypt(mode, toy16, x, rng=rng)
        cs = compress(ct, ml_codec16)
        fail_on_calls(1, 4)
        requested: list[int] = []

        def hook(chain_index: int) -> BitBlock:
            requested.append(chain_index)
            return chain_block(ct, chain_index)

        result = decode(cs, toy16, ml_codec16, 0.02, on_failure=hook)
        assert result.succeeded
        assert result.plaintext == x
        assert result.statuses.count(BlockStatus.FALLBACK) == 2
        assert requested == ([4, 1] if mode == Mode.CBC else [2, 5])

    @pytest.mark.parametrize("mode, offset", [(Mode.CBC, 0), (Mode.CFB, 1)])
    def test_hook_gets_chain_index_of_failed_block(self, mode, offset, toy16, ml_codec16, rng, fail_on_calls):
        ct = encrypt(mode, toy16, bernoulli_plaintext(rng, 6, 16, 0.02), rng=rng)
        fail_on_calls(2)
        requested: list[int] = []

        def hook(chain_index: int) -> None:
            requested.append(chain_index)

        result = decode(compress(ct, ml_codec16), toy16, ml_codec16, 0.02, on_failure=hook)
        assert result.failed_block_index is not None
        assert requested == [3] == [result.failed_block_index + offset]

    def test_failed_result_refuses_plaintext(self, toy16, ml_codec16, rng, fail_on_calls):
        cs = compress_cbc(encrypt(Mode.CBC, toy16, bernoulli_plaintext(rng, 3, 16, 0.02), rng=rng), ml_codec16)
        fail_on_calls(0)
        result = decode_cbc(cs, toy16, ml_codec16, 0.02)
        assert not result.succeeded
        with pytest.raises(DecodeFailure) as info:
            result.plaintext
        assert info.value.block_index == 2

    def test_ofb_failure_loses_whole_stream(self, toy16, ofb_codec, rng, fail_on_calls):
        cs = compress_ofb(encrypt(Mode.OFB, toy16, bernoulli_plaintext(rng, 20, 16, 0.03), rng=rng), ofb_codec)
        fail_on_calls(0)
        result = decode_ofb(cs, toy16, ofb_codec, 0.03)
        assert result.failed_block_index == 0
        assert set(result.statuses) == {BlockStatus.FAILED}


class TestValidation:
    def test_ecb_is_not_compressed(self, toy16, ml_codec16, rng):
        ct = encrypt(Mode.ECB, toy16, bernoulli_plaintext(rng, 2, 16, 0.1))
        with pytest.raises(ConfigurationError):
            compress(ct, ml_codec16)

    def test_codec_width_must_match(self, toy16, tiny_codec, rng):
        ct = encrypt(Mode.CBC, toy16, bernoulli_plaintext(rng, 2, 16, 0.1), rng=rng)
        with pytest.raises(ConfigurationError):
            compress_cbc(ct, tiny_codec)

    def test_decode_needs_the_compressing_codec(self, toy16, ml_codec16, rng):
        ct = encrypt(Mode.CBC, toy16, bernoulli_plaintext(rng, 2, 16, 0.1), rng=rng)
        cs = compress_cbc(ct, ml_codec16)
        other = build_codec(16, 0.5, "r05", seed=3)
        with pytest.raises(ConfigurationError, match="different codec"):
            decode_cbc(cs, toy16, other, 0.1)

    def test_decode_checks_mode(self, toy16, ml_codec16, rng):
        cs = compress_cfb(encrypt(Mode.CFB, toy16, bernoulli_plaintext(rng, 2, 16, 0.1), rng=rng), ml_codec16)
        with pytest.raises(ConfigurationError):
            decode_cbc(cs, toy16, ml_codec16, 0.1)

    def test_raw_tail_only_on_cbc(self, ml_codec16):
        with pytest.raises(ConfigurationError):
            CompressedStream(
                Mode.CFB,
                16,
                1,
                ml_codec16.rate,
                ml_codec16.digest(),
                np.zeros(16, dtype=np.uint8),
                (np.zeros(14, dtype=np.uint8),),
                BitBlock.zeros(16),
            )


class TestRates:
    def test_compression_factor_finite_stream(self):
        assert compression_factor(1000, 128, 0.5) == pytest.approx(1001 / 501)

    def test_compression_factor_limit(self):
        assert compression_factor(math.inf, 128, 0.5) == 2.0

    def test_compression_factor_with_wider_alphabet(self):
        assert compression_factor(math.inf, 128, Fraction(3, 4), alphabet_bits=2.0) == pytest.approx(8 / 3)

    def test_required_rate_is_binary_entropy(self):
        assert required_rate(0.03, 128) == pytest.approx(binary_entropy(0.03))
        assert required_rate(0.0) == 0.0
