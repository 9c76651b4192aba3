import logging
from fractions import Fraction

import numpy as np
import pytest

from core.cipher_core import BitBlock
from core.exceptions import ConfigurationError, ConstructionError, DecodeFailure
from core.fer_bench import fer_estimate, paired_fer
from core.sw_codec import (
    RATE_HALF,
    RATE_THREE_QUARTERS,
    CheckRule,
    DecodeResult,
    DecoderKind,
    DegreeDistribution,
    ParityCheckMatrix,
    SyndromeCodec,
    _pick_check,
    bp_decode,
    build_codec,
    design_rate,
    load_codec,
    ml_decode_bruteforce,
    peg_construct,
    save_codec,
    syndrome_encode,
    variable_degree_sequence,
)
from tests.helpers import HAMMING_7_4, random_dense

TINY_DIGEST = "4e4aa5d4c1c6ed962ab79ebd13f42736946b01b536e06c70699ef27bdb8d8a27"


@pytest.fixture(scope="module")
def hamming_ml() -> SyndromeCodec:
    return SyndromeCodec(ParityCheckMatrix.from_dense(HAMMING_7_4), decoder=DecoderKind.ML)


@pytest.fixture(scope="module")
def peg128() -> SyndromeCodec:
    return build_codec(128, 0.5, "r05", seed=0)


class TestDegreeDistributions:
    def test_rate_half_design_rate(self):
        assert design_rate(RATE_HALF) == pytest.approx(0.5, abs=1e-3)

    def test_rate_three_quarters_design_rate(self):
        assert design_rate(RATE_THREE_QUARTERS) == pytest.approx(0.2735, abs=1e-3)

    def test_regular_design_rate(self):
        assert design_rate(DegreeDistribution.regular(3, 6)) == pytest.approx(0.5)

    def test_fractions_must_sum_to_one(self):
        with pytest.raises(ConfigurationError):
            DegreeDistribution(((2, 0.5), (3, 0.4)), ((6, 1.0),))

    def test_degree_one_rejected(self):
        with pytest.raises(ConfigurationError):
            DegreeDistribution(((1, 1.0),), ((6, 1.0),))

    def test_node_counts_sum_to_width(self):
        sequence = variable_degree_sequence(1000, RATE_HALF)
        assert sequence.size == 1000
        assert set(sequence.tolist()) == {2, 3, 6}
        assert np.all(np.diff(sequence) >= 0)
        assert np.bincount(sequence).tolist()[2:] == [523, 250, 0, 0, 227]


class TestParityCheckMatrix:
    def test_dense_roundtrip(self, rng):
        dense = random_dense(rng, 6, 15)
        assert np.array_equal(ParityCheckMatrix.from_dense(dense).to_dense(), dense)

    def test_syndrome_matches_dense_product(self, rng):
        dense = random_dense(rng, 12, 30)
        matrix = ParityCheckMatrix.from_dense(dense)
        frames = rng.integers(0, 2, size=(50, 30), dtype=np.uint8)
        assert np.array_equal(matrix.syndrome(frames), (frames.astype(int) @ dense.T.astype(int)) % 2)
        assert np.array_equal(matrix.syndrome(frames[0]), (dense.astype(int) @ frames[0]) % 2)

    def test_syndrome_width_checked(self, code16):
        with pytest.raises(ConfigurationError):
            code16.syndrome(np.zeros(15, dtype=np.uint8))

    def test_encoder_is_linear_over_gf2(self, peg128, rng):
        a = rng.integers(0, 2, size=(200, 128), dtype=np.uint8)
        b = rng.integers(0, 2, size=(200, 128), dtype=np.uint8)
        assert np.array_equal(peg128.encode_many(a ^ b), peg128.encode_many(a) ^ peg128.encode_many(b))
        assert not peg128.encode_many(np.zeros((1, 128), dtype=np.uint8)).any()

    def test_empty_column_rejected(self):
        with pytest.raises(ConfigurationError, match="Variables without edges"):
            ParityCheckMatrix.from_dense(np.array([[1, 1, 0], [1, 0, 0]]))

    def test_digest_of_canonical_alist(self, tiny_codec):
        assert tiny_codec.digest().hex() == TINY_DIGEST

    def test_girth(self, tiny_codec, code16):
        assert tiny_codec.matrix.girth() is None
        assert ParityCheckMatrix.from_dense(HAMMING_7_4).girth() == 4
        assert code16.girth() == 4


class TestPeg:
    def test_deterministic_for_seed(self):
        a = peg_construct(64, 32, RATE_HALF, seed=5)
        b = peg_construct(64, 32, RATE_HALF, seed=5)
        assert a.check_rows == b.check_rows
        assert a.digest() == b.digest()

    def test_seed_zero_breaks_ties_by_lowest_index(self):
        matrix = peg_construct(8, 4, np.full(8, 2), seed=0)
        assert matrix.check_rows == ((0, 2, 4, 6), (0, 3, 5, 6), (1, 2, 5, 7), (1, 3, 4, 7))

    def test_other_seeds_grow_other_graphs(self):
        a = peg_construct(64, 32, RATE_HALF, seed=0)
        b = peg_construct(64, 32, RATE_HALF, seed=7)
        assert a.check_rows != b.check_rows
        assert np.array_equal(a.variable_degrees(), b.variable_degrees())

    def test_tie_break_order(self):
        candidates, ace = np.array([1, 4, 6]), np.array([0, 2, 2])
        degree = np.zeros(8, dtype=np.int64)
        assert _pick_check(candidates, ace, degree, None) == 4
        assert _pick_check(candidates, ace, degree, np.random.default_rng(0)) in (4, 6)
        degree[[4, 6]] = 1
        assert _pick_check(candidates, ace, degree, None) == 1

    def test_regular_degree_two(self):
        matrix = peg_construct(8, 4, np.full(8, 2), seed=0)
        assert matrix.n_checks == 4
        assert matrix.variable_degrees().tolist() == [2] * 8
        assert matrix.check_degrees().sum() == 16

    def test_follows_degree_sequence(self, peg128):
        degrees = peg128.matrix.variable_degrees()
        assert np.array_equal(degrees, variable_degree_sequence(128, RATE_HALF))
        assert peg128.n_checks == 64
        assert peg128.rate == Fraction(1, 2)

    def test_three_quarter_rate_check_count(self):
        codec = build_codec(128, 0.75, "r075", seed=1)
        assert codec.n_checks == 96
        assert set(codec.matrix.variable_degrees().tolist()) <= {2, 3, 5}

    def test_too_few_edges(self):
        with pytest.raises(ConstructionError):
            peg_construct(4, 8, np.ones(4, dtype=int))

    def test_degree_above_check_count(self):
        with pytest.raises(ConstructionError):
            peg_construct(4, 2, np.full(4, 3))

    def test_unknown_distribution(self):
        with pytest.raises(ConfigurationError):
            build_codec(64, 0.5, "r09")

    @pytest.mark.slow
    def test_girth_at_least_six_for_long_code(self):
        assert build_codec(1024, 0.5, "r05", seed=0).matrix.girth() >= 6


class TestCodecValidation:
    def test_rate_must_be_below_one(self):
        with pytest.raises(ConfigurationError):
            SyndromeCodec(ParityCheckMatrix.from_dense(np.eye(4, dtype=np.uint8)))

    def test_ml_width_limit(self):
        matrix = build_codec(32, 0.5).matrix
        with pytest.raises(ConfigurationError):
            SyndromeCodec(matrix, decoder=DecoderKind.ML)

    def test_encode_width_checked(self, bp_codec16):
        with pytest.raises(ConfigurationError):
            syndrome_encode(bp_codec16, BitBlock.zeros(8))

    @pytest.mark.parametrize("p", [-0.1, 0.5, 0.7])
    def test_crossover_range(self, bp_codec16, p):
        z = BitBlock.zeros(16)
        with pytest.raises(ConfigurationError):
            bp_codec16.decode(bp_codec16.encode(z), z, p)

    def test_failed_result_unwrap(self):
        z = BitBlock.zeros(4)
        with pytest.raises(DecodeFailure) as info:
            DecodeResult(z, False, 7).unwrap()
        assert info.value.last_estimate == z


class TestMlDecoding:
    def test_hamming_corrects_every_single_error(self, hamming_ml):
        for value in range(128):
            y = BitBlock.from_int(value, 7)
            s = hamming_ml.encode(y)
            for j in range(7):
                z = y ^ BitBlock.from_int(1 << j, 7)
                result = hamming_ml.decode(s, z, 0.1)
                assert result.success
                assert result.bits == y

    def test_ties_go_to_smallest_word(self):
        matrix = ParityCheckMatrix.from_dense(np.array([[1, 1]]))
        result = ml_decode_bruteforce(matrix, np.array([1], dtype=np.uint8), BitBlock.zeros(2), 0.2)
        assert result.bits == BitBlock.from_int(0b01, 2)

    def test_unreachable_syndrome_fails(self):
        matrix = ParityCheckMatrix.from_dense(np.array([[1, 1, 1], [1, 1, 1]]))
        z = BitBlock.from_int(0b101, 3)
        result = ml_decode_bruteforce(matrix, np.array([1, 0], dtype=np.uint8), z, 0.1)
        assert not result.success
        assert result.bits == z

    def test_zero_crossover_keeps_consistent_side_info(self, ml_codec16, rng):
        y = BitBlock.random(16, rng)
        assert ml_codec16.decode(ml_codec16.encode(y), y, 0.0).bits == y

    def test_corrects_four_flips(self, ml_codec16, rng):
        y = BitBlock.random(16, rng)
        flips = np.zeros(16, dtype=np.uint8)
        flips[[0, 3, 8, 15]] = 1
        assert ml_codec16.decode(ml_codec16.encode(y), y ^ BitBlock(flips), 0.05).bits == y


class TestBpDecoding:
    def test_consistent_side_info_needs_no_iterations(self, peg128, rng):
        y = BitBlock.random(128, rng)
        result = bp_decode(peg128, peg128.encode(y), y, 0.02)
        assert result.success
        assert result.iterations == 0
        assert result.bits == y

    def test_single_flip_on_two_word_code(self, bp_codec16, rng):
        y = BitBlock.random(16, rng)
        for j in range(16):
            z = y ^ BitBlock.from_int(1 << j, 16)
            assert bp_codec16.decode(bp_codec16.encode(y), z, 0.05).bits == y

    @pytest.mark.parametrize("rule", [CheckRule.TANH, CheckRule.MIN_SUM])
    def test_low_noise_frames_decode(self, peg128, rng, rule):
        codec = SyndromeCodec(peg128.matrix, check_rule=rule)
        y = rng.integers(0, 2, size=(200, 128), dtype=np.uint8)
        z = y ^ (rng.random(y.shape) < 0.01).astype(np.uint8)
        result = codec.decode_many(codec.encode_many(y), z, 0.01)
        wrong = ~result.success | np.any(result.bits != y, axis=1)
        assert int(wrong.sum()) <= 5

    def test_failure_keeps_last_estimate_and_stops_at_limit(self, peg128, rng):
        codec = SyndromeCodec(peg128.matrix, max_iterations=3)
        y = rng.integers(0, 2, size=(20, 128), dtype=np.uint8)
        z = y ^ (rng.random(y.shape) < 0.3).astype(np.uint8)
        result = codec.decode_many(codec.encode_many(y), z, 0.3)
        assert not result.success.all()
        assert result.iterations[~result.success].tolist() == [3] * int((~result.success).sum())
        assert result.bits.shape == y.shape

    def test_batch_matches_single_frames(self, peg128, rng):
        y = rng.integers(0, 2, size=(10, 128), dtype=np.uint8)
        z = y ^ (rng.random(y.shape) < 0.04).astype(np.uint8)
        s = peg128.encode_many(y)
        batch = peg128.decode_many(s, z, 0.04)
        for i in range(10):
            single = peg128.decode(s[i], BitBlock(z[i]), 0.04)
            assert single.success == bool(batch.success[i])
            assert np.array_equal(single.bits.bits, batch.bits[i])

    def test_agrees_with_ml_on_short_code(self, bp_codec16, ml_codec16):
        paired = paired_fer(bp_codec16, ml_codec16, 0.05, trials=10_000, seed=11)
        assert paired.agreement_rate >= 0.95
        assert abs(paired.first.point - paired.second.point) <= 3 * paired.difference_sigma + 0.01


    @pytest.mark.slow
    def test_long_code_below_threshold(self):
        codec = build_codec(1024, 0.5, "r05", seed=0)
        assert fer_estimate(codec, 0.048, 10_000, seed=21).point <= 1e-3


class TestCodecFiles:
    def test_save_and_load_keep_descriptor(self, tmp_path, peg128):
        descriptor_path = save_codec(peg128, tmp_path / "code.alist")
        assert descriptor_path.name == "code.json"
        loaded = load_codec(tmp_path / "code.alist", max_iterations=50, check_rule=CheckRule.MIN_SUM)
        assert loaded.digest() == peg128.digest()
        assert (loaded.distribution_id, loaded.seed) == ("r05", 0)
        assert loaded.max_iterations == 50
        assert loaded.check_rule == CheckRule.MIN_SUM

    def test_stale_descriptor_is_ignored(self, tmp_path, peg128, tiny_codec, caplog):
        save_codec(peg128, tmp_path / "code.alist")
        (tmp_path / "code.alist").write_text(tiny_codec.matrix.to_alist(), encoding="utf-8")
        loaded = load_codec(tmp_path / "code.alist")
        assert loaded.distribution_id is None
        assert any(r.levelno == logging.WARNING and "does not match" in r.message for r in caplog.records)
