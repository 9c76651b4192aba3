import itertools

import numpy as np
import pytest

from core.cipher_core import BitBlock
from core.exceptions import ConfigurationError, FormatError
from core.source_models import (
    BernoulliSource,
    FiniteDistribution,
    binary_entropy,
    guessing_entropy,
    load_distribution,
    sample_blocks,
)


class TestBernoulliSource:
    def test_bit_frequency(self):
        bits = BernoulliSource(0.1, seed=3).sample_bits((1000, 128))
        assert bits.mean() == pytest.approx(0.1, abs=0.005)

    def test_probability_above_half_is_complemented(self):
        src = BernoulliSource(0.9, seed=3)
        assert src.p == pytest.approx(0.1)
        assert src.complement
        assert src.one_probability == pytest.approx(0.9)
        assert src.sample_bits((1000, 128)).mean() == pytest.approx(0.9, abs=0.005)

    def test_seeded_sources_repeat(self):
        a = BernoulliSource(0.3, seed=7).sample_bits((4, 16))
        b = BernoulliSource(0.3, seed=7).sample_bits((4, 16))
        assert np.array_equal(a, b)

    def test_spawned_children_differ(self):
        children = BernoulliSource(0.5, seed=1).spawn(2)
        assert not np.array_equal(children[0].sample_bits((8, 64)), children[1].sample_bits((8, 64)))

    def test_out_of_range(self):
        with pytest.raises(ConfigurationError):
            BernoulliSource(1.2)

    def test_sample_blocks_shape(self):
        x = sample_blocks(BernoulliSource(0.2, seed=0), 5, 24)
        assert len(x) == 5
        assert x.width == 24

    def test_sample_blocks_needs_positive_shape(self):
        with pytest.raises(ConfigurationError):
            sample_blocks(BernoulliSource(0.2, seed=0), 0, 24)


class TestBinaryEntropy:
    @pytest.mark.parametrize(
        "p, expected",
        [(0.0, 0.0), (0.5, 1.0), (1.0, 0.0), (0.11, 0.4999), (0.026, 0.1739), (0.126, 0.5464)],
    )
    def test_values(self, p, expected):
        assert binary_entropy(p) == pytest.approx(expected, abs=1e-4)

    def test_symmetric(self):
        assert binary_entropy(0.2) == pytest.approx(binary_entropy(0.8))

    def test_concave_and_symmetric_on_grid(self):
        values = np.array([binary_entropy(p) for p in np.linspace(0.0, 1.0, 201)])
        assert np.all(np.diff(values, 2) <= 1e-12)
        assert np.allclose(values, values[::-1])

    def test_out_of_range(self):
        with pytest.raises(ConfigurationError):
            binary_entropy(-0.01)


class TestFiniteDistribution:
    def test_guessing_entropy_of_uniform(self, rng):
        assert guessing_entropy(FiniteDistribution.uniform(100, 24, rng)) == pytest.approx(50.5)

    def test_guessing_entropy_orders_by_probability(self):
        dist = FiniteDistribution(
            ((BitBlock.from_int(1, 8), 0.2), (BitBlock.from_int(2, 8), 0.5), (BitBlock.from_int(3, 8), 0.3))
        )
        assert guessing_entropy(dist) == pytest.approx(1.7)
        assert [b.to_int() for b in dist.by_descending_probability()] == [2, 3, 1]

    @pytest.mark.parametrize("size", range(1, 7))
    def test_guessing_entropy_is_minimal_over_orders(self, rng, size):
        probs = rng.dirichlet(np.ones(size))
        support = tuple((BitBlock.from_int(i, 8), float(q)) for i, q in enumerate(probs))
        dist = FiniteDistribution(support)
        costs = [sum((k + 1) * probs[i] for k, i in enumerate(order)) for order in itertools.permutations(range(size))]
        assert guessing_entropy(dist) == pytest.approx(min(costs))
        assert guessing_entropy(FiniteDistribution(support[::-1])) == pytest.approx(guessing_entropy(dist))

    def test_point_mass(self):
        dist = FiniteDistribution.point_mass(BitBlock.from_int(9, 8))
        assert guessing_entropy(dist) == 1.0
        assert dist.contains(BitBlock.from_int(9, 8))
        assert not dist.contains(BitBlock.from_int(8, 8))

    def test_uniform_support_is_distinct(self, rng):
        dist = FiniteDistribution.uniform(256, 8, rng)
        assert len(set(dist.blocks())) == 256

    def test_uniform_too_large(self, rng):
        with pytest.raises(ConfigurationError):
            FiniteDistribution.uniform(17, 4, rng)

    def test_sample_stays_in_support(self, rng):
        dist = FiniteDistribution.uniform(10, 16, rng)
        assert all(dist.contains(dist.sample(rng)) for _ in range(100))

    @pytest.mark.parametrize(
        "support",
        [
            (),
            ((BitBlock.from_int(1, 8), 0.6), (BitBlock.from_int(2, 8), 0.6)),
            ((BitBlock.from_int(1, 8), 0.5), (BitBlock.from_int(1, 8), 0.5)),
            ((BitBlock.from_int(1, 8), 0.5), (BitBlock.from_int(1, 9), 0.5)),
        ],
    )
    def test_invalid_supports(self, support):
        with pytest.raises(ConfigurationError):
            FiniteDistribution(support)


class TestLoadDistribution:
    def test_parses_comments_and_blank_lines(self, tmp_path):
        path = tmp_path / "dist.txt"
        path.write_text("# weather report\n00ff 0.75\n\n0f0f 0.25  # rare\n", encoding="utf-8")
        dist = load_distribution(path)
        assert len(dist) == 2
        assert dist.width == 16
        assert dist.by_descending_probability()[0] == BitBlock.from_hex("00ff")

    def test_explicit_width(self, tmp_path):
        path = tmp_path / "dist.txt"
        path.write_text("5 0.5\n6 0.5\n", encoding="utf-8")
        assert load_distribution(path, width=12).width == 12

    def test_malformed_line(self, tmp_path):
        path = tmp_path / "dist.txt"
        path.write_text("00ff\n", encoding="utf-8")
        with pytest.raises(FormatError, match=":1:"):
            load_distribution(path)

    def test_bad_hex(self, tmp_path):
        path = tmp_path / "dist.txt"
        path.write_text("00ff 0.5\nzz00 0.5\n", encoding="utf-8")
        with pytest.raises(FormatError, match=":2:"):
            load_distribution(path)

    def test_probabilities_must_sum_to_one(self, tmp_path):
        path = tmp_path / "dist.txt"
        path.write_text("00ff 0.5\n0f0f 0.4\n", encoding="utf-8")
        with pytest.raises(ConfigurationError):
            load_distribution(path)
