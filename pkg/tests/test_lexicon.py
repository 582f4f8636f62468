import numpy as np
import pytest

from lexivis import (
    CountsFormatError,
    LexiconExtractor,
    ThresholdSpec,
    WordCountTable,
    extract_lexicon,
    word_count,
)
from lexivis.lexicon import _layer_counts
from lexivis.network import FeatureMapSet
from lexivis.weights import VGG19_CONV_CHANNELS, VGG19_CONV_SIDES

QUANTILE = ThresholdSpec()
RELMAX = ThresholdSpec(mode="relative_max", level=0.9)


def zero_feature_maps() -> FeatureMapSet:
    return FeatureMapSet(maps=tuple(
        np.zeros((c, s, s), np.float32)
        for c, s in zip(VGG19_CONV_CHANNELS, VGG19_CONV_SIDES)
    ))


class TestThresholdSpec:
    def test_validation(self):
        with pytest.raises(ValueError, match="mode"):
            ThresholdSpec(mode="topk")
        for level in (0.0, 1.0, -0.2):
            with pytest.raises(ValueError, match="level"):
                ThresholdSpec(level=level)

    def test_parse(self):
        spec = ThresholdSpec.parse("relative_max:0.8")
        assert spec.mode == "relative_max" and spec.level == 0.8 and spec.strict
        with pytest.raises(ValueError, match="MODE:LEVEL"):
            ThresholdSpec.parse("quantile")


class TestWordCount:
    def test_dead_kernel_counts_zero(self):
        dead = np.zeros((7, 7), np.float32)
        assert word_count(dead, QUANTILE) == 0
        assert word_count(dead, RELMAX) == 0

    def test_quantile_hand_example(self):
        assert word_count(np.arange(10, dtype=np.float32), QUANTILE) == 1

    def test_relative_max_hand_example(self):
        assert word_count(np.array([0, 50, 95, 100], np.float32), RELMAX) == 2

    def test_strict_vs_inclusive_on_constant_map(self):
        const = np.full(16, 4.0, np.float32)
        assert word_count(const, QUANTILE) == 0
        assert word_count(const, ThresholdSpec(strict=False)) == 16

    def test_nonpositive_max_relative_mode(self):
        assert word_count(np.full(9, -2.0, np.float32), RELMAX) == 0

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            word_count(np.array([], np.float32))

    def test_scale_invariance(self):
        rng = np.random.default_rng(5)
        base = rng.integers(0, 100, size=64).astype(np.float32)
        for spec in (QUANTILE, RELMAX):
            ref = word_count(base, spec)
            for c in (2.0, 0.5, 4.0, 3.0):   # exact in float32 for these values
                assert word_count(base * c, spec) == ref

    def test_shift_invariance_quantile(self):
        rng = np.random.default_rng(6)
        base = rng.integers(0, 100, size=64).astype(np.float32)
        ref = word_count(base, QUANTILE)
        for c in (1.0, 10.0, 1000.0):
            assert word_count(base + c, QUANTILE) == ref

    def test_top_decile_cap(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            n = int(rng.integers(1, 400))
            values = rng.normal(size=n).astype(np.float32)
            assert word_count(values, QUANTILE) <= int(np.floor(0.1 * n))


class TestLayerCounts:
    def test_matches_scalar_word_count(self):
        rng = np.random.default_rng(8)
        stack = rng.normal(size=(32, 9, 9)).astype(np.float32)
        stack[3] = 0.0            # one dead kernel
        stack[4] = 7.5            # one saturated kernel
        for spec in (QUANTILE, RELMAX, ThresholdSpec(strict=False)):
            vec = _layer_counts(stack, spec)
            scalar = [word_count(m, spec) for m in stack]
            assert vec.tolist() == scalar


class TestExtractLexicon:
    def test_zero_network_all_counts_zero(self):
        table = extract_lexicon(zero_feature_maps(), QUANTILE)
        assert len(table) == 5504
        assert table.counts.sum() == 0

    def test_cardinality_and_order(self, fixture_feature_maps):
        table = extract_lexicon(fixture_feature_maps, QUANTILE, image_id="fixture")
        assert len(table) == 5504
        assert table.layers.min() == 1 and table.layers.max() == 16
        order = np.lexsort((table.kernels, table.layers))
        assert np.array_equal(order, np.arange(len(table)))
        assert table.metadata["image_id"] == "fixture"
        assert table.metadata["threshold"] == QUANTILE.as_dict()

    def test_counts_bounded_by_map_area(self, fixture_feature_maps):
        table = extract_lexicon(fixture_feature_maps, QUANTILE)
        sides = dict(zip(range(1, 17), VGG19_CONV_SIDES))
        for layer in range(1, 17):
            area = sides[layer] ** 2
            assert table.counts[table.layers == layer].max() <= 0.1 * area

    def test_matches_scalar_word_count(self, fixture_feature_maps):
        table = extract_lexicon(fixture_feature_maps, QUANTILE)
        # spot-check two layers end to end against the scalar rule
        for layer_idx in (1, 13):
            stack = fixture_feature_maps[layer_idx - 1]
            expected = [word_count(m, QUANTILE) for m in stack]
            got = table.counts[table.layers == layer_idx].tolist()
            assert got == expected


class TestLexiconExtractorEstimator:
    def test_transform(self, fixture_feature_maps):
        est = LexiconExtractor(mode="quantile", level=0.9)
        table = est.fit().transform(fixture_feature_maps)
        assert isinstance(table, WordCountTable)
        params = est.get_params()
        assert params == {"mode": "quantile", "level": 0.9, "strict": True}

    def test_invalid_params_rejected_at_fit(self):
        with pytest.raises(ValueError):
            LexiconExtractor(level=1.5).fit()


class TestSerialization:
    def make_table(self):
        return WordCountTable(
            layers=np.array([1, 1, 2, 2]),
            kernels=np.array([0, 1, 0, 1]),
            counts=np.array([5, 0, 3, 12]),
            metadata={"image_id": "t"},
        )

    def test_csv_round_trip(self, tmp_path):
        table = self.make_table()
        path = tmp_path / "counts.csv"
        table.to_csv(path)
        text = path.read_text()
        assert text.splitlines()[0] == "layer,kernel,count"
        back = WordCountTable.from_csv(path)
        assert np.array_equal(back.layers, table.layers)
        assert np.array_equal(back.kernels, table.kernels)
        assert np.array_equal(back.counts, table.counts)

    def test_json_round_trip(self, tmp_path):
        table = self.make_table()
        path = tmp_path / "counts.json"
        table.to_json(path)
        back = WordCountTable.from_json(path)
        assert np.array_equal(back.counts, table.counts)
        assert back.metadata["image_id"] == "t"

    def test_csv_errors_carry_line_numbers(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("layer,kernel,count\n1,0,5\n1,0\n")
        with pytest.raises(CountsFormatError, match=":3:"):
            WordCountTable.from_csv(path)
        path.write_text("layer,kernel,count\n1,0,x\n")
        with pytest.raises(CountsFormatError, match=":2:"):
            WordCountTable.from_csv(path)
        path.write_text("count,kernel,layer\n")
        with pytest.raises(CountsFormatError, match=":1:"):
            WordCountTable.from_csv(path)
        path.write_text("layer,kernel,count\n1,0,5\n1,0,7\n")
        with pytest.raises(CountsFormatError, match="duplicate"):
            WordCountTable.from_csv(path)

    def test_layer_totals(self):
        ids, totals = self.make_table().layer_totals()
        assert ids.tolist() == [1, 2]
        assert totals.tolist() == [5, 15]
