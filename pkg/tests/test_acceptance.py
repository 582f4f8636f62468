"""Acceptance suite: one test per release criterion, one PASS line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines.  Tolerances are fixed here and nowhere else.
"""

import json
import time

import numpy as np
import pytest

from lexivis import (
    ConvWeights,
    WordCountTable,
    benford_analysis,
    benford_expected,
    conv2d,
    conv2d_reference,
    dilate,
    erode,
    extract_lexicon,
    heaps_analysis,
    ols_fit,
    relu,
    salt_pepper,
    to_input_tensor,
    zipf_analysis,
)
from lexivis.cli import main
from lexivis.lexicon import ThresholdSpec
from lexivis.network import forward_collect

from conftest import FIXTURE_DIR


def _ok(name: str):
    print(f"\nACCEPTANCE PASS: {name}")


def _counts_table(counts) -> WordCountTable:
    counts = np.asarray(counts, dtype=np.int64)
    return WordCountTable(layers=np.ones(counts.size, np.int64),
                          kernels=np.arange(counts.size, dtype=np.int64),
                          counts=counts)


class TestConvolutionOracle:
    def test_optimized_matches_quadruple_loop(self):
        rng = np.random.default_rng(2024)
        t0 = time.perf_counter()
        cases = 0
        while cases < 50:
            cin = int(rng.integers(1, 9))
            cout = int(rng.integers(1, 9))
            h = int(rng.integers(3, 17))
            w = int(rng.integers(3, 17))
            stride = int(rng.integers(1, 3))
            padding = int(rng.integers(0, 2))
            if h + 2 * padding < 3 or w + 2 * padding < 3:
                continue
            x = rng.normal(size=(cin, h, w)).astype(np.float32)
            bank = ConvWeights(
                weights=rng.normal(size=(cout, cin, 3, 3)).astype(np.float32),
                bias=rng.normal(size=cout).astype(np.float32),
            )
            fast = conv2d(x, bank, stride=stride, padding=padding)
            ref = conv2d_reference(x, bank, stride=stride, padding=padding)
            np.testing.assert_allclose(fast, ref, rtol=1e-6, atol=1e-6)
            cases += 1
        elapsed = time.perf_counter() - t0
        assert elapsed < 10.0, f"oracle comparison took {elapsed:.1f}s"
        _ok(f"convolution oracle equivalence (50 random cases, {elapsed:.1f}s)")


class TestStatisticsUnits:
    def test_hand_examples(self):
        fit = ols_fit([(1, 1), (2, 2), (3, 2)])
        assert fit.slope == pytest.approx(0.5, abs=1e-9)
        assert fit.intercept == pytest.approx(0.6667, abs=1e-4)
        assert fit.r_square == pytest.approx(0.75, abs=1e-9)

        zipf = zipf_analysis(_counts_table([8, 4, 2, 1]))
        assert zipf.alpha == pytest.approx(1.459, abs=1e-3)
        assert zipf.fit.r_square == pytest.approx(0.961, abs=1e-3)

        total = sum(benford_expected(d) for d in range(1, 10))
        assert abs(total - 1.0) < 1e-12
        assert benford_expected(1) == pytest.approx(0.30103, abs=1e-5)
        _ok("statistics unit suite (OLS, Zipf exponent, leading-digit curve)")


class TestPropertySuites:
    def test_all_properties(self):
        rng = np.random.default_rng(99)

        # relu idempotence
        x = rng.normal(size=(4, 6, 6)).astype(np.float32)
        assert np.array_equal(relu(relu(x)), relu(x))

        # erosion <= identity <= dilation, pointwise
        img = rng.integers(0, 256, size=(64, 64, 3)).astype(np.uint8)
        for s in (3, 5):
            assert np.all(erode(img, s) <= img)
            assert np.all(img <= dilate(img, s))

        # seeded noise: reproducible, and the replaced fraction tracks p
        base = np.full((224, 224, 3), 128, np.uint8)
        for p in (0.05, 0.3, 0.5):
            a = salt_pepper(base, p, seed=7)
            b = salt_pepper(base, p, seed=7)
            assert np.array_equal(a, b)
            frac = (a != base).any(axis=2).mean()
            assert abs(frac - p) <= 0.02

        # Zipf fit invariant under scaling every count by a constant
        counts = np.round(2000.0 / np.arange(1, 301)).astype(np.int64)
        ref = zipf_analysis(_counts_table(counts))
        for c in (2, 10):
            scaled = zipf_analysis(_counts_table(counts * c))
            assert scaled.alpha == pytest.approx(ref.alpha, abs=1e-9)
            assert scaled.fit.r_square == pytest.approx(ref.fit.r_square, abs=1e-9)

        # best Heaps R^2 never decreases with more shuffles
        table = _counts_table(counts)
        r2 = [heaps_analysis(table, iterations=n, seed=3).fit.r_square
              for n in (1, 10, 50, 100)]
        assert all(b >= a for a, b in zip(r2, r2[1:]))

        # observed leading-digit shares sum to one
        totals = WordCountTable(layers=np.arange(1, 17, dtype=np.int64),
                                kernels=np.zeros(16, np.int64),
                                counts=np.round(10000.0 / np.arange(1, 17)).astype(np.int64))
        observed = benford_analysis(totals).observed
        assert abs(observed.sum() - 1.0) < 1e-12
        _ok("property suites (relu, morphology order, noise, scaling, Heaps, Benford)")


class TestSyntheticLawRecovery:
    def test_recovers_planted_exponent(self):
        t0 = time.perf_counter()
        ranks = np.arange(1, 501)
        table = _counts_table(np.round(10000.0 / ranks))

        zipf = zipf_analysis(table)
        assert zipf.alpha == pytest.approx(1.0, abs=0.05)

        heaps = heaps_analysis(table, iterations=100, seed=0)
        assert heaps.beta < 1.0
        assert heaps.fit.r_square >= 0.98
        elapsed = time.perf_counter() - t0
        assert elapsed < 30.0
        _ok(f"synthetic-law recovery (alpha {zipf.alpha:.3f}, beta {heaps.beta:.3f}, "
            f"best R^2 {heaps.fit.r_square:.4f}, {elapsed:.1f}s)")


class TestGoldenFixtures:
    """Committed-fixture equivalence; no exporter toolchain needed at test time."""

    def test_weight_digests_match_fixture_manifest(self, fixture_manifest, manifest_path):
        regenerated = json.loads(manifest_path.read_text())
        digests = {}
        for layer in regenerated["layers"]:
            if layer["kind"] == "conv":
                digests[layer["weights_path"]] = layer["weights_sha256"]
                digests[layer["bias_path"]] = layer["bias_sha256"]
        assert digests == fixture_manifest["weights"]["blobs"]
        assert regenerated["generator"]["seed"] == fixture_manifest["generator"]["seed"]
        _ok("fixture weights: regenerated blobs match committed digests (32/32)")

    def test_committed_image_and_input_tensor(self, fixture_manifest, fixture_image,
                                              loaded_weights):
        from lexivis import load_image
        png = load_image(FIXTURE_DIR / fixture_manifest["image"]["png"])
        assert np.array_equal(png, fixture_image)
        golden = np.frombuffer(
            (FIXTURE_DIR / fixture_manifest["input_tensor"]["file"]).read_bytes(), "<f4"
        ).reshape(3, 224, 224)
        mine = to_input_tensor(fixture_image, loaded_weights.manifest.normalization)
        assert np.array_equal(mine, golden)
        _ok("fixture preprocessing: PNG decode and normalized input bitwise equal")

    def test_forward_matches_activation_fixtures(self, fixture_manifest,
                                                 fixture_feature_maps):
        tol = fixture_manifest["activations"]["tolerance"]
        worst = 0.0
        for entry in fixture_manifest["activations"]["layers"]:
            golden = np.frombuffer(
                (FIXTURE_DIR / entry["file"]).read_bytes(), "<f4"
            ).astype(np.float64)
            assert golden.size == entry["sample_count"]
            flat = fixture_feature_maps[entry["layer"] - 1].ravel().astype(np.float64)
            mine = flat[:: entry["stride"]]
            # near-zero entries are judged against a floor of 5% of the layer's
            # peak activation; see docs/fixtures.md
            floor = tol["floor_fraction_of_max"] * np.abs(golden).max()
            err = np.abs(mine - golden) / np.maximum(np.abs(golden), floor)
            worst = max(worst, float(err.max()))
        assert worst <= tol["relative"], f"max relative error {worst:.2e}"
        _ok(f"fixture activations: max relative error {worst:.2e} <= {tol['relative']}")

    def test_lexicon_matches_golden_counts_exactly(self, fixture_manifest,
                                                   fixture_feature_maps):
        golden = WordCountTable.from_csv(FIXTURE_DIR / fixture_manifest["counts"]["file"])
        assert len(golden) == fixture_manifest["counts"]["rows"] == 5504
        spec = ThresholdSpec(**fixture_manifest["counts"]["threshold"])
        table = extract_lexicon(fixture_feature_maps, spec)
        assert np.array_equal(table.layers, golden.layers)
        assert np.array_equal(table.kernels, golden.kernels)
        assert np.array_equal(table.counts, golden.counts)
        _ok("fixture lexicon: all 5504 word counts exactly equal")

    def test_cmd_fit_byte_stable_on_golden_counts(self, tmp_path):
        counts = FIXTURE_DIR / "golden_counts.csv"
        outputs = []
        for sub in ("a", "b"):
            out = tmp_path / sub
            rc = main(["fit", str(counts), "--out", str(out), "--seed", "11"])
            assert rc == 0
            outputs.append((out / "report_golden_counts.json").read_bytes())
        assert outputs[0] == outputs[1]
        report = json.loads(outputs[0])
        for law in ("zipf", "heaps", "benford"):
            assert "r_square" in report[law]
        _ok("fit-only CLI on golden counts is byte-stable across runs")


class TestZeroInputContract:
    def test_zero_input_layer1_equals_rectified_biases(self, loaded_weights):
        fms = forward_collect(np.zeros((3, 224, 224), np.float32), loaded_weights)
        bias = loaded_weights.conv_weights[0].bias
        for k in (0, 17, 63):
            expected = max(0.0, float(bias[k]))
            assert np.all(fms[0][k] == np.float32(expected))
        _ok("zero-input forward propagates only rectified biases in layer 1")
