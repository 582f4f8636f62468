import json
import shutil

import numpy as np
import pytest

from lexivis import (
    FormatError,
    IntegrityError,
    LoadedWeights,
    ManifestError,
    load_conv_weights,
    load_manifest,
)
from lexivis.weights import (
    VGG19_CONV_CHANNELS,
    VGG19_PARAM_COUNT,
    VGG19_TOTAL_KERNELS,
    VGG19_WEIGHT_COUNT,
    LayerSpec,
)


def test_architecture_constants():
    assert VGG19_TOTAL_KERNELS == 5504
    # independent arithmetic over the declared layer shapes
    ins = (3,) + VGG19_CONV_CHANNELS[:-1]
    assert sum(o * i * 9 for o, i in zip(VGG19_CONV_CHANNELS, ins)) == VGG19_WEIGHT_COUNT
    assert VGG19_WEIGHT_COUNT == 20_018_880
    assert VGG19_PARAM_COUNT == 20_024_384


class TestLoadManifest:
    def test_valid_manifest_layer_inventory(self, manifest_path):
        manifest = load_manifest(manifest_path)
        kinds = [s.kind for s in manifest.layers]
        assert kinds.count("conv") == 16
        assert kinds.count("relu") == 16
        assert kinds.count("maxpool") == 5
        assert tuple(s.out_channels for s in manifest.conv_layers) == VGG19_CONV_CHANNELS
        assert manifest.digest

    def test_missing_conv_layer_rejected(self, manifest_path, tmp_path):
        doc = json.loads(manifest_path.read_text())
        # drop the last conv+relu pair, keeping blobs resolvable
        doc["layers"] = doc["layers"][:-3] + [doc["layers"][-1]]
        bad = tmp_path / "manifest.json"
        bad.write_text(json.dumps(doc))
        for f in manifest_path.parent.glob("*.bin"):
            (tmp_path / f.name).symlink_to(f)
        with pytest.raises(ManifestError, match="15"):
            load_manifest(bad)

    def test_unknown_arch_rejected(self, manifest_path, tmp_path):
        doc = json.loads(manifest_path.read_text())
        doc["arch_name"] = "resnet50"
        bad = tmp_path / "manifest.json"
        bad.write_text(json.dumps(doc))
        with pytest.raises(ManifestError, match="arch"):
            load_manifest(bad)

    def test_wrong_channel_sequence_rejected(self, manifest_path, tmp_path):
        doc = json.loads(manifest_path.read_text())
        conv = next(l for l in doc["layers"] if l["kind"] == "conv")
        conv["out_channels"] = 32
        conv["weights_shape"][0] = 32
        conv["bias_shape"] = [32]
        bad = tmp_path / "manifest.json"
        bad.write_text(json.dumps(doc))
        with pytest.raises(ManifestError):
            load_manifest(bad)

    def test_missing_blob_named_in_error(self, manifest_path, tmp_path):
        doc = json.loads(manifest_path.read_text())
        bad = tmp_path / "manifest.json"
        bad.write_text(json.dumps(doc))
        for f in manifest_path.parent.glob("*.bin"):
            if f.name != "conv3_2.weights.bin":
                (tmp_path / f.name).symlink_to(f)
        with pytest.raises(FileNotFoundError, match="conv3_2.weights.bin"):
            load_manifest(bad)

    def test_malformed_json(self, tmp_path):
        bad = tmp_path / "manifest.json"
        bad.write_text("{not json")
        with pytest.raises(ManifestError, match="JSON"):
            load_manifest(bad)


class TestLoadConvWeights:
    def test_layer1_shape(self, manifest_path):
        manifest = load_manifest(manifest_path)
        w = load_conv_weights(manifest.conv_layers[0])
        assert w.weights.shape == (64, 3, 3, 3)
        assert w.bias.shape == (64,)
        assert w.weights.size == 1728                      # 6912 bytes on disk
        assert manifest.conv_layers[0].weights_path.stat().st_size == 6912

    def test_non_conv_rejected(self, manifest_path):
        manifest = load_manifest(manifest_path)
        relu_spec = next(s for s in manifest.layers if s.kind == "relu")
        with pytest.raises(ValueError, match="kind"):
            load_conv_weights(relu_spec)

    def _copied_spec(self, manifest_path, tmp_path) -> LayerSpec:
        manifest = load_manifest(manifest_path)
        spec = manifest.conv_layers[0]
        wp = tmp_path / spec.weights_path.name
        bp = tmp_path / spec.bias_path.name
        shutil.copy(spec.weights_path, wp)
        shutil.copy(spec.bias_path, bp)
        return LayerSpec(
            name=spec.name, kind="conv",
            in_channels=spec.in_channels, out_channels=spec.out_channels,
            kernel=3, stride=1, padding=1,
            weights_path=wp, bias_path=bp,
            weights_sha256=spec.weights_sha256, bias_sha256=spec.bias_sha256,
            weights_shape=spec.weights_shape, bias_shape=spec.bias_shape,
        )

    def test_bit_flip_is_integrity_error(self, manifest_path, tmp_path):
        spec = self._copied_spec(manifest_path, tmp_path)
        data = bytearray(spec.weights_path.read_bytes())
        data[100] ^= 0x40
        spec.weights_path.write_bytes(bytes(data))
        with pytest.raises(IntegrityError, match="checksum"):
            load_conv_weights(spec)

    def test_truncation_is_format_error(self, manifest_path, tmp_path):
        spec = self._copied_spec(manifest_path, tmp_path)
        data = spec.weights_path.read_bytes()
        spec.weights_path.write_bytes(data[:-8])
        with pytest.raises(FormatError, match="bytes"):
            load_conv_weights(spec)


class TestRoundTrip:
    def test_reload_is_deterministic(self, manifest_path):
        a = LoadedWeights.load(manifest_path)
        b = LoadedWeights.load(manifest_path)
        assert a.parameter_count == b.parameter_count == VGG19_PARAM_COUNT
        for wa, wb in zip(a.conv_weights, b.conv_weights):
            assert np.array_equal(wa.weights, wb.weights)
            assert np.array_equal(wa.bias, wb.bias)

    def test_loaded_values_finite(self, loaded_weights):
        for w in loaded_weights.conv_weights:
            assert np.isfinite(w.weights).all()
            assert np.isfinite(w.bias).all()
