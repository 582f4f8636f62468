import json
from pathlib import Path

import numpy as np
import pytest

from lexivis import LoadedWeights, forward_collect, to_input_tensor
from lexivis.synth import fixture_image_bytes, write_synthetic_weights

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURE_DIR = REPO_ROOT / "fixtures"

# Seed of the committed fixture bundle; regenerating with it must reproduce
# the committed blob digests bit for bit.
FIXTURE_SEED = 20260809


@pytest.fixture(scope="session")
def fixture_manifest() -> dict:
    path = FIXTURE_DIR / "fixture_manifest.json"
    if not path.is_file():
        pytest.fail(f"committed fixture bundle missing: {path}")
    return json.loads(path.read_text())


@pytest.fixture(scope="session")
def weights_dir(tmp_path_factory) -> Path:
    """Synthetic vgg19 weight bank shared by the whole session (~80 MB, ~4 s)."""
    out = tmp_path_factory.mktemp("weights")
    write_synthetic_weights(out, seed=FIXTURE_SEED)
    return out


@pytest.fixture(scope="session")
def manifest_path(weights_dir) -> Path:
    return weights_dir / "manifest.json"


@pytest.fixture(scope="session")
def loaded_weights(manifest_path) -> LoadedWeights:
    return LoadedWeights.load(manifest_path)


@pytest.fixture(scope="session")
def fixture_image() -> np.ndarray:
    committed = FIXTURE_DIR / "image" / "fixture_image.rgb"
    raw = committed.read_bytes() if committed.is_file() else fixture_image_bytes(seed=FIXTURE_SEED)
    return np.frombuffer(raw, dtype=np.uint8).reshape(224, 224, 3)


@pytest.fixture(scope="session")
def fixture_input_tensor(fixture_image, loaded_weights) -> np.ndarray:
    return to_input_tensor(fixture_image, loaded_weights.manifest.normalization)


@pytest.fixture(scope="session")
def fixture_feature_maps(fixture_input_tensor, loaded_weights):
    return forward_collect(fixture_input_tensor, loaded_weights)
