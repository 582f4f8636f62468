#!/usr/bin/env python3
"""Cross-implementation contract check.

Rebuilds the exporter, regenerates weights and fixtures from scratch with the
TypeScript toolchain, then verifies that the Python engine reproduces them:
blob digests bitwise, the normalized input tensor bitwise, activations within
the fixture tolerance, and every word count exactly.

Usage: python3 scripts/cross_contract.py [--seed N] [--keep]
"""

import argparse
import json
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np

REPO = Path(__file__).resolve().parent.parent
FRONTEND = REPO / "frontend"


def run(cmd, **kw):
    print("+", " ".join(str(c) for c in cmd))
    subprocess.run(cmd, check=True, **kw)


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--seed", type=int, default=20260809)
    parser.add_argument("--keep", action="store_true", help="keep the scratch directory")
    args = parser.parse_args()

    sys.path.insert(0, str(REPO / "src"))
    import lexivis as lv
    from lexivis.synth import write_synthetic_weights

    scratch = Path(tempfile.mkdtemp(prefix="lexivis-contract-"))
    try:
        run(["npm", "install", "--no-audit", "--no-fund"], cwd=FRONTEND)
        run(["npx", "tsc", "-p", "."], cwd=FRONTEND)
        ts_weights = scratch / "weights"
        ts_fixtures = scratch / "fixtures"
        run(["node", "dist/cli.js", "export-weights",
             "--source", f"synthetic:{args.seed}", "--out", str(ts_weights)], cwd=FRONTEND)
        run(["node", "dist/cli.js", "generate-fixtures",
             "--weights", str(ts_weights / "manifest.json"),
             "--out", str(ts_fixtures), "--seed", str(args.seed)], cwd=FRONTEND)

        # 1. weight blobs byte-identical across generators
        py_weights = scratch / "pyweights"
        write_synthetic_weights(py_weights, seed=args.seed)
        ts_man = json.loads((ts_weights / "manifest.json").read_text())
        for layer in ts_man["layers"]:
            if layer["kind"] != "conv":
                continue
            for key in ("weights_path", "bias_path"):
                a = (ts_weights / layer[key]).read_bytes()
                b = (py_weights / layer[key]).read_bytes()
                assert a == b, f"blob mismatch: {layer[key]}"
        print("OK  weight blobs byte-identical (32/32)")

        fman = json.loads((ts_fixtures / "fixture_manifest.json").read_text())
        weights = lv.LoadedWeights.load(py_weights / "manifest.json")
        rgb = (ts_fixtures / fman["image"]["file"]).read_bytes()
        img = np.frombuffer(rgb, np.uint8).reshape(224, 224, 3)

        # 2. normalized input bitwise
        golden_in = np.frombuffer((ts_fixtures / fman["input_tensor"]["file"]).read_bytes(),
                                  "<f4").reshape(3, 224, 224)
        mine_in = lv.to_input_tensor(img, weights.manifest.normalization)
        assert np.array_equal(mine_in, golden_in), "input tensor differs"
        print("OK  normalized input tensor bitwise equal")

        # 3. activations within tolerance
        fms = lv.forward_collect(mine_in, weights)
        tol = fman["activations"]["tolerance"]
        worst = 0.0
        for entry in fman["activations"]["layers"]:
            golden = np.frombuffer((ts_fixtures / entry["file"]).read_bytes(),
                                   "<f4").astype(np.float64)
            mine = fms[entry["layer"] - 1].ravel().astype(np.float64)[::entry["stride"]]
            floor = tol["floor_fraction_of_max"] * np.abs(golden).max()
            err = np.abs(mine - golden) / np.maximum(np.abs(golden), floor)
            worst = max(worst, float(err.max()))
        assert worst <= tol["relative"], f"activation error {worst:.2e}"
        print(f"OK  activations within tolerance (max relative error {worst:.2e})")

        # 4. counts exactly equal
        golden_counts = lv.WordCountTable.from_csv(ts_fixtures / fman["counts"]["file"])
        table = lv.extract_lexicon(fms, lv.ThresholdSpec(**fman["counts"]["threshold"]))
        assert np.array_equal(table.counts, golden_counts.counts), "counts differ"
        print(f"OK  all {len(table)} word counts exactly equal")
        print("CROSS-IMPLEMENTATION CONTRACT: PASS")
        return 0
    finally:
        if args.keep:
            print("scratch kept at", scratch)
        else:
            shutil.rmtree(scratch, ignore_errors=True)


if __name__ == "__main__":
    sys.exit(main())
