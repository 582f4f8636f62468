/**
 * Golden fixture bundle: everything the analysis engine's oracle tests consume.
 *
 * The bundle holds the fixture image (raw RGB + PNG), the normalized input
 * tensor, a deterministic strided sample of every post-ReLU activation stack,
 * the full golden word-count table, and a manifest with sha256 digests of all
 * of it plus the weight blobs.  Layout and comparison rules are documented in
 * docs/fixtures.md.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { PNG } from "pngjs";

import type { CapturedLayer } from "./forward.js";
import { runForward } from "./forward.js";
import { countTable, countsCsv } from "./lexicon.js";
import { fixtureImageBytes } from "./prng.js";
import { INPUT_SIDE, NORMALIZATION } from "./vgg19.js";
import { loadBanksFromManifest, sha256 } from "./weights.js";

export const MAX_SAMPLES_PER_LAYER = 65536;
export const ACTIVATION_RELATIVE_TOLERANCE = 1e-3;
export const ACTIVATION_FLOOR_FRACTION_OF_MAX = 0.05;

export function normalizeImage(rgb: Uint8Array, side: number): Float32Array {
  const { mean, std, pixel_scale } = NORMALIZATION;
  const out = new Float32Array(3 * side * side);
  for (let c = 0; c < 3; c++) {
    for (let y = 0; y < side; y++) {
      for (let x = 0; x < side; x++) {
        const p = rgb[(y * side + x) * 3 + c];
        out[(c * side + y) * side + x] = Math.fround((p / pixel_scale - mean[c]) / std[c]);
      }
    }
  }
  return out;
}

export function sampleStride(total: number): number {
  return Math.ceil(total / MAX_SAMPLES_PER_LAYER);
}

export function sampleLayer(values: Float32Array): Float32Array {
  const stride = sampleStride(values.length);
  const count = Math.ceil(values.length / stride);
  const out = new Float32Array(count);
  for (let i = 0, j = 0; i < values.length; i += stride, j++) {
    out[j] = values[i];
  }
  return out;
}

function writePng(rgb: Uint8Array, side: number, file: string) {
  const png = new PNG({ width: side, height: side });
  for (let i = 0; i < side * side; i++) {
    png.data[i * 4] = rgb[i * 3];
    png.data[i * 4 + 1] = rgb[i * 3 + 1];
    png.data[i * 4 + 2] = rgb[i * 3 + 2];
    png.data[i * 4 + 3] = 255;
  }
  fs.writeFileSync(file, PNG.sync.write(png));
}

function asBytes(values: Float32Array): Uint8Array {
  return new Uint8Array(values.buffer, values.byteOffset, values.byteLength);
}

export async function generateFixtures(
  weightsManifestPath: string,
  outDir: string,
  seed: number,
  log: (msg: string) => void = () => {},
): Promise<string> {
  const banks = loadBanksFromManifest(weightsManifestPath);
  const weightsDoc = JSON.parse(fs.readFileSync(weightsManifestPath, "utf-8"));

  fs.mkdirSync(path.join(outDir, "image"), { recursive: true });
  fs.mkdirSync(path.join(outDir, "activations"), { recursive: true });

  log("writing fixture image");
  const rgb = fixtureImageBytes(INPUT_SIDE, INPUT_SIDE, seed);
  fs.writeFileSync(path.join(outDir, "image", "fixture_image.rgb"), rgb);
  writePng(rgb, INPUT_SIDE, path.join(outDir, "image", "fixture_image.png"));

  const input = normalizeImage(rgb, INPUT_SIDE);
  fs.writeFileSync(path.join(outDir, "input_tensor.bin"), asBytes(input));

  log("running reference forward pass (tf.js cpu)");
  const layers = await runForward(input, banks, (name, s) => log(`  ${name}: ${s.toFixed(1)}s`));

  const layerEntries = layers.map((layer: CapturedLayer, idx: number) => {
    const sampled = sampleLayer(layer.values);
    const file = `activations/act_${String(idx + 1).padStart(2, "0")}_${layer.name}.bin`;
    fs.writeFileSync(path.join(outDir, file), asBytes(sampled));
    return {
      layer: idx + 1,
      name: layer.name,
      channels: layer.channels,
      side: layer.side,
      total_values: layer.values.length,
      stride: sampleStride(layer.values.length),
      sample_count: sampled.length,
      file,
      sha256: sha256(asBytes(sampled)),
    };
  });

  log("counting words");
  const rows = countTable(layers, 0.9);
  const csv = countsCsv(rows);
  fs.writeFileSync(path.join(outDir, "golden_counts.csv"), csv);

  const weightBlobs: Record<string, string> = {};
  for (const layer of weightsDoc.layers) {
    if (layer.kind !== "conv") continue;
    weightBlobs[layer.weights_path] = layer.weights_sha256;
    weightBlobs[layer.bias_path] = layer.bias_sha256;
  }

  const manifest = {
    schema_version: 1,
    producer: "lexivis-exporter 0.1.0 (tfjs cpu backend)",
    generator: weightsDoc.generator ?? null,
    seed,
    normalization: NORMALIZATION,
    image: {
      file: "image/fixture_image.rgb",
      png: "image/fixture_image.png",
      width: INPUT_SIDE,
      height: INPUT_SIDE,
      sha256: sha256(rgb),
    },
    input_tensor: {
      file: "input_tensor.bin",
      shape: [3, INPUT_SIDE, INPUT_SIDE],
      dtype: "f32le",
      sha256: sha256(asBytes(input)),
    },
    weights: { manifest: path.basename(weightsManifestPath), blobs: weightBlobs },
    activations: {
      capture: "post_relu",
      max_samples_per_layer: MAX_SAMPLES_PER_LAYER,
      tolerance: {
        relative: ACTIVATION_RELATIVE_TOLERANCE,
        floor_fraction_of_max: ACTIVATION_FLOOR_FRACTION_OF_MAX,
      },
      layers: layerEntries,
    },
    counts: {
      file: "golden_counts.csv",
      rows: rows.length,
      threshold: { mode: "quantile", level: 0.9, strict: true },
      sha256: sha256(new TextEncoder().encode(csv)),
    },
  };
  const manifestPath = path.join(outDir, "fixture_manifest.json");
  fs.writeFileSync(manifestPath, JSON.stringify(manifest, null, 2) + "\n");
  return manifestPath;
}
