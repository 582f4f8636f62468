/**
 * Weight export: turn a VGG-19 source into the manifest+blob contract format.
 *
 * Two sources are supported:
 *   - "synthetic:<seed>" — deterministic counter-based weights, always
 *     available offline; the fixture bundles are built from these.
 *   - "tfjs:<model.json url>" — a pretrained tf.js layers model whose conv
 *     stack matches the VGG-19 schedule (requires network access).
 *
 * Blobs are raw little-endian float32 in [out, in, kh, kw] order.
 */

import * as crypto from "node:crypto";
import * as fs from "node:fs";
import * as path from "node:path";

import * as tf from "@tensorflow/tfjs";

import { blobValues } from "./prng.js";
import {
  CONV_CHANNELS,
  CONV_NAMES,
  NORMALIZATION,
  POOL_AFTER,
  biasBound,
  inChannelsOf,
  weightBound,
} from "./vgg19.js";

export class FetchError extends Error {}
export class ExportError extends Error {}

export interface LayerBank {
  name: string;
  inChannels: number;
  outChannels: number;
  /** [out, in, 3, 3] row-major */
  weights: Float32Array;
  bias: Float32Array;
}

export function sha256(data: Uint8Array): string {
  return crypto.createHash("sha256").update(data).digest("hex");
}

export function syntheticBanks(seed: number): LayerBank[] {
  return CONV_NAMES.map((name, i) => {
    const inC = inChannelsOf(i);
    const outC = CONV_CHANNELS[i];
    const fanIn = inC * 9;
    return {
      name,
      inChannels: inC,
      outChannels: outC,
      weights: blobValues(`${name}.weights`, seed, outC * inC * 9, weightBound(fanIn)),
      bias: blobValues(`${name}.bias`, seed, outC, biasBound(fanIn)),
    };
  });
}

/** Reorder a tf.js HWIO conv kernel into the blob's OIHW layout. */
export function hwioToOihw(values: Float32Array, inC: number, outC: number): Float32Array {
  const out = new Float32Array(values.length);
  for (let h = 0; h < 3; h++) {
    for (let w = 0; w < 3; w++) {
      for (let i = 0; i < inC; i++) {
        for (let o = 0; o < outC; o++) {
          out[((o * inC + i) * 3 + h) * 3 + w] = values[((h * 3 + w) * inC + i) * outC + o];
        }
      }
    }
  }
  return out;
}

async function pretrainedBanks(url: string): Promise<LayerBank[]> {
  let model: tf.LayersModel;
  try {
    model = await tf.loadLayersModel(url);
  } catch (err) {
    throw new FetchError(`cannot fetch pretrained model from ${url}: ${err}`);
  }
  const convs = model.layers.filter((l) => l.getClassName() === "Conv2D");
  if (convs.length !== CONV_NAMES.length) {
    throw new ExportError(
      `source model has ${convs.length} conv layers, vgg19 needs ${CONV_NAMES.length}`,
    );
  }
  return convs.map((layer, i) => {
    const [kernel, bias] = layer.getWeights();
    const [kh, kw, inC, outC] = kernel.shape as number[];
    if (kh !== 3 || kw !== 3 || inC !== inChannelsOf(i) || outC !== CONV_CHANNELS[i]) {
      throw new ExportError(
        `layer ${i + 1} has kernel shape ${kernel.shape}, ` +
        `expected [3,3,${inChannelsOf(i)},${CONV_CHANNELS[i]}]`,
      );
    }
    return {
      name: CONV_NAMES[i],
      inChannels: inC,
      outChannels: outC,
      weights: hwioToOihw(kernel.dataSync() as Float32Array, inC, outC),
      bias: bias.dataSync() as Float32Array,
    };
  });
}

export async function resolveBanks(source: string): Promise<{ banks: LayerBank[]; generator: object | null }> {
  if (source.startsWith("synthetic:")) {
    const seed = Number(source.slice("synthetic:".length));
    if (!Number.isInteger(seed) || seed < 0) {
      throw new ExportError(`synthetic source needs a non-negative integer seed, got ${source}`);
    }
    return { banks: syntheticBanks(seed), generator: { scheme: "fmix32-counter-v1", seed } };
  }
  if (source.startsWith("tfjs:")) {
    return { banks: await pretrainedBanks(source.slice("tfjs:".length)), generator: null };
  }
  throw new ExportError(`unknown source ${source}; use synthetic:<seed> or tfjs:<url>`);
}

export function writeManifest(banks: LayerBank[], outDir: string, generator: object | null): string {
  fs.mkdirSync(outDir, { recursive: true });
  const layers: object[] = [];
  banks.forEach((bank, i) => {
    const wBytes = new Uint8Array(bank.weights.buffer, 0, bank.weights.byteLength);
    const bBytes = new Uint8Array(bank.bias.buffer, 0, bank.bias.byteLength);
    const wFile = `${bank.name}.weights.bin`;
    const bFile = `${bank.name}.bias.bin`;
    fs.writeFileSync(path.join(outDir, wFile), wBytes);
    fs.writeFileSync(path.join(outDir, bFile), bBytes);
    layers.push({
      name: bank.name,
      kind: "conv",
      in_channels: bank.inChannels,
      out_channels: bank.outChannels,
      kernel: 3,
      stride: 1,
      padding: 1,
      weights_path: wFile,
      bias_path: bFile,
      weights_sha256: sha256(wBytes),
      bias_sha256: sha256(bBytes),
      weights_shape: [bank.outChannels, bank.inChannels, 3, 3],
      bias_shape: [bank.outChannels],
      dtype: "f32le",
    });
    layers.push({ name: `relu${bank.name.slice(4)}`, kind: "relu" });
    if (POOL_AFTER.has(i + 1)) {
      const poolIdx = [...POOL_AFTER].filter((p) => p <= i + 1).length;
      layers.push({ name: `pool${poolIdx}`, kind: "maxpool" });
    }
  });
  const manifest = {
    format_version: 1,
    arch_name: "vgg19",
    ...(generator ? { generator } : {}),
    normalization: NORMALIZATION,
    layers,
  };
  const manifestPath = path.join(outDir, "manifest.json");
  fs.writeFileSync(manifestPath, JSON.stringify(manifest, null, 2) + "\n");
  return manifestPath;
}

export async function exportWeights(source: string, outDir: string): Promise<string> {
  const { banks, generator } = await resolveBanks(source);
  return writeManifest(banks, outDir, generator);
}

export function loadBanksFromManifest(manifestPath: string): LayerBank[] {
  const doc = JSON.parse(fs.readFileSync(manifestPath, "utf-8"));
  const base = path.dirname(manifestPath);
  const banks: LayerBank[] = [];
  for (const layer of doc.layers) {
    if (layer.kind !== "conv") continue;
    const read = (file: string, digest: string): Float32Array => {
      const bytes = fs.readFileSync(path.join(base, file));
      if (sha256(bytes) !== digest) {
        throw new ExportError(`checksum mismatch for ${file}`);
      }
      return new Float32Array(bytes.buffer, bytes.byteOffset, bytes.byteLength / 4);
    };
    banks.push({
      name: layer.name,
      inChannels: layer.in_channels,
      outChannels: layer.out_channels,
      weights: read(layer.weights_path, layer.weights_sha256),
      bias: read(layer.bias_path, layer.bias_sha256),
    });
  }
  return banks;
}
