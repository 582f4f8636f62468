/**
 * Reference forward pass through the VGG-19 conv stack using tf.js.
 *
 * Inputs and captured activations are channel-major (C, H, W) float32 to
 * match the blob contract; tf.js works in NHWC internally, so tensors are
 * transposed at the boundary.  Every post-ReLU stack is captured.
 */

import * as tf from "@tensorflow/tfjs";

import { INPUT_SIDE, POOL_AFTER } from "./vgg19.js";
import type { LayerBank } from "./weights.js";

export interface CapturedLayer {
  name: string;
  channels: number;
  side: number;
  /** post-ReLU activations, (C, H, W) row-major */
  values: Float32Array;
}

export function chwToNhwc(values: Float32Array, channels: number, side: number): Float32Array {
  const out = new Float32Array(values.length);
  for (let c = 0; c < channels; c++) {
    for (let y = 0; y < side; y++) {
      for (let x = 0; x < side; x++) {
        out[(y * side + x) * channels + c] = values[(c * side + y) * side + x];
      }
    }
  }
  return out;
}

export function nhwcToChw(values: Float32Array, channels: number, side: number): Float32Array {
  const out = new Float32Array(values.length);
  for (let c = 0; c < channels; c++) {
    for (let y = 0; y < side; y++) {
      for (let x = 0; x < side; x++) {
        out[(c * side + y) * side + x] = values[(y * side + x) * channels + c];
      }
    }
  }
  return out;
}

/** OIHW blob order to tf.js HWIO kernel order. */
export function oihwToHwio(values: Float32Array, inC: number, outC: number): Float32Array {
  const out = new Float32Array(values.length);
  for (let o = 0; o < outC; o++) {
    for (let i = 0; i < inC; i++) {
      for (let h = 0; h < 3; h++) {
        for (let w = 0; w < 3; w++) {
          out[((h * 3 + w) * inC + i) * outC + o] = values[((o * inC + i) * 3 + h) * 3 + w];
        }
      }
    }
  }
  return out;
}

export async function runForward(
  inputChw: Float32Array,
  banks: LayerBank[],
  onProgress?: (name: string, seconds: number) => void,
): Promise<CapturedLayer[]> {
  if (inputChw.length !== 3 * INPUT_SIDE * INPUT_SIDE) {
    throw new Error(`input must be 3x${INPUT_SIDE}x${INPUT_SIDE}, got ${inputChw.length} values`);
  }
  await tf.setBackend("cpu");
  await tf.ready();

  const captured: CapturedLayer[] = [];
  let side = INPUT_SIDE;
  let x: tf.Tensor4D = tf.tensor4d(chwToNhwc(inputChw, 3, side), [1, side, side, 3]);

  for (let i = 0; i < banks.length; i++) {
    const bank = banks[i];
    const t0 = Date.now();
    const next = tf.tidy(() => {
      const kernel = tf.tensor4d(
        oihwToHwio(bank.weights, bank.inChannels, bank.outChannels),
        [3, 3, bank.inChannels, bank.outChannels],
      );
      const bias = tf.tensor1d(bank.bias);
      return tf.relu<tf.Tensor4D>(tf.add(tf.conv2d(x, kernel, 1, "same"), bias));
    });
    x.dispose();
    x = next;
    const nhwc = (await x.data()) as Float32Array;
    captured.push({
      name: bank.name,
      channels: bank.outChannels,
      side,
      values: nhwcToChw(nhwc, bank.outChannels, side),
    });
    if (POOL_AFTER.has(i + 1)) {
      const pooled = tf.maxPool(x, 2, 2, "valid");
      x.dispose();
      x = pooled;
      side = side / 2;
    }
    onProgress?.(bank.name, (Date.now() - t0) / 1000);
  }
  x.dispose();
  return captured;
}
