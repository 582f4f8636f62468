/** VGG-19 feature-stack constants mirrored by the analysis engine. */

export const CONV_CHANNELS = [
  64, 64, 128, 128, 256, 256, 256, 256, 512, 512, 512, 512, 512, 512, 512, 512,
] as const;

export const CONV_NAMES = [
  "conv1_1", "conv1_2",
  "conv2_1", "conv2_2",
  "conv3_1", "conv3_2", "conv3_3", "conv3_4",
  "conv4_1", "conv4_2", "conv4_3", "conv4_4",
  "conv5_1", "conv5_2", "conv5_3", "conv5_4",
] as const;

/** 1-based conv indices followed by a 2x2/2 max-pool. */
export const POOL_AFTER = new Set([2, 4, 8, 12, 16]);

/** Spatial side of each conv layer's output for a 224x224 input. */
export const CONV_SIDES = [
  224, 224, 112, 112, 56, 56, 56, 56, 28, 28, 28, 28, 14, 14, 14, 14,
] as const;

export const INPUT_SIDE = 224;
export const TOTAL_KERNELS = CONV_CHANNELS.reduce((a, b) => a + b, 0); // 5504

export const NORMALIZATION = {
  mean: [0.485, 0.456, 0.406],
  std: [0.229, 0.224, 0.225],
  channel_order: "rgb",
  pixel_scale: 255.0,
} as const;

export function inChannelsOf(layerIndex: number): number {
  return layerIndex === 0 ? 3 : CONV_CHANNELS[layerIndex - 1];
}

export function weightBound(fanIn: number): number {
  return Math.sqrt(6.0 / fanIn);
}

export function biasBound(fanIn: number): number {
  return 1.0 / Math.sqrt(fanIn);
}
