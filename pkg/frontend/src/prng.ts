/**
 * Counter-based deterministic generator shared with the analysis engine.
 *
 * Every blob value is a pure function of (blob name, seed, element index), so
 * any runtime with 32-bit integer arithmetic and IEEE-754 doubles reproduces
 * the same bytes.  Scheme id: "fmix32-counter-v1" (see docs/fixtures.md).
 */

const GOLDEN32 = 0x9e3779b9;

export function fnv1a32(text: string): number {
  const bytes = new TextEncoder().encode(text);
  let h = 0x811c9dc5;
  for (const b of bytes) {
    h = Math.imul(h ^ b, 0x01000193) >>> 0;
  }
  return h >>> 0;
}

/** murmur3 finalizer: avalanches a 32-bit counter into a well-mixed word. */
export function fmix32(x: number): number {
  x >>>= 0;
  x ^= x >>> 16;
  x = Math.imul(x, 0x85ebca6b) >>> 0;
  x ^= x >>> 13;
  x = Math.imul(x, 0xc2b2ae35) >>> 0;
  x ^= x >>> 16;
  return x >>> 0;
}

/** `count` doubles uniform in [0, 1), element i = fmix32(base + i * GOLDEN32). */
export function uniformUnits(name: string, seed: number, count: number): Float64Array {
  const base = fmix32((fnv1a32(name) ^ seed) >>> 0);
  const out = new Float64Array(count);
  for (let i = 0; i < count; i++) {
    const counter = (base + Math.imul(i, GOLDEN32)) >>> 0;
    out[i] = fmix32(counter) * 2 ** -32;
  }
  return out;
}

/** float32 values uniform in [-bound, bound), matching the engine bit for bit. */
export function blobValues(name: string, seed: number, count: number, bound: number): Float32Array {
  const units = uniformUnits(name, seed, count);
  const out = new Float32Array(count);
  for (let i = 0; i < count; i++) {
    out[i] = Math.fround((2.0 * units[i] - 1.0) * bound);
  }
  return out;
}

/** Raw RGB bytes of the noise fixture image: channel value = mix output mod 256. */
export function fixtureImageBytes(width = 224, height = 224, seed = 0): Uint8Array {
  const units = uniformUnits("fixture_image", seed, width * height * 3);
  const out = new Uint8Array(units.length);
  for (let i = 0; i < units.length; i++) {
    out[i] = Math.floor(units[i] * 4294967296) % 256;
  }
  return out;
}
