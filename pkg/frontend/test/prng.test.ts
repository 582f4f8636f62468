import { describe, expect, it } from "vitest";

import { blobValues, fixtureImageBytes, fnv1a32, uniformUnits } from "../src/prng.js";

// Known-answer values frozen from an independent implementation of the
// "fmix32-counter-v1" scheme; any drift here breaks the cross-runtime
// fixture contract.
describe("counter generator", () => {
  it("hashes blob names with FNV-1a", () => {
    expect(fnv1a32("conv1_1.weights")).toBe(0xcdb36e85);
  });

  it("reproduces the frozen uniform stream", () => {
    const units = uniformUnits("conv1_1.weights", 20260809, 5);
    const expected = [
      0.12688293447718024, 0.7749081370420754, 0.9296747511252761,
      0.10061542224138975, 0.29008820792660117,
    ];
    for (let i = 0; i < expected.length; i++) {
      expect(units[i]).toBe(expected[i]);
    }
  });

  it("reproduces the frozen float32 weight stream", () => {
    const bound = Math.sqrt(6.0 / 27.0);
    const w = blobValues("conv1_1.weights", 20260809, 5, bound);
    const expected = [
      -0.35177814960479736, 0.25918588042259216, 0.4051012396812439,
      -0.37654340267181396, -0.1979067325592041,
    ];
    for (let i = 0; i < expected.length; i++) {
      expect(w[i]).toBe(Math.fround(expected[i]));
    }
  });

  it("reproduces the frozen fixture image bytes", () => {
    const rgb = fixtureImageBytes(224, 224, 20260809);
    expect(Array.from(rgb.slice(0, 12))).toEqual([
      191, 241, 30, 159, 34, 227, 230, 119, 200, 15, 129, 176,
    ]);
    expect(rgb.length).toBe(224 * 224 * 3);
  });

  it("is a pure function of (name, seed, index)", () => {
    const a = uniformUnits("conv2_1.bias", 7, 100);
    const b = uniformUnits("conv2_1.bias", 7, 100);
    const c = uniformUnits("conv2_1.bias", 8, 100);
    expect(a).toEqual(b);
    expect(a).not.toEqual(c);
    // prefix property: shorter draws are prefixes of longer ones
    expect(Array.from(uniformUnits("conv2_1.bias", 7, 10))).toEqual(
      Array.from(a.slice(0, 10)),
    );
  });
});
