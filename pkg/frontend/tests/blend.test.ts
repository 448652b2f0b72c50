import { describe, expect, it } from "vitest";

import { blendInto, blendVertices } from "../src/blend";

const base = new Float32Array([0, 0, 0, 2, 4, 8]);
const target = new Float32Array([1, 1, 1, 4, 0, 16]);

describe("client-side vertex blend", () => {
  it("returns the base bitwise at gamma = 0", () => {
    expect([...blendVertices(base, target, 0, 0.25)]).toEqual([...base]);
  });

  it("returns the target bitwise at gamma = gamma_f", () => {
    expect([...blendVertices(base, target, 0.25, 0.25)]).toEqual([...target]);
  });

  it("hits exact vertex midpoints at gamma_f / 2", () => {
    const mid = blendVertices(base, target, 0.125, 0.25);
    expect([...mid]).toEqual([0.5, 0.5, 0.5, 3, 2, 12]);
  });

  it("uses the (1-a)*S0 + a*Sgf arithmetic", () => {
    const alpha = 0.3;
    const out = blendVertices(base, target, alpha * 0.25, 0.25);
    for (let i = 0; i < base.length; i++) {
      expect(out[i]).toBeCloseTo((1 - alpha) * base[i] + alpha * target[i], 6);
    }
  });

  it("writes into the caller's buffer without allocating", () => {
    const scratch = new Float32Array(base.length);
    const out = blendInto(scratch, base, target, 0.1, 0.25);
    expect(out).toBe(scratch);
  });

  it("validates gamma range and sizes", () => {
    expect(() => blendVertices(base, target, 0.3, 0.25)).toThrow(/outside/);
    expect(() => blendVertices(base, target, -0.01, 0.25)).toThrow(/outside/);
    expect(() => blendVertices(base, new Float32Array(3), 0.1, 0.25)).toThrow(/mismatch/);
  });
});
