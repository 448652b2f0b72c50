import { describe, expect, it } from "vitest";

import { ErrorCurveReport } from "../src/api";
import { prepareCurve, renderCurveSvg } from "../src/errorCurve";
import { RevisionGate } from "../src/api";

const report: ErrorCurveReport = {
  gamma_f: 0.25,
  gammas: [0, 0.0625, 0.125, 0.1875, 0.25],
  err_linf: [0, 0.002, 0.0031, 0.0019, 0],
  err_l2: [0, 0.0002, 0.00033, 0.0002, 0],
  bound: [0, 0.01, 0.0133, 0.01, 0],
  C_P: 1.0,
  K_inf: 1.15,
};

describe("error-curve panel", () => {
  it("keeps the endpoint samples at exactly zero", () => {
    const data = prepareCurve(report);
    expect(data.measured[0].value).toBe(0);
    expect(data.measured[data.measured.length - 1].value).toBe(0);
  });

  it("finds the peak and marks proximity to gamma_f / 2", () => {
    const data = prepareCurve(report);
    expect(data.peak.gamma).toBe(0.125);
    expect(data.midGamma).toBe(0.125);
    expect(data.peakNearMid).toBe(true);
  });

  it("flags a peak that drifted beyond one sample of the midpoint", () => {
    const skewed: ErrorCurveReport = {
      ...report,
      gammas: [0, 0.03125, 0.0625, 0.09375, 0.125, 0.15625, 0.1875, 0.21875, 0.25],
      err_linf: [0, 0.01, 0.004, 0.003, 0.002, 0.002, 0.001, 0.001, 0],
      err_l2: [0, 0.001, 0.0004, 0.0003, 0.0002, 0.0002, 0.0001, 0.0001, 0],
      bound: [0, 0.02, 0.03, 0.035, 0.04, 0.035, 0.03, 0.02, 0],
    };
    expect(prepareCurve(skewed).peakNearMid).toBe(false);
  });

  it("renders both series and the midpoint marker as SVG", () => {
    const svg = renderCurveSvg(report);
    expect(svg).toContain("<svg");
    expect(svg).toContain('class="measured"');
    expect(svg).toContain('class="bound"');
    expect(svg).toContain("gamma_f/2");
    expect(svg).toContain('class="peak"');
  });

  it("bound overlay dominates the measured curve in the fixture", () => {
    const data = prepareCurve(report);
    for (let i = 0; i < data.measured.length; i++) {
      expect(data.bound[i].value).toBeGreaterThanOrEqual(data.measured[i].value);
    }
  });
});

describe("stale-response discarding", () => {
  it("only the newest revision of a key applies", async () => {
    const gate = new RevisionGate();
    let release2: () => void = () => void 0;
    const slow = gate.run("blend", async () => {
      await new Promise<void>((r) => (release2 = r));
      return "old";
    });
    const fast = await gate.run("blend", async () => "new");
    expect(fast).toBe("new");
    release2();
    expect(await slow).toBeNull(); // superseded request is discarded
  });

  it("independent keys do not interfere", async () => {
    const gate = new RevisionGate();
    const a = await gate.run("a", async () => 1);
    const b = await gate.run("b", async () => 2);
    expect(a).toBe(1);
    expect(b).toBe(2);
  });
});
