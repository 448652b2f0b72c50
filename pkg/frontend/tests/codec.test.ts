import { describe, expect, it } from "vitest";

import { bboxDiagonal, decodeMeshPayload, encodeMeshPayload } from "../src/codec";

describe("binary mesh payload codec", () => {
  it("round-trips vertices, faces and envelope", () => {
    const vertices = new Float32Array([0, 0, 0, 1, 0, 0, 0, 1, 0, 0.5, 0.5, 2.25]);
    const faces = new Uint32Array([0, 1, 2, 1, 3, 2]);
    const buf = encodeMeshPayload(vertices, faces, { gamma: 0.125, session: "abc" });
    const decoded = decodeMeshPayload(buf);
    expect([...decoded.vertices]).toEqual([...vertices]);
    expect([...decoded.faces]).toEqual([...faces]);
    expect(decoded.envelope.vertex_count).toBe(4);
    expect(decoded.envelope.face_count).toBe(2);
    expect(decoded.envelope.gamma).toBe(0.125);
    expect(decoded.envelope.session).toBe("abc");
    expect(decoded.envelope.format).toBe("forge-mesh/1");
  });

  it("rejects truncated payloads", () => {
    const buf = encodeMeshPayload(new Float32Array(9), new Uint32Array(3));
    expect(() => decodeMeshPayload(buf.slice(0, buf.byteLength - 5))).toThrow(/truncated/);
    expect(() => decodeMeshPayload(new ArrayBuffer(2))).toThrow(/too short/);
  });

  it("decodes little-endian layout byte for byte", () => {
    // hand-built payload: one vertex at (1, 2, 3), no faces
    const env = new TextEncoder().encode('{"vertex_count":1,"face_count":0}');
    const buf = new ArrayBuffer(4 + env.length + 12);
    const view = new DataView(buf);
    view.setUint32(0, env.length, true);
    new Uint8Array(buf, 4, env.length).set(env);
    view.setFloat32(4 + env.length, 1, true);
    view.setFloat32(4 + env.length + 4, 2, true);
    view.setFloat32(4 + env.length + 8, 3, true);
    const decoded = decodeMeshPayload(buf);
    expect([...decoded.vertices]).toEqual([1, 2, 3]);
    expect(decoded.faces.length).toBe(0);
  });

  it("computes the bounding-box diagonal", () => {
    const unitCube = new Float32Array([
      0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 1, 1, 0, 1, 0, 1, 0, 1, 1, 1, 1, 1,
    ]);
    expect(bboxDiagonal(unitCube)).toBeCloseTo(Math.sqrt(3), 12);
  });
});
