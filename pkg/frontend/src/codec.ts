// Binary mesh payload: u32le envelope length, UTF-8 JSON envelope,
// f32le vertex triples, u32le face index triples.

export interface MeshEnvelope {
  format: string;
  vertex_count: number;
  face_count: number;
  gamma?: number;
  gamma_f?: number;
  bbox_diagonal?: number;
  session?: string;
  edit_id?: string;
  region?: string[];
  kind?: string;
}

export interface MeshPayload {
  vertices: Float32Array;
  faces: Uint32Array;
  envelope: MeshEnvelope;
}

export function decodeMeshPayload(buf: ArrayBuffer): MeshPayload {
  if (buf.byteLength < 4) {
    throw new Error("mesh payload too short");
  }
  const view = new DataView(buf);
  const envLen = view.getUint32(0, true);
  const envelope = JSON.parse(
    new TextDecoder().decode(new Uint8Array(buf, 4, envLen)),
  ) as MeshEnvelope;
  const nv = envelope.vertex_count;
  const nf = envelope.face_count;
  const off = 4 + envLen;
  const need = off + nv * 12 + nf * 12;
  if (buf.byteLength < need) {
    throw new Error(`mesh payload truncated: have ${buf.byteLength}, need ${need}`);
  }
  // copy out of the (possibly unaligned) slice
  const vertices = new Float32Array(nv * 3);
  const faces = new Uint32Array(nf * 3);
  for (let i = 0; i < nv * 3; i++) {
    vertices[i] = view.getFloat32(off + i * 4, true);
  }
  const faceOff = off + nv * 12;
  for (let i = 0; i < nf * 3; i++) {
    faces[i] = view.getUint32(faceOff + i * 4, true);
  }
  return { vertices, faces, envelope };
}

export function encodeMeshPayload(
  vertices: Float32Array,
  faces: Uint32Array,
  meta: Partial<MeshEnvelope> = {},
): ArrayBuffer {
  const envelope = {
    format: "forge-mesh/1",
    ...meta,
    vertex_count: vertices.length / 3,
    face_count: faces.length / 3,
  };
  const envBytes = new TextEncoder().encode(JSON.stringify(envelope));
  const total = 4 + envBytes.length + vertices.length * 4 + faces.length * 4;
  const buf = new ArrayBuffer(total);
  const view = new DataView(buf);
  view.setUint32(0, envBytes.length, true);
  new Uint8Array(buf, 4, envBytes.length).set(envBytes);
  let off = 4 + envBytes.length;
  for (let i = 0; i < vertices.length; i++, off += 4) {
    view.setFloat32(off, vertices[i], true);
  }
  for (let i = 0; i < faces.length; i++, off += 4) {
    view.setUint32(off, faces[i], true);
  }
  return buf;
}

export function bboxDiagonal(vertices: Float32Array): number {
  const lo = [Infinity, Infinity, Infinity];
  const hi = [-Infinity, -Infinity, -Infinity];
  for (let i = 0; i < vertices.length; i += 3) {
    for (let c = 0; c < 3; c++) {
      const v = vertices[i + c];
      if (v < lo[c]) lo[c] = v;
      if (v > hi[c]) hi[c] = v;
    }
  }
  const dx = hi[0] - lo[0];
  const dy = hi[1] - lo[1];
  const dz = hi[2] - lo[2];
  return Math.sqrt(dx * dx + dy * dy + dz * dz);
}
