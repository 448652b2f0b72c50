// Client-side vertex blend between the two endpoint meshes. The slider never
// asks the server for geometry: every frame is (1-a)*S0 + a*Sgf, the same
// arithmetic the server uses, so the two agree to float32 round-off.

export function blendInto(
  out: Float32Array,
  base: Float32Array,
  target: Float32Array,
  gamma: number,
  gammaF: number,
): Float32Array {
  if (base.length !== target.length || out.length !== base.length) {
    throw new Error("blend endpoints have mismatched sizes");
  }
  if (!(gammaF > 0) || gamma < 0 || gamma > gammaF) {
    throw new Error(`gamma ${gamma} outside [0, ${gammaF}]`);
  }
  const alpha = gamma / gammaF;
  if (alpha === 0) {
    out.set(base);
    return out;
  }
  if (alpha === 1) {
    out.set(target);
    return out;
  }
  const inv = 1 - alpha;
  for (let i = 0; i < base.length; i++) {
    out[i] = inv * base[i] + alpha * target[i];
  }
  return out;
}

export function blendVertices(
  base: Float32Array,
  target: Float32Array,
  gamma: number,
  gammaF: number,
): Float32Array {
  return blendInto(new Float32Array(base.length), base, target, gamma, gammaF);
}
