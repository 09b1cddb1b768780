/**
 * Embedding projection ops on raw row-major buffers.
 *
 * Mirrors the core library's inference-time surface: build a projector onto
 * the row space of a token block, separate an embedding from that subspace
 * (x' = x - alpha * x P), and norm-match the result back to the original
 * scale. Arithmetic runs in 64-bit; only the embedding-file boundary is
 * 32-bit, so results match the core within 32-bit quantization.
 */

const RANK_RTOL = 1e-10;

export type FloatBuffer = Float32Array | Float64Array;

export interface Projector {
  /** d x d row-major projection matrix. */
  p: Float64Array;
  rank: number;
  sourceRows: number;
}

function toF64(buffer: FloatBuffer, expected: number, name: string): Float64Array {
  if (buffer.length !== expected) {
    throw new Error(`${name} has ${buffer.length} values, expected ${expected}`);
  }
  const out = new Float64Array(buffer.length);
  for (let i = 0; i < buffer.length; i++) {
    const v = buffer[i];
    if (!Number.isFinite(v)) {
      throw new Error(`${name} entry ${i} is not finite: ${v}`);
    }
    out[i] = v;
  }
  return out;
}

function checkAlpha(alpha: number): void {
  if (!(alpha >= 0 && alpha <= 1)) {
    throw new Error(`alpha must be in [0, 1], got ${alpha}`);
  }
}

/**
 * Orthonormal-basis projector onto the row space of xTilde (rows x d,
 * row-major). Modified Gram-Schmidt with a re-orthogonalization pass; rows
 * with residual norm below RANK_RTOL times the largest row norm are dropped.
 */
export function buildProjector(xTilde: FloatBuffer, rows: number, d: number): Projector {
  if (rows < 1 || d < 1) {
    throw new Error(`need at least a 1x1 suppression target, got ${rows}x${d}`);
  }
  const a = toF64(xTilde, rows * d, "suppression target");
  let maxNorm = 0;
  for (let r = 0; r < rows; r++) {
    let s = 0;
    for (let j = 0; j < d; j++) s += a[r * d + j] * a[r * d + j];
    maxNorm = Math.max(maxNorm, Math.sqrt(s));
  }
  if (maxNorm === 0) {
    throw new Error("suppression target is all zero: empty subspace");
  }
  const threshold = RANK_RTOL * maxNorm;
  const basis: Float64Array[] = [];
  for (let r = 0; r < rows; r++) {
    const vec = a.slice(r * d, (r + 1) * d);
    for (let pass = 0; pass < 2; pass++) {
      for (const b of basis) {
        let dot = 0;
        for (let j = 0; j < d; j++) dot += vec[j] * b[j];
        for (let j = 0; j < d; j++) vec[j] -= dot * b[j];
      }
    }
    let norm = 0;
    for (let j = 0; j < d; j++) norm += vec[j] * vec[j];
    norm = Math.sqrt(norm);
    if (norm >= threshold) {
      for (let j = 0; j < d; j++) vec[j] /= norm;
      basis.push(vec);
    }
  }
  if (basis.length === 0) {
    throw new Error("suppression target spans an empty subspace");
  }
  const p = new Float64Array(d * d);
  for (const b of basis) {
    for (let i = 0; i < d; i++) {
      const bi = b[i];
      if (bi === 0) continue;
      const row = i * d;
      for (let j = 0; j < d; j++) p[row + j] += bi * b[j];
    }
  }
  return { p, rank: basis.length, sourceRows: rows };
}

/** x - alpha * x P for a row-major l x d embedding; returns a new buffer. */
export function projectSeparate(
  x: FloatBuffer,
  l: number,
  d: number,
  proj: Projector,
  alpha: number,
): Float64Array {
  checkAlpha(alpha);
  if (proj.p.length !== d * d) {
    throw new Error(`embedding has ${d} columns but projector is ${Math.sqrt(proj.p.length)} wide`);
  }
  const a = toF64(x, l * d, "embedding");
  const out = new Float64Array(l * d);
  const p = proj.p;
  for (let r = 0; r < l; r++) {
    const row = r * d;
    for (let j = 0; j < d; j++) {
      let dot = 0;
      const col = j;
      for (let k = 0; k < d; k++) dot += a[row + k] * p[k * d + col];
      out[row + j] = a[row + j] - alpha * dot;
    }
  }
  return out;
}

function frobenius(m: FloatBuffer): number {
  let s = 0;
  for (let i = 0; i < m.length; i++) s += m[i] * m[i];
  return Math.sqrt(s);
}

/** Rescale target so its Frobenius norm equals the reference's. */
export function normMatch(target: FloatBuffer, reference: FloatBuffer): Float64Array {
  if (target.length !== reference.length) {
    throw new Error(
      `norm_match needs equal sizes, got ${target.length} and ${reference.length}`,
    );
  }
  const tn = frobenius(target);
  if (tn === 0) {
    throw new Error("cannot norm-match a zero target (scale is undefined)");
  }
  const scale = frobenius(reference) / tn;
  const out = new Float64Array(target.length);
  for (let i = 0; i < target.length; i++) out[i] = target[i] * scale;
  return out;
}

/**
 * Separate an embedding from its own word-token subspace: the projector is
 * built from rows 0..n-1, the separation applied with the given alpha, and
 * the result (optionally) norm-matched to the input. Returns a new 32-bit
 * buffer; the input is never mutated.
 */
export function boundDecor(
  buffer: Float32Array,
  l: number,
  d: number,
  n: number,
  alpha: number,
  resize = true,
): Float32Array {
  if (!(n >= 1 && n < l)) {
    throw new Error(`need 1 <= n < l, got n=${n}, l=${l}`);
  }
  checkAlpha(alpha);
  const x = toF64(buffer, l * d, "embedding");
  const words = x.subarray(0, n * d);
  let allZero = true;
  for (let i = 0; i < words.length && allZero; i++) allZero = words[i] === 0;
  if (allZero) {
    throw new Error("word-token rows are all zero: nothing to project against");
  }
  const proj = buildProjector(words, n, d);
  let out = projectSeparate(x, l, d, proj, alpha);
  if (resize) {
    out = normMatch(out, x);
  }
  return Float32Array.from(out);
}
