/**
 * Reader for NLWV binary state snapshots.
 *
 * Layout, all little-endian:
 *
 *     bytes 0..3    magic "NLWV"
 *     uint32        format version (currently 1)
 *     uint32        n, uint32 M, uint32 N
 *     float64       L
 *     float64       t
 *     float64 x 2 M^n N   u values, complex interleaved (re, im),
 *                         row-major over the grid, fiber index fastest
 *     float64 x 2 M^n N   v = u_t values, same layout
 *
 * Truncation errors name the byte offset where the data ran out.
 */

const MAGIC = "NLWV";
const VERSION = 1;
const HEADER_BYTES = 36;

export class SnapshotError extends Error {}

export interface Snapshot {
  n: number;
  M: number;
  N: number;
  L: number;
  t: number;
  /** complex interleaved (re, im), grid row-major, fiber fastest */
  u: Float64Array;
  v: Float64Array;
}

function alignedFloat64(buf: Uint8Array, offset: number, bytes: number): Float64Array {
  // the data offset is 36, not 8-aligned, so a copy is required anyway
  const out = new ArrayBuffer(bytes);
  new Uint8Array(out).set(buf.subarray(offset, offset + bytes));
  return new Float64Array(out);
}

export function parseSnapshot(buf: Uint8Array, path: string): Snapshot {
  if (buf.length < HEADER_BYTES) {
    throw new SnapshotError(
      `${path}: truncated snapshot, header needs ${HEADER_BYTES} bytes, file has ${buf.length} (offset ${buf.length})`
    );
  }
  const dv = new DataView(buf.buffer, buf.byteOffset, buf.byteLength);
  const magic = String.fromCharCode(buf[0], buf[1], buf[2], buf[3]);
  if (magic !== MAGIC) {
    throw new SnapshotError(`${path}: bad magic "${magic}", expected "${MAGIC}"`);
  }
  const version = dv.getUint32(4, true);
  if (version !== VERSION) {
    throw new SnapshotError(`${path}: unsupported snapshot version ${version}, expected ${VERSION}`);
  }
  const n = dv.getUint32(8, true);
  const M = dv.getUint32(12, true);
  const N = dv.getUint32(16, true);
  const L = dv.getFloat64(20, true);
  const t = dv.getFloat64(28, true);
  const count = Math.pow(M, n) * N;
  const block = 16 * count;
  const expected = HEADER_BYTES + 2 * block;
  if (buf.length !== expected) {
    throw new SnapshotError(
      `${path}: truncated snapshot, expected ${expected} bytes, file has ${buf.length} (offset ${buf.length})`
    );
  }
  return {
    n,
    M,
    N,
    L,
    t,
    u: alignedFloat64(buf, HEADER_BYTES, block),
    v: alignedFloat64(buf, HEADER_BYTES + block, block),
  };
}

/** Real part of one fiber component of u, in grid order (length M^n). */
export function componentReal(snap: Snapshot, comp: number): Float64Array {
  if (comp < 0 || comp >= snap.N) {
    throw new SnapshotError(`component ${comp} out of range for N=${snap.N}`);
  }
  const points = Math.pow(snap.M, snap.n);
  const out = new Float64Array(points);
  for (let i = 0; i < points; i++) {
    out[i] = snap.u[(i * snap.N + comp) * 2];
  }
  return out;
}
