/**
 * Minimal NPY v1.0 reader/writer for little-endian float32/float64 matrices.
 *
 * Matches the consumer's format contract exactly: magic + version bytes, a
 * 2-byte little-endian header length, an ASCII dict header padded with spaces
 * and terminated by \n so the data offset is a multiple of 64, then raw
 * C-order values.
 */

const MAGIC = Buffer.from([0x93, 0x4e, 0x55, 0x4d, 0x50, 0x59]); // \x93NUMPY

export type NpyDtype = "<f4" | "<f8";

export interface NpyArray {
  dtype: NpyDtype;
  shape: number[];
  data: Float32Array | Float64Array;
}

export function encodeNpy(
  data: ArrayLike<number>,
  shape: number[],
  dtype: NpyDtype = "<f4",
): Buffer {
  const count = shape.reduce((a, b) => a * b, 1);
  if (count !== data.length) {
    throw new Error(`shape [${shape}] holds ${count} values, got ${data.length}`);
  }
  if (shape.length < 1 || shape.length > 2 || shape.some((d) => d < 1)) {
    throw new Error(`only non-empty 1-D or 2-D shapes are supported, got [${shape}]`);
  }
  const shapeRepr = shape.length === 1 ? `(${shape[0]},)` : `(${shape[0]}, ${shape[1]})`;
  let header = `{'descr': '${dtype}', 'fortran_order': False, 'shape': ${shapeRepr}, }`;
  const pad = (64 - ((10 + header.length + 1) % 64)) % 64;
  header = header + " ".repeat(pad) + "\n";

  const itemSize = dtype === "<f4" ? 4 : 8;
  const out = Buffer.alloc(10 + header.length + count * itemSize);
  MAGIC.copy(out, 0);
  out[6] = 0x01;
  out[7] = 0x00;
  out.writeUInt16LE(header.length, 8);
  out.write(header, 10, "latin1");
  let offset = 10 + header.length;
  for (let i = 0; i < count; i++) {
    if (dtype === "<f4") {
      out.writeFloatLE(Math.fround(data[i]), offset);
      offset += 4;
    } else {
      out.writeDoubleLE(data[i], offset);
      offset += 8;
    }
  }
  return out;
}

export function decodeNpy(raw: Buffer): NpyArray {
  if (raw.length < 10 || !raw.subarray(0, 6).equals(MAGIC)) {
    throw new Error("not an NPY file");
  }
  if (raw[6] !== 1 || raw[7] !== 0) {
    throw new Error(`unsupported NPY version ${raw[6]}.${raw[7]}`);
  }
  const headerLen = raw.readUInt16LE(8);
  const header = raw.subarray(10, 10 + headerLen).toString("latin1");
  const descr = /'descr':\s*'([^']+)'/.exec(header)?.[1];
  const fortran = /'fortran_order':\s*(True|False)/.exec(header)?.[1];
  const shapeText = /'shape':\s*\(([^)]*)\)/.exec(header)?.[1];
  if (!descr || !fortran || shapeText === undefined) {
    throw new Error(`malformed NPY header: ${header.trim()}`);
  }
  if (descr !== "<f4" && descr !== "<f8") {
    throw new Error(`unsupported dtype ${descr}`);
  }
  if (fortran === "True") {
    throw new Error("fortran_order arrays are not supported");
  }
  const shape = shapeText
    .split(",")
    .map((s) => s.trim())
    .filter((s) => s.length > 0)
    .map((s) => Number.parseInt(s, 10));
  const count = shape.reduce((a, b) => a * b, 1);
  const itemSize = descr === "<f4" ? 4 : 8;
  const payload = raw.subarray(10 + headerLen);
  if (payload.length !== count * itemSize) {
    throw new Error(`payload has ${payload.length} bytes, header promises ${count * itemSize}`);
  }
  const data = descr === "<f4" ? new Float32Array(count) : new Float64Array(count);
  for (let i = 0; i < count; i++) {
    data[i] = descr === "<f4" ? payload.readFloatLE(i * 4) : payload.readDoubleLE(i * 8);
  }
  return { dtype: descr, shape, data };
}
