/**
 * Minimal PNG codec for the two raster formats the core exchanges:
 * 8-bit grayscale masks (foreground = any value > 0) and 16-bit grayscale
 * probability maps (value / 65535). Non-interlaced grayscale only; built on
 * node:zlib so the only hand-written compression piece is the CRC table.
 */

import { readFile, writeFile } from "node:fs/promises";
import { deflateSync, inflateSync } from "node:zlib";

import { DecodeError } from "./errors.js";
import { InvalidInput } from "./errors.js";
import { mask, probmap, type Mask, type ProbMap } from "./grid.js";

const SIGNATURE = Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);

const CRC_TABLE = (() => {
  const t = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    t[n] = c >>> 0;
  }
  return t;
})();

function crc32(buf: Buffer): number {
  let c = 0xffffffff;
  for (let i = 0; i < buf.length; i++) c = CRC_TABLE[(c ^ buf[i]!) & 0xff]! ^ (c >>> 8);
  return (c ^ 0xffffffff) >>> 0;
}

function chunk(type: string, data: Buffer): Buffer {
  const head = Buffer.alloc(8);
  head.writeUInt32BE(data.length, 0);
  head.write(type, 4, "latin1");
  const crc = Buffer.alloc(4);
  crc.writeUInt32BE(crc32(Buffer.concat([head.subarray(4), data])), 0);
  return Buffer.concat([head, data, crc]);
}

/** Encode a non-interlaced grayscale PNG (filter 0 on every scanline). */
export function encodeGray(width: number, height: number,
                           samples: Uint8Array | Uint16Array, bitDepth: 8 | 16): Buffer {
  if (samples.length !== width * height) {
    throw new InvalidInput(`sample count ${samples.length} != ${width}x${height}`);
  }
  const ihdr = Buffer.alloc(13);
  ihdr.writeUInt32BE(width, 0);
  ihdr.writeUInt32BE(height, 4);
  ihdr[8] = bitDepth;       // bit depth
  ihdr[9] = 0;              // color type: grayscale
  ihdr[10] = 0;             // compression: deflate
  ihdr[11] = 0;             // filter method: adaptive
  ihdr[12] = 0;             // interlace: none

  const bpp = bitDepth / 8;
  const stride = width * bpp;
  const raw = Buffer.alloc(height * (stride + 1));
  for (let y = 0; y < height; y++) {
    const row = y * (stride + 1);
    raw[row] = 0; // filter type: none
    for (let x = 0; x < width; x++) {
      const v = samples[y * width + x]!;
      if (bitDepth === 8) {
        raw[row + 1 + x] = v;
      } else {
        raw.writeUInt16BE(v, row + 1 + 2 * x);
      }
    }
  }
  return Buffer.concat([
    SIGNATURE,
    chunk("IHDR", ihdr),
    chunk("IDAT", deflateSync(raw)),
    chunk("IEND", Buffer.alloc(0)),
  ]);
}

export interface DecodedGray {
  width: number;
  height: number;
  bitDepth: 8 | 16;
  /** Row-major samples; Uint16Array iff bitDepth is 16. */
  samples: Uint8Array | Uint16Array;
}

function paeth(a: number, b: number, c: number): number {
  const p = a + b - c;
  const pa = Math.abs(p - a), pb = Math.abs(p - b), pc = Math.abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

/** Decode a grayscale PNG; all five scanline filters are understood. */
export function decodeGray(buf: Buffer, context: string): DecodedGray {
  if (buf.length < 8 || !buf.subarray(0, 8).equals(SIGNATURE)) {
    throw new DecodeError(`${context}: not a PNG file`);
  }
  let pos = 8;
  let header: { width: number; height: number; bitDepth: number; colorType: number } | null = null;
  const idat: Buffer[] = [];
  let ended = false;
  while (pos + 12 <= buf.length && !ended) {
    const length = buf.readUInt32BE(pos);
    const type = buf.toString("latin1", pos + 4, pos + 8);
    if (pos + 12 + length > buf.length) throw new DecodeError(`${context}: truncated ${type} chunk`);
    const data = buf.subarray(pos + 8, pos + 8 + length);
    const stored = buf.readUInt32BE(pos + 8 + length);
    if (crc32(buf.subarray(pos + 4, pos + 8 + length)) !== stored) {
      throw new DecodeError(`${context}: CRC mismatch in ${type} chunk`);
    }
    if (type === "IHDR") {
      if (data.length !== 13) throw new DecodeError(`${context}: malformed IHDR`);
      const width = data.readUInt32BE(0);
      const height = data.readUInt32BE(4);
      const [bitDepth, colorType, compression, filter, interlace] =
        [data[8]!, data[9]!, data[10]!, data[11]!, data[12]!];
      if (compression !== 0 || filter !== 0) throw new DecodeError(`${context}: unsupported PNG variant`);
      if (interlace !== 0) throw new DecodeError(`${context}: interlaced PNG not supported`);
      header = { width, height, bitDepth, colorType };
    } else if (type === "IDAT") {
      idat.push(data);
    } else if (type === "IEND") {
      ended = true;
    }
    pos += 12 + length;
  }
  if (header === null || !ended) throw new DecodeError(`${context}: truncated PNG`);
  if (header.colorType !== 0) {
    throw new DecodeError(`${context}: expected a grayscale image, got color type ${header.colorType}`);
  }
  if (header.bitDepth !== 8 && header.bitDepth !== 16) {
    throw new DecodeError(`${context}: unsupported grayscale bit depth ${header.bitDepth}`);
  }
  let raw: Buffer;
  try {
    raw = inflateSync(Buffer.concat(idat));
  } catch (e) {
    throw new DecodeError(`${context}: bad IDAT stream (${(e as Error).message})`);
  }
  const { width, height } = header;
  const bitDepth = header.bitDepth as 8 | 16;
  const bpp = bitDepth / 8;
  const stride = width * bpp;
  if (raw.length !== height * (stride + 1)) {
    throw new DecodeError(`${context}: pixel data length ${raw.length} != expected ${height * (stride + 1)}`);
  }

  const recon = Buffer.alloc(height * stride);
  for (let y = 0; y < height; y++) {
    const filter = raw[y * (stride + 1)]!;
    const src = y * (stride + 1) + 1;
    const dst = y * stride;
    for (let i = 0; i < stride; i++) {
      const x = raw[src + i]!;
      const left = i >= bpp ? recon[dst + i - bpp]! : 0;
      const up = y > 0 ? recon[dst + i - stride]! : 0;
      const upLeft = y > 0 && i >= bpp ? recon[dst + i - stride - bpp]! : 0;
      let v: number;
      switch (filter) {
        case 0: v = x; break;
        case 1: v = x + left; break;
        case 2: v = x + up; break;
        case 3: v = x + ((left + up) >> 1); break;
        case 4: v = x + paeth(left, up, upLeft); break;
        default: throw new DecodeError(`${context}: unknown scanline filter ${filter}`);
      }
      recon[dst + i] = v & 0xff;
    }
  }

  if (bitDepth === 8) {
    return { width, height, bitDepth, samples: new Uint8Array(recon) };
  }
  const samples = new Uint16Array(width * height);
  for (let i = 0; i < samples.length; i++) samples[i] = recon.readUInt16BE(2 * i);
  return { width, height, bitDepth, samples };
}

/** Mask to 8-bit grayscale PNG, foreground as 255. */
export async function writeMaskPng(path: string, m: Mask): Promise<void> {
  const samples = new Uint8Array(m.data.length);
  for (let i = 0; i < m.data.length; i++) samples[i] = m.data[i]! ? 255 : 0;
  await writeFile(path, encodeGray(m.width, m.height, samples, 8));
}

/** Binary mask from a grayscale PNG; foreground = value > 0. */
export async function readMaskPng(path: string): Promise<Mask> {
  const dec = decodeGray(await readFile(path), path);
  const data = new Uint8Array(dec.samples.length);
  for (let i = 0; i < dec.samples.length; i++) data[i] = dec.samples[i]! > 0 ? 1 : 0;
  return mask(dec.width, dec.height, data);
}

/** Probability map to 16-bit grayscale PNG (value = round(p * 65535)). */
export async function writeProbmapPng(path: string, p: ProbMap): Promise<void> {
  const samples = new Uint16Array(p.data.length);
  for (let i = 0; i < p.data.length; i++) samples[i] = Math.round(p.data[i]! * 65535);
  await writeFile(path, encodeGray(p.width, p.height, samples, 16));
}

/** Probability map from a 16-bit (or 8-bit) grayscale PNG. */
export async function readProbmapPng(path: string): Promise<ProbMap> {
  const dec = decodeGray(await readFile(path), path);
  const denom = dec.bitDepth === 16 ? 65535 : 255;
  const data = new Float64Array(dec.samples.length);
  for (let i = 0; i < dec.samples.length; i++) data[i] = dec.samples[i]! / denom;
  return probmap(dec.width, dec.height, data);
}
