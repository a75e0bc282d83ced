/**
 * PCM WAV decoding and frame slicing.
 *
 * Supports the canonical RIFF layout with 16-bit signed mono PCM, which is
 * what target-task recordings are normalized to before export.
 */

export interface DecodedAudio {
  sampleRate: number;
  samples: Float32Array; // normalized to [-1, 1]
}

export class AudioDecodeError extends Error {}

export function decodeWav(raw: Buffer): DecodedAudio {
  if (raw.length < 44 || raw.toString("latin1", 0, 4) !== "RIFF" ||
      raw.toString("latin1", 8, 12) !== "WAVE") {
    throw new AudioDecodeError("not a RIFF/WAVE file");
  }
  let offset = 12;
  let format: { audioFormat: number; channels: number; sampleRate: number; bits: number } | null = null;
  let dataChunk: Buffer | null = null;
  while (offset + 8 <= raw.length) {
    const id = raw.toString("latin1", offset, offset + 4);
    const size = raw.readUInt32LE(offset + 4);
    const body = raw.subarray(offset + 8, offset + 8 + size);
    if (id === "fmt ") {
      format = {
        audioFormat: body.readUInt16LE(0),
        channels: body.readUInt16LE(2),
        sampleRate: body.readUInt32LE(4),
        bits: body.readUInt16LE(14),
      };
    } else if (id === "data") {
      dataChunk = body;
    }
    offset += 8 + size + (size % 2); // chunks are word-aligned
  }
  if (!format || !dataChunk) {
    throw new AudioDecodeError("missing fmt or data chunk");
  }
  if (format.audioFormat !== 1 || format.bits !== 16) {
    throw new AudioDecodeError(`only 16-bit PCM is supported, got format ${format.audioFormat} / ${format.bits} bits`);
  }
  if (format.channels !== 1) {
    throw new AudioDecodeError(`only mono audio is supported, got ${format.channels} channels`);
  }
  const samples = new Float32Array(dataChunk.length >> 1);
  for (let i = 0; i < samples.length; i++) {
    samples[i] = dataChunk.readInt16LE(i * 2) / 32768;
  }
  return { sampleRate: format.sampleRate, samples };
}

export function encodeWavPcm16(samples: Float32Array, sampleRate: number): Buffer {
  const out = Buffer.alloc(44 + samples.length * 2);
  out.write("RIFF", 0, "latin1");
  out.writeUInt32LE(36 + samples.length * 2, 4);
  out.write("WAVE", 8, "latin1");
  out.write("fmt ", 12, "latin1");
  out.writeUInt32LE(16, 16);
  out.writeUInt16LE(1, 20); // PCM
  out.writeUInt16LE(1, 22); // mono
  out.writeUInt32LE(sampleRate, 24);
  out.writeUInt32LE(sampleRate * 2, 28);
  out.writeUInt16LE(2, 32);
  out.writeUInt16LE(16, 34);
  out.write("data", 36, "latin1");
  out.writeUInt32LE(samples.length * 2, 40);
  for (let i = 0; i < samples.length; i++) {
    const v = Math.max(-1, Math.min(1, samples[i]));
    out.writeInt16LE(Math.round(v * 32767), 44 + i * 2);
  }
  return out;
}

/** Slice a waveform into overlapping frames of `windowSize` every `hop` samples. */
export function frameSignal(samples: Float32Array, windowSize: number, hop: number): Float32Array[] {
  if (samples.length < windowSize) {
    throw new AudioDecodeError(`signal of ${samples.length} samples is shorter than one ${windowSize}-sample window`);
  }
  const frames: Float32Array[] = [];
  for (let start = 0; start + windowSize <= samples.length; start += hop) {
    frames.push(samples.subarray(start, start + windowSize).slice());
  }
  return frames;
}
