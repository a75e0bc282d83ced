/**
 * Export run: frozen checkpoint + audio list -> per-layer feature NPY files,
 * labels JSONL, optional posterior grids, and a scoring manifest.
 *
 * Candidate ids follow "<model>-layer-<k>"; every emitted file uses the
 * consumer's formats (NPY v1.0 float32, one file per utterance keyed by
 * utterance id).
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { EncoderStack, ModelLoadError } from "./encoder.js";
import { encodeNpy } from "./npy.js";
import { decodeWav, frameSignal } from "./wav.js";

export interface UtteranceSpec {
  utt_id: string;
  audio: string; // PCM16 mono WAV path, relative to the spec file
  labels: number[];
}

export interface ExportSpec {
  model: string; // checkpoint directory
  layers?: number[]; // 1-based layer indices; defaults to all
  utterances: UtteranceSpec[];
  output_dir: string;
  task_kind?: "sequence" | "classification";
  write_posteriors?: boolean;
  frame?: { window?: number; hop?: number };
}

export interface ExportResult {
  manifestPath: string;
  candidateIds: string[];
  featureFiles: number;
  posteriorFiles: number;
}

export class ExportSpecError extends Error {}

export function loadExportSpec(specPath: string): { spec: ExportSpec; baseDir: string } {
  let spec: ExportSpec;
  try {
    spec = JSON.parse(fs.readFileSync(specPath, "utf-8"));
  } catch (err) {
    throw new ExportSpecError(`cannot read export spec ${specPath}: ${err}`);
  }
  if (!spec.model || !spec.output_dir || !Array.isArray(spec.utterances)
      || spec.utterances.length === 0) {
    throw new ExportSpecError(`${specPath}: need model, output_dir and a non-empty utterance list`);
  }
  for (const utt of spec.utterances) {
    if (!utt.utt_id || !utt.audio || !Array.isArray(utt.labels) || utt.labels.length === 0
        || utt.labels.some((l) => !Number.isInteger(l) || l < 0)) {
      throw new ExportSpecError(`${specPath}: utterance entries need utt_id, audio and non-negative integer labels`);
    }
  }
  return { spec, baseDir: path.dirname(path.resolve(specPath)) };
}

export function runExport(spec: ExportSpec, baseDir: string): ExportResult {
  const resolve = (p: string) => (path.isAbsolute(p) ? p : path.join(baseDir, p));
  const model = EncoderStack.load(resolve(spec.model));

  const layerIndices = spec.layers ?? Array.from({ length: model.layerCount }, (_, i) => i + 1);
  for (const k of layerIndices) {
    if (!Number.isInteger(k) || k < 1 || k > model.layerCount) {
      throw new ExportSpecError(`layer index ${k} outside 1..${model.layerCount}`);
    }
  }

  const writePosteriors = spec.write_posteriors ?? false;
  if (writePosteriors && !model.hasCtcHead) {
    throw new ModelLoadError(
      `model ${model.name} has no CTC head to produce posterior grids; ` +
      `export without posteriors and declare "posteriors": "uniform" in the manifest instead`);
  }
  if (writePosteriors && model.vocabSize !== null) {
    for (const utt of spec.utterances) {
      const bad = utt.labels.find((l) => l >= model.vocabSize!);
      if (bad !== undefined) {
        throw new ExportSpecError(
          `utterance ${utt.utt_id}: label ${bad} outside the head vocabulary of ${model.vocabSize}`);
      }
    }
  }

  const window = spec.frame?.window ?? model.inputDim;
  const hop = spec.frame?.hop ?? Math.max(1, Math.floor(window / 2));
  if (window !== model.inputDim) {
    throw new ExportSpecError(`frame window ${window} does not match the model input of ${model.inputDim}`);
  }

  const outDir = resolve(spec.output_dir);
  fs.mkdirSync(outDir, { recursive: true });
  const candidateIds = layerIndices.map((k) => `${model.name}-layer-${String(k).padStart(2, "0")}`);
  for (const cid of candidateIds) {
    fs.mkdirSync(path.join(outDir, cid), { recursive: true });
  }
  if (writePosteriors) {
    fs.mkdirSync(path.join(outDir, "posteriors"), { recursive: true });
  }

  let featureFiles = 0;
  let posteriorFiles = 0;
  const labelLines: string[] = [];
  for (const utt of spec.utterances) {
    const audio = decodeWav(fs.readFileSync(resolve(utt.audio)));
    const frames = frameSignal(audio.samples, window, hop);
    const perLayer = model.forward(frames);

    layerIndices.forEach((k, idx) => {
      const activations = perLayer[k - 1];
      const dim = activations[0].length;
      const flat = new Float32Array(activations.length * dim);
      activations.forEach((row, t) => flat.set(row, t * dim));
      const file = path.join(outDir, candidateIds[idx], `${utt.utt_id}.npy`);
      fs.writeFileSync(file, encodeNpy(flat, [activations.length, dim], "<f4"));
      featureFiles += 1;
    });

    if (writePosteriors) {
      const rows = model.posteriors(perLayer[model.layerCount - 1]);
      const width = rows[0].length;
      const flat = new Float32Array(rows.length * width);
      rows.forEach((row, t) => flat.set(row, t * width));
      fs.writeFileSync(path.join(outDir, "posteriors", `${utt.utt_id}.npy`),
        encodeNpy(flat, [rows.length, width], "<f4"));
      posteriorFiles += 1;
    }

    labelLines.push(JSON.stringify({ utt_id: utt.utt_id, labels: utt.labels }));
  }
  fs.writeFileSync(path.join(outDir, "labels.jsonl"), labelLines.join("\n") + "\n");

  const manifest = {
    task_kind: spec.task_kind ?? "sequence",
    candidates: candidateIds.map((cid) => ({
      id: cid,
      features: cid,
      labels: "labels.jsonl",
      ...(writePosteriors ? { posteriors: "posteriors" } : {}),
    })),
  };
  const manifestPath = path.join(outDir, "manifest.json");
  fs.writeFileSync(manifestPath, JSON.stringify(manifest, null, 2) + "\n");

  return { manifestPath, candidateIds, featureFiles, posteriorFiles };
}
