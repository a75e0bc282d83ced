/**
 * Checkpoint authoring helpers: write a randomly initialized encoder stack
 * in the on-disk format EncoderStack loads. Used by tests and demos to stand
 * in for converted real checkpoints.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { encodeNpy } from "./npy.js";

export interface RandomCheckpointConfig {
  name: string;
  inputDim: number;
  layerDims: number[]; // output width per layer
  vocabSize?: number; // adds a CTC head when set
  seed?: number;
}

/** Deterministic 32-bit PRNG (mulberry32); good enough for weight init. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function writeRandomCheckpoint(dir: string, config: RandomCheckpointConfig): void {
  const rand = mulberry32(config.seed ?? 1);
  const gaussian = () => {
    // Box-Muller transform
    const u = Math.max(rand(), 1e-12);
    const v = rand();
    return Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v);
  };

  fs.mkdirSync(dir, { recursive: true });
  const layers = [];
  let inDim = config.inputDim;
  for (let k = 0; k < config.layerDims.length; k++) {
    const outDim = config.layerDims[k];
    const scale = 1 / Math.sqrt(inDim);
    const weights = Float32Array.from({ length: inDim * outDim }, () => gaussian() * scale);
    const file = `layer${String(k + 1).padStart(2, "0")}.npy`;
    fs.writeFileSync(path.join(dir, file), encodeNpy(weights, [inDim, outDim], "<f4"));
    layers.push({ weights: file, activation: "tanh" });
    inDim = outDim;
  }

  let ctcHead = null;
  if (config.vocabSize !== undefined) {
    const outDim = config.vocabSize + 1;
    const weights = Float32Array.from({ length: inDim * outDim },
      () => gaussian() / Math.sqrt(inDim));
    fs.writeFileSync(path.join(dir, "ctc_head.npy"), encodeNpy(weights, [inDim, outDim], "<f4"));
    ctcHead = { weights: "ctc_head.npy", vocab_size: config.vocabSize };
  }

  const config_json = {
    name: config.name,
    input_dim: config.inputDim,
    layers,
    ctc_head: ctcHead,
  };
  fs.writeFileSync(path.join(dir, "model.json"), JSON.stringify(config_json, null, 2) + "\n");
}
