/**
 * Frozen encoder stacks loaded from on-disk checkpoints.
 *
 * A checkpoint is a directory with a `model.json` config and one weight NPY
 * per layer. Layers are dense (optionally tanh-activated) transforms applied
 * frame-wise; an optional CTC head maps the final layer to log-posteriors
 * over the label vocabulary plus blank.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { decodeNpy } from "./npy.js";

export class ModelLoadError extends Error {}

interface LayerSpec {
  weights: string;
  bias?: string;
  activation?: "tanh" | "linear";
}

interface CheckpointConfig {
  name: string;
  input_dim: number;
  layers: LayerSpec[];
  ctc_head?: { weights: string; bias?: string; vocab_size: number } | null;
}

interface DenseLayer {
  weights: Float32Array; // inDim x outDim, row-major
  bias: Float32Array;
  inDim: number;
  outDim: number;
  activation: "tanh" | "linear";
}

export class EncoderStack {
  readonly name: string;
  readonly inputDim: number;
  private readonly layers: DenseLayer[];
  private readonly head: DenseLayer | null;
  readonly vocabSize: number | null;

  private constructor(name: string, inputDim: number, layers: DenseLayer[],
                      head: DenseLayer | null, vocabSize: number | null) {
    this.name = name;
    this.inputDim = inputDim;
    this.layers = layers;
    this.head = head;
    this.vocabSize = vocabSize;
  }

  get layerCount(): number {
    return this.layers.length;
  }

  get hasCtcHead(): boolean {
    return this.head !== null;
  }

  static load(checkpointDir: string): EncoderStack {
    const configPath = path.join(checkpointDir, "model.json");
    let config: CheckpointConfig;
    try {
      config = JSON.parse(fs.readFileSync(configPath, "utf-8"));
    } catch (err) {
      throw new ModelLoadError(`cannot load checkpoint config ${configPath}: ${err}`);
    }
    if (!config.name || !Number.isInteger(config.input_dim) || !Array.isArray(config.layers)
        || config.layers.length === 0) {
      throw new ModelLoadError(`${configPath}: need name, input_dim and a non-empty layer list`);
    }

    const loadDense = (spec: LayerSpec, inDim: number, what: string): DenseLayer => {
      let decoded;
      try {
        decoded = decodeNpy(fs.readFileSync(path.join(checkpointDir, spec.weights)));
      } catch (err) {
        throw new ModelLoadError(`cannot load ${what} weights ${spec.weights}: ${err}`);
      }
      if (decoded.shape.length !== 2 || decoded.shape[0] !== inDim) {
        throw new ModelLoadError(
          `${what} weights ${spec.weights}: expected ${inDim} input rows, got shape [${decoded.shape}]`);
      }
      const outDim = decoded.shape[1];
      let bias = new Float32Array(outDim);
      if (spec.bias) {
        let b;
        try {
          b = decodeNpy(fs.readFileSync(path.join(checkpointDir, spec.bias)));
        } catch (err) {
          throw new ModelLoadError(`cannot load ${what} bias ${spec.bias}: ${err}`);
        }
        if (b.data.length !== outDim) {
          throw new ModelLoadError(`${what} bias ${spec.bias}: ${b.data.length} values for ${outDim} units`);
        }
        bias = Float32Array.from(b.data);
      }
      return {
        weights: Float32Array.from(decoded.data),
        bias,
        inDim,
        outDim,
        activation: spec.activation === "linear" ? "linear" : "tanh",
      };
    };

    const layers: DenseLayer[] = [];
    let dim = config.input_dim;
    config.layers.forEach((spec, i) => {
      const layer = loadDense(spec, dim, `layer ${i + 1}`);
      layers.push(layer);
      dim = layer.outDim;
    });

    let head: DenseLayer | null = null;
    let vocabSize: number | null = null;
    if (config.ctc_head) {
      if (!Number.isInteger(config.ctc_head.vocab_size) || config.ctc_head.vocab_size < 1) {
        throw new ModelLoadError("ctc_head needs a positive vocab_size");
      }
      head = loadDense(config.ctc_head, dim, "ctc head");
      vocabSize = config.ctc_head.vocab_size;
      if (head.outDim !== vocabSize + 1) {
        throw new ModelLoadError(
          `ctc head emits ${head.outDim} units, vocabulary of ${vocabSize} needs ${vocabSize + 1} (labels + blank)`);
      }
      head.activation = "linear";
    }

    return new EncoderStack(config.name, config.input_dim, layers, head, vocabSize);
  }

  /** Per-layer frame activations: result[k] is layer k+1's T x D_k matrix. */
  forward(frames: Float32Array[]): Float32Array[][] {
    const perLayer: Float32Array[][] = this.layers.map(() => []);
    for (const frame of frames) {
      if (frame.length !== this.inputDim) {
        throw new ModelLoadError(`frame has ${frame.length} samples, model expects ${this.inputDim}`);
      }
      let x = frame;
      this.layers.forEach((layer, k) => {
        x = applyDense(layer, x);
        perLayer[k].push(x);
      });
    }
    return perLayer;
  }

  /** T x (V+1) natural-log posterior rows from the CTC head (log-softmax). */
  posteriors(finalLayer: Float32Array[]): Float32Array[] {
    if (!this.head) {
      throw new ModelLoadError("model has no CTC head");
    }
    return finalLayer.map((x) => logSoftmax(applyDense(this.head!, x)));
  }
}

function applyDense(layer: DenseLayer, x: Float32Array): Float32Array {
  const out = new Float32Array(layer.outDim);
  for (let j = 0; j < layer.outDim; j++) {
    let acc = layer.bias[j];
    for (let i = 0; i < layer.inDim; i++) {
      acc += x[i] * layer.weights[i * layer.outDim + j];
    }
    out[j] = layer.activation === "tanh" ? Math.tanh(acc) : acc;
  }
  return out;
}

function logSoftmax(logits: Float32Array): Float32Array {
  let max = -Infinity;
  for (const v of logits) max = Math.max(max, v);
  let sum = 0;
  for (const v of logits) sum += Math.exp(v - max);
  const logZ = max + Math.log(sum);
  return Float32Array.from(logits, (v) => v - logZ);
}
