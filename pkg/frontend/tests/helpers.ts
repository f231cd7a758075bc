import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export const RATE = 48000;

export function tempDir(prefix: string): string {
  return mkdtempSync(join(tmpdir(), prefix));
}

/** Deterministic PRNG so failures reproduce. */
export function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function tone(freq: number, samples: number, amplitude: number): Float64Array {
  const out = new Float64Array(samples);
  const step = (2 * Math.PI * freq) / RATE;
  for (let i = 0; i < samples; i++) out[i] = amplitude * Math.sin(step * i);
  return out;
}

export function noise(rng: () => number, samples: number, amplitude: number): Float64Array {
  const out = new Float64Array(samples);
  for (let i = 0; i < samples; i++) out[i] = amplitude * (2 * rng() - 1);
  return out;
}

export function mixed(base: ArrayLike<number>, extra: ArrayLike<number>): Float64Array {
  const out = new Float64Array(base.length);
  for (let i = 0; i < base.length; i++) out[i] = base[i] + extra[i];
  return out;
}

export function hardClipped(base: ArrayLike<number>, threshold: number): Float64Array {
  const out = new Float64Array(base.length);
  for (let i = 0; i < base.length; i++) {
    out[i] = Math.min(threshold, Math.max(-threshold, base[i]));
  }
  return out;
}
