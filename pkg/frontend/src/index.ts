export {
  EarsimClient,
  compare,
  evaluate,
  spectrogram,
  bench,
} from "./client.js";
export type {
  ClientOptions,
  CompareOptions,
  CompareResult,
  EvaluateOptions,
  EvaluateReport,
  ExcludedPair,
  SpectrogramOptions,
  SpectrogramInfo,
  BenchOptions,
  BenchReport,
} from "./client.js";
export { writeWavFloat32 } from "./wav.js";
export { writeManifest } from "./manifest.js";
export type { ManifestRow } from "./manifest.js";
export * from "./errors.js";
