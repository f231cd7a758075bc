import { execFile } from "node:child_process";
import { promisify } from "node:util";
import { errorFromProcess } from "./errors.js";

const execFileAsync = promisify(execFile);

export interface ClientOptions {
  /** Engine command line, e.g. ["python3", "-m", "earsim.cli"]. Default ["earsim"]. */
  command?: string[];
}

export interface CompareOptions {
  /** Warp cost exponent in (0, 1]. */
  exponent?: number;
  /** Fraction of the loudness gap removed before comparing, in [0, 1]. */
  normalization?: number;
  nsimWindow?: { frames: number; bins: number };
}

export interface CompareResult {
  perChannelSimilarity: number[];
  perChannelDistance: number[];
  aggregateDistance: number;
  mos: number;
}

export interface EvaluateOptions extends CompareOptions {
  jobs?: number;
  /** Also write per-pair scores to this CSV path. */
  perPairOut?: string;
  /** Also render a metric-vs-human scatter plot to this image path. */
  figureOut?: string;
}

export interface ExcludedPair {
  reference: string;
  degraded: string;
  reason: string;
}

export interface EvaluateReport {
  n: number;
  plcc: number | null;
  srcc: number | null;
  krcc: number | null;
  /** Why a coefficient is null, keyed by coefficient name. */
  notes: Record<string, string>;
  excluded: ExcludedPair[];
}

export interface SpectrogramOptions {
  channel?: number;
  csvOut?: string;
  figureOut?: string;
}

export interface SpectrogramInfo {
  out: string;
  nFrames: number;
  nBins: number;
  frameRate: number;
}

export interface BenchOptions {
  repetitions?: number;
}

export interface BenchReport {
  durationS: number;
  repetitions: number;
  meanS: number;
  stddevS: number;
  peakMemoryMib: number;
}

function compareArgs(options: CompareOptions): string[] {
  const args: string[] = [];
  if (options.exponent !== undefined) args.push("--exponent", String(options.exponent));
  if (options.normalization !== undefined) {
    args.push("--normalization", String(options.normalization));
  }
  if (options.nsimWindow !== undefined) {
    args.push("--nsim-window", `${options.nsimWindow.frames}x${options.nsimWindow.bins}`);
  }
  return args;
}

export class EarsimClient {
  readonly command: readonly string[];

  constructor(options: ClientOptions = {}) {
    this.command = options.command ?? ["earsim"];
  }

  private async runJson(args: string[]): Promise<Record<string, unknown>> {
    const [bin, ...prefix] = this.command;
    try {
      const { stdout } = await execFileAsync(bin, [...prefix, ...args, "--format", "json"], {
        maxBuffer: 64 * 1024 * 1024,
      });
      return JSON.parse(stdout);
    } catch (err) {
      throw errorFromProcess(err);
    }
  }

  async compare(
    reference: string,
    degraded: string,
    options: CompareOptions = {},
  ): Promise<CompareResult> {
    const raw = await this.runJson(["compare", reference, degraded, ...compareArgs(options)]);
    return {
      perChannelSimilarity: raw.per_channel_similarity as number[],
      perChannelDistance: raw.per_channel_distance as number[],
      aggregateDistance: raw.aggregate_distance as number,
      mos: raw.mos as number,
    };
  }

  async evaluate(manifest: string, options: EvaluateOptions = {}): Promise<EvaluateReport> {
    const args = ["evaluate", manifest, ...compareArgs(options)];
    if (options.jobs !== undefined) args.push("--jobs", String(options.jobs));
    if (options.perPairOut !== undefined) args.push("--per-pair-out", options.perPairOut);
    if (options.figureOut !== undefined) args.push("--figure-out", options.figureOut);
    const raw = await this.runJson(args);
    return {
      n: raw.n as number,
      plcc: raw.plcc as number | null,
      srcc: raw.srcc as number | null,
      krcc: raw.krcc as number | null,
      notes: raw.notes as Record<string, string>,
      excluded: raw.excluded as ExcludedPair[],
    };
  }

  async spectrogram(
    input: string,
    out: string,
    options: SpectrogramOptions = {},
  ): Promise<SpectrogramInfo> {
    const args = ["spectrogram", input, out];
    if (options.channel !== undefined) args.push("--channel", String(options.channel));
    if (options.csvOut !== undefined) args.push("--csv-out", options.csvOut);
    if (options.figureOut !== undefined) args.push("--figure-out", options.figureOut);
    const raw = await this.runJson(args);
    return {
      out: raw.out as string,
      nFrames: raw.n_frames as number,
      nBins: raw.n_bins as number,
      frameRate: raw.frame_rate as number,
    };
  }

  async bench(input: string, options: BenchOptions = {}): Promise<BenchReport> {
    const args = ["bench", input];
    if (options.repetitions !== undefined) {
      args.push("--repetitions", String(options.repetitions));
    }
    const raw = await this.runJson(args);
    return {
      durationS: raw.duration_s as number,
      repetitions: raw.repetitions as number,
      meanS: raw.mean_s as number,
      stddevS: raw.stddev_s as number,
      peakMemoryMib: raw.peak_memory_mib as number,
    };
  }
}

const defaultClient = new EarsimClient();

export function compare(
  reference: string,
  degraded: string,
  options?: CompareOptions,
): Promise<CompareResult> {
  return defaultClient.compare(reference, degraded, options);
}

export function evaluate(manifest: string, options?: EvaluateOptions): Promise<EvaluateReport> {
  return defaultClient.evaluate(manifest, options);
}

export function spectrogram(
  input: string,
  out: string,
  options?: SpectrogramOptions,
): Promise<SpectrogramInfo> {
  return defaultClient.spectrogram(input, out, options);
}

export function bench(input: string, options?: BenchOptions): Promise<BenchReport> {
  return defaultClient.bench(input, options);
}
