/** Typed errors mirroring the engine's stable exit codes. */

export class EarsimError extends Error {
  constructor(
    message: string,
    readonly exitCode: number,
    readonly errorName: string,
    readonly stderr = "",
  ) {
    super(message);
    this.name = new.target.name;
  }
}

export class UsageError extends EarsimError {}
export class FileNotFoundError extends EarsimError {}
export class UnsupportedFormatError extends EarsimError {}
export class CorruptHeaderError extends EarsimError {}
export class InvalidRateError extends EarsimError {}
export class WrongRateError extends EarsimError {}
export class InvalidInputError extends EarsimError {}
export class InvalidRangeError extends EarsimError {}
export class UnstableError extends EarsimError {}
export class BinMismatchError extends EarsimError {}
export class EmptyInputError extends EarsimError {}
export class InvalidPathError extends EarsimError {}
export class ChannelMismatchError extends EarsimError {}
export class TooShortError extends EarsimError {}
export class OutOfRangeError extends EarsimError {}
export class DegenerateInputError extends EarsimError {}
export class EmptyManifestError extends EarsimError {}
export class AllPairsFailedError extends EarsimError {}
export class ManifestParseError extends EarsimError {}
export class InternalError extends EarsimError {}

type ErrorCtor = new (
  message: string,
  exitCode: number,
  errorName: string,
  stderr?: string,
) => EarsimError;

const byExitCode: Record<number, ErrorCtor> = {
  2: UsageError,
  3: FileNotFoundError,
  4: UnsupportedFormatError,
  5: CorruptHeaderError,
  6: InvalidRateError,
  7: WrongRateError,
  8: InvalidInputError,
  9: InvalidRangeError,
  10: UnstableError,
  11: BinMismatchError,
  12: EmptyInputError,
  13: InvalidPathError,
  14: ChannelMismatchError,
  15: TooShortError,
  16: OutOfRangeError,
  17: DegenerateInputError,
  18: EmptyManifestError,
  19: AllPairsFailedError,
  20: ManifestParseError,
  70: InternalError,
};

// one line per failure: "earsim: error: <ErrorName>: <message>"
const diagnostic = /^earsim: error: (\w+): ([\s\S]*)$/m;

/** Convert a failed engine process into the matching typed error. */
export function errorFromProcess(err: unknown): Error {
  const proc = err as { code?: number | string; stderr?: string; message?: string };
  if (typeof proc.code !== "number") {
    // spawn-level failure (ENOENT and friends), not an engine diagnostic
    return err instanceof Error ? err : new Error(String(err));
  }
  const stderr = proc.stderr ?? "";
  const match = diagnostic.exec(stderr);
  const errorName = match ? match[1] : "";
  const message = match
    ? match[2].trim()
    : stderr.trim() || `engine exited with code ${proc.code}`;
  const Ctor = byExitCode[proc.code] ?? EarsimError;
  return new Ctor(message, proc.code, errorName, stderr);
}
