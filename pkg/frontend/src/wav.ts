import { writeFileSync } from "node:fs";
import { InvalidInputError } from "./errors.js";

/**
 * Serialize channels as a 32-bit float RIFF/WAVE file.
 *
 * Samples are validated before anything reaches the engine: every value
 * must be finite and all channels the same length. Values outside [-1, 1]
 * are kept as-is; float WAV has no hard range.
 */
export function writeWavFloat32(
  path: string,
  channels: ArrayLike<number>[],
  sampleRate: number,
): void {
  if (!Number.isInteger(sampleRate) || sampleRate <= 0) {
    throw new InvalidInputError(
      `sample rate must be a positive integer, got ${sampleRate}`,
      8,
      "InvalidInputError",
    );
  }
  if (channels.length === 0) {
    throw new InvalidInputError("at least one channel is required", 8, "InvalidInputError");
  }
  const frames = channels[0].length;
  for (const channel of channels) {
    if (channel.length !== frames) {
      throw new InvalidInputError(
        `channel lengths differ: ${channel.length} vs ${frames}`,
        8,
        "InvalidInputError",
      );
    }
    for (let i = 0; i < channel.length; i++) {
      if (!Number.isFinite(channel[i])) {
        throw new InvalidInputError(
          `sample ${i} is not finite: ${channel[i]}`,
          8,
          "InvalidInputError",
        );
      }
    }
  }

  const blockAlign = channels.length * 4;
  const dataSize = frames * blockAlign;
  const buffer = new ArrayBuffer(44 + dataSize);
  const view = new DataView(buffer);

  const ascii = (offset: number, text: string) => {
    for (let i = 0; i < text.length; i++) view.setUint8(offset + i, text.charCodeAt(i));
  };

  ascii(0, "RIFF");
  view.setUint32(4, 36 + dataSize, true);
  ascii(8, "WAVE");
  ascii(12, "fmt ");
  view.setUint32(16, 16, true);
  view.setUint16(20, 3, true); // IEEE float
  view.setUint16(22, channels.length, true);
  view.setUint32(24, sampleRate, true);
  view.setUint32(28, sampleRate * blockAlign, true);
  view.setUint16(32, blockAlign, true);
  view.setUint16(34, 32, true);
  ascii(36, "data");
  view.setUint32(40, dataSize, true);

  let offset = 44;
  for (let frame = 0; frame < frames; frame++) {
    for (const channel of channels) {
      view.setFloat32(offset, channel[frame], true);
      offset += 4;
    }
  }

  writeFileSync(path, new Uint8Array(buffer));
}
