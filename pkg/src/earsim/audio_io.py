"""WAV ingestion and sample rate conversion.

The analysis pipeline runs at a fixed 48 kHz; this module gets audio
there. Decoding is a deliberately strict RIFF/WAVE parser (PCM 16/24/32
and float32 only) so that anything unusual fails loudly instead of being
guessed at. Resampling is polyphase windowed-sinc interpolation.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.signal import firwin, resample_poly

from .errors import (
    CorruptHeaderError,
    InvalidInputError,
    InvalidRateError,
    UnsupportedFormatError,
)

PIPELINE_RATE = 48000

_WAVE_FORMAT_PCM = 0x0001
_WAVE_FORMAT_IEEE_FLOAT = 0x0003
_WAVE_FORMAT_EXTENSIBLE = 0xFFFE

_MAX_CHANNELS = 8

# Resampler design: Kaiser-windowed sinc, beta 10, 64 taps per polyphase
# branch. Transparent well past the needs of a similarity metric.
_KAISER_BETA = 10.0
_TAPS_PER_PHASE = 64


@dataclass(frozen=True, eq=False)
class AudioBuffer:
    """Multi-channel waveform with its sample rate.

    ``samples`` is a float64 array of shape (n_channels, n_samples) with
    nominal range [-1, 1]. All samples must be finite and the rate
    positive; construction validates both.
    """

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim == 1:
            samples = samples[np.newaxis, :]
        if samples.ndim != 2:
            raise InvalidInputError(
                f"samples must be 1-D or 2-D (channels x samples), got ndim={samples.ndim}"
            )
        rate = int(self.sample_rate)
        if rate <= 0:
            raise InvalidRateError(f"sample rate must be positive, got {self.sample_rate}")
        if samples.size and not np.all(np.isfinite(samples)):
            raise InvalidInputError("samples contain NaN or Inf")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", rate)

    @property
    def n_channels(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration(self) -> float:
        """Length in seconds."""
        return self.samples.shape[1] / self.sample_rate

    def channel(self, index: int) -> np.ndarray:
        return self.samples[index]

    def mono(self, index: int = 0) -> "AudioBuffer":
        """Single-channel view of one channel."""
        return AudioBuffer(self.samples[index : index + 1], self.sample_rate)


def _parse_fmt_chunk(body: bytes, path: Path) -> tuple[int, int, int, int, int]:
    if len(body) < 16:
        raise CorruptHeaderError(f"{path}: fmt chunk truncated ({len(body)} bytes)")
    tag, channels, rate, _byte_rate, block_align, bits = struct.unpack_from("<HHIIHH", body, 0)
    if tag == _WAVE_FORMAT_EXTENSIBLE:
        # actual format lives in the first two bytes of the SubFormat GUID
        if len(body) < 40:
            raise CorruptHeaderError(f"{path}: extensible fmt chunk truncated")
        (tag,) = struct.unpack_from("<H", body, 24)
    return tag, channels, rate, block_align, bits


def _decode_samples(data: bytes, tag: int, bits: int, path: Path) -> np.ndarray:
    if tag == _WAVE_FORMAT_PCM:
        if bits == 16:
            return np.frombuffer(data, dtype="<i2").astype(np.float64) / 2**15
        if bits == 24:
            triples = np.frombuffer(data, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
            value = triples[:, 0] | (triples[:, 1] << 8) | (triples[:, 2] << 16)
            value = (value ^ 0x800000) - 0x800000  # sign extend
            return value.astype(np.float64) / 2**23
        if bits == 32:
            return np.frombuffer(data, dtype="<i4").astype(np.float64) / 2**31
        raise UnsupportedFormatError(f"{path}: {bits}-bit PCM is not supported")
    if tag == _WAVE_FORMAT_IEEE_FLOAT:
        if bits == 32:
            return np.frombuffer(data, dtype="<f4").astype(np.float64)
        raise UnsupportedFormatError(f"{path}: {bits}-bit float is not supported")
    raise UnsupportedFormatError(f"{path}: unsupported WAV format tag 0x{tag:04x}")


def load_audio(path: str | Path) -> AudioBuffer:
    """Decode a RIFF/WAVE file into a normalized AudioBuffer.

    Integer PCM is scaled to [-1, 1] by the format's maximum magnitude;
    float32 samples are taken as stored. Channel count and sample rate
    come from the header.
    """
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < 12 or raw[:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise UnsupportedFormatError(f"{path}: not a RIFF/WAVE file")

    fmt_body: bytes | None = None
    data_body: bytes | None = None
    pos = 12
    while pos + 8 <= len(raw):
        chunk_id = raw[pos : pos + 4]
        (declared,) = struct.unpack_from("<I", raw, pos + 4)
        body = raw[pos + 8 : pos + 8 + declared]
        if chunk_id == b"fmt ":
            if len(body) < declared:
                raise CorruptHeaderError(f"{path}: fmt chunk truncated")
            fmt_body = body
        elif chunk_id == b"data":
            if len(body) < declared:
                raise CorruptHeaderError(
                    f"{path}: data chunk declares {declared} bytes, only {len(body)} present"
                )
            data_body = body
        pos += 8 + declared + (declared & 1)  # chunks are word-aligned

    if fmt_body is None:
        raise CorruptHeaderError(f"{path}: missing fmt chunk")
    if data_body is None:
        raise CorruptHeaderError(f"{path}: missing data chunk")

    tag, channels, rate, block_align, bits = _parse_fmt_chunk(fmt_body, path)
    if channels < 1 or channels > _MAX_CHANNELS:
        raise UnsupportedFormatError(f"{path}: {channels} channels (1-{_MAX_CHANNELS} supported)")
    if rate <= 0:
        raise CorruptHeaderError(f"{path}: sample rate {rate}")
    bytes_per_frame = channels * (bits // 8)
    if block_align not in (0, bytes_per_frame):
        raise CorruptHeaderError(
            f"{path}: block alignment {block_align} disagrees with {bits}-bit x{channels}"
        )
    if bytes_per_frame == 0 or len(data_body) % bytes_per_frame != 0:
        raise CorruptHeaderError(f"{path}: payload is not a whole number of frames")

    flat = _decode_samples(data_body, tag, bits, path)
    samples = flat.reshape(-1, channels).T
    if samples.size and not np.all(np.isfinite(samples)):
        raise CorruptHeaderError(f"{path}: payload contains non-finite samples")
    return AudioBuffer(samples, rate)


_ENCODERS = {
    "pcm16": ("<i2", 2**15 - 1, _WAVE_FORMAT_PCM, 16),
    "pcm24": (None, 2**23 - 1, _WAVE_FORMAT_PCM, 24),
    "pcm32": ("<i4", 2**31 - 1, _WAVE_FORMAT_PCM, 32),
    "float32": ("<f4", None, _WAVE_FORMAT_IEEE_FLOAT, 32),
}


def write_wav(path: str | Path, buffer: AudioBuffer, encoding: str = "float32") -> None:
    """Write an AudioBuffer as a RIFF/WAVE file (round-trip counterpart of load_audio)."""
    if encoding not in _ENCODERS:
        raise UnsupportedFormatError(f"unknown encoding {encoding!r}")
    dtype, max_value, tag, bits = _ENCODERS[encoding]
    interleaved = buffer.samples.T.reshape(-1)
    if tag == _WAVE_FORMAT_PCM:
        scaled = np.clip(np.round(interleaved * (max_value + 1)), -(max_value + 1), max_value)
        if bits == 24:
            as_int = scaled.astype(np.int32)
            payload = np.zeros((as_int.size, 3), dtype=np.uint8)
            payload[:, 0] = as_int & 0xFF
            payload[:, 1] = (as_int >> 8) & 0xFF
            payload[:, 2] = (as_int >> 16) & 0xFF
            data = payload.tobytes()
        else:
            data = scaled.astype(dtype).tobytes()
    else:
        data = interleaved.astype(dtype).tobytes()

    channels = buffer.n_channels
    block_align = channels * (bits // 8)
    fmt = struct.pack(
        "<HHIIHH", tag, channels, buffer.sample_rate,
        buffer.sample_rate * block_align, block_align, bits,
    )
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt
    body += b"data" + struct.pack("<I", len(data)) + data
    if len(data) & 1:
        body += b"\x00"
    Path(path).write_bytes(b"RIFF" + struct.pack("<I", len(body)) + body)


def _design_filter(up: int, down: int) -> np.ndarray:
    max_rate = max(up, down)
    half_len = (_TAPS_PER_PHASE // 2) * max_rate
    # resample_poly itself scales the window by `up` to offset zero-stuffing
    return firwin(2 * half_len + 1, 1.0 / max_rate, window=("kaiser", _KAISER_BETA))


def resample(buffer: AudioBuffer, target_rate: int) -> AudioBuffer:
    """Band-limited resampling to target_rate.

    Resampling at the source rate is an identity. Output length is
    round(n_samples * target_rate / source_rate).
    """
    target_rate = int(target_rate)
    if target_rate <= 0:
        raise InvalidRateError(f"target rate must be positive, got {target_rate}")
    if target_rate == buffer.sample_rate:
        return AudioBuffer(buffer.samples.copy(), target_rate)

    ratio = Fraction(target_rate, buffer.sample_rate)
    up, down = ratio.numerator, ratio.denominator
    out_len = round(buffer.n_samples * ratio)
    if buffer.n_samples == 0:
        return AudioBuffer(np.zeros((buffer.n_channels, 0)), target_rate)

    h = _design_filter(up, down)
    resampled = resample_poly(buffer.samples, up, down, axis=1, window=h)
    return AudioBuffer(resampled[:, :out_len], target_rate)
