"""Perceptual spectrogram: framed filterbank energy with masking spread
and loudness mapping.

The per-sample energies from the cochlear stage are averaged over frames
at a fixed rate (default 85 Hz), blended with the resonator side path in
the lowest bins, spread across neighboring bins by a masking kernel, and
mapped to dB. Frame boundaries use integer arithmetic,

    bounds[k] = (k * sample_rate) // frame_rate

so each frame covers a contiguous, exactly reproducible sample range.

The masking spread replaces each bin with the loudest masked
contribution from any bin:

    out[i] = max_j in[j] * falloff(|i - j|),   falloff(d) = 2 / (1 + exp(s * d))

falloff(0) = 1, so a bin never loses energy to the spread, and larger
strengths s localize masking more tightly.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

from .audio_io import AudioBuffer, PIPELINE_RATE
from .cochlea import (
    ChannelEnergies,
    FilterbankConfig,
    ResonatorParams,
    default_filterbank,
    default_resonator,
    framed_energies,
    resonator_process,
)
from .errors import (
    CorruptHeaderError,
    InvalidInputError,
    InvalidRateError,
    UnsupportedFormatError,
)

DEFAULT_FRAME_RATE = 85
DEFAULT_SPREAD_STRENGTH = 1.2
DEFAULT_RESONATOR_WEIGHT = 0.1
DEFAULT_RESONATOR_BINS = 8

_LOUDNESS_BIAS = 1e-9
_SPREAD_CHUNK_FRAMES = 256

_MAGIC = b"PSG1"
_HEADER = struct.Struct("<4sIIf")


@dataclass(frozen=True, eq=False)
class PerceptualSpectrogram:
    """Loudness frames, time-major: shape (n_frames, n_bins)."""

    frames: np.ndarray
    frame_rate: int

    def __post_init__(self) -> None:
        frames = np.asarray(self.frames, dtype=float)
        if frames.ndim != 2:
            raise InvalidInputError(f"frames must be 2-D, got {frames.ndim}-D")
        if not np.all(np.isfinite(frames)):
            raise InvalidInputError("frames must be finite")
        if self.frame_rate <= 0:
            raise InvalidRateError(f"frame rate must be positive, got {self.frame_rate}")
        object.__setattr__(self, "frames", frames)

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def n_bins(self) -> int:
        return self.frames.shape[1]


@dataclass(frozen=True, eq=False)
class LoudnessParams:
    """Per-bin mapping from energy to dB-like loudness."""

    multipliers: np.ndarray
    bias: float = _LOUDNESS_BIAS

    def __post_init__(self) -> None:
        multipliers = np.asarray(self.multipliers, dtype=float)
        if multipliers.ndim != 1 or multipliers.size == 0:
            raise InvalidInputError("multipliers must be a non-empty 1-D array")
        if self.bias <= 0:
            raise InvalidInputError("bias must be positive")
        object.__setattr__(self, "multipliers", multipliers)

    def floor(self) -> np.ndarray:
        """Loudness of a silent frame (energy exactly zero)."""
        return self.multipliers * 10.0 * np.log10(self.bias)


def default_loudness(n_bins: int = 128) -> LoudnessParams:
    return LoudnessParams(multipliers=np.ones(n_bins))


@dataclass(frozen=True, eq=False)
class PipelineConfig:
    """Everything needed to turn one 48 kHz channel into a spectrogram."""

    filterbank: FilterbankConfig = field(default_factory=default_filterbank)
    resonator: ResonatorParams | None = field(default_factory=default_resonator)
    resonator_weight: float = DEFAULT_RESONATOR_WEIGHT
    resonator_bins: int = DEFAULT_RESONATOR_BINS
    frame_rate: int = DEFAULT_FRAME_RATE
    spread_strength: float = DEFAULT_SPREAD_STRENGTH
    loudness: LoudnessParams | None = None

    def __post_init__(self) -> None:
        if self.frame_rate <= 0:
            raise InvalidRateError(f"frame rate must be positive, got {self.frame_rate}")
        if self.frame_rate > PIPELINE_RATE:
            raise InvalidRateError("frame rate cannot exceed the sample rate")
        if self.spread_strength <= 0:
            raise InvalidInputError("spread strength must be positive")
        if not (0 <= self.resonator_bins <= self.filterbank.n_bins):
            raise InvalidInputError("resonator bin count out of range")
        if self.loudness is None:
            object.__setattr__(self, "loudness", default_loudness(self.filterbank.n_bins))
        if self.loudness.multipliers.size != self.filterbank.n_bins:
            raise InvalidInputError("loudness multipliers must match the bin count")


def default_pipeline() -> PipelineConfig:
    return PipelineConfig()


def frame_bounds(n_samples: int, sample_rate: int, frame_rate: int) -> np.ndarray:
    """Sample indices delimiting whole frames; length n_frames + 1."""
    if sample_rate <= 0 or frame_rate <= 0:
        raise InvalidRateError("rates must be positive")
    if frame_rate > sample_rate:
        raise InvalidRateError("frame rate cannot exceed the sample rate")
    n_frames = (n_samples * frame_rate) // sample_rate
    ks = np.arange(n_frames + 1, dtype=np.int64)
    return (ks * sample_rate) // frame_rate


def subsample_to_frames(energies: ChannelEnergies, frame_rate: int = DEFAULT_FRAME_RATE) -> np.ndarray:
    """Average per-sample energies over frames at the given rate.

    Trailing samples short of a whole frame are dropped. Returns a
    (n_frames, n_bins) matrix; zero rows if the input is shorter than
    one frame.
    """
    bounds = frame_bounds(energies.energies.shape[0], energies.sample_rate, frame_rate)
    n_frames = len(bounds) - 1
    n_bins = energies.energies.shape[1]
    if n_frames == 0:
        return np.empty((0, n_bins))
    # clip trailing samples so reduceat's final segment ends at the last bound
    covered = energies.energies[: bounds[-1]]
    sums = np.add.reduceat(covered, bounds[:-1], axis=0)
    widths = np.diff(bounds).astype(float)
    return sums / widths[:, None]


def spread_energy(frames, strength: float = DEFAULT_SPREAD_STRENGTH) -> np.ndarray:
    """Apply the masking spread to one frame or a matrix of frames."""
    if strength <= 0:
        raise InvalidInputError("spread strength must be positive")
    frames = np.asarray(frames, dtype=float)
    single = frames.ndim == 1
    mat = frames[None, :] if single else frames
    if mat.ndim != 2:
        raise InvalidInputError(f"expected 1-D or 2-D input, got {frames.ndim}-D")
    if np.any(mat < 0):
        raise InvalidInputError("energies must be non-negative")
    n_bins = mat.shape[1]
    distance = np.abs(np.arange(n_bins)[:, None] - np.arange(n_bins)[None, :])
    with np.errstate(over="ignore"):
        kernel = 2.0 / (1.0 + np.exp(strength * distance))
    out = np.empty_like(mat)
    for lo in range(0, mat.shape[0], _SPREAD_CHUNK_FRAMES):
        block = mat[lo : lo + _SPREAD_CHUNK_FRAMES]
        out[lo : lo + _SPREAD_CHUNK_FRAMES] = np.max(
            block[:, None, :] * kernel[None, :, :], axis=2
        )
    return out[0] if single else out


def loudness_db(frames, params: LoudnessParams | None = None) -> np.ndarray:
    """Map spread energies to per-bin loudness in dB.

    out[i] = multipliers[i] * 10 * log10(energy[i] + bias); the bias
    keeps silence finite at the loudness floor.
    """
    frames = np.asarray(frames, dtype=float)
    if params is None:
        params = default_loudness(frames.shape[-1])
    if frames.shape[-1] != params.multipliers.size:
        raise InvalidInputError("frame width must match the multiplier count")
    if np.any(frames < 0):
        raise InvalidInputError("energies must be non-negative")
    return params.multipliers * 10.0 * np.log10(frames + params.bias)


def resonator_aux_energy(audio: AudioBuffer, config: PipelineConfig) -> np.ndarray:
    """Low-bin correction from the resonator, shape (resonator_bins, n_samples).

    The displacement is converted to squared restoring force (stiffness
    times displacement, squared), which shares the filterbank's energy
    scale, then weighted and integrated per target bin. Each bin applies
    its smoother once per filter stage plus once for the energy
    integrator, so the correction attacks no faster than the path it
    augments; every pass has unit DC gain, leaving the steady-state
    weight unchanged.
    """
    if config.resonator is None:
        raise InvalidInputError("pipeline has no resonator")
    force_sq = config.resonator.stiffness ** 2 * resonator_process(audio, config.resonator)
    scaled = config.resonator_weight * force_sq
    passes = config.filterbank.order + 1
    out = np.empty((config.resonator_bins, scaled.size))
    for b in range(config.resonator_bins):
        c = config.filterbank.coefficients[b]
        smoothed = scaled
        for _ in range(passes):
            smoothed = lfilter([1.0 - c], [1.0, -c], smoothed)
        out[b] = smoothed
    return out


def compute_spectrogram(audio: AudioBuffer, config: PipelineConfig | None = None) -> PerceptualSpectrogram:
    """Full pipeline for one 48 kHz channel.

    Filterbank energies are averaged per frame directly (the per-sample
    matrix is never built), the resonator response is blended into the
    lowest bins, then masking spread and loudness mapping run on the
    framed data.
    """
    if config is None:
        config = default_pipeline()
    bounds = frame_bounds(audio.n_samples, audio.sample_rate, config.frame_rate)
    n_frames = len(bounds) - 1
    if n_frames == 0:
        return PerceptualSpectrogram(
            frames=np.empty((0, config.filterbank.n_bins)), frame_rate=config.frame_rate
        )
    frames = framed_energies(audio, config.filterbank, bounds)
    if config.resonator is not None and config.resonator_bins > 0:
        aux = resonator_aux_energy(audio, config)
        widths = np.diff(bounds)
        for b in range(config.resonator_bins):
            frames[:, b] += np.add.reduceat(aux[b, : bounds[-1]], bounds[:-1]) / widths
    loud = loudness_db(spread_energy(frames, config.spread_strength), config.loudness)
    return PerceptualSpectrogram(frames=loud, frame_rate=config.frame_rate)


def write_spectrogram(path, spec: PerceptualSpectrogram) -> None:
    """Binary export: 16-byte header then row-major float32 frames.

    Header layout, little-endian: magic "PSG1", u32 n_frames, u32
    n_bins, f32 frame_rate.
    """
    header = _HEADER.pack(_MAGIC, spec.n_frames, spec.n_bins, float(spec.frame_rate))
    payload = np.ascontiguousarray(spec.frames, dtype=np.float32).tobytes()
    Path(path).write_bytes(header + payload)


def read_spectrogram(path) -> PerceptualSpectrogram:
    """Read a binary spectrogram written by write_spectrogram."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise CorruptHeaderError(f"{path}: truncated header")
    magic, n_frames, n_bins, frame_rate = _HEADER.unpack_from(raw)
    if magic != _MAGIC:
        raise UnsupportedFormatError(f"{path}: not a spectrogram file")
    expected = _HEADER.size + 4 * n_frames * n_bins
    if len(raw) != expected:
        raise CorruptHeaderError(f"{path}: expected {expected} bytes, found {len(raw)}")
    frames = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size).astype(float)
    frames = frames.reshape(n_frames, n_bins)
    return PerceptualSpectrogram(frames=frames, frame_rate=int(round(frame_rate)))


def write_spectrogram_csv(path, spec: PerceptualSpectrogram) -> None:
    """CSV export: header bin_0..bin_{n-1}, one row per frame."""
    header = ",".join(f"bin_{i}" for i in range(spec.n_bins))
    np.savetxt(path, spec.frames, delimiter=",", header=header, comments="", fmt="%.9g")
