"""Cochlear front end: ERB-spaced complex gammatone filterbank plus a
nonlinear resonator side path.

The filterbank models the frequency analysis of the cochlea. Center
frequencies sit at equal steps on the ERB-rate scale of Glasberg & Moore
(1990),

    ERBs(f) = 21.4 * log10(1 + 0.00437 * f)

and each bin's bandwidth tracks the local grid density (half the span
between its neighbors' centers). A bin is realized as a cascade of
``order`` identical one-pole complex resonators; the pole radius is
chosen so the cascade's magnitude response is 3 dB down at half the
bin's bandwidth. Per-sample energy (squared magnitude of the complex
output) is smoothed by a one-pole integrator whose coefficient follows
the empirical bandwidth law

    C = 0.9996 ** (bw_hz * 0.7323)

The resonator path models the mechanical response of the eardrum: the
input drives a damped spring with cubic stiffness through a short linear
feeding filter, integrated by explicit Euler steps at the audio rate.
Its squared displacement is later blended into the lowest filterbank
bins.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.signal import firwin, lfilter

from .audio_io import AudioBuffer, PIPELINE_RATE
from .errors import (
    InvalidInputError,
    InvalidRangeError,
    UnstableError,
    WrongRateError,
)

_ERB_RATE_SCALE = 21.4
_ERB_RATE_SLOPE = 0.00437

_SMOOTHING_BASE = 0.9996
_SMOOTHING_EXPONENT_PER_HZ = 0.7323

# Resonator defaults: 1 kHz linear resonance with Q ~ 2, per-sample units
# (time measured in samples at 48 kHz, so stiffness = omega^2 with
# omega = 2*pi*1000/48000).
RESONATOR_RESONANCE_HZ = 1000.0
_RESONATOR_Q = 2.0
_RESONATOR_FEED_CUTOFF_HZ = 1500.0
_RESONATOR_TAPS = 32
_DISPLACEMENT_LIMIT = 1e6


def erb_number(freq_hz):
    """Map frequency in Hz to its ERB-rate number (Glasberg & Moore 1990)."""
    return _ERB_RATE_SCALE * np.log10(1.0 + _ERB_RATE_SLOPE * np.asarray(freq_hz, dtype=float))


def erb_number_to_hz(erbs):
    """Inverse of erb_number."""
    return (10.0 ** (np.asarray(erbs, dtype=float) / _ERB_RATE_SCALE) - 1.0) / _ERB_RATE_SLOPE


def erb_center_frequencies(n_bins: int, f_min: float, f_max: float) -> np.ndarray:
    """Center frequencies equally spaced on the ERB-rate scale.

    The first frequency is exactly f_min and the last exactly f_max.
    """
    if n_bins < 2:
        raise InvalidRangeError(f"need at least 2 bins, got {n_bins}")
    if not (0.0 < f_min < f_max):
        raise InvalidRangeError(f"need 0 < f_min < f_max, got [{f_min}, {f_max}]")
    grid = np.linspace(erb_number(f_min), erb_number(f_max), n_bins)
    centers = erb_number_to_hz(grid)
    centers[0] = f_min
    centers[-1] = f_max
    return centers


def adaptive_bandwidths(centers) -> np.ndarray:
    """Per-bin bandwidth from the spacing of neighboring centers.

    Interior bins span half the distance between their two neighbors;
    edge bins use the single available gap.
    """
    centers = np.asarray(centers, dtype=float)
    if centers.ndim != 1 or centers.size < 2 or np.any(np.diff(centers) <= 0):
        raise InvalidInputError("centers must be a strictly increasing sequence of length >= 2")
    bw = np.empty_like(centers)
    bw[1:-1] = (centers[2:] - centers[:-2]) / 2.0
    bw[0] = centers[1] - centers[0]
    bw[-1] = centers[-1] - centers[-2]
    return bw


def integration_coefficient(bw_hz):
    """Energy smoothing coefficient for a bin of the given bandwidth.

    C = 0.9996 ** (bw_hz * 0.7323); wider bins integrate over shorter
    horizons. Returns a value in (0, 1], with C = 1 at zero bandwidth.
    """
    bw = np.asarray(bw_hz, dtype=float)
    if np.any(bw < 0):
        raise InvalidInputError("bandwidth must be non-negative")
    out = _SMOOTHING_BASE ** (bw * _SMOOTHING_EXPONENT_PER_HZ)
    return float(out) if np.isscalar(bw_hz) else out


@dataclass(frozen=True, eq=False)
class FilterbankConfig:
    """Immutable description of the gammatone filterbank."""

    n_bins: int
    order: int
    f_min: float
    f_max: float
    centers: np.ndarray
    bandwidths: np.ndarray
    coefficients: np.ndarray

    def __post_init__(self) -> None:
        centers = np.asarray(self.centers, dtype=float)
        bandwidths = np.asarray(self.bandwidths, dtype=float)
        coefficients = np.asarray(self.coefficients, dtype=float)
        if not (len(centers) == len(bandwidths) == len(coefficients) == self.n_bins):
            raise InvalidInputError("centers, bandwidths, coefficients must all have n_bins entries")
        if self.order < 1:
            raise InvalidInputError(f"filter order must be >= 1, got {self.order}")
        if np.any(np.diff(centers) <= 0):
            raise InvalidInputError("centers must be strictly increasing")
        if centers[0] < self.f_min or centers[-1] > self.f_max:
            raise InvalidInputError("centers must lie within [f_min, f_max]")
        if np.any(bandwidths <= 0):
            raise InvalidInputError("bandwidths must be positive")
        if np.any((coefficients <= 0) | (coefficients > 1)):
            raise InvalidInputError("coefficients must lie in (0, 1]")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "bandwidths", bandwidths)
        object.__setattr__(self, "coefficients", coefficients)


def default_filterbank(
    n_bins: int = 128,
    f_min: float = 20.0,
    f_max: float = 20000.0,
    order: int = 3,
) -> FilterbankConfig:
    """Standard 128-bin, 3rd-order filterbank covering the audible range."""
    centers = erb_center_frequencies(n_bins, f_min, f_max)
    bandwidths = adaptive_bandwidths(centers)
    coefficients = integration_coefficient(bandwidths)
    return FilterbankConfig(
        n_bins=n_bins,
        order=order,
        f_min=f_min,
        f_max=f_max,
        centers=centers,
        bandwidths=bandwidths,
        coefficients=coefficients,
    )


@dataclass(frozen=True, eq=False)
class ChannelEnergies:
    """Smoothed per-sample filterbank energies, time-major."""

    energies: np.ndarray  # shape (n_samples, n_bins), float64, >= 0
    sample_rate: int


def design_poles(config: FilterbankConfig, sample_rate: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-bin complex pole and normalizing gain for the one-pole cascade.

    The pole radius solves for a cascade magnitude response 3 dB down at
    +/- bandwidth/2 from the center; the gain makes the response unity
    at the center frequency.
    """
    alpha = 10.0 ** (-0.3 / config.order)  # per-stage power ratio at the band edge
    phi = np.pi * config.bandwidths / sample_rate
    q = (1.0 - alpha * np.cos(phi)) / (1.0 - alpha)
    radius = q - np.sqrt(q * q - 1.0)
    poles = radius * np.exp(2j * np.pi * config.centers / sample_rate)
    gains = (1.0 - radius) ** config.order
    return poles, gains


@njit(cache=True)
def _bin_energy_series(signal, pole, gain, order, coeff, out):  # pragma: no cover
    states = np.zeros(order, dtype=np.complex128)
    smoothed = 0.0
    for t in range(signal.shape[0]):
        acc = signal[t] + 0.0j
        for k in range(order):
            states[k] = pole * states[k] + acc
            acc = states[k]
        y = gain * acc
        energy = y.real * y.real + y.imag * y.imag
        smoothed = coeff * smoothed + (1.0 - coeff) * energy
        out[t] = smoothed


@njit(cache=True)
def _energies_full(signal, poles, gains, order, coeffs, out):  # pragma: no cover
    scratch = np.empty(signal.shape[0])
    for b in range(poles.shape[0]):
        _bin_energy_series(signal, poles[b], gains[b], order, coeffs[b], scratch)
        for t in range(signal.shape[0]):
            out[t, b] = scratch[t]


@njit(cache=True)
def _energies_framed(signal, poles, gains, order, coeffs, bounds, out):  # pragma: no cover
    n_frames = bounds.shape[0] - 1
    scratch = np.empty(signal.shape[0])
    for b in range(poles.shape[0]):
        _bin_energy_series(signal, poles[b], gains[b], order, coeffs[b], scratch)
        for k in range(n_frames):
            lo = bounds[k]
            hi = bounds[k + 1]
            acc = 0.0
            for t in range(lo, hi):
                acc += scratch[t]
            out[k, b] = acc / (hi - lo)


def _require_mono_48k(audio: AudioBuffer, op: str) -> np.ndarray:
    if audio.sample_rate != PIPELINE_RATE:
        raise WrongRateError(f"{op} requires {PIPELINE_RATE} Hz input, got {audio.sample_rate} Hz")
    if audio.n_channels != 1:
        raise InvalidInputError(f"{op} takes a single channel, got {audio.n_channels}")
    return np.ascontiguousarray(audio.channel(0))


def gammatone_analyze(audio: AudioBuffer, config: FilterbankConfig | None = None) -> ChannelEnergies:
    """Run the filterbank over one 48 kHz channel.

    Returns smoothed per-sample energies, one column per bin. Memory
    grows as n_samples x n_bins; for long signals prefer the framed
    spectrogram pipeline, which never materializes this matrix.
    """
    if config is None:
        config = default_filterbank()
    signal = _require_mono_48k(audio, "gammatone_analyze")
    poles, gains = design_poles(config, PIPELINE_RATE)
    out = np.empty((signal.shape[0], config.n_bins))
    _energies_full(signal, poles, gains, config.order, config.coefficients, out)
    return ChannelEnergies(energies=out, sample_rate=PIPELINE_RATE)


def framed_energies(audio: AudioBuffer, config: FilterbankConfig, bounds: np.ndarray) -> np.ndarray:
    """Filterbank energies averaged over the given frame boundaries.

    Identical arithmetic to gammatone_analyze followed by windowed
    means, fused so the per-sample energy matrix never exists.
    """
    signal = _require_mono_48k(audio, "framed_energies")
    poles, gains = design_poles(config, PIPELINE_RATE)
    out = np.empty((len(bounds) - 1, config.n_bins))
    _energies_framed(signal, poles, gains, config.order, config.coefficients, bounds, out)
    return out


@dataclass(frozen=True, eq=False)
class ResonatorParams:
    """Damped spring with cubic stiffness, fed through a short FIR filter.

    Units are per-sample at 48 kHz: stiffness is the squared angular
    frequency per sample, damping the velocity loss per sample.
    """

    taps: np.ndarray
    stiffness: float
    damping: float
    nonlinearity: float

    def __post_init__(self) -> None:
        taps = np.asarray(self.taps, dtype=float)
        if taps.shape != (_RESONATOR_TAPS,):
            raise InvalidInputError(f"feeding filter must have exactly {_RESONATOR_TAPS} taps")
        if self.stiffness <= 0:
            raise InvalidInputError("stiffness must be positive")
        if self.damping <= 0:
            raise InvalidInputError("damping must be positive")
        object.__setattr__(self, "taps", taps)


def default_resonator() -> ResonatorParams:
    omega = 2.0 * np.pi * RESONATOR_RESONANCE_HZ / PIPELINE_RATE
    return ResonatorParams(
        taps=firwin(_RESONATOR_TAPS, _RESONATOR_FEED_CUTOFF_HZ, fs=PIPELINE_RATE),
        stiffness=omega * omega,
        damping=omega / _RESONATOR_Q,
        nonlinearity=1e-6,
    )


@njit(cache=True)
def _resonator_series(drive, damping, stiffness, nonlinearity, limit, out):  # pragma: no cover
    x = 0.0
    v = 0.0
    for t in range(drive.shape[0]):
        accel = drive[t] - damping * v - stiffness * x - nonlinearity * x * x * x
        x = x + v
        v = v + accel
        out[t] = x * x
        if abs(x) > limit:
            return t
    return -1


def resonator_process(audio: AudioBuffer, params: ResonatorParams | None = None) -> np.ndarray:
    """Squared displacement of the resonator, one value per input sample."""
    if params is None:
        params = default_resonator()
    signal = _require_mono_48k(audio, "resonator_process")
    drive = lfilter(params.taps, [1.0], signal)
    out = np.empty(signal.shape[0])
    diverged_at = _resonator_series(
        drive, params.damping, params.stiffness, params.nonlinearity, _DISPLACEMENT_LIMIT, out
    )
    if diverged_at >= 0:
        raise UnstableError(
            f"resonator displacement exceeded {_DISPLACEMENT_LIMIT:g} at sample {diverged_at}"
        )
    return out
