"""Spectrogram comparison: level normalization, time alignment, and a
structural similarity score mapped to a MOS estimate.

Alignment is dynamic time warping over pairwise Euclidean distances
between loudness frames, with the cost matrix raised elementwise to an
exponent in (0, 1]. The concave cost makes many small frame differences
cheaper than one large one, which favors warps that absorb timing drift
instead of paying for a single bad match.

Similarity of the aligned spectrograms follows the NSIM recipe: sliding
window luminance and structure terms,

    [(2*mu_r*mu_d + c1) / (mu_r^2 + mu_d^2 + c1)]
  * [(cov_rd + c2) / (sigma_r*sigma_d + c2)]

clamped per window to [0, 1], raised to an exponent, and averaged. The
stabilizers c1 = c2 = (0.01 * 90)^2 assume a 90 dB loudness range.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.spatial.distance import cdist

from .audio_io import AudioBuffer, PIPELINE_RATE, resample
from .errors import (
    BinMismatchError,
    ChannelMismatchError,
    EmptyInputError,
    InvalidInputError,
    InvalidPathError,
    InvalidRangeError,
    OutOfRangeError,
    TooShortError,
)
from .spectrogram import PerceptualSpectrogram, PipelineConfig, compute_spectrogram, default_pipeline

DEFAULT_NORMALIZATION_FRACTION = 0.82
DEFAULT_DTW_EXPONENT = 0.5
DEFAULT_NSIM_WINDOW = 8
DEFAULT_NSIM_EXPONENT = 1.5

# (0.01 * dynamic_range)^2 with a 90 dB loudness range assumed
DEFAULT_NSIM_STABILIZER = 0.81

_MOS_SLOPE = 8.0
_MOS_MIDPOINT = 0.65

_NSIM_CHUNK_ROWS = 256


@dataclass(frozen=True)
class ComparisonConfig:
    """Knobs for the normalization, alignment, and similarity stages."""

    normalization_fraction: float = DEFAULT_NORMALIZATION_FRACTION
    dtw_exponent: float = DEFAULT_DTW_EXPONENT
    nsim_window_frames: int = DEFAULT_NSIM_WINDOW
    nsim_window_bins: int = DEFAULT_NSIM_WINDOW
    nsim_c1: float = DEFAULT_NSIM_STABILIZER
    nsim_c2: float = DEFAULT_NSIM_STABILIZER
    nsim_exponent: float = DEFAULT_NSIM_EXPONENT

    def __post_init__(self) -> None:
        if not (0.0 <= self.normalization_fraction <= 1.0):
            raise InvalidRangeError(
                f"normalization fraction must lie in [0, 1], got {self.normalization_fraction}"
            )
        if not (0.0 < self.dtw_exponent <= 1.0):
            raise InvalidRangeError(f"DTW exponent must lie in (0, 1], got {self.dtw_exponent}")
        if self.nsim_window_frames < 1 or self.nsim_window_bins < 1:
            raise InvalidRangeError("NSIM window extents must be at least 1")
        if self.nsim_c1 <= 0 or self.nsim_c2 <= 0:
            raise InvalidRangeError("NSIM stabilizers must be positive")
        if self.nsim_exponent <= 0:
            raise InvalidRangeError("NSIM exponent must be positive")


@dataclass(frozen=True, eq=False)
class WarpPath:
    """Monotone alignment between two frame sequences.

    pairs[k] = (reference frame index, degraded frame index); steps
    advance one side or both by exactly one frame.
    """

    pairs: np.ndarray

    def __post_init__(self) -> None:
        pairs = np.asarray(self.pairs, dtype=np.int64)
        if pairs.ndim != 2 or pairs.shape[1] != 2 or pairs.shape[0] < 1:
            raise InvalidPathError("path must be a non-empty sequence of index pairs")
        object.__setattr__(self, "pairs", pairs)

    def __len__(self) -> int:
        return self.pairs.shape[0]


@dataclass(frozen=True, eq=False)
class SimilarityResult:
    per_channel_similarity: tuple[float, ...]
    per_channel_distance: tuple[float, ...]
    aggregate_distance: float
    mos: float


def normalize_pair(
    reference: PerceptualSpectrogram,
    degraded: PerceptualSpectrogram,
    fraction: float = DEFAULT_NORMALIZATION_FRACTION,
) -> tuple[PerceptualSpectrogram, PerceptualSpectrogram]:
    """Pull the two spectrograms' peak loudness partially together.

    With gap = max(reference) - max(degraded), every reference entry
    moves by -fraction * gap / 2 and every degraded entry by the same
    amount in the other direction, leaving (1 - fraction) of the peak
    gap in place. Full normalization would hide broken gain staging;
    none would dominate the comparison with level alone.
    """
    if not (0.0 <= fraction <= 1.0):
        raise InvalidRangeError(f"fraction must lie in [0, 1], got {fraction}")
    _check_compatible(reference, degraded)
    if reference.n_frames == 0 or degraded.n_frames == 0:
        raise EmptyInputError("cannot normalize an empty spectrogram")
    gap = reference.frames.max() - degraded.frames.max()
    shift = fraction * gap / 2.0
    return (
        PerceptualSpectrogram(frames=reference.frames - shift, frame_rate=reference.frame_rate),
        PerceptualSpectrogram(frames=degraded.frames + shift, frame_rate=degraded.frame_rate),
    )


def _check_compatible(a: PerceptualSpectrogram, b: PerceptualSpectrogram) -> None:
    if a.n_bins != b.n_bins:
        raise BinMismatchError(f"bin counts differ: {a.n_bins} vs {b.n_bins}")
    if a.frame_rate != b.frame_rate:
        raise InvalidInputError(f"frame rates differ: {a.frame_rate} vs {b.frame_rate}")


def _accumulate_cost(cost: np.ndarray) -> np.ndarray:
    """Cumulative DTW cost with steps (1,0), (0,1), (1,1).

    Returns a (n+1, m+1) matrix with an infinite border; cell (i, j)
    holds the cheapest cost of aligning the first i reference frames
    with the first j degraded frames. Filled along anti-diagonals so
    each sweep is a vectorized gather.
    """
    n, m = cost.shape
    acc = np.full((n + 1, m + 1), np.inf)
    acc[1, 1] = cost[0, 0]
    for s in range(3, n + m + 1):
        i = np.arange(max(1, s - m), min(n, s - 1) + 1)
        if i.size == 0:
            continue
        j = s - i
        best = np.minimum(np.minimum(acc[i - 1, j - 1], acc[i - 1, j]), acc[i, j - 1])
        acc[i, j] = cost[i - 1, j - 1] + best
    return acc


def _traceback(acc: np.ndarray) -> np.ndarray:
    """Walk the cheapest path back from the far corner, diagonal first on ties."""
    i, j = acc.shape[0] - 1, acc.shape[1] - 1
    path = [(i - 1, j - 1)]
    while i > 1 or j > 1:
        diagonal = acc[i - 1, j - 1]
        reference_step = acc[i - 1, j]
        degraded_step = acc[i, j - 1]
        best = min(diagonal, reference_step, degraded_step)
        if diagonal == best:
            i -= 1
            j -= 1
        elif reference_step == best:
            i -= 1
        else:
            j -= 1
        path.append((i - 1, j - 1))
    path.reverse()
    return np.asarray(path, dtype=np.int64)


def dtw_align(
    reference: PerceptualSpectrogram,
    degraded: PerceptualSpectrogram,
    exponent: float = DEFAULT_DTW_EXPONENT,
) -> WarpPath:
    """Optimal monotone alignment under the power-compressed frame cost."""
    if not (0.0 < exponent <= 1.0):
        raise InvalidRangeError(f"exponent must lie in (0, 1], got {exponent}")
    _check_compatible(reference, degraded)
    if reference.n_frames == 0 or degraded.n_frames == 0:
        raise EmptyInputError("cannot align an empty spectrogram")
    cost = cdist(reference.frames, degraded.frames) ** exponent
    return WarpPath(pairs=_traceback(_accumulate_cost(cost)))


def _validate_path(path: WarpPath, n_ref: int, n_deg: int) -> None:
    pairs = path.pairs
    if tuple(pairs[0]) != (0, 0) or tuple(pairs[-1]) != (n_ref - 1, n_deg - 1):
        raise InvalidPathError("path must run corner to corner")
    steps = np.diff(pairs, axis=0)
    if steps.size and not (
        np.all((steps >= 0) & (steps <= 1)) and np.all(steps.max(axis=1) == 1)
    ):
        raise InvalidPathError("path steps must advance one side or both by one frame")


def nsim(
    reference: PerceptualSpectrogram,
    degraded: PerceptualSpectrogram,
    path: WarpPath,
    config: ComparisonConfig | None = None,
) -> float:
    """Similarity of the warped pair in [0, 1]; 1 means indistinguishable.

    Both spectrograms are re-indexed along the path, so the windows slide
    over equal-length sequences. Window extents clamp to what the data
    offers, and windows use centered population statistics; centering
    keeps identical inputs at exactly 1.0, which cancellation in the
    E[x^2] - mu^2 form would spoil.
    """
    if config is None:
        config = ComparisonConfig()
    _check_compatible(reference, degraded)
    if reference.n_frames == 0 or degraded.n_frames == 0:
        raise EmptyInputError("cannot score an empty spectrogram")
    _validate_path(path, reference.n_frames, degraded.n_frames)

    warped_ref = reference.frames[path.pairs[:, 0]]
    warped_deg = degraded.frames[path.pairs[:, 1]]
    wt = min(config.nsim_window_frames, warped_ref.shape[0])
    wb = min(config.nsim_window_bins, warped_ref.shape[1])
    windows_ref = sliding_window_view(warped_ref, (wt, wb))
    windows_deg = sliding_window_view(warped_deg, (wt, wb))

    total = 0.0
    count = 0
    # chunked so the flattened window copies stay small
    for lo in range(0, windows_ref.shape[0], _NSIM_CHUNK_ROWS):
        ref_win = windows_ref[lo : lo + _NSIM_CHUNK_ROWS].reshape(-1, wt * wb)
        deg_win = windows_deg[lo : lo + _NSIM_CHUNK_ROWS].reshape(-1, wt * wb)
        mu_r = ref_win.mean(axis=1)
        mu_d = deg_win.mean(axis=1)
        centered_r = ref_win - mu_r[:, None]
        centered_d = deg_win - mu_d[:, None]
        var_r = np.einsum("ij,ij->i", centered_r, centered_r) / (wt * wb)
        var_d = np.einsum("ij,ij->i", centered_d, centered_d) / (wt * wb)
        cov = np.einsum("ij,ij->i", centered_r, centered_d) / (wt * wb)

        luminance = (2.0 * mu_r * mu_d + config.nsim_c1) / (
            mu_r * mu_r + mu_d * mu_d + config.nsim_c1
        )
        structure = (cov + config.nsim_c2) / (np.sqrt(var_r * var_d) + config.nsim_c2)
        scores = np.clip(luminance * structure, 0.0, 1.0) ** config.nsim_exponent
        total += float(scores.sum())
        count += scores.size
    return total / count


def aggregate_distance(distances) -> float:
    """Euclidean norm of the per-channel distances."""
    return float(np.sqrt(np.sum(np.square(np.asarray(distances, dtype=float)))))


def map_to_mos(similarity: float, slope: float = _MOS_SLOPE, midpoint: float = _MOS_MIDPOINT) -> float:
    """Rescaled logistic from similarity in [0, 1] to MOS in [1, 5].

    The logistic is renormalized so the endpoints map exactly: 0 -> 1.0
    and 1 -> 5.0.
    """
    if not (0.0 <= similarity <= 1.0):
        raise OutOfRangeError(f"similarity must lie in [0, 1], got {similarity}")

    def logistic(s: float) -> float:
        return 1.0 / (1.0 + np.exp(-slope * (s - midpoint)))

    low = logistic(0.0)
    high = logistic(1.0)
    return float(1.0 + 4.0 * (logistic(similarity) - low) / (high - low))


def compare_channels(
    reference: AudioBuffer,
    degraded: AudioBuffer,
    pipeline: PipelineConfig | None = None,
    comparison: ComparisonConfig | None = None,
) -> SimilarityResult:
    """Full comparison of two recordings.

    Channel counts must match; sample rates may differ, both sides are
    resampled to the pipeline rate. Each channel pair is normalized,
    aligned, and scored independently; channel distances combine by
    Euclidean norm, and the norm (rescaled by sqrt(n_channels) so it
    stays in [0, 1]) feeds the MOS mapping.
    """
    if pipeline is None:
        pipeline = default_pipeline()
    if comparison is None:
        comparison = ComparisonConfig()
    if reference.n_channels != degraded.n_channels:
        raise ChannelMismatchError(
            f"channel counts differ: {reference.n_channels} vs {degraded.n_channels}"
        )
    if reference.n_channels == 0:
        raise InvalidInputError("cannot compare empty recordings")
    reference = resample(reference, PIPELINE_RATE)
    degraded = resample(degraded, PIPELINE_RATE)

    similarities = []
    distances = []
    for ch in range(reference.n_channels):
        spec_ref = compute_spectrogram(reference.mono(ch), pipeline)
        spec_deg = compute_spectrogram(degraded.mono(ch), pipeline)
        if spec_ref.n_frames == 0 or spec_deg.n_frames == 0:
            raise TooShortError(
                f"inputs must span at least one frame (1/{pipeline.frame_rate} s) after resampling"
            )
        norm_ref, norm_deg = normalize_pair(spec_ref, spec_deg, comparison.normalization_fraction)
        path = dtw_align(norm_ref, norm_deg, comparison.dtw_exponent)
        similarity = nsim(norm_ref, norm_deg, path, comparison)
        similarities.append(similarity)
        distances.append(1.0 - similarity)

    aggregate = aggregate_distance(distances)
    overall = 1.0 - aggregate / np.sqrt(reference.n_channels)
    mos = map_to_mos(float(np.clip(overall, 0.0, 1.0)))
    return SimilarityResult(
        per_channel_similarity=tuple(similarities),
        per_channel_distance=tuple(distances),
        aggregate_distance=aggregate,
        mos=mos,
    )
