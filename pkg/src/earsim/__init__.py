"""earsim: full-reference perceptual audio similarity.

Compares a degraded recording against its reference through a model of
auditory perception and reports similarity, a perceptual distance, and a
mean opinion score estimate. See the README for the pipeline overview
and the command line interface.
"""
from .audio_io import PIPELINE_RATE, AudioBuffer, load_audio, resample, write_wav
from .cochlea import (
    ChannelEnergies,
    FilterbankConfig,
    ResonatorParams,
    adaptive_bandwidths,
    default_filterbank,
    default_resonator,
    erb_center_frequencies,
    erb_number,
    erb_number_to_hz,
    gammatone_analyze,
    integration_coefficient,
    resonator_process,
)
from .compare import (
    ComparisonConfig,
    SimilarityResult,
    WarpPath,
    aggregate_distance,
    compare_channels,
    dtw_align,
    map_to_mos,
    normalize_pair,
    nsim,
)
from .errors import (
    AllPairsFailedError,
    BinMismatchError,
    ChannelMismatchError,
    CorruptHeaderError,
    DegenerateInputError,
    EarsimError,
    EmptyInputError,
    EmptyManifestError,
    InvalidInputError,
    InvalidPathError,
    InvalidRangeError,
    InvalidRateError,
    ManifestParseError,
    OutOfRangeError,
    TooShortError,
    UnstableError,
    UnsupportedFormatError,
    WrongRateError,
    exit_code_for,
)
from .evaluate import (
    CorrelationReport,
    PairFailure,
    PairScore,
    RatedPair,
    evaluate_dataset,
    krcc,
    load_manifest,
    plcc,
    srcc,
)
from .spectrogram import (
    LoudnessParams,
    PerceptualSpectrogram,
    PipelineConfig,
    compute_spectrogram,
    default_loudness,
    default_pipeline,
    loudness_db,
    read_spectrogram,
    spread_energy,
    subsample_to_frames,
    write_spectrogram,
    write_spectrogram_csv,
)

__version__ = "0.1.0"

__all__ = [
    "AudioBuffer",
    "PIPELINE_RATE",
    "load_audio",
    "write_wav",
    "resample",
    "FilterbankConfig",
    "ChannelEnergies",
    "ResonatorParams",
    "erb_number",
    "erb_number_to_hz",
    "erb_center_frequencies",
    "adaptive_bandwidths",
    "integration_coefficient",
    "default_filterbank",
    "default_resonator",
    "gammatone_analyze",
    "resonator_process",
    "PerceptualSpectrogram",
    "LoudnessParams",
    "PipelineConfig",
    "default_loudness",
    "default_pipeline",
    "subsample_to_frames",
    "spread_energy",
    "loudness_db",
    "compute_spectrogram",
    "write_spectrogram",
    "read_spectrogram",
    "write_spectrogram_csv",
    "ComparisonConfig",
    "WarpPath",
    "SimilarityResult",
    "normalize_pair",
    "dtw_align",
    "nsim",
    "aggregate_distance",
    "map_to_mos",
    "compare_channels",
    "RatedPair",
    "PairScore",
    "PairFailure",
    "CorrelationReport",
    "plcc",
    "srcc",
    "krcc",
    "load_manifest",
    "evaluate_dataset",
    "EarsimError",
    "exit_code_for",
    "UnsupportedFormatError",
    "CorruptHeaderError",
    "InvalidRateError",
    "WrongRateError",
    "InvalidInputError",
    "InvalidRangeError",
    "UnstableError",
    "BinMismatchError",
    "EmptyInputError",
    "InvalidPathError",
    "ChannelMismatchError",
    "TooShortError",
    "OutOfRangeError",
    "DegenerateInputError",
    "EmptyManifestError",
    "AllPairsFailedError",
    "ManifestParseError",
]
