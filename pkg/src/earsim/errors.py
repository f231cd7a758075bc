"""Exception types raised across the package.

Every error carries a stable exit code so the CLI can map failures to
distinct, documented process statuses. Codes 0-2 are reserved (success,
generic failure, usage error); 3 is the builtin FileNotFoundError.
"""


class EarsimError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 70


class UnsupportedFormatError(EarsimError):
    """Input is not a RIFF/WAVE file or uses an encoding we do not decode."""

    exit_code = 4


class CorruptHeaderError(EarsimError):
    """WAV header declares sizes that disagree with the actual payload."""

    exit_code = 5


class InvalidRateError(EarsimError):
    """A sample or frame rate is zero, negative, or otherwise unusable."""

    exit_code = 6


class WrongRateError(EarsimError):
    """Audio is not at the rate an operation requires."""

    exit_code = 7


class InvalidInputError(EarsimError):
    """An argument violates an operation's preconditions."""

    exit_code = 8


class InvalidRangeError(EarsimError):
    """A frequency range or bin count cannot define a filter grid."""

    exit_code = 9


class UnstableError(EarsimError):
    """The resonator diverged; its parameters are misconfigured."""

    exit_code = 10


class BinMismatchError(EarsimError):
    """Two spectrograms do not share a bin count."""

    exit_code = 11


class EmptyInputError(EarsimError):
    """An operation received an empty spectrogram or sequence."""

    exit_code = 12


class InvalidPathError(EarsimError):
    """A warp path is not valid for the spectrograms it claims to align."""

    exit_code = 13


class ChannelMismatchError(EarsimError):
    """Reference and degraded buffers have different channel counts."""

    exit_code = 14


class TooShortError(EarsimError):
    """A signal is too short to produce even one spectrogram frame."""

    exit_code = 15


class OutOfRangeError(EarsimError):
    """A similarity value lies outside [0, 1]."""

    exit_code = 16


class DegenerateInputError(EarsimError):
    """A correlation is undefined for the given data (constant sequence)."""

    exit_code = 17


class EmptyManifestError(EarsimError):
    """The evaluation manifest holds no rated pairs."""

    exit_code = 18


class AllPairsFailedError(EarsimError):
    """Every pair in the manifest failed to evaluate."""

    exit_code = 19


class ManifestParseError(EarsimError):
    """A manifest row cannot be parsed; the message names the line."""

    exit_code = 20


FILE_NOT_FOUND_EXIT_CODE = 3
INTERNAL_ERROR_EXIT_CODE = 70


def exit_code_for(exc: BaseException) -> int:
    """Stable process exit code for an exception."""
    if isinstance(exc, EarsimError):
        return exc.exit_code
    if isinstance(exc, FileNotFoundError):
        return FILE_NOT_FOUND_EXIT_CODE
    return INTERNAL_ERROR_EXIT_CODE
