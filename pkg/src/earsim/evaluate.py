"""Dataset evaluation: score rated pairs and correlate against human scores.

A manifest is a CSV with header ``reference,degraded,score`` where the
paths name WAV files (relative paths resolve against the manifest's
directory) and score is the human rating. Each pair runs through the
full comparison; the resulting MOS estimates are correlated with the
human scores three ways:

  PLCC  Pearson's linear correlation of the raw values.
  SRCC  Spearman's rank correlation; with no ties this is
        1 - 6 * sum(d^2) / (n * (n^2 - 1)) over rank differences d,
        with ties it falls back to Pearson over average ranks.
  KRCC  Kendall's tau-a, the mean of sign agreements over all pairs.

Pairs that fail to score are excluded and reported, not fatal; a
coefficient that is undefined for the data (constant inputs, n < 2)
is reported as None with a note rather than raising.
"""
from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .audio_io import load_audio
from .compare import ComparisonConfig, SimilarityResult, compare_channels
from .errors import (
    AllPairsFailedError,
    DegenerateInputError,
    EarsimError,
    EmptyManifestError,
    InvalidInputError,
    ManifestParseError,
)
from .spectrogram import PipelineConfig

_MANIFEST_COLUMNS = ("reference", "degraded", "score")


@dataclass(frozen=True)
class RatedPair:
    reference: Path
    degraded: Path
    human_score: float


@dataclass(frozen=True, eq=False)
class PairScore:
    pair: RatedPair
    result: SimilarityResult

    @property
    def score(self) -> float:
        return self.result.mos


@dataclass(frozen=True)
class PairFailure:
    pair: RatedPair
    reason: str


@dataclass(frozen=True, eq=False)
class CorrelationReport:
    """Correlations between metric and human scores.

    A coefficient is None when undefined for the data; ``notes`` says
    why, keyed by coefficient name.
    """

    plcc: float | None
    srcc: float | None
    krcc: float | None
    n: int
    excluded: tuple[PairFailure, ...] = ()
    notes: dict[str, str] = field(default_factory=dict)


def _as_pair_arrays(xs, ys) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.ndim != 1 or y.ndim != 1 or x.size != y.size:
        raise InvalidInputError("inputs must be 1-D sequences of equal length")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise InvalidInputError("inputs must be finite")
    if x.size < 2:
        raise DegenerateInputError(f"need at least 2 observations, got {x.size}")
    return x, y


def plcc(xs, ys) -> float:
    """Pearson's linear correlation coefficient."""
    x, y = _as_pair_arrays(xs, ys)
    dx = x - x.mean()
    dy = y - y.mean()
    denom = np.sqrt(np.sum(dx * dx) * np.sum(dy * dy))
    if denom == 0.0:
        raise DegenerateInputError("correlation undefined for a constant sequence")
    return float(np.sum(dx * dy) / denom)


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks; tied values share the mean of their positions."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=float)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def srcc(xs, ys) -> float:
    """Spearman's rank correlation coefficient."""
    x, y = _as_pair_arrays(xs, ys)
    rx = _average_ranks(x)
    ry = _average_ranks(y)
    has_ties = np.unique(x).size < x.size or np.unique(y).size < y.size
    if has_ties:
        return plcc(rx, ry)
    n = x.size
    d = rx - ry
    return float(1.0 - 6.0 * np.sum(d * d) / (n * (n * n - 1)))


def krcc(xs, ys) -> float:
    """Kendall's tau-a: mean sign agreement over all observation pairs."""
    x, y = _as_pair_arrays(xs, ys)
    sx = np.sign(x[:, None] - x[None, :])
    sy = np.sign(y[:, None] - y[None, :])
    n = x.size
    return float(np.sum(sx * sy) / (n * (n - 1)))


def load_manifest(path) -> list[RatedPair]:
    """Parse a rating manifest; parse problems carry the offending line number."""
    path = Path(path)
    with path.open(newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise ManifestParseError(f"{path}: empty file")
        missing = [c for c in _MANIFEST_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise ManifestParseError(f"{path}: header is missing columns: {', '.join(missing)}")
        pairs = []
        for row in reader:
            line = reader.line_num
            values = [row.get(c) for c in _MANIFEST_COLUMNS]
            if any(v is None or v.strip() == "" for v in values):
                raise ManifestParseError(f"{path}:{line}: incomplete row")
            ref, deg, score_text = (v.strip() for v in values)
            try:
                score = float(score_text)
            except ValueError:
                raise ManifestParseError(f"{path}:{line}: bad score {score_text!r}") from None
            if not np.isfinite(score):
                raise ManifestParseError(f"{path}:{line}: score must be finite")
            base = path.parent
            pairs.append(
                RatedPair(
                    reference=(base / ref).resolve(),
                    degraded=(base / deg).resolve(),
                    human_score=score,
                )
            )
    return pairs


def _score_pair(args) -> tuple[int, SimilarityResult | None, str | None]:
    index, pair, pipeline, comparison = args
    try:
        result = compare_channels(
            load_audio(pair.reference), load_audio(pair.degraded), pipeline, comparison
        )
        return index, result, None
    except (EarsimError, FileNotFoundError, OSError) as exc:
        return index, None, f"{type(exc).__name__}: {exc}"


def _correlate(name: str, fn, metric, human, notes: dict[str, str]) -> float | None:
    try:
        return fn(metric, human)
    except DegenerateInputError as exc:
        notes[name] = str(exc)
        return None


def evaluate_dataset(
    pairs: list[RatedPair],
    pipeline: PipelineConfig | None = None,
    comparison: ComparisonConfig | None = None,
    jobs: int = 1,
) -> tuple[CorrelationReport, list[PairScore]]:
    """Score every pair and correlate the MOS estimates with human scores.

    Individual pair failures are collected into the report's excluded
    list; only an empty manifest or a fully failed run raises.
    """
    if not pairs:
        raise EmptyManifestError("empty manifest: no rated pairs to evaluate")
    if jobs < 1:
        raise InvalidInputError(f"jobs must be at least 1, got {jobs}")

    tasks = [(i, pair, pipeline, comparison) for i, pair in enumerate(pairs)]
    if jobs == 1 or len(pairs) == 1:
        outcomes = [_score_pair(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_score_pair, tasks))

    scored: list[PairScore] = []
    failures: list[PairFailure] = []
    for index, result, reason in sorted(outcomes):
        if result is not None:
            scored.append(PairScore(pair=pairs[index], result=result))
        else:
            failures.append(PairFailure(pair=pairs[index], reason=reason))
    if not scored:
        raise AllPairsFailedError(f"all {len(pairs)} pairs failed; first: {failures[0].reason}")

    metric = [s.score for s in scored]
    human = [s.pair.human_score for s in scored]
    notes: dict[str, str] = {}
    if len(scored) < 2:
        for name in ("plcc", "srcc", "krcc"):
            notes[name] = "need at least 2 scored pairs"
        report = CorrelationReport(
            plcc=None, srcc=None, krcc=None, n=len(scored), excluded=tuple(failures), notes=notes
        )
        return report, scored

    report = CorrelationReport(
        plcc=_correlate("plcc", plcc, metric, human, notes),
        srcc=_correlate("srcc", srcc, metric, human, notes),
        krcc=_correlate("krcc", krcc, metric, human, notes),
        n=len(scored),
        excluded=tuple(failures),
        notes=notes,
    )
    return report, scored
