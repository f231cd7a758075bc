"""Report figures, rendered headlessly to files.

matplotlib is imported lazily with the Agg backend so library users who
never render anything don't pay for it.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .evaluate import CorrelationReport
from .spectrogram import PerceptualSpectrogram


def _pyplot():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    return plt


def _fmt(value: float | None) -> str:
    return "undefined" if value is None else f"{value:.4f}"


def render_score_scatter(metric_scores, human_scores, report: CorrelationReport, path) -> Path:
    """Scatter of metric MOS against human scores, annotated with the
    correlation coefficients."""
    metric = np.asarray(metric_scores, dtype=float)
    human = np.asarray(human_scores, dtype=float)
    if metric.size != human.size or metric.size == 0:
        raise InvalidInputError("need matching, non-empty score sequences")
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5.5, 5.0))
    try:
        ax.scatter(human, metric, s=24, alpha=0.75, edgecolors="none")
        ax.set_xlabel("human score")
        ax.set_ylabel("metric MOS")
        ax.set_title(f"metric vs. human scores (n={report.n})")
        ax.grid(True, alpha=0.3)
        summary = "\n".join(
            (
                f"PLCC: {_fmt(report.plcc)}",
                f"SRCC: {_fmt(report.srcc)}",
                f"KRCC: {_fmt(report.krcc)}",
            )
        )
        ax.text(
            0.02,
            0.98,
            summary,
            transform=ax.transAxes,
            va="top",
            family="monospace",
            bbox={"boxstyle": "round", "facecolor": "white", "alpha": 0.8},
        )
        fig.tight_layout()
        path = Path(path)
        fig.savefig(path, dpi=150)
    finally:
        plt.close(fig)
    return path


def render_spectrogram_image(spec: PerceptualSpectrogram, path) -> Path:
    """Heatmap of the spectrogram: time on x, bin index on y, loudness as color."""
    if spec.n_frames == 0:
        raise InvalidInputError("cannot render an empty spectrogram")
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(8.0, 4.0))
    try:
        duration = spec.n_frames / spec.frame_rate
        image = ax.imshow(
            spec.frames.T,
            origin="lower",
            aspect="auto",
            extent=(0.0, duration, -0.5, spec.n_bins - 0.5),
            cmap="magma",
            interpolation="nearest",
        )
        ax.set_xlabel("time [s]")
        ax.set_ylabel("bin")
        fig.colorbar(image, ax=ax, label="loudness [dB]")
        fig.tight_layout()
        path = Path(path)
        fig.savefig(path, dpi=150)
    finally:
        plt.close(fig)
    return path
