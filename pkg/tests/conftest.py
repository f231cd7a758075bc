from __future__ import annotations

import numpy as np
import pytest

from earsim import AudioBuffer, write_wav


@pytest.fixture
def wav_factory(tmp_path):
    """Write an AudioBuffer to a temp WAV and return its path."""
    counter = {"n": 0}

    def factory(buffer: AudioBuffer, name: str | None = None, encoding: str = "float32"):
        if name is None:
            counter["n"] += 1
            name = f"clip_{counter['n']}.wav"
        path = tmp_path / name
        write_wav(path, buffer, encoding=encoding)
        return path

    return factory


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
