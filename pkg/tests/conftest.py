from pathlib import Path

import numpy as np
import pytest

from src.core.samples import PValueSample


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def uniform_grid():
    """p_(i) = i/n, the pure-noise fixture."""
    def build(n: int = 1000) -> PValueSample:
        return PValueSample(np.arange(1, n + 1) / n)
    return build


@pytest.fixture
def labelled():
    """Sample whose sorted labels follow the given 'S'/'N' string."""
    def build(pattern: str) -> PValueSample:
        values = np.linspace(0.01, 0.9, len(pattern))
        return PValueSample(values, np.array([c == "S" for c in pattern]))
    return build


@pytest.fixture
def write_lines(tmp_path):
    def write(name: str, lines) -> Path:
        path = tmp_path / name
        path.write_text("\n".join(str(line) for line in lines) + "\n", encoding="utf-8")
        return path
    return write
