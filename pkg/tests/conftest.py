import numpy as np
import pytest


def rand_complex(seed: int, rows: int, cols: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def rand_herm(seed: int, dim: int) -> np.ndarray:
    g = rand_complex(seed, dim, dim)
    return (g + g.conj().T) / 2


def rand_psd(seed: int, dim: int) -> np.ndarray:
    g = rand_complex(seed, dim, dim)
    h = g @ g.conj().T
    return (h + h.conj().T) / 2


@pytest.fixture
def tmp_chdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path
