import numpy as np
import pytest

from qpf.config import DEFAULT_SEED

# 3x3 identities
EXACT = 1e-12
# composed products and 9x9+ comparisons
COMPOSED = 1e-10


@pytest.fixture
def rng():
    return np.random.default_rng(DEFAULT_SEED)


@pytest.fixture
def random_angles(rng):
    return rng.uniform(-2 * np.pi, 2 * np.pi, size=100)


@pytest.fixture(autouse=True)
def isolated_environment(monkeypatch, tmp_path):
    for key in ('QPF_TOL', 'QPF_SEED', 'QPF_CUTOFF', 'QPF_LOG_LEVEL', 'QPF_LOG_FILE', 'QPF_REPORT_DIR'):
        monkeypatch.delenv(key, raising=False)
    monkeypatch.setenv('QPF_REPORT_DIR', str(tmp_path / 'reports'))


def random_qutrit_state(rng):
    vector = rng.normal(size=3) + 1j * rng.normal(size=3)
    return vector / np.linalg.norm(vector)


def random_hermitian(rng, dim=3):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (m + m.conj().T) / 2
