import numpy as np
import pytest

# 3x3 reference instance: Hermitian Sigma with a deliberately non-Hermitian M
PAPER_SIGMA = np.array([
    [0.025, -0.0075j, 0.00175],
    [0.0075j, 0.0070, 0.00135],
    [0.00175, 0.00135, 0.00043],
], dtype=complex)
PAPER_M = np.array([
    [0.0001, 0.0210, 0.3000],
    [0.0400, 0.0005, 0.0200],
    [0.0010, 0.0100, 0.0004],
], dtype=complex)
PAPER_N = 3


@pytest.fixture
def paper_instance():
    return PAPER_N, PAPER_SIGMA.copy(), PAPER_M.copy()


def random_hermitian(rng, p, scale=1.0):
    a = rng.normal(size=(p, p)) + 1j * rng.normal(size=(p, p))
    return scale * (a + a.conj().T) / 2


def random_psd(rng, p, scale=1.0):
    a = rng.normal(size=(p, p)) + 1j * rng.normal(size=(p, p))
    return scale * (a @ a.conj().T) / p


def random_complex(rng, p, scale=1.0):
    return scale * (rng.normal(size=(p, p)) + 1j * rng.normal(size=(p, p)))


def rel_err(a, b):
    a, b = complex(a), complex(b)
    return abs(a - b) / max(abs(a), abs(b), 1e-300)
