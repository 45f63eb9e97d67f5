import numpy as np
import pytest


def rand_hermitian(rng: np.random.Generator, d: int, scale: float = 1.0) -> np.ndarray:
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (A + A.conj().T) / 2.0


def rand_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    Z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    Q, R = np.linalg.qr(Z)
    diag = np.diagonal(R)
    return Q * (diag / np.abs(diag))


def rand_density(rng: np.random.Generator, d: int) -> np.ndarray:
    L = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = L @ L.conj().T
    return rho / np.trace(rho).real


def rand_pure(rng: np.random.Generator, d: int) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def rand_probs(rng: np.random.Generator, d: int) -> np.ndarray:
    p = rng.uniform(0.1, 1.0, size=d)
    return p / p.sum()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0xC0FFEE)
