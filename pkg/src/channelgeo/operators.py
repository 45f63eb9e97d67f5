"""Dense complex-matrix substrate.

Hermitian spectral decomposition, spectrally defined matrix functions,
Hilbert-Schmidt geometry, tensor products, and the environment partial
trace. Every matrix function routes through one eigendecomposition code
path so that exp, abs, and sqrt stay numerically consistent with each
other.
"""
from __future__ import annotations

import numpy as np
import numpy.linalg as npl

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
DENSITY_TRACE_TOL = 1e-10
DENSITY_EIG_FLOOR = -1e-10
#: Eigenvalues this close to zero are clamped to zero before square roots.
EIG_CLAMP = 1e-10


def as_square(M: np.ndarray) -> np.ndarray:
    """Coerce to a square complex128 array with finite entries."""
    A = np.asarray(M, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"Expected a square matrix, got shape {A.shape}.")
    if not (np.all(np.isfinite(A.real)) and np.all(np.isfinite(A.imag))):
        raise ValueError("Matrix entries must be finite.")
    return A


def hermitian(M: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate a Hermitian matrix.

    Inputs that miss the tolerance are rejected, never symmetrized;
    silent symmetrization hides caller bugs.
    """
    A = as_square(M)
    dev = float(np.max(np.abs(A - A.conj().T))) if A.size else 0.0
    if dev > tol:
        raise ValueError(
            f"Matrix is not Hermitian: max deviation {dev:.3e} exceeds {tol:.1e}."
        )
    return A


def unitary(M: np.ndarray, tol: float = UNITARY_TOL) -> np.ndarray:
    """Validate a unitary matrix (``max |U†U - I|`` within tol)."""
    U = as_square(M)
    dev = float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))
    if dev > tol:
        raise ValueError(
            f"Matrix is not unitary: max |U†U - I| = {dev:.3e} exceeds {tol:.1e}."
        )
    return U


def density(M: np.ndarray) -> np.ndarray:
    """Validate a density matrix: Hermitian, unit trace, PSD within tolerance."""
    rho = hermitian(M)
    tr = float(np.trace(rho).real)
    if abs(tr - 1.0) > DENSITY_TRACE_TOL:
        raise ValueError(f"Density trace is {tr!r}, expected 1 within {DENSITY_TRACE_TOL:.1e}.")
    w_min = float(npl.eigvalsh(rho)[0])
    if w_min < DENSITY_EIG_FLOOR:
        raise ValueError(
            f"Density has negative eigenvalue {w_min:.3e} below floor {DENSITY_EIG_FLOOR:.1e}."
        )
    return rho


def hermitian_eig(H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and eigenvector columns of a Hermitian matrix."""
    try:
        w, V = npl.eigh(hermitian(H))
    except npl.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails here
        raise ValueError(f"Hermitian eigendecomposition did not converge: {exc}") from exc
    return w, V


def matrix_exp_unitary(H: np.ndarray, t: float) -> np.ndarray:
    """exp(-i t H) for Hermitian H, via the spectral decomposition."""
    w, V = hermitian_eig(H)
    return (V * np.exp(-1j * t * w)) @ V.conj().T


def matrix_abs(H: np.ndarray) -> np.ndarray:
    """|H| = V |diag(w)| V†; positive semidefinite, same eigenvectors."""
    w, V = hermitian_eig(H)
    return (V * np.abs(w)) @ V.conj().T


def sqrt_abs_diff(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """sqrt(|A² - B²|) computed spectrally from the Hermitian matrix A² - B².

    Eigenvalues within EIG_CLAMP of zero are clamped to zero before the
    square root.
    """
    A = hermitian(A)
    B = hermitian(B)
    if A.shape != B.shape:
        raise ValueError(f"Dimension mismatch: {A.shape} vs {B.shape}.")
    D = A @ A - B @ B
    # A² and B² are Hermitian exactly; only rounding noise is folded back.
    D = (D + D.conj().T) / 2
    w, V = npl.eigh(D)
    w = np.abs(w)
    w[w <= EIG_CLAMP] = 0.0
    return (V * np.sqrt(w)) @ V.conj().T


def hs_inner(A: np.ndarray, B: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product Tr{A†B}."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        raise ValueError(f"Dimension mismatch: {A.shape} vs {B.shape}.")
    return complex(np.vdot(A, B))


def hs_norm(A: np.ndarray) -> float:
    """Hilbert-Schmidt (Frobenius) norm sqrt(Tr{A†A})."""
    return float(npl.norm(np.asarray(A)))


def tensor(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Kronecker product."""
    return np.kron(np.asarray(A, dtype=np.complex128), np.asarray(B, dtype=np.complex128))


def embed_system(H_S: np.ndarray, d_E: int) -> np.ndarray:
    """H_S ⊗ I on a system+environment space with environment dimension d_E."""
    if d_E < 1:
        raise ValueError(f"Environment dimension must be positive, got {d_E}.")
    return np.kron(np.asarray(H_S, dtype=np.complex128), np.eye(d_E))


def partial_trace_env(rho: np.ndarray, d_S: int, d_E: int) -> np.ndarray:
    """Trace out the environment factor of an operator on a d_S*d_E space.

    Index convention: the joint basis is |s⟩⊗|e⟩ with the environment
    index fastest, matching ``numpy.kron``.
    """
    rho = as_square(rho)
    if rho.shape[0] != d_S * d_E:
        raise ValueError(
            f"Operator dimension {rho.shape[0]} does not factor as {d_S}*{d_E}."
        )
    R = rho.reshape(d_S, d_E, d_S, d_E)
    return np.einsum("iaja->ij", R)


def commutator(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return A @ B - B @ A
