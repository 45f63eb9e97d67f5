"""Pauli-string operator bases and the weighted trace metric.

An ordered, HS-orthonormal, traceless basis of the qubit operator space,
the coefficient vectorization it induces, the diagonally weighted inner
product built on it, and the two-local penalty weighting.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .operators import hermitian, hs_norm

_SIGMA = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}

#: Imaginary residue allowed when reading coefficients off a Hermitian input.
COEFF_IMAG_TOL = 1e-10


def string_weight(label: str) -> int:
    """Number of non-identity tensor factors in a Pauli string label."""
    return sum(1 for c in label if c != "I")


@dataclass(frozen=True)
class PauliBasis:
    """Ordered orthonormal traceless basis of the n-qubit operator space.

    Elements are Pauli strings divided by sqrt(2^n), ordered by string
    weight ascending and lexicographically within each weight. The all-I
    string is excluded, so there are 4^n - 1 elements.
    """

    n_qubits: int
    dim: int
    labels: tuple[str, ...]
    elements: np.ndarray  # shape (dim^2 - 1, dim, dim)

    def __post_init__(self) -> None:
        if len(self.labels) != self.dim**2 - 1:
            raise ValueError(
                f"Basis for dim {self.dim} needs {self.dim ** 2 - 1} elements, "
                f"got {len(self.labels)}."
            )


@dataclass(frozen=True)
class MetricSpec:
    """Diagonal metric weights over a Pauli basis; every weight is >= 1."""

    basis: PauliBasis
    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(self.basis.labels),):
            raise ValueError(
                f"Expected {len(self.basis.labels)} weights, got shape {w.shape}."
            )
        if np.any(w < 1.0):
            raise ValueError(f"Metric weights must be >= 1, min is {w.min()!r}.")
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class VectorizedOperator:
    """Coefficients over a PauliBasis plus the split-off identity component.

    ``devectorize(coefficients) + identity_component * I`` reproduces the
    original operator; the identity part is reported rather than silently
    dropped.
    """

    coefficients: np.ndarray
    identity_component: complex


def build_pauli_basis(n: int) -> PauliBasis:
    """All n-qubit Pauli strings except the identity, orthonormalized."""
    if not 1 <= n <= 5:
        raise ValueError(f"Supported qubit counts are 1..5, got {n}.")
    dim = 2**n
    keyed = []
    for combo in itertools.product("IXYZ", repeat=n):
        label = "".join(combo)
        w = string_weight(label)
        if w == 0:
            continue
        keyed.append((w, label))
    keyed.sort()
    norm = np.sqrt(dim)
    elements = np.empty((dim**2 - 1, dim, dim), dtype=np.complex128)
    for k, (_, label) in enumerate(keyed):
        M = np.ones((1, 1), dtype=np.complex128)
        for c in label:
            M = np.kron(M, _SIGMA[c])
        elements[k] = M / norm
    return PauliBasis(
        n_qubits=n,
        dim=dim,
        labels=tuple(label for _, label in keyed),
        elements=elements,
    )


def flat_metric(basis: PauliBasis) -> MetricSpec:
    """Unit weights: the plain HS metric on the traceless sector."""
    return MetricSpec(basis=basis, weights=np.ones(len(basis.labels)))


def build_penalty_metric(n: int, q: float) -> MetricSpec:
    """Weight 1 on strings of weight <= 2, penalty q on strings of weight >= 3."""
    if q < 1.0:
        raise ValueError(f"Penalty must be >= 1, got {q!r}.")
    basis = build_pauli_basis(n)
    weights = np.array(
        [1.0 if string_weight(lab) <= 2 else float(q) for lab in basis.labels]
    )
    return MetricSpec(basis=basis, weights=weights)


def vectorize(A: np.ndarray, basis: PauliBasis) -> VectorizedOperator:
    """Coefficients Tr{E_k A} over the basis, identity component split off."""
    A = hermitian(A)
    if A.shape[0] != basis.dim:
        raise ValueError(f"Operator dim {A.shape[0]} does not match basis dim {basis.dim}.")
    coeffs = np.einsum("kab,ba->k", basis.elements, A)
    resid = float(np.max(np.abs(coeffs.imag))) if coeffs.size else 0.0
    if resid > COEFF_IMAG_TOL:
        raise ValueError(
            f"Hermitian input produced complex coefficients (residue {resid:.3e})."
        )
    ident = complex(np.trace(A) / basis.dim)
    return VectorizedOperator(coefficients=coeffs.real.copy(), identity_component=ident)


def devectorize(v: VectorizedOperator | np.ndarray, basis: PauliBasis) -> np.ndarray:
    """Rebuild the traceless operator sum_k c_k E_k from coefficients."""
    coeffs = v.coefficients if isinstance(v, VectorizedOperator) else np.asarray(v)
    if coeffs.shape != (len(basis.labels),):
        raise ValueError(
            f"Expected {len(basis.labels)} coefficients, got shape {coeffs.shape}."
        )
    return np.einsum("k,kab->ab", coeffs.astype(np.complex128), basis.elements)


def omega_inner(A: np.ndarray, B: np.ndarray, m: MetricSpec) -> float:
    """Weighted inner product with the 1/(N²-1) prefactor included."""
    a = vectorize(A, m.basis).coefficients
    b = vectorize(B, m.basis).coefficients
    n_sq_minus_1 = m.basis.dim**2 - 1
    return float(np.sum(m.weights * a * b) / n_sq_minus_1)


def omega_norm_raw(A: np.ndarray, m: MetricSpec) -> float:
    """Weighted coefficient norm sqrt(sum l_k c_k²), with no prefactor.

    With unit weights this equals the HS norm of the traceless part of A.
    Complexity integrands use this raw norm together with one global
    1/sqrt(d²-1) factor; see the geodesic module.
    """
    a = vectorize(A, m.basis).coefficients
    return float(np.sqrt(np.sum(m.weights * a * a)))


def traceless_hs_norm(A: np.ndarray) -> float:
    """HS norm of A - (Tr A / d) I, without needing a basis."""
    A = np.asarray(A)
    d = A.shape[0]
    sq = hs_norm(A) ** 2 - (abs(np.trace(A)) ** 2) / d
    return float(np.sqrt(max(sq, 0.0)))
