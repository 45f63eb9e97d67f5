"""System+environment channels and their complexity measures.

Kraus extraction from the joint propagator, channel application with an
independent partial-trace route, channel and noise complexity for
constant and piecewise-constant generators, the noise sandwich bounds,
and the commuting-dephasing perturbative benchmark.

Conventions (also emitted in every CLI report):
- The system Hamiltonian inside every complexity formula means
  H_S ⊗ I on the joint space, and all complexities use d = d_S * d_E.
- The joint propagator is exp(-i t H_tot) wherever it appears,
  including inside the Kraus sandwich.
- For time-dependent generators, the squared-norm symbol is read as the
  square of the metric norm of H(s), not a norm of H(s)^2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geodesic import (
    GeodesicEstimate,
    PiecewiseConstantPath,
    estimate_cc_distance,
    geometric_complexity_const,
)
from .operators import (
    density,
    embed_system,
    hermitian,
    hs_norm,
    matrix_abs,
    matrix_exp_unitary,
    partial_trace_env,
    sqrt_abs_diff,
    tensor,
    unitary,
)
from .pauli import MetricSpec, omega_norm_raw

KRAUS_COMPLETENESS_TOL = 1e-9
PROB_TOL = 1e-9
COMMUTE_TOL = 1e-10
PSD_TOL = -1e-10


@dataclass(frozen=True)
class ChannelSpec:
    """System+environment split defining the reduced dynamics.

    env_probs are the eigenweights of the initial environment state in
    the env_basis columns; env_basis defaults to the standard basis and
    env_probs to the uniform distribution.
    """

    d_S: int
    d_E: int
    H_S: np.ndarray
    H_I: np.ndarray
    H_E: np.ndarray
    env_probs: np.ndarray | None = None
    env_basis: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.d_S < 1 or self.d_E < 1:
            raise ValueError("Both dimensions must be positive.")
        H_S = hermitian(self.H_S)
        H_I = hermitian(self.H_I)
        H_E = hermitian(self.H_E)
        if H_S.shape[0] != self.d_S:
            raise ValueError(f"H_S has dim {H_S.shape[0]}, expected {self.d_S}.")
        if H_E.shape[0] != self.d_E:
            raise ValueError(f"H_E has dim {H_E.shape[0]}, expected {self.d_E}.")
        if H_I.shape[0] != self.d_S * self.d_E:
            raise ValueError(
                f"H_I has dim {H_I.shape[0]}, expected {self.d_S * self.d_E}."
            )
        if self.env_probs is None:
            p = np.full(self.d_E, 1.0 / self.d_E)
        else:
            p = np.asarray(self.env_probs, dtype=float)
        if p.shape != (self.d_E,):
            raise ValueError(f"Need {self.d_E} environment probabilities, got {p.shape}.")
        if np.any(p < 0):
            raise ValueError(f"Environment probabilities must be >= 0, min {p.min()!r}.")
        if abs(float(p.sum()) - 1.0) > PROB_TOL:
            raise ValueError(f"Environment probabilities sum to {p.sum()!r}, not 1.")
        B = np.eye(self.d_E, dtype=np.complex128) if self.env_basis is None else unitary(self.env_basis)
        if B.shape[0] != self.d_E:
            raise ValueError(f"env_basis has dim {B.shape[0]}, expected {self.d_E}.")
        object.__setattr__(self, "H_S", H_S)
        object.__setattr__(self, "H_I", H_I)
        object.__setattr__(self, "H_E", H_E)
        object.__setattr__(self, "env_probs", p)
        object.__setattr__(self, "env_basis", B)

    @property
    def dim(self) -> int:
        return self.d_S * self.d_E

    def h_system_embedded(self) -> np.ndarray:
        return embed_system(self.H_S, self.d_E)

    def h_total(self) -> np.ndarray:
        return (
            self.h_system_embedded()
            + self.H_I
            + tensor(np.eye(self.d_S), self.H_E)
        )

    def env_state(self) -> np.ndarray:
        B = self.env_basis
        return (B * self.env_probs) @ B.conj().T


@dataclass(frozen=True)
class KrausSet:
    """Environment-indexed blocks of the joint propagator.

    operators[j, i] = sqrt(p_i) <E_j| exp(-i t H_tot) |E_i>, flattened in
    row-major (j, i) order.
    """

    operators: np.ndarray  # (d_E^2, d_S, d_S)
    t: float


def kraus_operators(spec: ChannelSpec, t: float) -> KrausSet:
    """Extract the Kraus family at time t; completeness is enforced."""
    U = matrix_exp_unitary(spec.h_total(), t)
    R = U.reshape(spec.d_S, spec.d_E, spec.d_S, spec.d_E)
    B = spec.env_basis
    # blocks[j, i] = <E_j| U |E_i> acting on the system factor
    blocks = np.einsum("ej,setf,fi->jist", B.conj(), R, B)
    M = blocks * np.sqrt(spec.env_probs)[None, :, None, None]
    M = M.reshape(spec.d_E**2, spec.d_S, spec.d_S)
    total = np.einsum("kba,kbc->ac", M.conj(), M)
    dev = float(np.max(np.abs(total - np.eye(spec.d_S))))
    if dev > KRAUS_COMPLETENESS_TOL:
        raise ValueError(
            f"Kraus completeness violated: max |sum M†M - I| = {dev:.3e}."
        )
    return KrausSet(operators=M, t=float(t))


def apply_channel(spec: ChannelSpec, t: float, rho_S: np.ndarray) -> np.ndarray:
    """Reduced dynamics via the Kraus sum."""
    rho_S = density(rho_S)
    if rho_S.shape[0] != spec.d_S:
        raise ValueError(f"State dim {rho_S.shape[0]} does not match d_S={spec.d_S}.")
    M = kraus_operators(spec, t).operators
    out = np.einsum("kab,bc,kdc->ad", M, rho_S, M.conj())
    return density(out)


def apply_channel_via_joint(spec: ChannelSpec, t: float, rho_S: np.ndarray) -> np.ndarray:
    """Independent route: evolve the joint product state, trace out the
    environment. Kept separate from the Kraus route on purpose so the
    two stay cross-checkable."""
    rho_S = density(rho_S)
    joint = tensor(rho_S, spec.env_state())
    U = matrix_exp_unitary(spec.h_total(), t)
    evolved = U @ joint @ U.conj().T
    return partial_trace_env(evolved, spec.d_S, spec.d_E)


def channel_complexity_const(spec: ChannelSpec, t: float) -> float:
    """Joint complexity minus the complexity of the residual generator
    sqrt(|H_tot^2 - (H_S ⊗ I)^2|)."""
    H_tot = spec.h_total()
    H_Se = spec.h_system_embedded()
    G_tot = geometric_complexity_const(H_tot, t, None)
    G_resid = geometric_complexity_const(sqrt_abs_diff(H_tot, H_Se), t, None)
    return G_tot - G_resid


def noiseless_complexity(spec: ChannelSpec, t: float) -> float:
    return geometric_complexity_const(spec.h_system_embedded(), t, None)


def noise_complexity(spec: ChannelSpec, t: float) -> float:
    """Absolute gap between channel complexity and the noiseless value."""
    return abs(channel_complexity_const(spec, t) - noiseless_complexity(spec, t))


def noise_complexity_bounds(
    spec: ChannelSpec,
    t: float,
    segments: int = 1,
    restarts: int = 1,
    seed: int = 0,
) -> dict:
    """Lower and upper envelope for the noise complexity.

    lower: complexity of exp(-it(sqrt(|H_tot^2 - H_Se^2|) + |H_Se|))
    minus the joint complexity. upper: noiseless complexity minus the
    estimated geodesic distance between the joint propagator and the
    residual propagator. The distance estimate is itself an upper bound
    on the true distance, which makes the reported upper value
    conservative (smaller); that is flagged here and in reports. If the
    estimate fails, upper is None and lower is still returned.
    """
    H_tot = spec.h_total()
    H_Se = spec.h_system_embedded()
    resid = sqrt_abs_diff(H_tot, H_Se)
    lower = geometric_complexity_const(resid + matrix_abs(H_Se), t, None) - (
        geometric_complexity_const(H_tot, t, None)
    )
    upper = None
    estimate: GeodesicEstimate | None = None
    try:
        estimate = estimate_cc_distance(
            matrix_exp_unitary(H_tot, t),
            matrix_exp_unitary(resid, t),
            None,
            segments=segments,
            restarts=restarts,
            seed=seed,
            search_sweeps=25,
            search_step_tol=1e-6,
        )
        upper = noiseless_complexity(spec, t) - estimate.length
    except ValueError:
        estimate = None
    return {
        "lower": lower,
        "upper": upper,
        "distance_estimate": None if estimate is None else estimate.length,
        "distance_is_upper_bound": True,
    }


@dataclass(frozen=True)
class TimeDependentSpec:
    """Per-segment split of a piecewise-constant joint generator."""

    d_S: int
    d_E: int
    segments: tuple[tuple[np.ndarray, np.ndarray, np.ndarray, float], ...]
    #: (H_S on d_S, H_I on joint, H_E on d_E, duration) per segment
    metric: MetricSpec | None = None
    split_tol: float = 1e-12

    def __post_init__(self) -> None:
        checked = []
        for k, (H_S, H_I, H_E, ds) in enumerate(self.segments):
            H_S = hermitian(H_S)
            H_I = hermitian(H_I)
            H_E = hermitian(H_E)
            if ds <= 0:
                raise ValueError(f"Segment {k} duration must be positive, got {ds!r}.")
            if H_S.shape[0] != self.d_S or H_E.shape[0] != self.d_E:
                raise ValueError(f"Segment {k} factor dimensions are wrong.")
            if H_I.shape[0] != self.d_S * self.d_E:
                raise ValueError(f"Segment {k} interaction dimension is wrong.")
            checked.append((H_S, H_I, H_E, float(ds)))
        object.__setattr__(self, "segments", tuple(checked))

    def joint_segment(self, k: int) -> tuple[np.ndarray, float]:
        H_S, H_I, H_E, ds = self.segments[k]
        H = embed_system(H_S, self.d_E) + H_I + tensor(np.eye(self.d_S), H_E)
        return H, ds

    def joint_path(self) -> PiecewiseConstantPath:
        return PiecewiseConstantPath(
            segments=tuple(self.joint_segment(k) for k in range(len(self.segments)))
        )


def _td_norm(H: np.ndarray, m: MetricSpec | None) -> float:
    return hs_norm(H) if m is None else omega_norm_raw(H, m)


def channel_complexity_td(spec: TimeDependentSpec) -> float:
    """Integrated |a - sqrt(|a^2 - b^2|)| where a is the metric norm of the
    joint generator and b the norm of the embedded system generator.

    The squared-norm symbol in the defining integrand is read as the
    square of the generator norm; with that reading a single flat
    segment whose residual H_tot^2 - H_Se^2 is sign-definite reproduces
    channel_complexity_const exactly.
    """
    d = spec.d_S * spec.d_E
    m = spec.metric
    total = 0.0
    for k in range(len(spec.segments)):
        H_S, _, _, ds = spec.segments[k]
        H_joint, _ = spec.joint_segment(k)
        a = _td_norm(H_joint, m)
        b = _td_norm(embed_system(H_S, spec.d_E), m)
        total += ds * abs(a - np.sqrt(abs(a * a - b * b)))
    return total / np.sqrt(d**2 - 1)


def noise_complexity_td(spec: TimeDependentSpec) -> float:
    """Absolute gap between the time-dependent channel complexity and the
    noiseless system path length (embedded-system convention)."""
    d = spec.d_S * spec.d_E
    m = spec.metric
    noiseless = sum(
        ds * _td_norm(embed_system(H_S, spec.d_E), m)
        for H_S, _, _, ds in spec.segments
    ) / np.sqrt(d**2 - 1)
    return abs(channel_complexity_td(spec) - noiseless)


def perturbative_example(
    H_S: np.ndarray,
    A_S: np.ndarray,
    env_energies: np.ndarray,
    weights: np.ndarray,
    eps: float,
    t: float = 1.0,
) -> dict:
    """Commuting PSD perturbation benchmark.

    The joint generator is H_S ⊗ I + eps * A_S ⊗ diag(E). The exact
    value is channel_complexity_const; the closed-form prediction is

        (t/sqrt(d^2-1)) * h * (1 - sqrt(eps) w (1 - sqrt(eps) w / 2))

    with h the HS norm of the embedded system generator and coupling
    w = sqrt(2 <A_S, H_S> <E>) / ||H_S||. The inner factor uses w/2, not
    w: the exact eps-order coefficient is c/h = h w^2 / 2, which the w/2
    form reproduces while the plain form is off by a factor 2. The outer
    sqrt(eps) coefficient fixes w itself; a leading (d^2-1) factor under
    w's square root is empirically inconsistent with the exact route and
    is not used. The match is O(eps^{3/2}) when the environment weights
    are uniform (then Tr diag(E) = d_E <E>).
    """
    H_S = hermitian(H_S)
    A_S = hermitian(A_S)
    E = np.asarray(env_energies, dtype=float)
    alpha = np.asarray(weights, dtype=float)
    if eps < 0:
        raise ValueError(f"Perturbation strength must be >= 0, got {eps!r}.")
    comm_dev = float(np.max(np.abs(H_S @ A_S - A_S @ H_S)))
    if comm_dev > COMMUTE_TOL:
        raise ValueError(f"H_S and A_S do not commute (deviation {comm_dev:.3e}).")
    for name, M in (("H_S", H_S), ("A_S", A_S)):
        w_min = float(np.linalg.eigvalsh(M)[0])
        if w_min < PSD_TOL:
            raise ValueError(f"{name} is not PSD (min eigenvalue {w_min:.3e}).")
    if np.any(E < 0):
        raise ValueError(f"Environment energies must be >= 0, min {E.min()!r}.")
    if np.any(alpha < 0) or abs(float(alpha.sum()) - 1.0) > PROB_TOL:
        raise ValueError("Weights must be a probability vector.")
    d_S = H_S.shape[0]
    d_E = E.size
    spec = ChannelSpec(
        d_S=d_S,
        d_E=d_E,
        H_S=H_S,
        H_I=eps * tensor(A_S, np.diag(E)),
        H_E=np.zeros((d_E, d_E)),
        env_probs=alpha,
    )
    exact = channel_complexity_const(spec, t)
    d = d_S * d_E
    h = np.sqrt(d_E) * hs_norm(H_S)
    mean_E = float(np.sum(alpha * E))
    inner = float(np.trace(A_S @ H_S).real)
    omega = np.sqrt(max(2.0 * inner * mean_E, 0.0)) / hs_norm(H_S)
    se = np.sqrt(eps)
    perturbative = (t / np.sqrt(d**2 - 1)) * h * (1.0 - se * omega * (1.0 - se * omega / 2.0))
    return {
        "exact": exact,
        "perturbative": perturbative,
        "omega_coupling": float(omega),
        "error": abs(exact - perturbative),
    }
