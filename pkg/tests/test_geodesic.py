import numpy as np
import pytest
import scipy.linalg

from conftest import rand_hermitian, rand_unitary

from channelgeo.geodesic import (
    PiecewiseConstantPath,
    check_cost_chain,
    constant_path,
    cost_l1,
    estimate_cc_distance,
    geometric_complexity_const,
    log_distance,
    path_endpoint,
    path_length,
    principal_log_generator,
)
from channelgeo.operators import hs_norm, matrix_abs
from channelgeo.pauli import MetricSpec, build_pauli_basis

SIGMA_Z = np.diag([1.0, -1.0]).astype(np.complex128)


def test_sigma_z_closed_form():
    # ||sigma_z||_HS = sqrt(2), d = 2, so the value is sqrt(2/3)
    val = geometric_complexity_const(SIGMA_Z, 1.0)
    assert abs(val - np.sqrt(2.0 / 3.0)) < 1e-14


def test_constant_path_matches_closed_form(rng):
    for d in (2, 3, 4):
        H = rand_hermitian(rng, d)
        t = float(rng.uniform(0.1, 3.0))
        p = constant_path(H, t)
        assert abs(path_length(p) - geometric_complexity_const(H, t)) < 1e-12


def test_traceful_generator_counts_trace_part():
    H = np.diag([2.0, 2.0]).astype(np.complex128)
    val = geometric_complexity_const(H, 1.0)
    assert abs(val - hs_norm(H) / np.sqrt(3.0)) < 1e-14
    assert val > 0.0


def test_abs_spectrum_invariance(rng):
    for _ in range(20):
        H = rand_hermitian(rng, 3)
        t = float(rng.uniform(0.0, 2.0))
        a = geometric_complexity_const(H, t)
        b = geometric_complexity_const(matrix_abs(H), t)
        assert abs(a - b) < 1e-12


def test_negative_time_rejected():
    with pytest.raises(ValueError):
        geometric_complexity_const(SIGMA_Z, -0.1)


def test_path_validation():
    with pytest.raises(ValueError):
        PiecewiseConstantPath(segments=((SIGMA_Z, 0.0),))
    with pytest.raises(ValueError):
        PiecewiseConstantPath(segments=((SIGMA_Z, 1.0), (np.eye(3), 1.0)))


def test_path_endpoint_ordering(rng):
    A = rand_hermitian(rng, 3)
    B = rand_hermitian(rng, 3)
    p = PiecewiseConstantPath(segments=((A, 0.4), (B, 0.9)))
    oracle = scipy.linalg.expm(-0.9j * B) @ scipy.linalg.expm(-0.4j * A)
    assert np.abs(path_endpoint(p) - oracle).max() < 1e-12


def test_path_length_sums_segments(rng):
    A = rand_hermitian(rng, 2)
    B = rand_hermitian(rng, 2)
    p = PiecewiseConstantPath(segments=((A, 0.3), (B, 0.5)))
    expect = (0.3 * hs_norm(A) + 0.5 * hs_norm(B)) / np.sqrt(3.0)
    assert abs(path_length(p) - expect) < 1e-12


def test_principal_log_round_trip(rng):
    for d in (2, 4):
        U = rand_unitary(rng, d)
        G = principal_log_generator(U)
        assert np.abs(scipy.linalg.expm(-1j * G) - U).max() < 1e-10
        evals = np.linalg.eigvalsh(G)
        assert evals.min() >= -np.pi - 1e-12
        assert evals.max() < np.pi + 1e-12


def test_principal_log_branch_at_minus_one():
    U = np.diag([-1.0 + 0.0j, 1.0 + 0.0j])
    G = principal_log_generator(U)
    evals = np.sort(np.linalg.eigvalsh(G))
    assert abs(evals[0] + np.pi) < 1e-12
    assert abs(evals[1]) < 1e-12


def test_log_distance_properties(rng):
    U = rand_unitary(rng, 3)
    W = rand_unitary(rng, 3)
    V = rand_unitary(rng, 3)
    A = rand_unitary(rng, 3)
    assert log_distance(U, U) < 1e-12
    d0 = log_distance(U, W)
    assert abs(log_distance(A @ U, A @ W) - d0) < 1e-10
    assert abs(log_distance(U @ A, W @ A) - d0) < 1e-10
    assert d0 <= log_distance(U, V) + log_distance(V, W) + 1e-10


def test_log_distance_shape_mismatch():
    with pytest.raises(ValueError):
        log_distance(np.eye(2), np.eye(3))


def test_estimate_recovers_sigma_z_geodesic():
    U = scipy.linalg.expm(-1j * SIGMA_Z)
    est = estimate_cc_distance(
        np.eye(2), U, segments=4, restarts=2, search_sweeps=25, search_step_tol=1e-6
    )
    assert est.endpoint_error <= 1e-6
    assert est.length <= np.sqrt(2.0 / 3.0) + 1e-6
    assert est.length >= log_distance(np.eye(2), U) - 1e-9
    assert len(est.path.segments) == 4
    assert est.restarts_used == 2


def test_estimate_dominates_log_distance(rng):
    U = rand_unitary(rng, 2)
    est = estimate_cc_distance(
        np.eye(2), U, segments=4, restarts=2, search_sweeps=25, search_step_tol=1e-6
    )
    assert est.endpoint_error <= 1e-6
    assert est.length >= log_distance(np.eye(2), U) - 1e-9


def test_estimate_weighted_not_above_log_init(rng):
    basis = build_pauli_basis(1)
    m = MetricSpec(basis=basis, weights=np.array([1.0, 1.0, 4.0]))
    U = rand_unitary(rng, 2)
    est = estimate_cc_distance(
        np.eye(2), U, m=m, segments=4, restarts=2,
        search_sweeps=25, search_step_tol=1e-6,
    )
    G = principal_log_generator(U)
    assert est.endpoint_error <= 1e-6
    assert est.length <= path_length(constant_path(G, 1.0), m) + 1e-9
    # reported length agrees with the public path functional
    assert abs(est.length - path_length(est.path, m)) < 1e-9


def test_estimate_argument_guards():
    with pytest.raises(ValueError):
        estimate_cc_distance(np.eye(2), np.eye(2), segments=0)
    with pytest.raises(ValueError):
        estimate_cc_distance(np.eye(2), np.eye(2), restarts=0)
    with pytest.raises(ValueError):
        estimate_cc_distance(np.eye(2), np.eye(3))


def test_cost_l1_hand_example():
    basis = build_pauli_basis(1)
    sx = np.array([[0, 1], [1, 0]], dtype=np.complex128)
    H = (1.5 * sx + 2.0 * SIGMA_Z) / np.sqrt(2.0)
    p = constant_path(H, 2.0)
    assert abs(cost_l1(p, basis) - 2.0 * (1.5 + 2.0)) < 1e-12


def test_cost_chain_holds(rng):
    basis = build_pauli_basis(2)
    for _ in range(10):
        segs = tuple(
            (rand_hermitian(rng, 4), float(rng.uniform(0.1, 1.0))) for _ in range(3)
        )
        rec = check_cost_chain(PiecewiseConstantPath(segments=segs), basis)
        assert rec["bound_holds"]
        assert rec["cost"] <= rec["bound"] + 1e-12
