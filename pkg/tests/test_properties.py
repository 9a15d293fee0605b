"""Randomized invariant suites; every property runs at least 100 cases."""

import numpy as np
import pytest

from metatomo.frames import condition_number, instrument_matrix, platonic_frame
from metatomo.grating import solve_meta_atom
from metatomo.polarization import (elliptical_pair, meta_atom_matrix,
                                   permutation_symmetry, purity,
                                   random_physical_state, tensor_power)
from metatomo.reconstruct import (MaximumLikelihoodTomography,
                                  linear_reconstruct)
from metatomo.simulate import (SourceModel, TransferMatrix,
                               correlation_tensor, cross_polarized_state,
                               hom_scan, port_probabilities, sample_counts)

CASES = 100


def test_meta_atom_unitarity(rng):
    for _ in range(CASES + 20):
        theta, phi1, phi2 = rng.uniform(-10, 10, 3)
        u = meta_atom_matrix(theta, phi1, phi2)
        assert np.abs(u.conj().T @ u - np.eye(2)).max() < 1e-12


def test_elliptical_pair_orthogonality(rng):
    for _ in range(CASES):
        alpha, beta = rng.uniform(-np.pi, np.pi, 2)
        psi, psi_tilde = elliptical_pair(alpha, beta)
        assert abs(np.vdot(psi_tilde, psi)) < 1e-14
        assert np.vdot(psi, psi).real == pytest.approx(1.0, abs=1e-14)


def test_purity_unitary_invariance(rng):
    for _ in range(CASES):
        rho = random_physical_state(1, rng)
        u = meta_atom_matrix(*rng.uniform(-3, 3, 3))
        assert purity(u @ rho @ u.conj().T) == pytest.approx(purity(rho), abs=1e-12)
        ket = elliptical_pair(*rng.uniform(0, np.pi, 2))[0]
        assert purity(np.outer(ket, ket.conj())) == pytest.approx(1.0, abs=1e-12)


def test_concurrence_local_unitary_invariance(rng):
    from metatomo.polarization import concurrence
    for _ in range(CASES):
        rho = random_physical_state(2, rng, symmetric=False)
        ua = meta_atom_matrix(*rng.uniform(-3, 3, 3))
        ub = meta_atom_matrix(*rng.uniform(-3, 3, 3))
        local = np.kron(ua, ub)
        rotated = local @ rho @ local.conj().T
        assert concurrence(rotated) == pytest.approx(concurrence(rho), abs=1e-10)


def test_tensor_power_row_structure(six_port, rng):
    cube = tensor_power(six_port.rows, 3, max_rows=4096)
    for _ in range(CASES):
        a, b, c = rng.integers(0, 6, 3)
        row = np.kron(np.kron(six_port.rows[a], six_port.rows[b]), six_port.rows[c])
        assert np.allclose(cube[36 * a + 6 * b + c], row, atol=1e-14)


def test_correlation_gauge_invariance(six_port, rng):
    rho = cross_polarized_state(0.58)
    reference = correlation_tensor(six_port, rho, 2)
    for _ in range(CASES):
        phases = np.exp(1j * rng.uniform(0, 2 * np.pi, 6))
        gauged = TransferMatrix(six_port.rows * phases[:, None])
        shifted = correlation_tensor(gauged, rho, 2)
        for key, value in reference.values.items():
            assert shifted.values[key] == pytest.approx(value, abs=1e-12)


def test_correlation_scale_covariance(six_port, rng):
    for _ in range(CASES):
        n = int(rng.integers(1, 3))
        rho = random_physical_state(n, rng)
        xi = rng.uniform(0.2, 3.0) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        base = correlation_tensor(six_port, rho, n)
        scaled = correlation_tensor(six_port.scaled(xi), rho, n)
        factor = abs(xi) ** (2 * n)
        for key, value in base.values.items():
            assert scaled.values[key] == pytest.approx(factor * value, rel=1e-10)


def test_correlation_reduces_to_port_probabilities(six_port, rng):
    for _ in range(CASES):
        rho = random_physical_state(1, rng)
        corr = correlation_tensor(six_port, rho, 1)
        probs = port_probabilities(six_port, rho)
        assert np.allclose([corr.values[(a,)] for a in range(6)], probs,
                           atol=1e-12)


def test_correlations_of_symmetric_states_are_nonnegative(six_port, rng):
    for _ in range(CASES):
        rho = random_physical_state(2, rng, symmetric=True)
        assert permutation_symmetry(rho)[0]
        raw = correlation_tensor(six_port, rho, 2)
        assert min(raw.values.values()) >= -1e-12


def test_linear_inversion_is_left_inverse_of_forward(six_port, rng):
    for _ in range(CASES):
        n = int(rng.integers(1, 3))
        rho = random_physical_state(n, rng)
        corr = correlation_tensor(six_port, rho, n)
        assert np.abs(linear_reconstruct(six_port, corr) - rho).max() < 1e-9


def test_platonic_rotation_invariance(rng):
    for i in range(CASES):
        m = (6, 8, 12, 20)[i % 4]
        quat = rng.normal(size=4)
        quat /= np.linalg.norm(quat)
        kappa = condition_number(instrument_matrix(platonic_frame(m, rotation=quat)))
        assert kappa == pytest.approx(np.sqrt(3), abs=1e-10)


def test_hom_scan_limits(six_port, rng):
    incoherent = cross_polarized_state(0.0)
    pair_ports = (0, 4)
    small = TransferMatrix(six_port.rows[list(pair_ports)])
    far_reference = correlation_tensor(small, incoherent, 2).values[(0, 1)]
    for _ in range(CASES):
        eta0 = rng.uniform(-1.0, 1.0)
        sigma = rng.uniform(0.2, 3.0)
        source = SourceModel(eta0=eta0, sigma_tau=sigma)
        scan = hom_scan(six_port, pair_ports, source,
                        [-8 * sigma, 0.0, 8 * sigma])
        matched = correlation_tensor(
            small, cross_polarized_state(eta0), 2).values[(0, 1)]
        assert scan[1, 1] == pytest.approx(matched, abs=1e-12)
        assert scan[0, 1] == pytest.approx(far_reference, abs=1e-6)
        assert scan[2, 1] == pytest.approx(far_reference, abs=1e-6)


def test_meta_atom_solutions_preserve_power(rng):
    for _ in range(CASES):
        alpha = rng.uniform(0.1, np.pi / 2 - 0.1)
        beta = rng.uniform(0.1, np.pi - 0.1)
        theta = rng.uniform(0, np.pi)
        atom, gamma = solve_meta_atom((alpha, beta), theta)
        u = atom.matrix
        assert np.abs(u.conj().T @ u - np.eye(2)).max() < 1e-12
        psi, psi_tilde = elliptical_pair(alpha, beta)
        assert abs(np.vdot(u @ psi_tilde, u @ psi)) < 1e-12
        psi_rev, _ = elliptical_pair(alpha, -beta)
        assert abs(abs(np.vdot(psi_rev, u @ psi)) - 1.0) < 1e-10


def test_instrument_rows_stay_physical(rng):
    for _ in range(CASES):
        kets = rng.normal(size=(5, 2)) + 1j * rng.normal(size=(5, 2))
        rows = instrument_matrix(kets)
        radius = np.linalg.norm(rows[:, 1:], axis=1)
        assert np.all(radius <= rows[:, 0] * (1 + 1e-12) + 1e-12)


def test_sampling_deterministic_and_order_free(six_port, rng):
    expected = correlation_tensor(six_port, cross_polarized_state(0.58), 2)
    for seed in range(CASES):
        a = sample_counts(expected, shots=500.0, seed=seed)
        b = sample_counts(expected, shots=500.0, seed=seed)
        assert a.values == b.values
        # key is the tuple itself, so insertion order cannot matter
        shuffled = dict(reversed(list(expected.values.items())))
        c = sample_counts(type(expected)(2, 6, shuffled), shots=500.0, seed=seed)
        assert c.values == a.values


def test_sampling_matches_poisson_statistics(six_port):
    expected = correlation_tensor(six_port, cross_polarized_state(0.58), 2)
    shots = 1e8
    keys = [(0, 5), (0, 4), (2, 3)]
    for seed in range(CASES):
        counts = sample_counts(expected, shots=shots, seed=seed)
        for key in keys:
            mean = shots * expected.values[key]
            assert abs(counts.values[key] - mean) < 5 * np.sqrt(mean)


def test_mle_loglikelihood_monotone_over_random_runs(six_port, rng):
    estimator = MaximumLikelihoodTomography(six_port)
    for _ in range(CASES):
        rho = random_physical_state(1, rng)
        expected = correlation_tensor(six_port, rho, 1)
        counts = sample_counts(expected, shots=rng.uniform(50, 500),
                               seed=int(rng.integers(0, 2**32)))
        if counts.total() == 0:
            continue
        estimator.fit(counts)
        trace = estimator.log_likelihood_trace_
        slack = 1e-9 * np.maximum(np.abs(trace[:-1]), 1.0)
        assert np.all(np.diff(trace) >= -slack)
