import math

import numpy as np
import pytest

from metatomo.frames import (Frame, condition_number,
                             correlation_element_count, instrument_matrix,
                             min_ports, multiphoton_condition_bound,
                             platonic_frame)
from metatomo.polarization import (A, D, H, L, R, V, kets_equivalent,
                                   poincare_from_jones,
                                   random_physical_state, stokes_from_density)
from metatomo.simulate import port_probabilities

SQRT3 = math.sqrt(3.0)


def test_platonic_frame_rejects_unsupported():
    with pytest.raises(ValueError):
        platonic_frame(7)


def test_octahedron_contains_cardinal_states():
    frame = platonic_frame(6)
    for target in (H, V, D, A, R, L):
        assert any(kets_equivalent(ket, target) for ket in frame.kets)


@pytest.mark.parametrize("m", [6, 8, 12, 20])
def test_platonic_condition_number_is_sqrt3(m):
    frame = platonic_frame(m)
    assert condition_number(instrument_matrix(frame)) == pytest.approx(SQRT3, abs=1e-9)


@pytest.mark.parametrize("m", [6, 8, 12, 20])
def test_platonic_orthogonal_pairs(m):
    kets = platonic_frame(m).kets
    for k in range(m // 2):
        assert abs(np.vdot(kets[2 * k], kets[2 * k + 1])) < 1e-12


def test_cube_geometry():
    kets = platonic_frame(8).kets
    vectors = np.array([poincare_from_jones(k) for k in kets])
    dots = np.abs(vectors @ vectors.T)
    near_third = np.abs(dots - 1 / 3) < 1e-9
    near_one = np.abs(dots - 1.0) < 1e-9
    assert np.all(near_third | near_one)
    assert near_third.any() and near_one.any()


def test_platonic_rotation_keeps_conditioning(rng):
    quat = rng.normal(size=4)
    quat /= np.linalg.norm(quat)
    frame = platonic_frame(6, rotation=quat)
    assert condition_number(instrument_matrix(frame)) == pytest.approx(SQRT3, abs=1e-10)


def test_instrument_matrix_h_v_rows():
    rows = instrument_matrix(Frame(np.array([H, V])))
    assert np.allclose(rows, [[1, 1, 0, 0], [1, -1, 0, 0]], atol=1e-14)


def test_instrument_matrix_circular_rows():
    rows = instrument_matrix(Frame(np.array([R, L])))
    assert np.allclose(rows, [[1, 0, 0, 1], [1, 0, 0, -1]], atol=1e-14)


def test_instrument_matrix_dual_path(six_port, rng):
    # row_a . S must equal u_a^dag rho u_a for arbitrary physical rho
    rows = instrument_matrix(six_port)
    for _ in range(20):
        rho = random_physical_state(1, rng)
        probs = port_probabilities(six_port, rho)
        assert np.allclose(rows @ stokes_from_density(rho), probs, atol=1e-12)


def test_instrument_rows_are_physical(six_port):
    rows = instrument_matrix(six_port)
    radius = np.linalg.norm(rows[:, 1:], axis=1)
    assert np.all(radius <= rows[:, 0] + 1e-12)
    # projective (rank-1) rows saturate the bound
    assert np.allclose(radius, rows[:, 0], atol=1e-12)


def test_condition_number_identity_and_scaling(rng):
    assert condition_number(np.eye(4)) == pytest.approx(1.0, abs=1e-14)
    mat = rng.normal(size=(7, 4))
    assert condition_number(3.7 * mat) == pytest.approx(condition_number(mat), rel=1e-10)


def test_condition_number_singular_sentinel():
    mat = np.zeros((5, 4))
    mat[:, 0] = 1.0
    assert condition_number(mat) == math.inf


def test_condition_number_published_values(six_port):
    # regression values for the calibrated device (raw and per-port normalized)
    raw = condition_number(instrument_matrix(six_port))
    assert raw == pytest.approx(3.0779342903, abs=1e-8)
    unit_kets = six_port.kets / np.linalg.norm(six_port.kets, axis=1)[:, None]
    normalized = condition_number(instrument_matrix(Frame(unit_kets)))
    assert normalized == pytest.approx(1.9103381737, abs=1e-8)
    assert raw >= SQRT3 and normalized >= SQRT3


def test_multiphoton_condition_bound():
    assert multiphoton_condition_bound(1) == pytest.approx(SQRT3, abs=1e-15)
    assert multiphoton_condition_bound(2) == pytest.approx(3.0, abs=1e-12)
    assert multiphoton_condition_bound(4) == pytest.approx(9.0, abs=1e-12)
    with pytest.raises(ValueError):
        multiphoton_condition_bound(0)


def test_min_ports_indistinguishable():
    assert min_ports(1, "indistinguishable") == 4
    assert min_ports(3, "indistinguishable") == 6
    for n in range(1, 18):
        assert min_ports(n, "indistinguishable") == n + 3


def test_min_ports_distinguishable():
    assert min_ports(7, "distinguishable") == 8
    # the defining inequality holds at the returned M and fails at M - 1
    for n in range(1, 15):
        m = min_ports(n, "distinguishable")
        assert math.factorial(m) // math.factorial(m - n) >= 4**n
        if m - 1 >= n:
            assert math.factorial(m - 1) // math.factorial(m - 1 - n) < 4**n


def test_min_ports_rejects_bad_input():
    with pytest.raises(ValueError):
        min_ports(0)
    with pytest.raises(ValueError):
        min_ports(2, "telepathic")


def test_correlation_element_count():
    assert correlation_element_count(6, 2, "indistinguishable") == 15
    assert correlation_element_count(8, 3, "distinguishable") == 336
    for m in (4, 6, 9):
        assert correlation_element_count(m, 1, "indistinguishable") == m
        assert correlation_element_count(m, 1, "distinguishable") == m
    with pytest.raises(ValueError):
        correlation_element_count(4, 5)
