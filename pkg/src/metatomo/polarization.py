"""Complex polarization algebra: Jones vectors, Stokes decompositions,
multi-photon density matrices, and state-quality metrics.

Conventions
-----------
* Jones vectors are (cH, cV) amplitude pairs in the horizontal/vertical basis.
* Stokes components follow the ordering rho = S0*I + S1*sz + S2*sx + S3*sy,
  so S1 is the H/V balance, S2 the diagonal balance, S3 the circular balance.
  The Poincare 3-vector of a unit ket is (cos 2a, sin 2a cos b, sin 2a sin b)
  for psi = [cos a, e^{ib} sin a].
* Multi-photon states live in the full ordered-slot basis (|HH>, |HV>, |VH>,
  |VV> for two photons); permutation symmetry is validated, not factored out.

All functions are pure; arrays are never mutated in place.
"""

import itertools
import math
import warnings

import numpy as np
from scipy.linalg import sqrtm

from .validation import as_density_matrix, as_jones_vector, photon_number

# Pauli set in the instrument ordering (identity, sz, sx, sy).
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_BASIS = (np.eye(2, dtype=complex), SIGMA_Z, SIGMA_X, SIGMA_Y)

# Common unit kets.
H = np.array([1, 0], dtype=complex)
V = np.array([0, 1], dtype=complex)
D = np.array([1, 1], dtype=complex) / np.sqrt(2)
A = np.array([1, -1], dtype=complex) / np.sqrt(2)
R = np.array([1, 1j], dtype=complex) / np.sqrt(2)
L = np.array([1, -1j], dtype=complex) / np.sqrt(2)

PSD_EIGENVALUE_FLOOR = -1e-10


def rotation_matrix(theta):
    """Real rotation [[cos, -sin], [sin, cos]] acting on Jones vectors."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def meta_atom_matrix(theta, phi1, phi2):
    """Jones matrix of a birefringent element with fast axis at ``theta``.

    Returns R(theta) @ diag(e^{i phi1}, e^{i phi2}) @ R(-theta); phi1 and
    phi2 are the phases picked up along the fast and slow axes. The result
    is unitary for any real inputs.
    """
    if not (np.isfinite(theta) and np.isfinite(phi1) and np.isfinite(phi2)):
        raise ValueError("meta-atom parameters must be finite")
    rot = rotation_matrix(theta)
    return rot @ np.diag([np.exp(1j * phi1), np.exp(1j * phi2)]) @ rot.T


def elliptical_pair(alpha, beta):
    """Orthogonal elliptical kets psi = [cos a, e^{ib} sin a] and its partner.

    The partner is psi_tilde = [-sin a, e^{ib} cos a]; <psi_tilde|psi> = 0
    exactly for any (alpha, beta).
    """
    psi = np.array([np.cos(alpha), np.exp(1j * beta) * np.sin(alpha)])
    psi_tilde = np.array([-np.sin(alpha), np.exp(1j * beta) * np.cos(alpha)])
    return psi, psi_tilde


def projector(ket):
    """Rank-1 projector |ket><ket| (not normalized if the ket is not)."""
    ket = np.asarray(ket, dtype=complex)
    return np.outer(ket, ket.conj())


def stokes_from_density(rho):
    """Stokes 4-vector (S0..S3) of a single-photon density matrix.

    Inverts rho = S0*I + S1*sz + S2*sx + S3*sy; Sk = Tr(rho sigma_k)/2.
    """
    rho = as_density_matrix(rho, n_photons=1)
    return np.array([np.trace(rho @ s).real / 2 for s in PAULI_BASIS])


def density_from_stokes(stokes):
    """Single-photon density matrix from a Stokes 4-vector (exact inverse
    of :func:`stokes_from_density`).

    Warns when S1^2+S2^2+S3^2 > S0^2: such vectors come out of noisy linear
    inversion and do not correspond to a physical state.
    """
    stokes = np.asarray(stokes, dtype=float).reshape(4)
    if stokes[1] ** 2 + stokes[2] ** 2 + stokes[3] ** 2 > stokes[0] ** 2 + 1e-12:
        warnings.warn("Stokes vector lies outside the physical ball (|s| > S0)",
                      stacklevel=2)
    return sum(c * s for c, s in zip(stokes, PAULI_BASIS))


def poincare_from_jones(ket):
    """Unit Poincare 3-vector (sz, sx, sy components) of a pure ket."""
    ket = as_jones_vector(ket)
    p = projector(ket / np.linalg.norm(ket))
    return np.array([np.trace(p @ s).real for s in PAULI_BASIS[1:]])


def jones_from_poincare(vec):
    """Unit ket whose Poincare 3-vector is ``vec`` (normalized internally)."""
    vec = np.asarray(vec, dtype=float).reshape(3)
    vec = vec / np.linalg.norm(vec)
    alpha = np.arccos(np.clip(vec[0], -1.0, 1.0)) / 2
    beta = np.arctan2(vec[2], vec[1])
    return np.array([np.cos(alpha), np.exp(1j * beta) * np.sin(alpha)])


def tensor_power(matrix, n, max_rows=4096):
    """Kronecker power ``matrix x ... x matrix`` with ``n`` factors."""
    matrix = np.asarray(matrix)
    if n < 1:
        raise ValueError(f"tensor power requires n >= 1, got {n}")
    if matrix.shape[0] ** n > max_rows:
        raise ValueError(
            f"tensor power would have {matrix.shape[0]**n} rows, "
            f"above the cap of {max_rows}")
    out = matrix
    for _ in range(n - 1):
        out = np.kron(out, matrix)
    return out


def purity(rho):
    """Tr(rho^2) / Tr(rho)^2; 1 for pure states, 1/dim for maximally mixed."""
    rho = as_density_matrix(rho)
    tr = np.trace(rho).real
    if abs(tr) < 1e-300:
        raise ValueError("purity is undefined for zero-trace input")
    return float(np.trace(rho @ rho).real / tr**2)


def concurrence(rho):
    """Two-photon entanglement monotone in [0, 1].

    max(0, l1 - l2 - l3 - l4) with l_i the decreasing square roots of the
    eigenvalues of rho (sy x sy) rho* (sy x sy).
    """
    rho = as_density_matrix(rho, n_photons=2, require_normalized=True)
    yy = np.kron(SIGMA_Y, SIGMA_Y)
    lam = np.linalg.eigvals(rho @ yy @ rho.conj() @ yy)
    lam = np.sort(np.sqrt(np.clip(lam.real, 0.0, None)))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def fidelity(rho, sigma):
    """Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 in [0, 1]."""
    rho = as_density_matrix(rho)
    sigma = as_density_matrix(sigma)
    if rho.shape != sigma.shape:
        raise ValueError(f"dimension mismatch: {rho.shape} vs {sigma.shape}")
    root = sqrtm(rho)
    inner = sqrtm(root @ sigma @ root)
    val = float(np.trace(inner).real ** 2)
    return min(max(val, 0.0), 1.0)


def slot_permutation_operators(n_photons):
    """Unitary representations of all photon-slot permutations on (C^2)^n."""
    d = 2**n_photons
    ops = []
    for perm in itertools.permutations(range(n_photons)):
        mat = np.zeros((d, d))
        for idx in range(d):
            bits = [(idx >> (n_photons - 1 - i)) & 1 for i in range(n_photons)]
            permuted = [bits[perm[i]] for i in range(n_photons)]
            j = sum(b << (n_photons - 1 - i) for i, b in enumerate(permuted))
            mat[j, idx] = 1.0
        ops.append(mat)
    return ops


def permutation_symmetry(rho, tol=1e-10):
    """Whether rho commutes with every photon-slot permutation.

    Returns (is_symmetric, max_violation); the violation is the largest
    entry magnitude of P rho P^T - rho over all slot permutations. Any
    single-photon matrix is trivially symmetric.
    """
    rho = as_density_matrix(rho)
    n = photon_number(rho)
    worst = 0.0
    for op in slot_permutation_operators(n):
        worst = max(worst, float(np.abs(op @ rho @ op.T - rho).max()))
    return worst <= tol, worst


def symmetrize(rho):
    """Project rho onto the permutation-commutant by group averaging.

    Preserves Hermiticity, trace, and positive semidefiniteness.
    """
    rho = as_density_matrix(rho)
    ops = slot_permutation_operators(photon_number(rho))
    return sum(op @ rho @ op.T for op in ops) / len(ops)


def project_physical(rho):
    """Nearest physical state: Hermitize, clip negative eigenvalues, renormalize.

    Eigenvalues above the numerical floor ``-1e-10`` are treated as rounding
    noise and clipped to zero. A zero-trace result falls back to the
    maximally mixed state.
    """
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[0]
    rho = (rho + rho.conj().T) / 2
    vals, vecs = np.linalg.eigh(rho)
    vals = np.clip(vals, 0.0, None)
    out = (vecs * vals) @ vecs.conj().T
    tr = np.trace(out).real
    if tr <= 1e-300:
        return np.eye(d, dtype=complex) / d
    return out / tr


def random_physical_state(n_photons, rng, symmetric=True, rank=None):
    """Random trace-one PSD matrix on n photons (Wishart construction).

    With ``symmetric=True`` the result is projected onto the permutation
    commutant, the support of states of indistinguishable photons.
    """
    d = 2**n_photons
    rank = d if rank is None else rank
    a = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = a @ a.conj().T
    if symmetric and n_photons > 1:
        rho = symmetrize(rho)
    return rho / np.trace(rho).real


def kets_equivalent(a, b, tol=1e-10):
    """Whether two kets coincide up to a global phase: |<a|b>| = |a||b|."""
    a = as_jones_vector(a)
    b = as_jones_vector(b)
    overlap = abs(np.vdot(a, b)) / (np.linalg.norm(a) * np.linalg.norm(b))
    return bool(abs(overlap - 1.0) <= tol)


def factorial(n):
    """Exact integer factorial (re-export for callers building count formulas)."""
    return math.factorial(n)
