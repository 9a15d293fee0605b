"""Input validation helpers shared across modules.

All helpers coerce to numpy arrays, check the structural invariants, and
return the validated array so they can be used inline, mirroring the
``check_array`` idiom of scikit-learn estimators.
"""

import numpy as np

HERMITICITY_TOL = 1e-12
PSD_TOL = 1e-10


def as_jones_vector(v, name="state"):
    """Validate a single-photon amplitude pair; returns a (2,) complex array."""
    v = np.asarray(v, dtype=complex).reshape(-1)
    if v.shape != (2,):
        raise ValueError(f"{name} must have exactly 2 complex amplitudes, got shape {v.shape}")
    if not np.all(np.isfinite(v.view(float))):
        raise ValueError(f"{name} contains non-finite amplitudes")
    if np.vdot(v, v).real <= 0.0:
        raise ValueError(f"{name} has zero norm")
    return v


def as_jones_matrix(m, name="operator"):
    """Validate a 2x2 complex polarization operator."""
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError(f"{name} must be 2x2, got shape {m.shape}")
    if not np.all(np.isfinite(m.view(float))):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def photon_number(rho):
    """Number of photons encoded by a 2^N x 2^N matrix."""
    rho = np.asarray(rho)
    d = rho.shape[0]
    if rho.ndim != 2 or rho.shape[1] != d:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    n = int(round(np.log2(d)))
    if 2**n != d or n < 1:
        raise ValueError(f"density matrix dimension {d} is not a power of two >= 2")
    return n


def as_density_matrix(rho, n_photons=None, require_normalized=False, name="rho"):
    """Validate a density matrix: square 2^N dimension, Hermitian, near-PSD.

    Returns the array as complex. ``n_photons`` pins the expected photon
    number; ``require_normalized`` additionally checks trace 1.
    """
    rho = np.asarray(rho, dtype=complex)
    n = photon_number(rho)
    if n_photons is not None and n != n_photons:
        raise ValueError(f"{name} encodes {n} photons, expected {n_photons}")
    if not np.all(np.isfinite(rho.view(float))):
        raise ValueError(f"{name} contains non-finite entries")
    herm = np.abs(rho - rho.conj().T).max()
    if herm > 1e-9:
        raise ValueError(f"{name} is not Hermitian (max asymmetry {herm:.2e})")
    if require_normalized:
        tr = np.trace(rho).real
        if abs(tr - 1.0) > 1e-9:
            raise ValueError(f"{name} trace is {tr}, expected 1")
    return rho


def as_transfer_rows(rows, name="transfer matrix"):
    """Validate M x 2 complex projective rows (each row a port bra)."""
    rows = np.asarray(rows, dtype=complex)
    if rows.ndim != 2 or rows.shape[1] != 2 or rows.shape[0] < 2:
        raise ValueError(f"{name} must be M x 2 with M >= 2, got shape {rows.shape}")
    if not np.all(np.isfinite(rows.view(float))):
        raise ValueError(f"{name} contains non-finite entries")
    norms = np.linalg.norm(rows, axis=1)
    if np.any(norms == 0.0):
        raise ValueError(f"{name} has an all-zero row")
    return rows
