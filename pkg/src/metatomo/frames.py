"""Measurement frames on the Poincare sphere and their conditioning.

A frame is an ordered set of projective kets u_a, one per output port. The
instrument matrix maps Stokes vectors to expected port powers; its spectral
condition number measures how strongly measurement noise is amplified in
state reconstruction. Platonic vertex frames (spherical 2-designs) reach
the single-photon optimum sqrt(3).
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation

from .polarization import PAULI_BASIS, jones_from_poincare, projector
from .validation import as_transfer_rows

PLATONIC_PORT_COUNTS = (6, 8, 12, 20)

_GOLDEN = (1 + np.sqrt(5)) / 2


def _platonic_vertices(m):
    """Vertices of the Platonic solid with ``m`` vertices, unit radius,
    listed so antipodal partners are adjacent."""
    if m == 6:  # octahedron: coordinate axes
        half = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    elif m == 8:  # cube
        half = [(1, 1, 1), (1, 1, -1), (1, -1, 1), (1, -1, -1)]
    elif m == 12:  # icosahedron: cyclic permutations of (0, +-1, phi)
        half = []
        for s in (1, -1):
            half += [(0, s, _GOLDEN), (s, _GOLDEN, 0), (_GOLDEN, 0, s)]
    elif m == 20:  # dodecahedron: cube corners plus (0, +-1/phi, phi) cycles
        half = [(1, 1, 1), (1, 1, -1), (1, -1, 1), (1, -1, -1)]
        for s in (1, -1):
            half += [(0, s / _GOLDEN, _GOLDEN), (s / _GOLDEN, _GOLDEN, 0),
                     (_GOLDEN, 0, s / _GOLDEN)]
    else:
        raise ValueError(
            f"no Platonic vertex frame with {m} ports; supported: "
            f"{PLATONIC_PORT_COUNTS}")
    out = []
    for v in half:
        v = np.asarray(v, dtype=float)
        v = v / np.linalg.norm(v)
        out.append(v)
        out.append(-v)
    return np.array(out)


@dataclass(frozen=True)
class Frame:
    """Ordered projective measurement bases, one ket per port."""

    kets: np.ndarray = field(repr=False)

    def __post_init__(self):
        kets = np.asarray(self.kets, dtype=complex)
        if kets.ndim != 2 or kets.shape[1] != 2 or kets.shape[0] < 2:
            raise ValueError(f"frame kets must be M x 2 with M >= 2, got {kets.shape}")
        if np.any(np.linalg.norm(kets, axis=1) == 0.0):
            raise ValueError("frame contains a zero ket")
        object.__setattr__(self, "kets", kets)

    @property
    def n_ports(self):
        return self.kets.shape[0]


def platonic_frame(m, rotation=None):
    """Optimal measurement frame whose Poincare vectors form a Platonic solid.

    Parameters
    ----------
    m : int
        Port count, one of 6 (octahedron), 8 (cube), 12 (icosahedron),
        20 (dodecahedron). Antipodal vertices map to orthogonal kets and
        are adjacent in the returned ordering.
    rotation : array_like, optional
        Unit quaternion (x, y, z, w) applied to all vertices; the frame has
        a rotational degree of freedom that leaves the conditioning intact.
        The canonical m=6 orientation contains H, V, D, A and both circular
        states.
    """
    vertices = _platonic_vertices(m)
    if rotation is not None:
        vertices = vertices @ Rotation.from_quat(rotation).as_matrix().T
    return Frame(np.array([jones_from_poincare(v) for v in vertices]))


def instrument_matrix(frame):
    """M x 4 real map from Stokes vectors to expected port powers.

    Row a is the Pauli decomposition of the projector u_a u_a^dag in the
    (I, sz, sx, sy) ordering, so that u_a^dag rho u_a = row_a . S for every
    single-photon rho with Stokes vector S. Accepts a :class:`Frame`, a
    transfer matrix (rows are port bras), or a bare array of kets.
    """
    if isinstance(frame, Frame):
        kets = frame.kets
    elif hasattr(frame, "kets"):  # TransferMatrix and friends
        kets = np.asarray(frame.kets, dtype=complex)
    else:
        kets = as_transfer_rows(frame, name="frame")
    rows = np.empty((kets.shape[0], 4))
    for a, ket in enumerate(kets):
        p = projector(ket)
        rows[a] = [np.trace(p @ s).real for s in PAULI_BASIS]
    return rows


def condition_number(matrix):
    """Spectral condition number sigma_max / sigma_min of a full-rank map.

    Uses the Euclidean operator norm with the pseudo-inverse for
    rectangular input. Returns ``inf`` when the smallest singular value
    falls below 1e-14 of the largest (numerically singular).
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape[0] < matrix.shape[1]:
        raise ValueError(
            f"need at least {matrix.shape[1]} rows for a full-rank map, "
            f"got {matrix.shape[0]}")
    sing = np.linalg.svd(matrix, compute_uv=False)
    if sing[-1] < 1e-14 * sing[0]:
        return math.inf
    return float(sing[0] / sing[-1])


def conditioning_report(frame):
    """Raw and per-port-normalized condition numbers of a device.

    The raw variant keeps each port's efficiency scale inside the rows; the
    normalized variant rescales every ket to unit norm first, leaving only
    the geometry of the projective directions. Calibrated devices are
    quoted either way depending on whether efficiency imbalance is counted
    as part of the conditioning, so both are reported.
    """
    if isinstance(frame, Frame):
        kets = frame.kets
    elif hasattr(frame, "kets"):
        kets = np.asarray(frame.kets, dtype=complex)
    else:
        kets = as_transfer_rows(frame, name="frame")
    unit = kets / np.linalg.norm(kets, axis=1)[:, None]
    return {
        "raw": condition_number(instrument_matrix(Frame(kets))),
        "normalized": condition_number(instrument_matrix(Frame(unit))),
    }


def multiphoton_condition_bound(n_photons):
    """Best achievable condition number sqrt(3)^N for N-photon measurements."""
    if n_photons < 1:
        raise ValueError(f"photon number must be >= 1, got {n_photons}")
    return math.sqrt(3.0) ** n_photons


def min_ports(n_photons, scheme="indistinguishable"):
    """Minimum output ports needed to reconstruct an N-photon state.

    For indistinguishable click detection the requirement is linear,
    M = N + 3. When the detectors can tell the photons apart (separate
    paths, frequency tags, ...) the count of ordered distinct-port tuples
    must cover the 4^N state parameters: the smallest M >= N with
    M!/(M-N)! >= 4^N, found by exact integer search.
    """
    if n_photons < 1:
        raise ValueError(f"photon number must be >= 1, got {n_photons}")
    if scheme == "indistinguishable":
        return n_photons + 3
    if scheme == "distinguishable":
        m = n_photons
        need = 4**n_photons
        while math.factorial(m) // math.factorial(m - n_photons) < need:
            m += 1
        return m
    raise ValueError(f"unknown detection scheme {scheme!r}")


def correlation_element_count(n_ports, n_photons, scheme="indistinguishable"):
    """Number of independent N-fold correlation elements from M ports."""
    if not 1 <= n_photons <= n_ports:
        raise ValueError(
            f"need 1 <= photons <= ports, got N={n_photons}, M={n_ports}")
    if scheme == "indistinguishable":
        return math.comb(n_ports, n_photons)
    if scheme == "distinguishable":
        return math.factorial(n_ports) // math.factorial(n_ports - n_photons)
    raise ValueError(f"unknown detection scheme {scheme!r}")
