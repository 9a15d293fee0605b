"""Synthesis of geometric-phase metagratings.

A metagrating is a super-cell of m birefringent meta-atoms that reverses the
handedness of a chosen elliptical polarization pair while imprinting opposite
linear phase ramps on the two partners, diffracting them into opposite
orders. Each atom is solved in the phi1 = -phi2 retardance gauge, where the
handedness-reversal condition |<psi'|U(theta)|psi>| = 1 has a solution for
every orientation theta, and the acquired geometric phase gamma(theta) winds
once around the circle as theta sweeps [0, pi).
"""

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegeneratePairError, NoSolutionError, UnreachablePhaseError
from .polarization import elliptical_pair, meta_atom_matrix
from .simulate import TransferMatrix

_THETA_GRID_SIZE = 4097
_OVERLAP_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class MetaAtom:
    """Birefringent element: fast-axis orientation and per-axis phases.

    The solver gauge fixes phi1 = -phi2 with phi2 in [0, pi], so phi1 <= phi2.
    """

    theta: float
    phi1: float
    phi2: float

    @property
    def matrix(self):
        return meta_atom_matrix(self.theta, self.phi1, self.phi2)


@dataclass(frozen=True)
class GratingDesign:
    """One synthesized super-cell splitting the pair (alpha, beta)."""

    alpha: float
    beta: float
    atoms: tuple
    gammas: np.ndarray = field(repr=False)
    lattice_constant_nm: float = 800.0

    @property
    def m(self):
        return len(self.atoms)

    @property
    def pair(self):
        return elliptical_pair(self.alpha, self.beta)

    def to_csv(self):
        """Flat table (n, theta, phi1, phi2, gamma) for layout tools."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "theta", "phi1", "phi2", "gamma"])
        for n, (atom, gamma) in enumerate(zip(self.atoms, self.gammas)):
            writer.writerow([n, repr(atom.theta), repr(atom.phi1),
                             repr(atom.phi2), repr(float(gamma))])
        return buf.getvalue()


def _check_pair(alpha, beta):
    if abs(math.sin(beta) * math.sin(2 * alpha)) < 1e-12:
        raise DegeneratePairError(
            f"pair (alpha={alpha}, beta={beta}) is linear: handedness "
            "reversal is trivial and the geometric phase cannot span a cycle")


def _overlap_coefficients(alpha, beta, theta):
    """Scalars (A, B) with overlap f(phi2) = A cos(phi2) - i B sin(phi2).

    A = <psi'|psi> and B = <psi'|Sigma(2 theta)|psi> where Sigma is the
    reflection cos(2t) sz + sin(2t) sx generated by the atom's linear
    eigenaxes; psi' is psi with reversed handedness (beta -> -beta).
    """
    psi, _ = elliptical_pair(alpha, beta)
    psi_rev, _ = elliptical_pair(alpha, -beta)
    amp_a = np.vdot(psi_rev, psi)
    sig = np.array([[np.cos(2 * theta), np.sin(2 * theta)],
                    [np.sin(2 * theta), -np.cos(2 * theta)]])
    amp_b = np.vdot(psi_rev, sig @ psi)
    return amp_a, amp_b


def _modulus_sq(phi2, amp_a, amp_b):
    f = amp_a * np.cos(phi2) - 1j * amp_b * np.sin(phi2)
    return np.abs(f) ** 2


def solve_meta_atom(pair, theta, max_iter=200):
    """Retardance phi2 (gauge phi1 = -phi2) reversing the pair's handedness
    at orientation ``theta``, and the geometric phase gamma picked up.

    The overlap modulus |<psi'|U|psi>|^2 is sinusoidal in 2*phi2; the
    maximizer is bracketed analytically and polished by bisection on the
    derivative to 1e-12. Raises :class:`DegeneratePairError` for linear
    pairs and :class:`NoSolutionError` if unit overlap is not reached.
    """
    alpha, beta = pair
    _check_pair(alpha, beta)
    if not np.isfinite(theta):
        raise ValueError("theta must be finite")
    amp_a, amp_b = _overlap_coefficients(alpha, beta, theta)
    # |f|^2 = m0 + R cos(2 phi2 + delta)
    half_diff = (abs(amp_a) ** 2 - abs(amp_b) ** 2) / 2
    cross = np.imag(amp_a * np.conj(amp_b))
    delta = math.atan2(cross, half_diff)
    phi2 = ((-delta) % (2 * math.pi)) / 2

    lo, hi = phi2 - 1e-3, phi2 + 1e-3
    # derivative of |f|^2 is -2R sin(2 phi2 + delta): positive before the
    # maximum, negative after
    def slope(p):
        return -math.sin(2 * p + delta)

    if slope(lo) > 0 > slope(hi):
        for _ in range(max_iter):
            mid = 0.5 * (lo + hi)
            if slope(mid) > 0:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-12:
                break
        else:
            raise NoSolutionError(
                f"retardance bisection did not converge in {max_iter} iterations")
        phi2 = 0.5 * (lo + hi)
    phi2 %= math.pi

    overlap = amp_a * np.cos(phi2) - 1j * amp_b * np.sin(phi2)
    if abs(1.0 - abs(overlap)) > _OVERLAP_RESIDUAL_TOL:
        raise NoSolutionError(
            f"no unit-overlap retardance at theta={theta}: "
            f"residual {abs(1.0 - abs(overlap)):.3e}")
    return MetaAtom(theta=float(theta % math.pi), phi1=-float(phi2),
                    phi2=float(phi2)), float(np.angle(overlap))


def geometric_phase_curve(pair, thetas):
    """Vectorized gamma(theta) over an array of orientations."""
    alpha, beta = pair
    _check_pair(alpha, beta)
    thetas = np.asarray(thetas, dtype=float)
    psi, _ = elliptical_pair(alpha, beta)
    psi_rev, _ = elliptical_pair(alpha, -beta)
    amp_a = np.vdot(psi_rev, psi)
    b_z = psi_rev.conj() @ (np.diag([1.0, -1.0]) @ psi)
    b_x = psi_rev.conj() @ (np.array([[0.0, 1.0], [1.0, 0.0]]) @ psi)
    amp_b = np.cos(2 * thetas) * b_z + np.sin(2 * thetas) * b_x
    half_diff = (abs(amp_a) ** 2 - np.abs(amp_b) ** 2) / 2
    cross = np.imag(amp_a * np.conj(amp_b))
    delta = np.arctan2(cross, half_diff)
    phi2 = ((-delta) % (2 * np.pi)) / 2
    overlap = amp_a * np.cos(phi2) - 1j * amp_b * np.sin(phi2)
    return np.angle(overlap)


def _invert_phase(pair, target, grid_thetas, grid_gammas_unwrapped):
    """Smallest theta in [0, pi) where gamma(theta) = target (mod 2 pi)."""
    lo_branch = int(np.floor((grid_gammas_unwrapped.min() - target) / (2 * np.pi)))
    hi_branch = int(np.ceil((grid_gammas_unwrapped.max() - target) / (2 * np.pi)))
    candidates = []
    for k in range(lo_branch, hi_branch + 1):
        shifted = target + 2 * np.pi * k
        resid = grid_gammas_unwrapped - shifted
        signs = np.sign(resid)
        hits = np.where(signs[:-1] * signs[1:] <= 0)[0]
        for i in hits:
            lo, hi = grid_thetas[i], grid_thetas[i + 1]
            r_lo = resid[i]
            if r_lo == 0.0:
                candidates.append(lo)
                continue
            for _ in range(100):
                mid = 0.5 * (lo + hi)
                gamma_mid = geometric_phase_curve(pair, np.array([mid]))[0]
                r_mid = float(np.angle(np.exp(1j * (gamma_mid - shifted))))
                if r_lo * r_mid <= 0:
                    hi = mid
                else:
                    lo = mid
                    r_lo = r_mid
                if hi - lo < 1e-13:
                    break
            candidates.append(0.5 * (lo + hi))
    if not candidates:
        raise UnreachablePhaseError(
            f"target phase {target:.6f} not covered by gamma(theta) on [0, pi)")
    return min(c % math.pi for c in candidates)


def synthesize_grating(pair, m, lattice_constant_nm=800.0):
    """Super-cell of ``m`` atoms imposing the phase ramp gamma(n) = -2 pi n / m.

    The orthogonal partner state automatically acquires the opposite ramp,
    so the pair is diffracted into orders -1 and +1. For every target phase
    the smallest orientation theta in [0, pi) attaining it is chosen, which
    makes layouts deterministic. Requires m >= 8 for reliable splitting.
    """
    alpha, beta = pair
    if m < 8:
        raise ValueError(f"super-cell needs at least 8 atoms, got {m}")
    _check_pair(alpha, beta)
    grid = np.linspace(0.0, math.pi, _THETA_GRID_SIZE)
    gammas = np.unwrap(geometric_phase_curve(pair, grid))
    atoms, achieved = [], []
    for n in range(m):
        target = -2 * math.pi * n / m  # ramp constant fixed to 0
        theta_n = _invert_phase(pair, target, grid, gammas)
        atom, gamma = solve_meta_atom(pair, theta_n)
        if abs(np.angle(np.exp(1j * (gamma - target)))) > 1e-8:
            raise UnreachablePhaseError(
                f"phase target {target:.6f} missed by {gamma - target:.2e} at atom {n}")
        atoms.append(atom)
        achieved.append(gamma)
    return GratingDesign(alpha=float(alpha), beta=float(beta),
                         atoms=tuple(atoms), gammas=np.array(achieved),
                         lattice_constant_nm=float(lattice_constant_nm))


def diffraction_spectrum(design, input_ket):
    """Power fractions per diffraction order for a given input ket.

    The per-atom output fields are Fourier transformed over the super-cell;
    order o has amplitude (1/m) sum_n E_n exp(-2 pi i o n / m), so the
    designed ramp exp(-2 pi i n / m) lands the pair state in order -1.
    Orders are reported in the centered range [-m/2, m/2); efficiencies sum
    to one because every atom is unitary.
    """
    input_ket = np.asarray(input_ket, dtype=complex)
    norm = np.linalg.norm(input_ket)
    if norm == 0:
        raise ValueError("input state has zero norm")
    fields = np.array([atom.matrix @ (input_ket / norm) for atom in design.atoms])
    m = design.m
    amplitudes = np.fft.fft(fields, axis=0) / m
    efficiencies = (np.abs(amplitudes) ** 2).sum(axis=1)
    spectrum = []
    for bin_index in range(m):
        order = ((bin_index + m // 2) % m) - m // 2
        spectrum.append((order, float(efficiencies[bin_index])))
    spectrum.sort(key=lambda item: item[0])
    return spectrum


def _strict_floor(ratio):
    # largest integer strictly below the ratio
    f = math.floor(ratio)
    return f - 1 if f == ratio else f


def interleave_capacity(lx_mm, ly_mm, q_g, q_i1, q_i2, lattice_nm):
    """How many gratings fit on an aperture without overlapping orders.

    Along x a grating needs q_g atoms per period, limiting the count to the
    largest integer strictly below Lx / (q_g * lattice). Along y each
    grating is repeated q_i1 times and the whole group q_i2 times, so the
    bound is Ly / (q_i1 * q_i2 * lattice). Returns (x_limit, y_limit,
    capacity = min of the two).
    """
    if min(lx_mm, ly_mm, q_g, q_i1, q_i2, lattice_nm) <= 0:
        raise ValueError("all aperture and repeat parameters must be positive")
    lattice_mm = lattice_nm * 1e-6
    x_limit = _strict_floor(lx_mm / (q_g * lattice_mm))
    y_limit = _strict_floor(ly_mm / (q_i1 * q_i2 * lattice_mm))
    return x_limit, y_limit, min(x_limit, y_limit)


@dataclass(frozen=True)
class MetasurfaceLayout:
    """Interleaved gratings plus the aperture/repeat geometry."""

    gratings: tuple
    lx_mm: float = 2.0
    ly_mm: float = 2.0
    q_g: int = 8
    q_i1: int = 100
    q_i2: int = 6
    lattice_nm: float = 800.0

    def __post_init__(self):
        object.__setattr__(self, "gratings", tuple(self.gratings))
        _, _, capacity = interleave_capacity(
            self.lx_mm, self.ly_mm, self.q_g, self.q_i1, self.q_i2, self.lattice_nm)
        if len(self.gratings) > capacity:
            raise ValueError(
                f"{len(self.gratings)} gratings exceed the interleaving "
                f"capacity of {capacity}")


def ideal_transfer_matrix(layout_or_pairs):
    """Transfer matrix of a lossless interleaved metasurface.

    Rows 2k and 2k+1 are the bras of the k-th grating's pair, scaled by
    sqrt(1/G) for G equal-area gratings, so each pair of ports carries 1/G
    of the incident power. Accepts a :class:`MetasurfaceLayout` or a bare
    list of (alpha, beta) pairs.
    """
    if isinstance(layout_or_pairs, MetasurfaceLayout):
        pairs = [(g.alpha, g.beta) for g in layout_or_pairs.gratings]
    else:
        pairs = [(float(a), float(b)) for a, b in layout_or_pairs]
    if not pairs:
        raise ValueError("need at least one grating")
    scale = math.sqrt(1.0 / len(pairs))
    rows = []
    for alpha, beta in pairs:
        psi, psi_tilde = elliptical_pair(alpha, beta)
        rows.append(scale * psi.conj())
        rows.append(scale * psi_tilde.conj())
    return TransferMatrix(np.array(rows))
