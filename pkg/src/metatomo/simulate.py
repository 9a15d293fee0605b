"""Forward model: port powers, N-photon coincidences, interference delay
scans, state-preparation families, and shot-noise sampling.

Port indices are 0-based throughout this module; file formats and the
command line use 1-based labels (see :mod:`metatomo.serialize`).
"""

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .polarization import meta_atom_matrix, permutation_symmetry, V
from .validation import as_density_matrix, as_transfer_rows


@dataclass(frozen=True)
class TransferMatrix:
    """M x 2 complex map from input polarization amplitudes to port amplitudes.

    Row a is the projective bra u_a^dag of port a, including any
    diffraction-efficiency scale; each row carries a free gauge phase.
    """

    rows: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "rows", as_transfer_rows(self.rows))

    @classmethod
    def from_kets(cls, kets):
        return cls(np.asarray(kets, dtype=complex).conj())

    @classmethod
    def from_frame(cls, frame):
        return cls.from_kets(frame.kets)

    @property
    def kets(self):
        """Port kets u_a (conjugated rows)."""
        return self.rows.conj()

    @property
    def n_ports(self):
        return self.rows.shape[0]

    def scaled(self, factor):
        return TransferMatrix(self.rows * factor)


@dataclass
class CorrelationSet:
    """Expected values or sampled counts per unordered port tuple.

    ``values`` maps strictly increasing 0-based port tuples to nonnegative
    numbers; complete sets hold one entry per combination of ``n_photons``
    ports out of ``n_ports``.
    """

    n_photons: int
    n_ports: int
    values: dict
    units: str = "expected"

    def __post_init__(self):
        if self.units not in ("expected", "counts"):
            raise ValueError(f"units must be 'expected' or 'counts', got {self.units!r}")
        clean = {}
        for ports, value in self.values.items():
            ports = tuple(int(p) for p in ports)
            if list(ports) != sorted(set(ports)):
                raise ValueError(f"port tuple {ports} is not strictly increasing")
            if not all(0 <= p < self.n_ports for p in ports):
                raise ValueError(f"port tuple {ports} outside 0..{self.n_ports - 1}")
            if len(ports) != self.n_photons:
                raise ValueError(f"tuple {ports} does not have {self.n_photons} ports")
            if value < 0:
                raise ValueError(f"negative value {value} for tuple {ports}")
            clean[ports] = value
        self.values = clean

    def tuples(self):
        """All strictly increasing tuples in canonical (lexicographic) order."""
        return list(itertools.combinations(range(self.n_ports), self.n_photons))

    def as_array(self):
        """Values in canonical tuple order; raises if an entry is missing."""
        return np.array([self.values[t] for t in self.tuples()], dtype=float)

    def total(self):
        return float(sum(self.values.values()))

    def normalized(self):
        """Rescaled copy with unit total (units stay 'expected')."""
        total = self.total()
        if total <= 0:
            raise ValueError("cannot normalize an all-zero correlation set")
        return CorrelationSet(self.n_photons, self.n_ports,
                              {k: v / total for k, v in self.values.items()},
                              units="expected")


@dataclass(frozen=True)
class SourceModel:
    """Cross-polarized photon-pair source with delay-tunable coherence.

    ``eta0`` is the peak spectral overlap of the two photons (the depth of
    the coincidence dip); the overlap decays as a Gaussian of width
    ``sigma_tau`` in the relative delay.
    """

    eta0: float = 0.58
    sigma_tau: float = 1.0

    def __post_init__(self):
        if abs(self.eta0) > 1.0:
            raise ValueError(f"|eta0| must be <= 1, got {self.eta0}")
        if self.sigma_tau <= 0:
            raise ValueError(f"sigma_tau must be positive, got {self.sigma_tau}")

    def overlap(self, delay):
        return self.eta0 * np.exp(-np.asarray(delay, dtype=float) ** 2
                                  / (2 * self.sigma_tau**2))


def cross_polarized_state(eta):
    """Two-photon state with one H and one V photon of spectral overlap eta.

    In the ordered basis (HH, HV, VH, VV) only the central block is
    populated: diagonal 1/2 and coherence eta/2. eta = 1 describes
    identical photons, eta = 0 fully distinguishable ones.
    """
    if abs(eta) > 1.0:
        raise ValueError(f"|eta| must be <= 1, got {eta}")
    rho = np.zeros((4, 4), dtype=complex)
    rho[1, 1] = rho[2, 2] = 0.5
    rho[1, 2] = rho[2, 1] = eta / 2
    return rho


def port_probabilities(transfer, rho):
    """Expected power p_a = u_a^dag rho u_a at every port (single photon)."""
    rho = as_density_matrix(rho, n_photons=1)
    kets = transfer.kets
    probs = np.einsum("ai,ij,aj->a", kets.conj(), rho, kets).real
    return np.clip(probs, 0.0, None)


def tuple_kets(transfer, n_photons):
    """Tensor-product kets for every ordered arrangement of each tuple.

    Returns (tuples, kets, slices): ``kets`` has one column per ordered
    arrangement, and ``slices[i]`` selects the n! columns belonging to
    ``tuples[i]``. Shared by the correlation forward model and the
    reconstruction design matrices.
    """
    ports = range(transfer.n_ports)
    kets = transfer.kets
    tuples = list(itertools.combinations(ports, n_photons))
    columns = []
    slices = []
    width = math.factorial(n_photons)
    for i, tup in enumerate(tuples):
        for arrangement in itertools.permutations(tup):
            col = kets[arrangement[0]]
            for port in arrangement[1:]:
                col = np.kron(col, kets[port])
            columns.append(col)
        slices.append(slice(i * width, (i + 1) * width))
    return tuples, np.array(columns).T, slices


def correlation_tensor(transfer, rho, n_photons=None):
    """Expected N-fold coincidences for all strictly increasing port tuples.

    Each value is N! [u_a1 x ... x u_aN]^dag rho [u_a1 x ... x u_aN]; the
    factorial counts the orderings seen by click detectors that cannot tell
    the photons apart. Same-port tuples (bunched photons on one detector)
    are not resolvable by click detectors and are excluded. States that are
    not permutation symmetric trigger a warning, since the formula is only
    the physical expectation on the symmetric support.
    """
    rho = as_density_matrix(rho)
    n = n_photons if n_photons is not None else int(round(math.log2(rho.shape[0])))
    rho = as_density_matrix(rho, n_photons=n)
    if n > transfer.n_ports:
        raise ValueError(f"{n} photons need at least {n} of the "
                         f"{transfer.n_ports} ports")
    symmetric, violation = permutation_symmetry(rho)
    if not symmetric:
        warnings.warn(
            f"state is not permutation symmetric (violation {violation:.2e}); "
            "coincidence expectations assume indistinguishable photons",
            stacklevel=2)
    tuples, kets, slices = tuple_kets(transfer, n)
    width = math.factorial(n)
    # N! w^dag rho w, computed once per tuple via the first arrangement
    first = kets[:, [s.start for s in slices]]
    raw = width * np.einsum("ia,ij,ja->a", first.conj(), rho, first).real
    values = {tup: float(max(v, 0.0)) for tup, v in zip(tuples, raw)}
    return CorrelationSet(n, transfer.n_ports, values, units="expected")


def hom_scan(transfer, ports, source, delays):
    """Two-photon coincidence between two ports versus relative delay.

    Prepares the cross-polarized pair state with overlap eta(delay) and
    evaluates its coincidence expectation on the given (0-based) port pair.
    Ports with near-orthogonal projective bases show a dip (photon
    coalescence); strongly non-orthogonal ports can show a peak instead.
    Returns an array of (delay, expected) rows.
    """
    a, b = ports
    if not (0 <= a < transfer.n_ports and 0 <= b < transfer.n_ports):
        raise ValueError(f"ports {ports} outside 0..{transfer.n_ports - 1}")
    if a == b:
        raise ValueError("coincidence scan needs two distinct ports")
    a, b = min(a, b), max(a, b)
    pair = TransferMatrix(transfer.rows[[a, b]])
    delays = np.asarray(delays, dtype=float)
    out = np.empty((delays.size, 2))
    for i, tau in enumerate(delays):
        rho = cross_polarized_state(float(source.overlap(tau)))
        out[i] = (tau, correlation_tensor(pair, rho, 2).values[(0, 1)])
    return out


def qwp_matrix(theta):
    """Quarter-wave plate with fast axis at ``theta``: unit and i-phase axes."""
    return meta_atom_matrix(theta, 0.0, math.pi / 2)


def qwp_state(theta, n_photons=1, base=None):
    """State prepared by a quarter-wave plate at angle ``theta``.

    For one photon the plate acts on |V> (or a supplied ket/density matrix);
    for two photons it acts on both slots of the cross-polarized pair state
    (overlap 0.58 unless a base matrix is supplied), matching a waveplate
    inserted in the common beam path.
    """
    q = qwp_matrix(theta)
    if n_photons == 1:
        if base is None:
            base = V
        base = np.asarray(base, dtype=complex)
        if base.ndim == 1:
            ket = q @ base
            return np.outer(ket, ket.conj())
        return q @ as_density_matrix(base, n_photons=1) @ q.conj().T
    if n_photons == 2:
        rho = cross_polarized_state(0.58) if base is None \
            else as_density_matrix(base, n_photons=2)
        q2 = np.kron(q, q)
        return q2 @ rho @ q2.conj().T
    raise ValueError(f"waveplate preparation supports 1 or 2 photons, got {n_photons}")


def sample_counts(expected, shots, seed):
    """Poisson-sampled counts, one independent draw per port tuple.

    Each tuple's count is drawn from Poisson(shots * expected) with a
    counter-based generator keyed by (seed, tuple), so results are
    bit-reproducible and independent of evaluation order.
    """
    if expected.units != "expected":
        raise ValueError("sampling requires expected values, not counts")
    if shots <= 0:
        raise ValueError(f"shots must be positive, got {shots}")
    counts = {}
    for ports, value in expected.values.items():
        code = 0
        for p in ports:
            code = (code * 0x1F1F1F1F + p + 1) % (1 << 64)
        key = np.array([int(seed) % (1 << 64), code], dtype=np.uint64)
        gen = np.random.Generator(np.random.Philox(key=key))
        counts[ports] = int(gen.poisson(shots * value))
    return CorrelationSet(expected.n_photons, expected.n_ports, counts,
                          units="counts")
