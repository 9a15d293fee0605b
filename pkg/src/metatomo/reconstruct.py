"""Inverse problem: density-matrix estimation from coincidence data.

Two estimators with a scikit-learn interface share the same linear forward
model built from the transfer matrix:

* :class:`LinearInversionTomography` solves the (pseudo-inverse) linear
  system on the permutation-symmetric parameter space. Fast and unbiased,
  but the result can be unphysical under shot noise.
* :class:`MaximumLikelihoodTomography` maximizes the Poisson likelihood over
  Cholesky-parameterized physical states, with the source brightness
  profiled out analytically. Always returns a valid state.

The functional wrappers :func:`linear_reconstruct`, :func:`mle_reconstruct`,
and :func:`fit_histogram` cover the file/CLI pipelines.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares, minimize
from sklearn.base import BaseEstimator

from .errors import (DegenerateHistogramError, FitDivergedError,
                     UnderdeterminedSystemError)
from .polarization import (concurrence, fidelity, photon_number,
                           project_physical, purity,
                           slot_permutation_operators)
from .simulate import tuple_kets
from .validation import as_density_matrix


def symmetric_operator_basis(n_photons):
    """Orthonormal Hermitian basis of the permutation-commutant.

    These operators span every state of ``n_photons`` indistinguishable
    photons (dimension 4 for one photon, 10 for two). Built by group
    averaging the full Hermitian basis and extracting the span.
    """
    d = 2**n_photons
    perms = slot_permutation_operators(n_photons)
    raw = []
    for j in range(d):
        for k in range(j, d):
            mat = np.zeros((d, d), dtype=complex)
            if j == k:
                mat[j, j] = 1.0
                raw.append(mat)
            else:
                mat[j, k] = mat[k, j] = 1.0
                raw.append(mat)
                imag = np.zeros((d, d), dtype=complex)
                imag[j, k] = 1j
                imag[k, j] = -1j
                raw.append(imag)
    averaged = [sum(p @ b @ p.T for p in perms) / len(perms) for b in raw]
    flat = np.array([np.concatenate([b.real.ravel(), b.imag.ravel()])
                     for b in averaged])
    _, sing, vh = np.linalg.svd(flat, full_matrices=False)
    basis = []
    for row in vh[sing > 1e-10]:
        re = row[:d * d].reshape(d, d)
        im = row[d * d:].reshape(d, d)
        basis.append(re + 1j * im)
    return basis


class _ForwardModel:
    """Linear map from symmetric state parameters to tuple expectations."""

    def __init__(self, transfer, n_photons):
        self.transfer = transfer
        self.n_photons = n_photons
        self.tuples, self.kets, self.slices = tuple_kets(transfer, n_photons)
        self.basis = symmetric_operator_basis(n_photons)
        design = np.empty((len(self.tuples), len(self.basis)))
        for k, op in enumerate(self.basis):
            # sum over slot orderings; equals N! w^dag B w on the commutant
            quad = np.einsum("ia,ij,ja->a", self.kets.conj(), op, self.kets).real
            design[:, k] = np.add.reduceat(quad, [s.start for s in self.slices])
        self.design = design
        sing = np.linalg.svd(design, compute_uv=False)
        self.rank = int(np.sum(sing > 1e-12 * sing[0]))

    def require_full_rank(self):
        if self.rank < len(self.basis):
            raise UnderdeterminedSystemError(
                f"{len(self.tuples)} correlations of rank {self.rank} cannot fix "
                f"{len(self.basis)} state parameters; add ports or fix the frame")

    def expected(self, rho):
        """Physical expectation per tuple (sum over photon orderings)."""
        quad = np.einsum("ia,ij,ja->a", self.kets.conj(), rho, self.kets).real
        return np.add.reduceat(quad, [s.start for s in self.slices])


def _validate_correlations(correlations, transfer, n_photons=None):
    if n_photons is None:
        n_photons = correlations.n_photons
    if correlations.n_photons != n_photons:
        raise ValueError(f"correlation set encodes {correlations.n_photons} "
                         f"photons, expected {n_photons}")
    if correlations.n_ports != transfer.n_ports:
        raise ValueError(f"correlation set has {correlations.n_ports} ports, "
                         f"transfer matrix has {transfer.n_ports}")
    missing = [t for t in correlations.tuples() if t not in correlations.values]
    if missing:
        raise ValueError(f"correlation set is missing {len(missing)} tuples "
                         f"(first: {missing[0]})")
    return correlations


class LinearInversionTomography(BaseEstimator):
    """Pseudo-inverse estimator on the symmetric state space.

    Parameters
    ----------
    transfer : TransferMatrix
        Calibrated port bras of the measurement device.
    rcond : float
        Relative singular-value cutoff for the pseudo-inverse.

    Attributes
    ----------
    rho_ : ndarray
        Estimated matrix. Hermitian and permutation symmetric by
        construction, but possibly indefinite under noise; check
        ``min_eigenvalue_``.
    """

    def __init__(self, transfer=None, rcond=1e-12):
        self.transfer = transfer
        self.rcond = rcond

    def fit(self, correlations, y=None):
        if self.transfer is None:
            raise ValueError("a transfer matrix is required")
        correlations = _validate_correlations(correlations, self.transfer)
        model = _ForwardModel(self.transfer, correlations.n_photons)
        model.require_full_rank()
        coeffs = np.linalg.pinv(model.design, rcond=self.rcond) \
            @ correlations.as_array()
        rho = sum(c * op for c, op in zip(coeffs, model.basis))
        self.model_ = model
        self.rho_ = rho
        self.n_photons_ = correlations.n_photons
        self.min_eigenvalue_ = float(np.linalg.eigvalsh(rho).min())
        return self

    def predict(self):
        """Expected correlations of the fitted state (canonical tuple order)."""
        return self.model_.expected(self.rho_)


class MaximumLikelihoodTomography(BaseEstimator):
    """Poisson maximum-likelihood estimator over physical states.

    The state is parameterized as rho = L^dag L / Tr(L^dag L) with L lower
    triangular (4^N real parameters), which enforces positivity and unit
    trace. The unknown brightness (source rate times efficiency scale) is
    profiled out: at each iterate the optimal scale is total counts over
    total expectation. Optimization is quasi-Newton (L-BFGS) with central
    finite-difference gradients, started from the physicality-projected
    linear inversion.

    Attributes
    ----------
    rho_ : ndarray
        Estimated physical state (PSD, unit trace).
    log_likelihood_ : float
        Poisson log-likelihood at the optimum (up to the k! terms).
    log_likelihood_trace_ : ndarray
        Log-likelihood after each accepted iteration; non-decreasing.
    converged_ : bool
        False when the iteration budget was exhausted first.
    """

    def __init__(self, transfer=None, tol=1e-10, max_iter=10000,
                 gradient_step=1e-6, rcond=1e-12):
        self.transfer = transfer
        self.tol = tol
        self.max_iter = max_iter
        self.gradient_step = gradient_step
        self.rcond = rcond

    # -- parameterization ---------------------------------------------------
    def _unpack(self, x, d):
        lower = np.zeros((d, d), dtype=complex)
        lower[np.diag_indices(d)] = x[:d]
        rows, cols = np.tril_indices(d, -1)
        k = len(rows)
        lower[rows, cols] = x[d:d + k] + 1j * x[d + k:]
        return lower

    def _pack(self, lower):
        d = lower.shape[0]
        rows, cols = np.tril_indices(d, -1)
        return np.concatenate([np.diag(lower).real,
                               lower[rows, cols].real,
                               lower[rows, cols].imag])

    def _initial_factor(self, rho, d):
        rho = project_physical(rho) + 1e-10 * np.eye(d)
        # lower-triangular L with L^dag L = rho: Cholesky in reversed order
        flip = np.eye(d)[::-1]
        chol = np.linalg.cholesky(flip @ rho @ flip)
        return (flip @ chol @ flip).conj().T

    def fit(self, counts, y=None):
        if self.transfer is None:
            raise ValueError("a transfer matrix is required")
        counts = _validate_correlations(counts, self.transfer)
        model = _ForwardModel(self.transfer, counts.n_photons)
        model.require_full_rank()
        d = 2**counts.n_photons
        k = counts.as_array()
        total = k.sum()
        self.model_ = model
        self.n_photons_ = counts.n_photons

        if total == 0:
            # flat likelihood: every state explains zero counts equally well
            self.rho_ = np.eye(d, dtype=complex) / d
            self.log_likelihood_ = 0.0
            self.log_likelihood_trace_ = np.array([0.0])
            self.n_iter_ = 0
            self.converged_ = True
            self.scale_ = 0.0
            return self

        kets, slices = model.kets, model.slices
        starts = [s.start for s in slices]

        def expectations(x):
            lower = self._unpack(x, d)
            amps = np.abs(lower @ kets) ** 2
            mu = np.add.reduceat(amps.sum(axis=0), starts)
            return mu / (np.abs(lower) ** 2).sum()

        def negative_profile_ll(x):
            mu = np.clip(expectations(x), 1e-300, None)
            return float(total * np.log(mu.sum()) - (k * np.log(mu)).sum())

        def gradient(x):
            grad = np.empty_like(x)
            for j in range(x.size):
                step = self.gradient_step * max(1.0, abs(x[j]))
                forward = x.copy()
                forward[j] += step
                backward = x.copy()
                backward[j] -= step
                grad[j] = (negative_profile_ll(forward)
                           - negative_profile_ll(backward)) / (2 * step)
            return grad

        linear = LinearInversionTomography(self.transfer, rcond=self.rcond)
        rho0 = linear.fit(counts).rho_
        x0 = self._pack(self._initial_factor(rho0, d))

        trace = [-negative_profile_ll(x0)]
        result = minimize(
            negative_profile_ll, x0, jac=gradient, method="L-BFGS-B",
            callback=lambda xk: trace.append(-negative_profile_ll(xk)),
            options={"maxiter": self.max_iter, "ftol": self.tol,
                     "maxfun": 20 * self.max_iter})

        lower = self._unpack(result.x, d)
        rho = lower.conj().T @ lower
        rho /= np.trace(rho).real
        mu = np.clip(expectations(result.x), 1e-300, None)
        scale = total / mu.sum()

        self.rho_ = rho
        self.scale_ = float(scale)
        self.log_likelihood_ = float((k * np.log(mu * scale)).sum()
                                     - (mu * scale).sum())
        self.log_likelihood_trace_ = np.array(trace)
        self.n_iter_ = int(result.nit)
        self.converged_ = bool(result.success or result.status == 0)
        return self

    def predict(self):
        """Expected counts of the fitted state at the fitted brightness."""
        return self.scale_ * self.model_.expected(self.rho_)


@dataclass
class ReconstructionReport:
    """Estimated state bundled with the quality metrics used in reports."""

    rho: np.ndarray
    method: str
    purity: float
    concurrence: float = None
    fidelity_vs_reference: float = None
    log_likelihood: float = None
    iterations: int = 0
    converged: bool = True
    physical: bool = True


def report(rho, reference=None, method="analysis", log_likelihood=None,
           iterations=0, converged=True):
    """Purity, concurrence (two photons), and fidelity versus a reference.

    The metrics are evaluated on the physicality-projected, trace-normalized
    state; ``physical`` records whether the input already satisfied the
    state invariants. Fidelity here is the Uhlmann fidelity, which reduces
    to the usual overlap for pure states but can differ from other
    conventions on mixed states.
    """
    rho = as_density_matrix(rho)
    n = photon_number(rho)
    eigs = np.linalg.eigvalsh(rho)
    physical = bool(eigs.min() >= -1e-10 and abs(np.trace(rho).real - 1) < 1e-9)
    state = project_physical(rho)
    conc = concurrence(state) if n == 2 else None
    fid = None
    if reference is not None:
        reference = as_density_matrix(reference, n_photons=n)
        fid = fidelity(state, project_physical(reference))
    return ReconstructionReport(
        rho=state, method=method, purity=purity(state), concurrence=conc,
        fidelity_vs_reference=fid, log_likelihood=log_likelihood,
        iterations=iterations, converged=converged, physical=physical)


def linear_reconstruct(transfer, correlations, rcond=1e-12):
    """Pseudo-inverse state estimate; may be unphysical under noise."""
    return LinearInversionTomography(transfer, rcond=rcond) \
        .fit(correlations).rho_


def mle_reconstruct(transfer, counts, reference=None, **options):
    """Maximum-likelihood estimate packaged as a ReconstructionReport."""
    estimator = MaximumLikelihoodTomography(transfer, **options).fit(counts)
    out = report(estimator.rho_, reference=reference, method="mle",
                 log_likelihood=estimator.log_likelihood_,
                 iterations=estimator.n_iter_,
                 converged=estimator.converged_)
    return out


@dataclass
class HistogramFit:
    """Gaussian-plus-offset fit of a coincidence time histogram."""

    amplitude: float
    center: float
    width: float
    offset: float
    extracted_counts: float
    residual_rms: float


def fit_histogram(bin_centers, counts, max_iter=500):
    """Least-squares Gaussian fit extracting background-free counts.

    Fits G(t) = A exp(-(t - t0)^2 / (2 w^2)) + B with A, w > 0 and B >= 0;
    the extracted counts are the background-free area A w sqrt(2 pi)
    divided by the bin width. Raises :class:`DegenerateHistogramError` when
    the peak does not clear the background by twice the Poisson bin noise,
    and :class:`FitDivergedError` when the iteration budget is exhausted.
    """
    t = np.asarray(bin_centers, dtype=float)
    k = np.asarray(counts, dtype=float)
    if t.shape != k.shape or t.ndim != 1:
        raise ValueError("bin centers and counts must be 1-d arrays of equal length")
    if t.size < 8:
        raise ValueError(f"need at least 8 bins to fit, got {t.size}")
    if np.any(k < 0):
        raise ValueError("counts must be nonnegative")

    background = float(np.median(k))
    noise = math.sqrt(max(background, 1.0))
    contrast = float(k.max() - background)
    if contrast < 2 * noise:
        raise DegenerateHistogramError(
            f"peak contrast {contrast:.3g} below twice the bin noise {noise:.3g}")

    bin_width = float(np.median(np.diff(t)))
    amp0 = contrast
    t0 = float(t[np.argmax(k)])
    w0 = max(2 * bin_width, (t[-1] - t[0]) / 20)

    def residual(params):
        amp, center, width, offset = params
        return amp * np.exp(-((t - center) ** 2) / (2 * width**2)) + offset - k

    result = least_squares(
        residual, x0=[amp0, t0, w0, background],
        bounds=([0.0, t[0] - (t[-1] - t[0]), bin_width * 1e-3, 0.0],
                [np.inf, t[-1] + (t[-1] - t[0]), np.inf, np.inf]),
        max_nfev=max_iter)
    if not result.success:
        raise FitDivergedError(f"histogram fit stopped: {result.message}")
    amp, center, width, offset = result.x
    area = amp * width * math.sqrt(2 * math.pi) / bin_width
    rms = float(np.sqrt(np.mean(result.fun**2)))
    return HistogramFit(amplitude=float(amp), center=float(center),
                        width=float(width), offset=float(offset),
                        extracted_counts=float(area), residual_rms=rms)
