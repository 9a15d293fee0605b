"""Metasurface polarimetry toolkit: geometric-phase grating design, multi-photon
coincidence simulation, and density-matrix tomography."""

__version__ = "0.1.0"

from .errors import (DegenerateHistogramError, DegeneratePairError,
                     FitDivergedError, MetatomoError, NoSolutionError,
                     UnderdeterminedSystemError, UnreachablePhaseError)
from .frames import (Frame, condition_number, correlation_element_count,
                     instrument_matrix, min_ports,
                     multiphoton_condition_bound, platonic_frame)
from .grating import (GratingDesign, MetaAtom, MetasurfaceLayout,
                      diffraction_spectrum, geometric_phase_curve,
                      ideal_transfer_matrix, interleave_capacity,
                      solve_meta_atom, synthesize_grating)
from .polarization import (concurrence, density_from_stokes, elliptical_pair,
                           fidelity, jones_from_poincare, meta_atom_matrix,
                           permutation_symmetry, poincare_from_jones,
                           project_physical, purity, random_physical_state,
                           stokes_from_density, symmetrize, tensor_power)
from .reconstruct import (HistogramFit, LinearInversionTomography,
                          MaximumLikelihoodTomography, ReconstructionReport,
                          fit_histogram, linear_reconstruct, mle_reconstruct,
                          report, symmetric_operator_basis)
from .reference import calibrated_six_port
from .simulate import (CorrelationSet, SourceModel, TransferMatrix,
                       correlation_tensor, cross_polarized_state, hom_scan,
                       port_probabilities, qwp_matrix, qwp_state,
                       sample_counts)

__all__ = [
    "CorrelationSet", "DegenerateHistogramError", "DegeneratePairError",
    "FitDivergedError", "Frame", "GratingDesign", "HistogramFit",
    "LinearInversionTomography", "MaximumLikelihoodTomography", "MetaAtom",
    "MetasurfaceLayout", "MetatomoError", "NoSolutionError",
    "ReconstructionReport", "SourceModel", "TransferMatrix",
    "UnderdeterminedSystemError", "UnreachablePhaseError",
    "calibrated_six_port", "concurrence", "condition_number",
    "correlation_element_count", "correlation_tensor",
    "cross_polarized_state", "density_from_stokes", "diffraction_spectrum",
    "elliptical_pair", "fidelity", "fit_histogram", "geometric_phase_curve",
    "hom_scan", "ideal_transfer_matrix", "instrument_matrix",
    "interleave_capacity", "jones_from_poincare", "linear_reconstruct",
    "meta_atom_matrix", "min_ports", "mle_reconstruct",
    "multiphoton_condition_bound", "permutation_symmetry", "platonic_frame",
    "poincare_from_jones", "port_probabilities", "project_physical", "purity",
    "qwp_matrix", "qwp_state", "random_physical_state", "report",
    "sample_counts", "solve_meta_atom", "stokes_from_density",
    "symmetric_operator_basis", "symmetrize", "synthesize_grating",
    "tensor_power",
]
