"""File formats: JSON for states, frames, transfer matrices, correlation
sets, grating designs, and reports; CSV for atom tables, delay scans, and
histograms.

Conventions shared by every format: complex numbers are two-element
``[re, im]`` arrays, matrices are row-major nested lists, angles are radians,
and port indices are 1-based in files (0-based inside the package). JSON is
written with sorted keys and a trailing newline so identical data produce
byte-identical files.
"""

import csv
import io
import json

import numpy as np

from .frames import Frame
from .grating import GratingDesign, MetaAtom
from .reconstruct import ReconstructionReport
from .simulate import CorrelationSet, TransferMatrix
from .validation import as_density_matrix


def complex_to_pair(z):
    return [float(np.real(z)), float(np.imag(z))]


def pair_to_complex(pair):
    return complex(pair[0], pair[1])


def matrix_to_lists(matrix):
    return [[complex_to_pair(z) for z in row] for row in np.asarray(matrix, dtype=complex)]


def lists_to_matrix(lists):
    return np.array([[pair_to_complex(p) for p in row] for row in lists], dtype=complex)


def dumps(payload):
    """Canonical JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def write_json(path, payload):
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(dumps(payload))


def read_json(path):
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


# -- density matrices --------------------------------------------------------

def density_matrix_payload(rho):
    rho = as_density_matrix(rho)
    n = int(round(np.log2(rho.shape[0])))
    return {"format": "density-matrix", "n_photons": n,
            "matrix": matrix_to_lists(rho)}


def density_matrix_from_payload(payload):
    return as_density_matrix(lists_to_matrix(payload["matrix"]),
                             n_photons=payload.get("n_photons"))


# -- transfer matrices and frames --------------------------------------------

def transfer_matrix_payload(transfer):
    return {"format": "transfer-matrix", "n_ports": transfer.n_ports,
            "rows": matrix_to_lists(transfer.rows)}


def transfer_matrix_from_payload(payload):
    rows = lists_to_matrix(payload["rows"])
    if "n_ports" in payload and payload["n_ports"] != rows.shape[0]:
        raise ValueError(f"declared {payload['n_ports']} ports but "
                         f"{rows.shape[0]} rows present")
    return TransferMatrix(rows)


def frame_payload(frame):
    return {"format": "frame", "n_ports": frame.n_ports,
            "kets": matrix_to_lists(frame.kets)}


def frame_from_payload(payload):
    kets = lists_to_matrix(payload["kets"])
    if "n_ports" in payload and payload["n_ports"] != kets.shape[0]:
        raise ValueError(f"declared {payload['n_ports']} ports but "
                         f"{kets.shape[0]} kets present")
    return Frame(kets)


# -- correlation sets ---------------------------------------------------------

def correlation_set_payload(correlations):
    entries = [{"ports": [p + 1 for p in ports], "value": value}
               for ports, value in sorted(correlations.values.items())]
    return {"format": "correlation-set", "n_photons": correlations.n_photons,
            "n_ports": correlations.n_ports, "units": correlations.units,
            "entries": entries}


def correlation_set_from_payload(payload):
    values = {tuple(p - 1 for p in entry["ports"]): entry["value"]
              for entry in payload["entries"]}
    return CorrelationSet(payload["n_photons"], payload["n_ports"], values,
                          units=payload.get("units", "expected"))


# -- grating designs ----------------------------------------------------------

def grating_payload(design):
    return {
        "format": "grating-design",
        "alpha": design.alpha,
        "beta": design.beta,
        "atoms_per_cell": design.m,
        "lattice_constant_nm": design.lattice_constant_nm,
        "atoms": [{"theta": atom.theta, "phi1": atom.phi1, "phi2": atom.phi2,
                   "gamma": float(gamma)}
                  for atom, gamma in zip(design.atoms, design.gammas)],
    }


def grating_from_payload(payload):
    atoms = tuple(MetaAtom(entry["theta"], entry["phi1"], entry["phi2"])
                  for entry in payload["atoms"])
    gammas = np.array([entry["gamma"] for entry in payload["atoms"]])
    return GratingDesign(alpha=payload["alpha"], beta=payload["beta"],
                         atoms=atoms, gammas=gammas,
                         lattice_constant_nm=payload["lattice_constant_nm"])


# -- reconstruction reports ----------------------------------------------------

def report_payload(rep: ReconstructionReport):
    payload = {
        "format": "reconstruction-report",
        "method": rep.method,
        "density_matrix": matrix_to_lists(rep.rho),
        "n_photons": int(round(np.log2(rep.rho.shape[0]))),
        "purity": rep.purity,
        "iterations": rep.iterations,
        "converged": rep.converged,
        "physical_input": rep.physical,
        "fidelity_convention": "uhlmann",
    }
    if rep.concurrence is not None:
        payload["concurrence"] = rep.concurrence
    if rep.fidelity_vs_reference is not None:
        payload["fidelity_vs_reference"] = rep.fidelity_vs_reference
    if rep.log_likelihood is not None:
        payload["log_likelihood"] = rep.log_likelihood
    return payload


# -- CSV ------------------------------------------------------------------------

def hom_scan_csv(scan):
    """CSV with header ``delay,expected`` from an (n, 2) scan array."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["delay", "expected"])
    for delay, value in np.asarray(scan):
        writer.writerow([repr(float(delay)), repr(float(value))])
    return buf.getvalue()


def read_histogram_csv(path):
    """Load a ``time_ns,counts`` histogram; returns (bin_centers, counts)."""
    times, counts = [], []
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        if [h.strip().lower() for h in header[:2]] != ["time_ns", "counts"]:
            raise ValueError(f"expected header 'time_ns,counts', got {header}")
        for row in reader:
            if not row:
                continue
            times.append(float(row[0]))
            counts.append(float(row[1]))
    return np.array(times), np.array(counts)
