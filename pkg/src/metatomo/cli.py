"""Command-line interface tying design, simulation, and reconstruction into
reproducible file-based pipelines.

Subcommands: ``frame``, ``design``, ``simulate``, ``reconstruct``,
``analyze``. Angles are degrees on the command line (radians in files);
ports are labeled 1..M. Every output file gets a ``<name>.manifest.json``
sidecar recording the command, input digests, seed, and tool version; a
rerun with an equal manifest produces a byte-identical output file.

Exit codes: 0 success, 2 input or validation error, 3 numerical
non-convergence (partial output is still written).
"""

import argparse
import hashlib
import json
import math
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__, serialize
from .errors import MetatomoError
from .frames import (PLATONIC_PORT_COUNTS, condition_number,
                     instrument_matrix, multiphoton_condition_bound,
                     platonic_frame)
from .grating import diffraction_spectrum, synthesize_grating
from .polarization import elliptical_pair
from .reconstruct import (MaximumLikelihoodTomography, linear_reconstruct,
                          report)
from .simulate import (SourceModel, correlation_tensor, hom_scan,
                       sample_counts)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NOT_CONVERGED = 3


def _sha256(path):
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(out_path, argv, input_paths, seed):
    manifest = {
        "command": ["metatomo"] + list(argv),
        "inputs": {str(p): _sha256(p) for p in input_paths},
        "seed": seed,
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    with open(str(out_path) + ".manifest.json", "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, sort_keys=True, indent=2)
        handle.write("\n")


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)


def _emit(args, text):
    if not args.quiet:
        print(text)


def _add_common(parser):
    parser.add_argument("--out", help="output file path")
    parser.add_argument("--seed", type=int, default=0, help="sampling seed")
    parser.add_argument("--format", choices=["json", "csv"], default="json",
                        help="output format where both are supported")
    parser.add_argument("--quiet", action="store_true",
                        help="suppress informational output")


def cmd_frame(args, argv):
    if args.ports not in PLATONIC_PORT_COUNTS:
        print(f"error: no optimal frame with {args.ports} ports; "
              f"supported port counts: {', '.join(map(str, PLATONIC_PORT_COUNTS))}",
              file=sys.stderr)
        return EXIT_INPUT
    frame = platonic_frame(args.ports)
    kappa = condition_number(instrument_matrix(frame))
    _emit(args, f"ports: {args.ports}")
    _emit(args, f"condition number: {kappa:.7f}")
    _emit(args, f"single-photon optimum: {math.sqrt(3):.7f}")
    if args.out:
        serialize.write_json(args.out, serialize.frame_payload(frame))
        _write_manifest(args.out, argv, [], args.seed)
        _emit(args, f"frame written to {args.out}")
    return EXIT_OK


def cmd_design(args, argv):
    alpha = math.radians(args.alpha)
    beta = math.radians(args.beta)
    design = synthesize_grating((alpha, beta), args.atoms)
    psi, psi_tilde = elliptical_pair(alpha, beta)
    _emit(args, f"pair: alpha={alpha:.6f} rad, beta={beta:.6f} rad, "
                f"{args.atoms} atoms per super-cell")
    for name, state in (("pair state", psi), ("orthogonal partner", psi_tilde)):
        spectrum = diffraction_spectrum(design, state)
        top = max(spectrum, key=lambda item: item[1])
        _emit(args, f"{name}: order {top[0]:+d} efficiency {top[1]:.6f}")
    if args.out:
        if args.format == "csv":
            _write_text(args.out, design.to_csv())
        else:
            serialize.write_json(args.out, serialize.grating_payload(design))
        _write_manifest(args.out, argv, [], args.seed)
        _emit(args, f"design written to {args.out}")
    return EXIT_OK


def cmd_simulate(args, argv):
    transfer = serialize.transfer_matrix_from_payload(
        serialize.read_json(args.transfer))
    inputs = [args.transfer]

    if args.hom is not None:
        port_a, port_b = (p - 1 for p in args.hom)
        source = SourceModel(eta0=args.eta0, sigma_tau=args.sigma_tau)
        delays = np.linspace(-args.delay_span * args.sigma_tau,
                             args.delay_span * args.sigma_tau,
                             args.delay_points)
        scan = hom_scan(transfer, (port_a, port_b), source, delays)
        center = scan[np.argmin(np.abs(scan[:, 0])), 1]
        far = scan[0, 1]
        if far > 0:
            kind = "dip" if center < far else "peak"
            _emit(args, f"{kind}: relative size {abs(far - center) / far:.4%} "
                        f"at zero delay")
        if args.out:
            _write_text(args.out, serialize.hom_scan_csv(scan))
            _write_manifest(args.out, argv, inputs, args.seed)
            _emit(args, f"delay scan written to {args.out}")
        return EXIT_OK

    if args.state is None:
        print("error: simulate needs --state (or --hom)", file=sys.stderr)
        return EXIT_INPUT
    rho = serialize.density_matrix_from_payload(serialize.read_json(args.state))
    inputs.append(args.state)
    n_photons = args.photons or int(round(math.log2(rho.shape[0])))
    correlations = correlation_tensor(transfer, rho, n_photons)
    if args.normalize:
        correlations = correlations.normalized()
    if args.shots is not None:
        correlations = sample_counts(correlations, args.shots, args.seed)
        _emit(args, f"sampled {int(correlations.total())} events "
                    f"(seed {args.seed})")
    else:
        _emit(args, f"{len(correlations.values)} expected correlations, "
                    f"total {correlations.total():.6f}")
    if args.out:
        serialize.write_json(args.out,
                             serialize.correlation_set_payload(correlations))
        _write_manifest(args.out, argv, inputs, args.seed)
        _emit(args, f"correlations written to {args.out}")
    return EXIT_OK


def _print_report(args, rep):
    _emit(args, f"method: {rep.method}")
    _emit(args, f"purity: {rep.purity:.6f}")
    if rep.concurrence is not None:
        _emit(args, f"concurrence: {rep.concurrence:.6f}")
    if rep.fidelity_vs_reference is not None:
        _emit(args, f"fidelity vs reference: {rep.fidelity_vs_reference:.6f}")
    if rep.log_likelihood is not None:
        _emit(args, f"log-likelihood: {rep.log_likelihood:.6f} "
                    f"({rep.iterations} iterations)")


def cmd_reconstruct(args, argv):
    transfer = serialize.transfer_matrix_from_payload(
        serialize.read_json(args.transfer))
    counts = serialize.correlation_set_from_payload(
        serialize.read_json(args.counts))
    inputs = [args.transfer, args.counts]
    reference = None
    if args.reference:
        reference = serialize.density_matrix_from_payload(
            serialize.read_json(args.reference))
        inputs.append(args.reference)

    if args.method == "linear":
        rho = linear_reconstruct(transfer, counts)
        rep = report(rho, reference=reference, method="linear")
    else:
        estimator = MaximumLikelihoodTomography(
            transfer, tol=args.tol, max_iter=args.max_iter).fit(counts)
        rep = report(estimator.rho_, reference=reference, method="mle",
                     log_likelihood=estimator.log_likelihood_,
                     iterations=estimator.n_iter_,
                     converged=estimator.converged_)
    _print_report(args, rep)
    if args.out:
        serialize.write_json(args.out, serialize.report_payload(rep))
        _write_manifest(args.out, argv, inputs, args.seed)
        _emit(args, f"report written to {args.out}")
    if not rep.converged:
        print("warning: estimate did not converge; best iterate reported",
              file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_analyze(args, argv):
    rho = serialize.density_matrix_from_payload(serialize.read_json(args.rho))
    inputs = [args.rho]
    reference = None
    if args.reference:
        reference = serialize.density_matrix_from_payload(
            serialize.read_json(args.reference))
        inputs.append(args.reference)
    rep = report(rho, reference=reference, method="analysis")
    _print_report(args, rep)
    if args.out:
        serialize.write_json(args.out, serialize.report_payload(rep))
        _write_manifest(args.out, argv, inputs, args.seed)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="metatomo",
        description="Metasurface polarimetry: frame design, grating synthesis, "
                    "coincidence simulation, and state tomography.")
    parser.add_argument("--version", action="version",
                        version=f"metatomo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_frame = sub.add_parser("frame", help="optimal Platonic measurement frame")
    p_frame.add_argument("--ports", type=int, required=True,
                         help=f"port count, one of {PLATONIC_PORT_COUNTS}")
    _add_common(p_frame)
    p_frame.set_defaults(func=cmd_frame)

    p_design = sub.add_parser("design", help="synthesize a metagrating")
    p_design.add_argument("--alpha", type=float, required=True,
                          help="pair ellipticity angle in degrees")
    p_design.add_argument("--beta", type=float, required=True,
                          help="pair phase angle in degrees")
    p_design.add_argument("--atoms", type=int, default=8,
                          help="meta-atoms per super-cell (>= 8)")
    _add_common(p_design)
    p_design.set_defaults(func=cmd_design)

    p_sim = sub.add_parser("simulate", help="expected correlations, delay scans, counts")
    p_sim.add_argument("--transfer", required=True, help="transfer matrix JSON")
    p_sim.add_argument("--state", help="density matrix JSON")
    p_sim.add_argument("--photons", type=int, help="photon number (default: from state)")
    p_sim.add_argument("--hom", type=int, nargs=2, metavar=("A", "B"),
                       help="two-port delay scan between 1-based ports A and B")
    p_sim.add_argument("--eta0", type=float, default=0.58,
                       help="peak spectral overlap of the photon pair")
    p_sim.add_argument("--sigma-tau", type=float, default=1.0,
                       help="overlap decay width in delay units")
    p_sim.add_argument("--delay-span", type=float, default=8.0,
                       help="scan half-range in units of sigma-tau")
    p_sim.add_argument("--delay-points", type=int, default=81,
                       help="number of delay samples (odd keeps zero delay)")
    p_sim.add_argument("--shots", type=float,
                       help="sample Poisson counts at this exposure scale")
    p_sim.add_argument("--normalize", action="store_true",
                       help="rescale expected values to unit total")
    _add_common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_rec = sub.add_parser("reconstruct", help="estimate a state from counts")
    p_rec.add_argument("--transfer", required=True, help="transfer matrix JSON")
    p_rec.add_argument("--counts", required=True, help="correlation set JSON")
    p_rec.add_argument("--method", choices=["linear", "mle"], default="mle")
    p_rec.add_argument("--reference", help="reference state JSON for fidelity")
    p_rec.add_argument("--max-iter", type=int, default=10000,
                       help="iteration budget for the likelihood optimizer")
    p_rec.add_argument("--tol", type=float, default=1e-10,
                       help="relative log-likelihood convergence tolerance")
    _add_common(p_rec)
    p_rec.set_defaults(func=cmd_reconstruct)

    p_an = sub.add_parser("analyze", help="metrics of a stored state")
    p_an.add_argument("--rho", required=True, help="density matrix JSON")
    p_an.add_argument("--reference", help="reference state JSON for fidelity")
    _add_common(p_an)
    p_an.set_defaults(func=cmd_analyze)

    return parser


def main(argv=None):
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, argv)
    except (MetatomoError, ValueError, KeyError, OSError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
