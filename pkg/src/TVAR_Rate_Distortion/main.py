"""Command-line entry point: curves, verification reports, simulation, spectra, plots and matrices."""

import argparse
import dataclasses
import logging
import sys
from collections.abc import Callable
from typing import Any

from TVAR_Rate_Distortion.artifacts.plotting import plot_curves
from TVAR_Rate_Distortion.artifacts.writers import (
    build_manifest,
    read_curve_csv,
    save_json_obj,
    write_band_file,
    write_curve_csv,
    write_dense_csv,
    write_paths_csv,
    write_spectrum_csv,
)
from TVAR_Rate_Distortion.errors import ConvergenceError, DomainError, InputError, ModelConfigError, ModelValidationError
from TVAR_Rate_Distortion.matrices.band_matrices import build_phi, build_phi_inv
from TVAR_Rate_Distortion.model.simulator import simulate
from TVAR_Rate_Distortion.model.spectrum import ModelValidator, sample_spectrum
from TVAR_Rate_Distortion.model.tvar_model import TvarModel
from TVAR_Rate_Distortion.rate_distortion.asymptotic_rd import AsymptoticRateDistortion
from TVAR_Rate_Distortion.rate_distortion.convergence import convergence_study
from TVAR_Rate_Distortion.rate_distortion.curves import check_curve
from TVAR_Rate_Distortion.rate_distortion.finite_rd import FiniteRateDistortion
from TVAR_Rate_Distortion.rate_distortion.quadrature import QuadConfig
from TVAR_Rate_Distortion.spectral.verification import SpectralVerifier, covariance_mc_check
from TVAR_Rate_Distortion.utils import configure_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_VALIDATION = 3
EXIT_CONVERGENCE = 4
EXIT_VERIFICATION = 5


def _load_model(args: argparse.Namespace) -> TvarModel:
    if not args.model:
        msg = "--model is required for this command"
        raise ModelConfigError(msg)
    return TvarModel.from_json(args.model)


def _quad(args: argparse.Namespace) -> QuadConfig:
    return QuadConfig.from_config(
        r_panels=args.r_panels,
        omega_panels=args.omega_panels,
        nodes_per_panel=args.nodes_per_panel,
        refine_tol=args.refine_tol,
        max_refinements=args.max_refinements,
        workers=args.workers,
    )


def cmd_curve(args: argparse.Namespace) -> int:
    """Compute a finite-N or asymptotic curve and write it as CSV plus sidecar."""
    model = _load_model(args)
    settings = {"method": args.method, "points": args.points, "units": args.units}
    if args.method == "finite":
        if args.n is None:
            msg = "--n is required for the finite method"
            raise InputError(msg)
        curve = FiniteRateDistortion(model, args.n).curve(args.points)
        settings["n"] = args.n
    else:
        quad = _quad(args)
        curve = AsymptoticRateDistortion(model, quad).curve(args.points, progress=args.progress)
        settings["quad"] = quad.to_dict()

    shape = check_curve(curve)
    for violation in shape.violations:
        logger.warning("Curve shape: %s", violation)
    write_curve_csv(curve, args.out or "curve.csv", build_manifest("curve", model, settings), units=args.units)
    if not curve.all_converged:
        logger.error("%d curve point(s) did not converge", sum(not p.converged for p in curve.points))
        return EXIT_CONVERGENCE
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    """Run the spectral checks over an N ladder and write the JSON report."""
    model = _load_model(args)
    quad = _quad(args)
    verifier = SpectralVerifier(model, quad, rel_tol=args.rel_tol)
    suite = verifier.run(args.n_list, args.k_list)
    extra: dict[str, Any] = {}
    if args.distortions:
        n_list = args.n_list or verifier.config["n_list"]
        extra["convergence"] = convergence_study(model, n_list, args.distortions, quad).to_dict()
    if args.mc_paths:
        extra["covariance"] = covariance_mc_check(model, args.mc_n, args.mc_paths, args.seed).to_dict()
    settings = {"n_list": args.n_list, "k_list": args.k_list, "rel_tol": verifier.rel_tol, "quad": quad.to_dict(), "distortions": args.distortions, "seed": args.seed}
    extra["manifest"] = build_manifest("verify", model, settings).to_dict()
    suite = dataclasses.replace(suite, extra=extra)
    save_json_obj(suite.to_dict(), args.out or "verify.json")
    if not suite.passed:
        logger.error("Verification thresholds exceeded; report written to %s", args.out or "verify.json")
        return EXIT_VERIFICATION
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    """Simulate seeded sample paths and write them as CSV."""
    model = _load_model(args)
    sample = simulate(model, args.n, args.paths, args.seed)
    manifest = build_manifest("simulate", model, {"n": args.n, "paths": args.paths, "seed": args.seed})
    write_paths_csv(sample, args.out or "paths.csv", manifest)
    return EXIT_OK


def cmd_spectrum(args: argparse.Namespace) -> int:
    """Sample g on a grid, write the triples and report the validation outcome."""
    model = _load_model(args)
    grid = sample_spectrum(model, args.nr, args.nw)
    validation = ModelValidator(args.nr, args.nw).validate(model)
    manifest = build_manifest("spectrum", model, {"nr": grid.r_nodes.size, "nw": grid.omega_nodes.size, "g_floor": validation.g_floor})
    write_spectrum_csv(grid, args.out or "spectrum.csv", manifest, {"validation": validation.to_dict()})
    if not validation.is_valid:
        logger.error("Model validation failed: %s", validation.feedback)
        return EXIT_VALIDATION
    return EXIT_OK


def cmd_plot(args: argparse.Namespace) -> int:
    """Plot one or more curve CSVs into a single SVG."""
    curves = [read_curve_csv(path) for path in args.curves]
    plot_curves(curves, args.out or "curves.svg", units=args.units)
    return EXIT_OK


def cmd_matrix(args: argparse.Namespace) -> int:
    """Export the covariance (dense CSV) or its inverse (band text file)."""
    model = _load_model(args)
    if args.kind == "phi":
        write_dense_csv(build_phi(model, args.n), args.out or "phi.csv")
    else:
        write_band_file(build_phi_inv(model, args.n), model.noise_variance, args.out or "phi_inv.band")
    logger.info("Matrix '%s' (N=%d) exported", args.kind, args.n)
    return EXIT_OK


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", help="Model JSON file")
    common.add_argument("--out", help="Output file (CSV, JSON or SVG depending on the command)")
    common.add_argument("--units", choices=["nats", "bits"], default="nats", help="Rate unit for display")
    common.add_argument("--seed", type=int, default=0, help="Seed for the innovation generator")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("--quiet", action="store_true", help="Only log warnings and errors")
    verbosity.add_argument("--verbose", action="store_true", help="Log debug details")
    common.add_argument("--progress", action="store_true", help="Show a progress bar on stdout")
    return common


def _quad_parser() -> argparse.ArgumentParser:
    quad = argparse.ArgumentParser(add_help=False)
    group = quad.add_argument_group("quadrature", "Overrides of the quadrature config")
    group.add_argument("--r-panels", type=int)
    group.add_argument("--omega-panels", type=int)
    group.add_argument("--nodes-per-panel", type=int)
    group.add_argument("--refine-tol", type=float)
    group.add_argument("--max-refinements", type=int)
    group.add_argument("--workers", type=int, help="Threads evaluating curve points")
    return quad


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with one sub-command per verb."""
    parser = argparse.ArgumentParser(prog="tvar-rd", description="Rate-distortion curves for Gaussian TVAR sources")
    sub = parser.add_subparsers(dest="command", required=True)
    common, quad = _common_parser(), _quad_parser()

    curve = sub.add_parser("curve", parents=[common, quad], help="Compute a rate-distortion curve")
    curve.add_argument("--method", choices=["finite", "asymptotic"], default="asymptotic")
    curve.add_argument("--n", type=int, help="Block length for the finite method")
    curve.add_argument("--points", type=int, help="Number of water levels")
    curve.set_defaults(handler=cmd_curve)

    verify = sub.add_parser("verify", parents=[common, quad], help="Check eigenvalue moments against their limits")
    verify.add_argument("--n-list", type=int, nargs="+", help="Block-length ladder")
    verify.add_argument("--k-list", type=int, nargs="+", help="Moment orders")
    verify.add_argument("--rel-tol", type=float, help="Relative error threshold")
    verify.add_argument("--distortions", type=float, nargs="+", help="Also tabulate |R_N(D) - R(D)| at these distortions")
    verify.add_argument("--mc-paths", type=int, help="Also run the Monte-Carlo covariance check with this many paths")
    verify.add_argument("--mc-n", type=int, default=8, help="Path length of the covariance check")
    verify.set_defaults(handler=cmd_verify)

    sim = sub.add_parser("simulate", parents=[common], help="Simulate sample paths")
    sim.add_argument("--n", type=int, required=True, help="Path length")
    sim.add_argument("--paths", type=int, default=1, help="Number of paths")
    sim.set_defaults(handler=cmd_simulate)

    spectrum = sub.add_parser("spectrum", parents=[common], help="Sample the inverse-spectrum surface g(r, w)")
    spectrum.add_argument("--nr", type=int, help="Number of r nodes")
    spectrum.add_argument("--nw", type=int, help="Number of w nodes")
    spectrum.set_defaults(handler=cmd_spectrum)

    plot = sub.add_parser("plot", parents=[common], help="Plot curve CSVs into one SVG")
    plot.add_argument("curves", nargs="+", help="Curve CSV files")
    plot.set_defaults(handler=cmd_plot)

    matrix = sub.add_parser("matrix", parents=[common], help="Export the covariance or its inverse")
    matrix.add_argument("--n", type=int, required=True, help="Dimension N")
    matrix.add_argument("--kind", choices=["phi", "phi-inv"], default="phi-inv")
    matrix.set_defaults(handler=cmd_matrix)
    return parser


def main(argv: list[str] | None = None) -> int:
    """Run the command line and return its exit code."""
    args = build_parser().parse_args(argv)
    level = logging.WARNING if args.quiet else logging.DEBUG if args.verbose else logging.INFO
    configure_logging(level)
    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        return handler(args)
    except ModelValidationError as e:
        logger.error("Model validation failed: %s", e)  # noqa: TRY400
        return EXIT_VALIDATION
    except ConvergenceError as e:
        logger.error("%s", e)  # noqa: TRY400
        return EXIT_CONVERGENCE
    except (ModelConfigError, InputError, DomainError, OSError) as e:
        logger.error("%s", e)  # noqa: TRY400
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
