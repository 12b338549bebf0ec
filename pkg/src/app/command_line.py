import argparse
import json
import logging
import sys
from typing import Any, Dict, List, Optional

from src.app.experiment_runner import (
    EXIT_CONFIG,
    EXIT_OK,
    ExperimentRunner,
    exit_code_for,
)
from src.processing.dumper import Dumper
from src.processing.exporter import to_json_compatible
from src.processing.loader import Loader
from src.processing.preprocessor import Preprocessor
from src.structures.run_config import RunConfig
from src.utils.errors import BeatingLabError
from src.utils.utils import configure_logging

log = logging.getLogger(__name__)

# Command-line flag destination -> dotted configuration key
OVERRIDE_FLAGS = {
    "a": "well.a",
    "gamma1": "well.gamma1",
    "gamma2": "well.gamma2",
    "sigma": "nonlinearity.sigma",
    "initial_strength": "nonlinearity.initial_strength",
    "dt": "solver.dt",
    "t_final": "solver.t_final",
    "dt_per_period": "solver.dt_per_period",
    "periods": "solver.periods",
    "fixed_point_tol": "solver.fixed_point_tol",
    "blowup_threshold": "solver.blowup_threshold",
    "threshold": "suppression_threshold",
    "output_dir": "outputs.directory",
}


def _add_source_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scenario", help="name of a preset from src/definitions/scenario_presets.yaml")
    parser.add_argument("--config", help="path to a YAML run configuration")
    group = parser.add_argument_group("overrides")
    group.add_argument("--a", type=float, help="half-separation of the wells")
    group.add_argument("--gamma1", type=float, help="strength of the left well")
    group.add_argument("--gamma2", type=float, help="strength of the right well")
    group.add_argument("--mix", type=float, nargs=2, metavar=("ALPHA", "BETA"), help="real mix coefficients")
    group.add_argument("--sigma", type=float, help="power of the nonlinearity")
    group.add_argument("--initial-strength", type=float, help="initial strength gamma_pm(0)")
    group.add_argument("--dt", type=float, help="absolute time step")
    group.add_argument("--t-final", type=float, help="absolute horizon")
    group.add_argument("--dt-per-period", type=float, help="steps per beating period")
    group.add_argument("--periods", type=float, help="horizon in beating periods")
    group.add_argument("--fixed-point-tol", type=float, help="per-step solver tolerance")
    group.add_argument("--blowup-threshold", type=float, help="charge modulus treated as blow-up")
    group.add_argument("--threshold", type=float, help="relative contrast counted as suppressed")
    group.add_argument("--output-dir", help="directory for the run artifacts")
    group.add_argument("--snapshots", action="store_true", default=None, help="write density snapshots")
    group.add_argument("--figures", action="store_true", default=None, help="write PNG figures")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beating-lab", description="Quantum beating of a double delta well and its nonlinear suppression."
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings only")
    subparsers = parser.add_subparsers(dest="command", required=True)

    spectrum = subparsers.add_parser("spectrum", help="print the spectral report as JSON")
    _add_source_arguments(spectrum)
    spectrum.add_argument("--json-out", help="also write the report to this file")

    run = subparsers.add_parser("run", help="run one experiment")
    _add_source_arguments(run)

    sweep = subparsers.add_parser("sweep", help="run one experiment per value of a parameter")
    _add_source_arguments(sweep)
    sweep.add_argument("--axis", required=True, choices=ExperimentRunner.SWEEP_AXES)
    sweep.add_argument("--values", required=True, type=float, nargs="+")
    sweep.add_argument("--workers", type=int, default=1, help="parallel worker processes")

    validate = subparsers.add_parser("validate-config", help="validate and print the canonical configuration")
    _add_source_arguments(validate)
    return parser


def collect_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    overrides = {}
    for flag, key in OVERRIDE_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "mix", None) is not None:
        overrides["mix"] = tuple(args.mix)
    for flag in ("snapshots", "figures"):
        if getattr(args, flag, None):
            overrides[f"outputs.{flag}"] = True
    return overrides


def load_run_config(args: argparse.Namespace, preprocessor: Optional[Preprocessor] = None) -> RunConfig:
    if args.scenario is None and args.config is None:
        raise BeatingLabError("Give a preset with --scenario or a file with --config")
    preprocessor = preprocessor or Preprocessor.from_presets_file()
    raw = Loader.load_config_data(args.config) if args.config is not None else None
    return preprocessor.create_run_config(raw, preset=args.scenario, overrides=collect_overrides(args))


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point of the command line.

    Args:
        argv (list[str] or None): Arguments without the program name; sys.argv[1:] when None.

    Returns:
        (int): 0 success, 2 configuration error, 3 numerical non-convergence, 4 blow-up.
    """
    args = build_parser().parse_args(argv)
    configure_logging(1 if args.verbose else (-1 if args.quiet else 0))

    try:
        run_config = load_run_config(args)
    except BeatingLabError as error:
        print(f"Configuration error: {error}", file=sys.stderr)
        return EXIT_CONFIG

    runner = ExperimentRunner()
    try:
        if args.command == "validate-config":
            print(Dumper(run_config).to_yaml_string(), end="")
            return EXIT_OK
        if args.command == "spectrum":
            report = to_json_compatible(runner.spectrum(run_config))
            text = json.dumps(report, indent=2)
            print(text)
            if args.json_out:
                with open(args.json_out, "w") as file:
                    file.write(text + "\n")
            return EXIT_OK
        if args.command == "run":
            outcome = runner.run(run_config)
            print(f"{outcome.status}: artifacts in {outcome.directory}")
            return outcome.exit_code
        rows = runner.sweep(run_config, args.axis, args.values, workers=args.workers)
        for row in rows:
            print(f"{args.axis}={row['value']:g}: {row['status']}")
        return EXIT_OK
    except BeatingLabError as error:
        log.error(str(error))
        print(f"Error: {error}", file=sys.stderr)
        return exit_code_for(error)
