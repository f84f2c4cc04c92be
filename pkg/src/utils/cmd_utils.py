"""
Command Line Utilities

This module provides the argument parser of the wave-operator front end and
turns preset options into configuration overrides.
"""

import argparse
from typing import Any, Dict, List, Optional

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def create_parser(defaults: Optional[Dict[str, Any]] = None) -> argparse.ArgumentParser:
    """
    Create the argument parser with its three subcommands.

    Args:
        defaults: Front-end defaults (output_root, workers, log_level)

    Returns:
        Configured ArgumentParser
    """
    defaults = defaults or {}
    parser = argparse.ArgumentParser(description="Global time-dependent wave-operator integrator")

    # Common arguments for all subcommands
    parser.add_argument("--log-level", dest="log_level", choices=LOG_LEVELS,
                        default=defaults.get("log_level", "INFO"), help="Console and run-log level")
    parser.add_argument("--workers", dest="workers", type=int, default=defaults.get("workers"),
                        help="Threads for the per-column spectral solves")
    parser.add_argument("--output-root", dest="output_root", default=defaults.get("output_root", "output/runs"),
                        help="Parent directory of the run output directories")

    subparsers = parser.add_subparsers(dest="command", required=True)

    run_parser = subparsers.add_parser("run", help="Run a configuration file")
    run_parser.add_argument("config", help="Path to a JSON run configuration")
    run_parser.add_argument("--out", dest="out", help="Output directory (overrides the configuration)")

    preset_parser = subparsers.add_parser("preset", help="Run a built-in preset")
    preset_parser.add_argument("name", help="Preset name (see list-presets)")
    preset_parser.add_argument("--no-absorber", dest="no_absorber", action="store_true",
                               help="Switch the time absorber off")
    preset_parser.add_argument("--ntime", dest="ntime", type=int, help="Number of time samples")
    preset_parser.add_argument("--eps", dest="eps", type=float, help="Convergence threshold")
    preset_parser.add_argument("--out", dest="out", help="Output directory")

    subparsers.add_parser("list-presets", help="List the built-in presets")
    return parser


def parse_cli_args(argv: Optional[List[str]] = None,
                   defaults: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """
    Parse command line arguments.

    Args:
        argv: Arguments (defaults to sys.argv[1:])
        defaults: Front-end defaults

    Returns:
        Dictionary with parsed arguments
    """
    args = create_parser(defaults).parse_args(argv)
    return vars(args)  # Convert to dictionary


def preset_overrides(args: Dict[str, Any]) -> Dict[str, Any]:
    """
    Configuration overrides from the preset options.

    Args:
        args: Dictionary of parsed arguments

    Returns:
        Partial configuration to merge over the preset
    """
    overrides: Dict[str, Any] = {}
    if args.get("no_absorber"):
        overrides["absorber"] = {"enabled": False}
    if args.get("ntime") is not None:
        overrides["grid"] = {"n_time": args["ntime"]}
    if args.get("eps") is not None:
        overrides["solver"] = {"eps": args["eps"]}
    if args.get("out"):
        overrides["output_dir"] = args["out"]
    return overrides
