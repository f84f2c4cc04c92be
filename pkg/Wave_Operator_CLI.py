#!/usr/bin/env python3
"""
Wave Operator CLI

Batch front end of the global time-dependent wave-operator integrator.
Features:
- Run a JSON configuration file (run <config>)
- Run a built-in preset with quick overrides (preset <name>)
- List the built-in presets (list-presets)

Exit codes: 0 converged, 1 invalid input or error, 2 diverged, 3 stalled.
"""

import os
import sys
import json
import signal
import logging
import traceback
from typing import Any, Dict, List, Optional

from colorama import Fore, Style, init

#################################################################################
#                               INITIALIZATION                                   #
#################################################################################
"""
This section handles the initial setup of the application, including:
- Colorama initialization for colored terminal output
- Global configuration defaults
- Signal handlers for graceful shutdown
"""

# Initialize colorama
init(autoreset=True)

PROJECT_ROOT = os.path.dirname(os.path.abspath(__file__))
CLI_CONFIG_PATH = os.path.join(PROJECT_ROOT, "config", "cli_config.json")

# Front-end defaults, overridden by config/cli_config.json
CONFIG: Dict[str, Any] = {
    "output_root": "output/runs",
    "workers": None,
    "log_level": "INFO",
    "presets_file": "config/presets.json",
}

EXIT_INTERRUPTED = 130


def signal_handler(sig, frame):
    """Handle interrupt signals (Ctrl+C)

    Output files are written atomically, so an interrupted run leaves either
    complete files or none.
    """
    print(f"\n{Fore.YELLOW}Stop requested. Exiting; completed output files are kept.{Style.RESET_ALL}")
    sys.exit(EXIT_INTERRUPTED)


#################################################################################
#                              USER INTERFACE                                    #
#################################################################################

def print_header():
    """Print the application header"""
    print(f"{Fore.CYAN}{'=' * 80}{Style.RESET_ALL}")
    print(f"{Fore.CYAN}{' ' * 22}GLOBAL WAVE-OPERATOR INTEGRATOR{' ' * 22}{Style.RESET_ALL}")
    print(f"{Fore.CYAN}{'=' * 80}{Style.RESET_ALL}")
    print()


def print_result(result: Dict[str, Any]):
    """Print the outcome of one run"""
    status = result.get("status")
    color = {"converged": Fore.GREEN, "stalled": Fore.YELLOW}.get(status, Fore.RED)
    print(f"\n{color}Run '{result.get('name')}': {status} (exit {result.get('exit_code')}){Style.RESET_ALL}")
    if result.get("reason"):
        print(f"  {result['reason']}")
    if result.get("error"):
        print(f"  {Fore.RED}{result['error']}{Style.RESET_ALL}")
    for pair, value in (result.get("transfer_probabilities") or {}).items():
        print(f"  P({pair}) = {value:.6f}")
    if result.get("output_dir"):
        print(f"  Output: {result['output_dir']}")


#################################################################################
#                          CONFIGURATION MANAGEMENT                              #
#################################################################################

def load_cli_config(path: str = CLI_CONFIG_PATH):
    """Load front-end defaults if available"""
    try:
        if os.path.exists(path):
            with open(path, "r", encoding="utf-8") as f:
                saved_config = json.load(f)
            for key, value in saved_config.items():
                if key in CONFIG:
                    CONFIG[key] = value
    except Exception as e:
        print(f"{Fore.YELLOW}Could not load CLI configuration: {str(e)}{Style.RESET_ALL}")


def _project_path(path: str) -> str:
    return path if os.path.isabs(path) else os.path.join(PROJECT_ROOT, path)


#################################################################################
#                              CORE OPERATIONS                                   #
#################################################################################

def list_presets_command(manager) -> int:
    """Print the built-in presets"""
    print(f"{Fore.GREEN}Available presets:{Style.RESET_ALL}")
    for name in manager.list_presets():
        description = manager.get_preset_dict(name).get("description", "")
        print(f"  {Fore.CYAN}{name:<14}{Style.RESET_ALL} {description}")
    return 0


def run_command(args: Dict[str, Any], manager) -> int:
    """Load the configuration named by the arguments and run it"""
    from src.runner import RunController
    from src.utils.cmd_utils import preset_overrides
    from src.utils.run_config import load_config_file

    if args["command"] == "preset":
        config = manager.get_preset(args["name"], preset_overrides(args))
    else:
        config = load_config_file(args["config"], presets=manager.resolved_presets())
        if args.get("out"):
            config.output_dir = args["out"]

    controller = RunController(output_root=_project_path(args["output_root"]),
                               workers=args.get("workers"),
                               log_level=getattr(logging, args["log_level"]))
    result = controller.run(config)
    print_result(result)
    return int(result["exit_code"])


def main(argv: Optional[List[str]] = None) -> int:
    """
    Entry point.

    Args:
        argv: Command line arguments (defaults to sys.argv[1:])

    Returns:
        Process exit code
    """
    load_cli_config()
    from src.utils.cmd_utils import parse_cli_args
    try:
        args = parse_cli_args(argv, defaults=CONFIG)
    except SystemExit as e:
        # argparse exits with 2, which is reserved for divergence
        return 0 if e.code in (0, None) else 1

    # Library loggers read the level when they are first created
    os.environ["WAVEOP_LOG_LEVEL"] = args["log_level"]

    from src.utils.errors import ConfigError, WaveOperatorError
    from src.utils.preset_manager import PresetManager

    try:
        presets_path = _project_path(CONFIG["presets_file"])
        manager = PresetManager(os.path.dirname(presets_path), os.path.basename(presets_path))
        if args["command"] == "list-presets":
            return list_presets_command(manager)
        print_header()
        return run_command(args, manager)
    except ConfigError as e:
        print(f"{Fore.RED}Invalid configuration: {e}{Style.RESET_ALL}", file=sys.stderr)
        return 1
    except WaveOperatorError as e:
        print(f"{Fore.RED}{type(e).__name__}: {e}{Style.RESET_ALL}", file=sys.stderr)
        return 1
    except Exception as e:
        print(f"{Fore.RED}An error occurred: {str(e)}{Style.RESET_ALL}", file=sys.stderr)
        print(traceback.format_exc(), file=sys.stderr)
        return 1


if __name__ == "__main__":
    signal.signal(signal.SIGINT, signal_handler)
    signal.signal(signal.SIGTERM, signal_handler)
    sys.exit(main())
