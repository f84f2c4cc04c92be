import os
import sys
import time
import inspect
import pathlib
import argparse
import tempfile
import importlib
from typing import Dict, List

from colorama import Fore, Style, init

# Initialize colorama
init(autoreset=True)

# Add project root to path for imports
project_root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
if project_root not in sys.path:
    sys.path.append(project_root)

from src.tests.test_utils import (TestResult, build_from_config, generate_test_report, logger,
                                  solved_stirap_reduced, solved_toy6, toy6_config)

MODULES = ("test_timegrid", "test_models", "test_waveop", "test_oracle", "test_diagnostics",
           "test_stirap", "test_cli")

# Fixture arguments the checklist can supply without pytest
FIXTURES = {
    "report": solved_toy6,
    "stirap": solved_stirap_reduced,
    "toy6": lambda: build_from_config(toy6_config()),
}


def _arguments(func, scratch: str):
    """Keyword arguments for a test function, or None if it needs pytest."""
    if hasattr(func, "pytestmark"):
        return None
    kwargs = {}
    for name in inspect.signature(func).parameters:
        if name == "tmp_path":
            kwargs[name] = pathlib.Path(tempfile.mkdtemp(dir=scratch))
        elif name in FIXTURES:
            kwargs[name] = FIXTURES[name]()
        else:
            return None
    return kwargs


def run_module(module_name: str, scratch: str, pattern: str = None) -> List[TestResult]:
    """Run the plain test functions of one module as a checklist."""
    module = importlib.import_module(f"src.tests.{module_name}")
    results = []
    for name, func in inspect.getmembers(module, inspect.isfunction):
        if not name.startswith("test_") or func.__module__ != module.__name__:
            continue
        if pattern and pattern not in name:
            continue
        result = TestResult(name, module.__file__)
        kwargs = _arguments(func, scratch)
        if kwargs is None:
            result.set_success("Skipped: parametrized, run it with pytest")
            result.data["skipped"] = True
            results.append(result)
            continue

        start = time.time()
        try:
            func(**kwargs)
            result.set_success()
        except Exception as e:
            result.set_failure(e, f"{type(e).__name__}: {e}")
            logger.error(f"{module_name}.{name} failed: {e}")
        result.duration = time.time() - start
        results.append(result)
        print(f"  {Fore.GREEN if result.success else Fore.RED}{result}{Style.RESET_ALL}")
    return results


def save_test_report(report: str, output_dir: str = os.path.join(project_root, "output", "test_reports")) -> str:
    """Save the test report to file."""
    os.makedirs(output_dir, exist_ok=True)
    timestamp = time.strftime("%Y%m%d_%H%M%S")
    filename = os.path.join(output_dir, f"wave_operator_test_report_{timestamp}.md")
    with open(filename, "w", encoding="utf-8") as f:
        f.write(report)
    print(f"\nTest report saved to: {filename}")
    return filename


def main():
    """Main test function."""
    parser = argparse.ArgumentParser(description="Run the wave-operator test checklist")
    parser.add_argument("--module", nargs="+", choices=MODULES, help="Modules to run (default: all)")
    parser.add_argument("-k", dest="pattern", help="Only tests whose name contains this text")
    parser.add_argument("--report", action="store_true", help="Write a Markdown report")
    args = parser.parse_args()

    results: Dict[str, List[TestResult]] = {}
    with tempfile.TemporaryDirectory(prefix="waveop-tests-") as scratch:
        for module_name in args.module or MODULES:
            print(f"\n{Fore.CYAN}=== {module_name} ==={Style.RESET_ALL}")
            logger.info(f"Running checklist for {module_name}")
            results[module_name] = run_module(module_name, scratch, args.pattern)

    total = sum(len(tests) for tests in results.values())
    failed = sum(1 for tests in results.values() for test in tests if not test.success)
    skipped = sum(1 for tests in results.values() for test in tests if test.data.get("skipped"))
    color = Fore.GREEN if failed == 0 else Fore.RED
    print(f"\n{color}{total - failed - skipped} passed, {failed} failed, {skipped} skipped{Style.RESET_ALL}")

    if args.report:
        save_test_report(generate_test_report(results))
    return 0 if failed == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
