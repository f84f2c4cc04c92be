import os
import sys
import traceback
import functools
from typing import Dict, List, Optional

import numpy as np

# Add project root to path for imports
project_root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
if project_root not in sys.path:
    sys.path.append(project_root)

from src.models import build_model, levels_basis, resolve_active, HamiltonianModel, PulseSpec
from src.timegrid import make_time_grid
from src.utils.log_utils import setup_logger
from src.utils.preset_manager import PresetManager
from src.waveop import ActiveSpace, SolveOptions, solve

# Initialize logger
log_path = os.path.join(project_root, "output", "logs", "tests", "test_wave_operator.log")
logger = setup_logger('test_wave_operator', log_path)

CONFIG_DIR = os.path.join(project_root, "config")


class TestResult:
    """Class to track test results with detailed error information"""
    __test__ = False

    def __init__(self, test_name: str, module_path: str = None):
        self.test_name = test_name
        self.module_path = module_path
        self.success = False
        self.message = ""
        self.error = None
        self.error_line = None
        self.error_path = None
        self.duration = 0
        self.data = {}

    def set_success(self, message: str = "Test passed successfully"):
        self.success = True
        self.message = message
        return self

    def set_failure(self, error, message: str = "Test failed"):
        self.success = False
        self.message = message
        self.error = str(error)

        # First frame inside the project
        tb = traceback.extract_tb(sys.exc_info()[2])
        for frame in reversed(tb):
            if project_root in frame.filename:
                self.error_path = frame.filename
                self.error_line = frame.lineno
                break
        return self

    def __str__(self):
        status = "✅ PASS" if self.success else "❌ FAIL"
        result = f"{status} | {self.test_name}"
        if not self.success:
            result += f": {self.message}"
            if self.error_path and self.error_line:
                result += f" at {os.path.relpath(self.error_path, project_root)}:{self.error_line}"
        return result


def preset_manager() -> PresetManager:
    return PresetManager(CONFIG_DIR)


def toy6_config(overrides: Optional[dict] = None):
    """The toy6 preset as a RunConfig, with optional overrides."""
    return preset_manager().get_preset("toy6", overrides)


def build_from_config(config):
    """(model, grid, active) of a run configuration."""
    grid = make_time_grid(config.T, config.n_time)
    model = build_model(config.model, config.pulses, config.absorber, config.T, config.T0)
    active = ActiveSpace.from_indices(resolve_active(config.active, model.basis), model.size)
    return model, grid, active


@functools.lru_cache(maxsize=None)
def solved_toy6():
    """Converged report of the toy6 preset, shared by the diagnostics tests."""
    config = toy6_config()
    model, grid, active = build_from_config(config)
    return solve(model, grid, active, SolveOptions(**config.solver))


STIRAP_REDUCED_SAMPLES = 16384


@functools.lru_cache(maxsize=None)
def solved_stirap_reduced():
    """stirap-m5 on 16384 time samples, solved once and shared."""
    config = preset_manager().get_preset("stirap-m5", {"grid": {"n_time": STIRAP_REDUCED_SAMPLES}})
    model, grid, active = build_from_config(config)
    return solve(model, grid, active, SolveOptions(**config.solver))


def two_level_model(coupling: float = 1.0, field: float = 0.1, energies=(0.0, 0.0)) -> HamiltonianModel:
    """
    Two levels driven by a constant field.

    A pulse with zero carrier frequency and a huge width is constant to
    double precision, so H = diag(energies) - field * coupling * sigma_x.
    """
    dipole = np.array([[0.0, coupling], [coupling, 0.0]])
    basis = levels_basis(energies, dipole, mode="hermitian")
    pulse = PulseSpec(amplitude=field, frequency=0.0, center=0.0, width=1e9)
    return HamiltonianModel(basis=basis, pulses=(pulse,))


def random_complex_symmetric(n: int, seed: int = 7) -> np.ndarray:
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return a + a.T


def random_hermitian(n: int, seed: int = 11) -> np.ndarray:
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return a + a.conj().T


def generate_test_report(results: Dict[str, List[TestResult]]) -> str:
    """Generate a markdown report from test results."""
    report = "# Wave Operator Test Report\n\n"

    total_tests = sum(len(tests) for tests in results.values())
    passed_tests = sum(sum(1 for test in tests if test.success) for tests in results.values())
    failed_tests = total_tests - passed_tests

    report += "## Summary\n\n"
    report += f"- **Total Tests:** {total_tests}\n"
    report += f"- **Passed:** {passed_tests}\n"
    report += f"- **Failed:** {failed_tests}\n\n"

    success_rate = 100 * passed_tests / total_tests if total_tests > 0 else 0
    report += f"**Success Rate:** {success_rate:.1f}%\n\n"

    progress_bar = "["
    progress_segments = 20
    filled = int(progress_segments * success_rate / 100)
    progress_bar += "=" * filled
    if filled < progress_segments:
        progress_bar += ">" + " " * (progress_segments - filled - 1)
    progress_bar += "]"
    report += f"```\n{progress_bar}\n```\n\n"

    report += "## Detailed Results\n\n"
    for section, tests in results.items():
        section_total = len(tests)
        section_passed = sum(1 for test in tests if test.success)
        section_rate = 100 * section_passed / section_total if section_total > 0 else 0

        report += f"### {section}\n\n"
        report += f"Success Rate: {section_rate:.1f}% ({section_passed}/{section_total})\n\n"
        report += "| Test | Result | Duration | Message |\n"
        report += "|------|--------|----------|--------|\n"
        for test in tests:
            status = "✅ Pass" if test.success else "❌ Fail"
            duration = f"{test.duration:.2f}s" if test.duration else "N/A"
            message = test.message.replace("|", "\\|")
            report += f"| {test.test_name} | {status} | {duration} | {message} |\n"
        report += "\n"
    return report
