"""
Run Controller

Runs one configuration end to end: build the model and grids, solve for the
wave operator, compute the requested diagnostics and write the output files.
Every outcome, failures included, ends up in a result dictionary with a
status and an exit code.
"""

import os
import time
import logging
import traceback
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import psutil
from typing_extensions import NotRequired, TypedDict

from src.diagnostics import (cyclicity_defect, dissociation_probability, floquet_extract,
                             fubini_study_report_series, fubini_study_series,
                             physical_end_index, transition_probabilities)
from src.models import build_model, resolve_active
from src.oracle import oracle_propagate
from src.timegrid import make_time_grid
from src.utils.errors import InvalidInputError, WaveOperatorError
from src.utils.log_utils import attach_file_handler, get_module_logger, get_run_logger, log_with_context
from src.utils.result_saver import ResultSaver
from src.utils.run_config import RunConfig, serialize_config
from src.waveop import (STATUS_CONVERGED, STATUS_DIVERGED, STATUS_STALLED, ActiveSpace,
                        SolveOptions, SolveReport, solve)

logger = get_module_logger('runner')

STATUS_ERROR = "error"

EXIT_CODES: Dict[str, int] = {
    STATUS_CONVERGED: 0,
    STATUS_ERROR: 1,
    STATUS_DIVERGED: 2,
    STATUS_STALLED: 3,
}


class RunResult(TypedDict):
    """Result record of one run, also written as summary.json."""
    name: str
    output_dir: str
    status: str
    exit_code: int
    duration_seconds: float
    completion_time: str
    files: List[str]
    reason: NotRequired[str]
    factors: NotRequired[List[float]]
    transfer_probabilities: NotRequired[Dict[str, float]]
    dissociation_probabilities: NotRequired[Dict[str, float]]
    cyclicity_defect: NotRequired[Dict[str, Any]]
    floquet: NotRequired[Dict[str, Any]]
    fs_distance: NotRequired[Dict[str, float]]
    error: NotRequired[str]
    error_type: NotRequired[str]


COMPONENTS = ('models', 'timegrid', 'waveop', 'diagnostics', 'oracle', 'runner')


def memory_usage_mb() -> float:
    """Resident set size of this process in MB."""
    return psutil.Process(os.getpid()).memory_info().rss / 1024 / 1024


def _finite_report(report: SolveReport) -> bool:
    return bool(np.all(np.isfinite(report.wave_operator.blocks))
                and np.all(np.isfinite(report.wave_operator.final))
                and np.all(np.isfinite(report.propagator.samples)))


def state_index(entry, basis) -> int:
    """Basis index from an int or a {'surface': s, 'level': v} label."""
    if isinstance(entry, dict):
        return basis.index_of(int(entry["surface"]), int(entry["level"]))
    if isinstance(entry, (list, tuple)) and len(entry) == 2:
        return basis.index_of(int(entry[0]), int(entry[1]))
    index = int(entry)
    if not 0 <= index < basis.size:
        raise InvalidInputError(f"state index {index} outside the basis of {basis.size} states")
    return index


class RunController:
    """
    Executes run configurations and writes their outputs.
    """

    def __init__(self, output_root: str = "output/runs", workers: Optional[int] = None,
                 log_level=logging.INFO):
        """
        Initialize the run controller.

        Args:
            output_root: Parent directory of the per-run output directories
            workers: Override for the solver's worker threads
            log_level: Level of the per-run log
        """
        self.output_root = output_root
        self.workers = workers
        self.log_level = log_level
        os.makedirs(output_root, exist_ok=True)

    def output_dir_for(self, config: RunConfig) -> str:
        return config.output_dir or os.path.join(self.output_root, config.name)

    def _log_memory(self, run_logger, stage: str) -> None:
        log_with_context(run_logger, 'INFO', f"Memory usage: {memory_usage_mb():.2f} MB", stage=stage)

    def solve_options(self, config: RunConfig) -> SolveOptions:
        """SolveOptions from the solver section (and the worker override)."""
        values = dict(config.solver)
        if self.workers is not None:
            values["workers"] = self.workers
        try:
            return SolveOptions(**values)
        except TypeError as e:
            raise config.error("solver", str(e)) from None

    def build(self, config: RunConfig):
        """
        Model, grid and active space of a configuration.

        Returns:
            (HamiltonianModel, TimeGrid, ActiveSpace)
        """
        grid = make_time_grid(config.T, config.n_time)
        model = build_model(config.model, config.pulses, config.absorber, config.T, config.T0,
                            base_dir=config.base_dir)
        try:
            active = ActiveSpace.from_indices(resolve_active(config.active, model.basis), model.size)
        except InvalidInputError as e:
            raise config.error("active", str(e)) from None
        return model, grid, active

    def _population_pairs(self, config: RunConfig, report: SolveReport) -> List[Tuple[int, int]]:
        basis, active = report.model.basis, report.active
        requested = config.diagnostics.get("populations") or []
        if not requested:
            return [(i, j) for i in active.indices for j in active.indices]
        pairs = []
        for pair in requested:
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise config.error("populations", f"pairs are [from, to], got {pair!r}")
            i, j = state_index(pair[0], basis), state_index(pair[1], basis)
            if i not in active.indices:
                raise config.error("populations", f"initial state {i} is not active")
            pairs.append((i, j))
        return pairs

    def _write_convergence(self, saver: ResultSaver, report: SolveReport) -> None:
        rows = [(n + 1, factor) for n, factor in enumerate(report.factors)]
        saver.save_csv("convergence.csv", ["iteration", "factor"], np.array(rows).reshape(-1, 2))

    def _write_populations(self, saver: ResultSaver, report: SolveReport,
                           pairs: Sequence[Tuple[int, int]]) -> Dict[str, float]:
        probabilities = transition_probabilities(report)
        active = report.active
        columns = [probabilities[:, j, active.indices.index(i)] for i, j in pairs]
        table = np.column_stack([report.grid.times] + columns)
        saver.save_csv("populations.csv", ["t"] + [f"P_{i}_{j}" for i, j in pairs], table)

        end = physical_end_index(report)
        return {f"{i}->{j}": float(probabilities[end, j, active.indices.index(i)]) for i, j in pairs}

    def _write_fs_distance(self, saver: ResultSaver, config: RunConfig, report: SolveReport,
                           run_logger) -> Optional[np.ndarray]:
        if report.converged or report.status == STATUS_STALLED:
            series = fubini_study_report_series(report)
        else:
            # Diverged runs take the distance from the reference propagator
            substeps = int(config.diagnostics.get("oracle_substeps", 0))
            if substeps <= 0:
                return None
            log_with_context(run_logger, 'INFO', f"Reference propagation for the distance series "
                             f"({substeps} substeps)", stage='diagnostics')
            states = oracle_propagate(report.model, report.grid, report.active,
                                      report.active.embedding(), n_substeps=substeps)
            series = fubini_study_series(states, report.active)
        saver.save_csv("fs_distance.csv", ["t", "distance"], np.column_stack([report.grid.times, series]))
        return series

    def _write_effective_diagonal(self, saver: ResultSaver, report: SolveReport) -> None:
        idx = report.active.index_array
        shift = np.diagonal(report.effective_hamiltonian, axis1=1, axis2=2) - report.model.energies[idx]
        columns, values = ["t"], [report.grid.times]
        for k, i in enumerate(report.active.indices):
            columns += [f"re_{i}", f"im_{i}"]
            values += [shift[:, k].real, shift[:, k].imag]
        saver.save_csv("heff_diagonal.csv", columns, np.column_stack(values))

    def _write_final_wave_operator(self, saver: ResultSaver, report: SolveReport) -> None:
        final = np.abs(report.wave_operator.final)
        table = np.column_stack([np.arange(report.model.size), final])
        saver.save_csv("final_wave_operator.csv",
                       ["state"] + [f"abs_X_{i}" for i in report.active.indices], table)

    def _diagnostics(self, config: RunConfig, report: SolveReport, saver: ResultSaver,
                     run_logger) -> Dict[str, Any]:
        wanted = config.diagnostics
        summary: Dict[str, Any] = {}

        end = physical_end_index(report)
        series = self._write_fs_distance(saver, config, report, run_logger) if wanted.get("fs_distance") else None
        if series is not None:
            summary["fs_distance"] = {"max": float(np.max(series[:end + 1])), "final": float(series[end])}

        if report.status == STATUS_DIVERGED:
            if not _finite_report(report):
                log_with_context(run_logger, 'WARNING', "Wave operator is not finite; "
                                 "populations are not written", stage='diagnostics')
                return summary
            # Last iterate, kept for diagnosing the divergence
            pairs = self._population_pairs(config, report)
            summary["transfer_probabilities"] = self._write_populations(saver, report, pairs)
            summary["cyclicity_defect"] = cyclicity_defect(report)
            self._write_final_wave_operator(saver, report)
            return summary

        pairs = self._population_pairs(config, report)
        summary["transfer_probabilities"] = self._write_populations(saver, report, pairs)
        summary["cyclicity_defect"] = cyclicity_defect(report)
        self._write_effective_diagonal(saver, report)
        self._write_final_wave_operator(saver, report)

        if wanted.get("dissociation"):
            summary["dissociation_probabilities"] = {
                str(i): dissociation_probability(report, i) for i in report.active.indices}

        if wanted.get("floquet"):
            try:
                summary["floquet"] = floquet_extract(report).to_dict()
            except WaveOperatorError as e:
                log_with_context(run_logger, 'WARNING', f"Floquet extraction failed: {e}", stage='diagnostics')
                summary["floquet"] = {"error": str(e)}
        return summary

    def run(self, config: RunConfig) -> RunResult:
        """
        Run one configuration.

        Args:
            config: Validated run configuration

        Returns:
            Result dictionary with 'status', 'exit_code', 'output_dir' and 'files'
        """
        start_time = time.time()
        output_dir = self.output_dir_for(config)
        run_logger = get_run_logger(config.name, os.path.join(output_dir, "logs"), level=self.log_level)
        log_file = os.path.join(output_dir, "logs", f"{config.name}.log")
        mirrors = [(get_module_logger(c), attach_file_handler(get_module_logger(c), log_file))
                   for c in COMPONENTS]

        saver = ResultSaver(output_dir, config.name, logger=run_logger)
        result: Dict[str, Any] = {"name": config.name, "output_dir": output_dir}
        try:
            log_with_context(run_logger, 'INFO', f"Run '{config.name}' starting", stage='build')
            saver.save_text("config.json", serialize_config(config))
            model, grid, active = self.build(config)
            options = self.solve_options(config)
            log_with_context(run_logger, 'INFO', f"N_m={model.size}, m={active.m}, active={list(active.indices)}",
                             stage='build')
            self._log_memory(run_logger, 'build')

            report = solve(model, grid, active, options)
            self._log_memory(run_logger, 'solve')
            self._write_convergence(saver, report)

            summary = self._diagnostics(config, report, saver, run_logger)
            self._log_memory(run_logger, 'diagnostics')

            result.update({
                "status": report.status,
                "exit_code": EXIT_CODES[report.status],
                **report.summary(),
                "active": list(active.indices),
                "active_labels": [list(model.basis.labels[i]) for i in active.indices],
                **summary,
            })

        except WaveOperatorError as e:
            run_logger.error(f"Run '{config.name}' failed: {e}")
            result.update({"status": STATUS_ERROR, "exit_code": EXIT_CODES[STATUS_ERROR],
                           "error": str(e), "error_type": type(e).__name__})
        except Exception as e:
            run_logger.error(f"Unexpected error in run '{config.name}': {e}")
            run_logger.error(traceback.format_exc())
            result.update({"status": STATUS_ERROR, "exit_code": EXIT_CODES[STATUS_ERROR],
                           "error": str(e), "error_type": type(e).__name__})
        finally:
            result["duration_seconds"] = time.time() - start_time
            result["completion_time"] = time.strftime("%Y-%m-%d %H:%M:%S")
            saver.save_json("summary.json", result)
            self._log_memory(run_logger, 'write')
            saver.cleanup()
            result["files"] = list(saver.written)
            for component_logger, handler in mirrors:
                component_logger.removeHandler(handler)
                handler.close()

        log_with_context(run_logger, 'INFO', f"Run '{config.name}' finished: {result['status']} "
                         f"(exit {result['exit_code']}) in {result['duration_seconds']:.1f}s", stage='write')
        return result  # type: ignore[return-value]

    def run_many(self, configs: Sequence[RunConfig]) -> Dict[str, RunResult]:
        """Run several configurations in sequence; one failing run does not stop the rest."""
        results = {}
        for idx, config in enumerate(configs):
            logger.info(f"Processing run {idx + 1}/{len(configs)}: {config.name}")
            results[config.name] = self.run(config)
        return results
