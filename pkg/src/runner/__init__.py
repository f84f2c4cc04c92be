from src.runner.run_controller import EXIT_CODES, STATUS_ERROR, RunController, memory_usage_mb, state_index

__all__ = ["EXIT_CODES", "STATUS_ERROR", "RunController", "memory_usage_mb", "state_index"]
