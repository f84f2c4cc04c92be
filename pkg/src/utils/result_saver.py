"""
Result Saver Module

Writes the output files of a run (CSV series and the JSON summary). Every
file is first written to a temp file, synced, and then moved into place so a
crashed run never leaves a truncated output behind.
"""

import os
import json
import time
import shutil
import logging
import traceback
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

# 17 significant digits
CSV_FORMAT = "%.16e"


class ResultSaver:
    """
    Saves the results of one run into its output directory.

    This class provides functionality to:
    1. Write CSV series with a header row at full precision
    2. Write the JSON summary
    3. Keep track of every file written
    """

    def __init__(self, output_dir: str, run_name: str, logger=None, force_sync: bool = True):
        """
        Initialize the saver.

        Args:
            output_dir: Directory to save files to
            run_name: Name of the run (used for temp file names)
            logger: Logger instance to use
            force_sync: Whether to force disk syncing after writes
        """
        self.output_dir = output_dir
        self.run_name = run_name
        self.logger = logger or logging.getLogger(__name__)
        self.force_sync = force_sync
        self.written: List[str] = []

        os.makedirs(output_dir, exist_ok=True)
        self.temp_dir = os.path.join(output_dir, "temp")
        os.makedirs(self.temp_dir, exist_ok=True)

    def get_file_path(self, filename: str) -> str:
        """Get the final path of an output file."""
        return os.path.join(self.output_dir, filename)

    def _temp_path(self, filename: str) -> str:
        return os.path.join(self.temp_dir, f"{self.run_name}_{int(time.time() * 1000)}_{filename}.tmp")

    def _commit(self, temp_path: str, filename: str) -> str:
        main_path = self.get_file_path(filename)
        shutil.move(temp_path, main_path)
        self.written.append(main_path)
        self.logger.debug(f"Saved {main_path} ({os.path.getsize(main_path)} bytes)")
        return main_path

    def save_csv(self, filename: str, columns: Sequence[str], rows: np.ndarray) -> Optional[str]:
        """
        Save a table of real numbers.

        Args:
            filename: Output file name
            columns: Header names
            rows: (n_rows, n_columns) values

        Returns:
            Final path, or None if writing failed
        """
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        if rows.size and rows.shape[1] != len(columns):
            self.logger.error(f"{filename}: {rows.shape[1]} columns of data for {len(columns)} headers")
            return None
        temp_path = self._temp_path(filename)
        try:
            with open(temp_path, 'w', encoding='utf-8', newline='') as f:
                f.write(",".join(columns) + "\n")
                if rows.size:
                    np.savetxt(f, rows, fmt=CSV_FORMAT, delimiter=",")
                if self.force_sync:
                    f.flush()
                    os.fsync(f.fileno())
            return self._commit(temp_path, filename)
        except Exception as e:
            self.logger.error(f"Error saving {filename}: {e}")
            self.logger.error(f"Stack trace: {traceback.format_exc()}")
            if os.path.exists(temp_path):
                os.remove(temp_path)
            return None

    def save_json(self, filename: str, data: Dict[str, Any]) -> Optional[str]:
        """
        Save a JSON document (sorted keys, two-space indent).

        Returns:
            Final path, or None if writing failed
        """
        temp_path = self._temp_path(filename)
        try:
            with open(temp_path, 'w', encoding='utf-8') as f:
                json.dump(data, f, indent=2, sort_keys=True, ensure_ascii=False, allow_nan=True)
                f.write("\n")
                if self.force_sync:
                    f.flush()
                    os.fsync(f.fileno())
            return self._commit(temp_path, filename)
        except Exception as e:
            self.logger.error(f"Error saving {filename}: {e}")
            self.logger.error(f"Stack trace: {traceback.format_exc()}")
            if os.path.exists(temp_path):
                os.remove(temp_path)
            return None

    def save_text(self, filename: str, text: str) -> Optional[str]:
        """Save plain text (the canonical configuration of the run)."""
        temp_path = self._temp_path(filename)
        try:
            with open(temp_path, 'w', encoding='utf-8') as f:
                f.write(text)
                if self.force_sync:
                    f.flush()
                    os.fsync(f.fileno())
            return self._commit(temp_path, filename)
        except Exception as e:
            self.logger.error(f"Error saving {filename}: {e}")
            return None

    def cleanup(self) -> None:
        """Remove the temp directory when it is empty."""
        try:
            os.rmdir(self.temp_dir)
        except OSError:
            pass
