#!/usr/bin/env python3
"""Export every built-in preset as an editable run configuration under config/runs/"""

import os
import sys
import argparse

PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, PROJECT_ROOT)

from src.utils.log_utils import setup_logger
from src.utils.preset_manager import PresetManager
from src.utils.run_config import serialize_config

logger = setup_logger("waveop.tools.export_presets")


def export_presets(output_dir: str, names=None, overwrite: bool = False) -> int:
    """
    Write one JSON file per preset.

    Args:
        output_dir: Target directory
        names: Presets to export (None = all)
        overwrite: Replace existing files

    Returns:
        Number of files written
    """
    manager = PresetManager(os.path.join(PROJECT_ROOT, "config"))
    os.makedirs(output_dir, exist_ok=True)

    written = 0
    for name in names or manager.list_presets():
        path = os.path.join(output_dir, f"{name}.json")
        if os.path.exists(path) and not overwrite:
            logger.info(f"Keeping existing file: {path}")
            continue
        config = manager.get_preset(name)
        # The exported file stands alone
        config.preset = None
        with open(path, 'w', encoding='utf-8') as f:
            f.write(serialize_config(config))
        logger.info(f"Exported preset {name} -> {path}")
        written += 1
    return written


def main():
    """Main function to export the presets."""
    parser = argparse.ArgumentParser(description="Export presets as run configuration files")
    parser.add_argument("names", nargs="*", help="Presets to export (default: all)")
    parser.add_argument("--output-dir", dest="output_dir", default=os.path.join(PROJECT_ROOT, "config", "runs"),
                        help="Directory for the exported files")
    parser.add_argument("--overwrite", action="store_true", help="Replace existing files")
    args = parser.parse_args()

    try:
        count = export_presets(args.output_dir, args.names or None, args.overwrite)
        logger.info(f"Exported {count} preset(s)")
        return 0
    except Exception as e:
        logger.error(f"Export failed: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
