"""
Preset Manager

This module loads the built-in run configurations from config/presets.json and
resolves their "extends" chains into complete configuration dictionaries.
"""

import os
import json
import logging
from typing import Any, Dict, List, Optional

from src.utils.errors import ConfigError
from src.utils.run_config import RunConfig, config_from_dict, deep_merge

PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
DEFAULT_CONFIG_DIR = os.path.join(PROJECT_ROOT, "config")


class PresetManager:
    """
    Manages the built-in presets.

    Entries whose name starts with an underscore are bases: they can be
    extended but are not listed or runnable on their own.
    """

    def __init__(self, config_dir: str = DEFAULT_CONFIG_DIR, filename: str = "presets.json", logger=None):
        """
        Initialize the preset manager.

        Args:
            config_dir: Directory containing the presets file
            filename: Presets file name
            logger: Logger instance
        """
        self.config_dir = config_dir
        self.path = os.path.join(config_dir, filename)
        self.logger = logger or logging.getLogger(__name__)
        self.raw: Dict[str, Dict[str, Any]] = {}
        self._resolved: Dict[str, Dict[str, Any]] = {}

        self._load_presets()

    def _load_presets(self) -> None:
        """Load the presets file."""
        if not os.path.exists(self.path):
            self.logger.warning(f"Presets file not found: {self.path}")
            return
        try:
            with open(self.path, 'r', encoding='utf-8') as f:
                self.raw = json.load(f)
            self.logger.debug(f"Loaded {len(self.raw)} preset entries")
        except json.JSONDecodeError as e:
            raise ConfigError(e.msg, self.path, e.lineno, e.colno) from None

    def _resolve(self, name: str, chain: tuple = ()) -> Dict[str, Any]:
        if name in self._resolved:
            return self._resolved[name]
        if name not in self.raw:
            raise ConfigError(f"unknown preset '{name}'", self.path)
        if name in chain:
            raise ConfigError(f"circular 'extends' chain: {' -> '.join(chain + (name,))}", self.path)

        entry = dict(self.raw[name])
        parent = entry.pop("extends", None)
        if parent is not None:
            entry = deep_merge(self._resolve(parent, chain + (name,)), entry)
        self._resolved[name] = entry
        return entry

    def list_presets(self) -> List[str]:
        """Names of the runnable presets, sorted."""
        return sorted(name for name in self.raw if not name.startswith("_"))

    def get_preset_dict(self, name: str) -> Dict[str, Any]:
        """
        Fully resolved dictionary of a preset.

        Args:
            name: Preset name

        Returns:
            Dictionary ready for config_from_dict (a copy)
        """
        if name.startswith("_") or name not in self.raw:
            raise ConfigError(f"unknown preset '{name}'; available: {', '.join(self.list_presets())}",
                              self.path)
        resolved = deep_merge(self._resolve(name), {})
        resolved.setdefault("name", name)
        return resolved

    def resolved_presets(self) -> Dict[str, Dict[str, Any]]:
        """Every runnable preset, resolved."""
        return {name: self.get_preset_dict(name) for name in self.list_presets()}

    def get_preset(self, name: str, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
        """
        Build the RunConfig of a preset.

        Args:
            name: Preset name
            overrides: Partial configuration merged over the preset

        Returns:
            Validated RunConfig
        """
        data = self.get_preset_dict(name)
        if overrides:
            data = deep_merge(data, overrides)
        config = config_from_dict(data, source=f"preset:{name}", base_dir=self.config_dir)
        config.preset = name
        return config


# Create a default instance for convenience
default_preset_manager = PresetManager()


def list_presets() -> List[str]:
    """
    List the runnable presets using the default preset manager.

    Returns:
        Sorted list of preset names
    """
    return default_preset_manager.list_presets()


def get_preset(name: str, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Get a preset configuration using the default preset manager.

    Args:
        name: Preset name
        overrides: Partial configuration merged over the preset

    Returns:
        Validated RunConfig
    """
    return default_preset_manager.get_preset(name, overrides)
