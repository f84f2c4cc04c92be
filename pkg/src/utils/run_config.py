"""
Run Configuration

Parse, validate and serialize run configurations (JSON documents with nested
sections). Errors carry the file name and the line they refer to.
"""

import copy
import json
import os
import re
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from src.utils.errors import ConfigError

SOLVER_DEFAULTS: Dict[str, Any] = {
    "eps": 1e-7,
    "max_iterations": 30,
    "energy_shift": None,
    "divergence_bound": 1e6,
    "growth_patience": 3,
    "denominator_tolerance": 1e-10,
    "magnus_order": 4,
    "condition_threshold": 1e8,
    "workers": 1,
}

ABSORBER_DEFAULTS: Dict[str, Any] = {"enabled": True, "exponent": 2.0, "strength": 5.0}

DIAGNOSTICS_DEFAULTS: Dict[str, Any] = {
    "populations": [],
    "fs_distance": True,
    "floquet": True,
    "dissociation": False,
    "oracle_substeps": 2,
}

TOP_LEVEL_KEYS = ("name", "description", "preset", "model", "pulses", "grid", "active", "absorber",
                  "solver", "output_dir", "diagnostics")


def deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Recursively merge override into a copy of base; lists and scalars are replaced."""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def line_of_key(text: Optional[str], key: str) -> Optional[int]:
    """1-based line of the first occurrence of "key": in text."""
    if not text:
        return None
    match = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    if not match:
        return None
    return text.count("\n", 0, match.start()) + 1


@dataclass
class RunConfig:
    """
    One run: model, pulses, grid, active space, absorber, solver and diagnostics.

    Sections are kept as plain dictionaries; defaults are filled in so that
    to_dict() is canonical.
    """
    name: str
    model: Dict[str, Any]
    pulses: List[Dict[str, Any]]
    grid: Dict[str, Any]
    active: List[Any]
    absorber: Dict[str, Any] = field(default_factory=lambda: dict(ABSORBER_DEFAULTS))
    solver: Dict[str, Any] = field(default_factory=lambda: dict(SOLVER_DEFAULTS))
    diagnostics: Dict[str, Any] = field(default_factory=lambda: dict(DIAGNOSTICS_DEFAULTS))
    output_dir: Optional[str] = None
    preset: Optional[str] = None
    description: Optional[str] = None
    source: str = field(default="<string>", compare=False)
    text: Optional[str] = field(default=None, repr=False, compare=False)
    base_dir: Optional[str] = field(default=None, compare=False)

    @property
    def T(self) -> float:
        return float(self.grid["T"])

    @property
    def T0(self) -> float:
        return float(self.grid.get("T0", self.grid["T"]))

    @property
    def n_time(self) -> int:
        return int(self.grid["n_time"])

    def error(self, key: str, message: str) -> ConfigError:
        """ConfigError anchored at the first line mentioning key."""
        return ConfigError(f"'{key}': {message}", self.source, line_of_key(self.text, key))

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "name": self.name,
            "model": self.model,
            "pulses": self.pulses,
            "grid": self.grid,
            "active": self.active,
            "absorber": self.absorber,
            "solver": self.solver,
            "diagnostics": self.diagnostics,
            "output_dir": self.output_dir,
        }
        if self.preset is not None:
            data["preset"] = self.preset
        if self.description:
            data["description"] = self.description
        return copy.deepcopy(data)


def _require(data: Dict[str, Any], key: str, kind, text: Optional[str], source: str):
    if key not in data:
        raise ConfigError(f"missing required key '{key}'", source, None)
    value = data[key]
    if not isinstance(value, kind):
        raise ConfigError(f"'{key}' must be {getattr(kind, '__name__', kind)}", source, line_of_key(text, key))
    return value


def config_from_dict(data: Dict[str, Any], source: str = "<string>", text: Optional[str] = None,
                     presets: Optional[Dict[str, Dict[str, Any]]] = None,
                     base_dir: Optional[str] = None) -> RunConfig:
    """
    Validate a configuration dictionary and fill in the defaults.

    Args:
        data: Parsed JSON object
        source: File name for error messages
        text: Raw text, used to anchor semantic errors to lines
        presets: Preset name -> resolved preset dictionary
        base_dir: Directory for relative paths inside the model section

    Returns:
        RunConfig
    """
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object", source, 1)
    unknown = [key for key in data if key not in TOP_LEVEL_KEYS]
    if unknown:
        raise ConfigError(f"unknown key '{unknown[0]}'", source, line_of_key(text, unknown[0]))

    preset = data.get("preset")
    if preset is not None:
        if not presets or preset not in presets:
            raise ConfigError(f"unknown preset '{preset}'", source, line_of_key(text, "preset"))
        data = deep_merge(presets[preset], data)

    name = str(data.get("name") or preset or os.path.splitext(os.path.basename(source))[0])
    model = _require(data, "model", dict, text, source)
    pulses = _require(data, "pulses", list, text, source)
    grid = _require(data, "grid", dict, text, source)
    active = _require(data, "active", list, text, source)

    for key in ("T", "n_time"):
        if key not in grid:
            raise ConfigError(f"'grid' is missing '{key}'", source, line_of_key(text, "grid"))
    try:
        T, n_time = float(grid["T"]), grid["n_time"]
        T0 = float(grid.get("T0", T))
    except (TypeError, ValueError):
        raise ConfigError("grid values must be numbers", source, line_of_key(text, "grid")) from None
    if not isinstance(n_time, int) or isinstance(n_time, bool):
        raise ConfigError(f"'n_time' must be an integer, got {n_time!r}", source, line_of_key(text, "n_time"))
    if not 0 < T0 <= T:
        raise ConfigError(f"need 0 < T0 <= T, got T0={T0}, T={T}", source, line_of_key(text, "T0"))
    if not active:
        raise ConfigError("'active' must list at least one state", source, line_of_key(text, "active"))

    absorber = deep_merge(ABSORBER_DEFAULTS, data.get("absorber") or {})
    if absorber["enabled"] and T0 >= T:
        raise ConfigError("an enabled absorber needs T0 < T", source, line_of_key(text, "absorber"))

    solver = deep_merge(SOLVER_DEFAULTS, data.get("solver") or {})
    unknown_solver = [key for key in solver if key not in SOLVER_DEFAULTS]
    if unknown_solver:
        raise ConfigError(f"unknown solver option '{unknown_solver[0]}'", source,
                          line_of_key(text, unknown_solver[0]))
    if not isinstance(solver["eps"], (int, float)) or solver["eps"] <= 0:
        raise ConfigError("'eps' must be a positive number", source, line_of_key(text, "eps"))

    diagnostics = deep_merge(DIAGNOSTICS_DEFAULTS, data.get("diagnostics") or {})

    return RunConfig(name=name, model=model, pulses=pulses,
                     grid={"T": T, "T0": T0, "n_time": n_time}, active=active,
                     absorber=absorber, solver=solver, diagnostics=diagnostics,
                     output_dir=data.get("output_dir"), preset=preset,
                     description=data.get("description"),
                     source=source, text=text, base_dir=base_dir)


def parse_config_text(text: str, source: str = "<string>",
                      presets: Optional[Dict[str, Dict[str, Any]]] = None,
                      base_dir: Optional[str] = None) -> RunConfig:
    """Parse JSON text into a RunConfig; syntax errors report line and column."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(e.msg, source, e.lineno, e.colno) from None
    return config_from_dict(data, source=source, text=text, presets=presets, base_dir=base_dir)


def load_config_file(path: str, presets: Optional[Dict[str, Dict[str, Any]]] = None) -> RunConfig:
    """Read and parse a configuration file."""
    if not os.path.exists(path):
        raise ConfigError("file not found", path)
    with open(path, 'r', encoding='utf-8') as f:
        text = f.read()
    return parse_config_text(text, source=path, presets=presets,
                             base_dir=os.path.dirname(os.path.abspath(path)))


def serialize_config(config: RunConfig) -> str:
    """Canonical text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n"
