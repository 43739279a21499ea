"""Diffuse-interface two-phase flow solver."""

from ._core import (
    Config,
    ConfigError,
    PhaseflowError,
    Simulation,
    config_keys,
    double_well,
    eo_flux,
    eoc,
    load_config,
    mark_indicator,
    parse_config,
    preset,
    preset_names,
    run,
    structured_mesh,
    timestep_from_estimator,
)

__all__ = [
    "Config",
    "ConfigError",
    "PhaseflowError",
    "Simulation",
    "config_keys",
    "double_well",
    "eo_flux",
    "eoc",
    "load_config",
    "mark_indicator",
    "parse_config",
    "preset",
    "preset_names",
    "run",
    "structured_mesh",
    "timestep_from_estimator",
]
