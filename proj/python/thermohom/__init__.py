"""Two-scale thermoelastic homogenization in evolving cell geometries."""

from ._core import (
    Error,
    RunConfig,
    __version__,
    dispatch,
    effective,
    kinematics,
    norm_bundle,
    parse_config,
    parse_config_text,
    run_two_scale,
    set_workers,
    subcommands,
)

__all__ = [
    "Error",
    "RunConfig",
    "__version__",
    "dispatch",
    "effective",
    "kinematics",
    "norm_bundle",
    "parse_config",
    "parse_config_text",
    "run_two_scale",
    "set_workers",
    "subcommands",
]
