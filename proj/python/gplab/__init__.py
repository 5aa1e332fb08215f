"""Python access to the gplab solvers."""

import json as _json

from ._gplab import (
    Grid,
    RadialPotential,
    ScatteringSolution,
    ground_state,
    integral_identity_length,
    parse_config,
    scattering_length_variational,
    sector_dimension,
    solve_zero_energy,
    version,
)
from . import _gplab


def run(config_text, output_dir, base_dir="."):
    """Run a config given as INI text and return the report as a dict."""
    return _json.loads(_gplab._run_json(config_text, output_dir, base_dir))


__version__ = version()

__all__ = [
    "Grid",
    "RadialPotential",
    "ScatteringSolution",
    "ground_state",
    "integral_identity_length",
    "parse_config",
    "run",
    "scattering_length_variational",
    "sector_dimension",
    "solve_zero_energy",
    "version",
]
