# SPDX-License-Identifier: Apache-2.0
"""Distributed CNN inference over a UAV swarm.

Thin wrapper around the C++ core: configs go in as dicts (or JSON text),
reports come back as dicts.  Artifacts (trace.csv, rewards.csv, latency.csv,
report.json, checkpoint.json, schema.json) land in the chosen output directory.
"""

import json as _json

from ._core import (
    ConfigError,
    InfeasibleError,
    NumericError,
    __version__,
)
from ._core import config_schema as _config_schema
from ._core import default_config as _default_config
from ._core import min_uavs as _min_uavs
from ._core import network_summary as _network_summary
from ._core import run as _run

__all__ = [
    "ConfigError",
    "InfeasibleError",
    "NumericError",
    "__version__",
    "schema",
    "default_config",
    "network",
    "run",
    "min_uavs",
]


def _to_text(config):
    if isinstance(config, str):
        return config
    return _json.dumps(config)


def schema():
    """Field-by-field description of the config format."""
    return _json.loads(_config_schema())


def default_config():
    """A complete config with every default filled in."""
    return _json.loads(_default_config())


def network(name):
    """Per-layer compute and memory costs of a catalog network."""
    return _json.loads(_network_summary(name))


def run(mode, config, out_dir, checkpoint=""):
    """Execute one mode (train, eval, baseline, sweep, oracle).

    ``config`` may be a dict or JSON text.  Returns the report as a dict.
    ``checkpoint`` is only consulted by ``eval``; when empty, eval scores a
    freshly initialised policy.
    """
    return _json.loads(_run(mode, _to_text(config), str(out_dir), str(checkpoint)))


def min_uavs(config, max_uavs):
    """Smallest swarm, cloning the first UAV spec, that can hold the network."""
    return _min_uavs(_to_text(config), max_uavs)
