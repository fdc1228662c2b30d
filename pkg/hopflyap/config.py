#!/bin/env python3
# This program is free software; you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation; either version 2 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.
#
# See LICENSE for more details.
#
# Copyright: hopflyap developers 2024
"""
Simulation settings: desk defaults < config file < command line
"""

import yaml

from .exceptions import DomainError
from .sde import SimConfig

#: Built-in desk-scale defaults
DEFAULTS = {"dt": 1e-3,
            "steps": 2000000,
            "burn_in": None,    # 10% of steps
            "batches": 16,
            "seed": 20240229,
            "renorm_interval": 64,
            "r_floor": 1e-3,
            "method": None,     # per command, see hopflyap.HopfLyap
            "threads": None}

_TYPES = {"dt": float, "steps": int, "burn_in": int, "batches": int,
          "seed": int, "renorm_interval": int, "r_floor": float,
          "method": str, "threads": int}


def _coerce(key, value):
    if value is None:
        return None
    kind = _TYPES[key]
    if kind is float and isinstance(value, str):
        # YAML 1.1 resolves 1e-3 (no dot) to a string
        try:
            return float(value)
        except ValueError:
            pass
    if kind is int and isinstance(value, float) and value.is_integer():
        return int(value)
    if kind is int and (isinstance(value, bool) or
                        not isinstance(value, int)):
        raise DomainError("config key %s must be an integer, got %r"
                          % (key, value), "config")
    if kind is float and (isinstance(value, bool) or
                          not isinstance(value, (int, float))):
        raise DomainError("config key %s must be a number, got %r"
                          % (key, value), "config")
    if kind is str and not isinstance(value, str):
        raise DomainError("config key %s must be a string, got %r"
                          % (key, value), "config")
    return kind(value)


def load_config(path):
    """
    Load a YAML (or JSON) mapping of settings

    :param path: path to the file
    :return: dict with a subset of DEFAULTS keys
    :raise DomainError: for unknown keys, wrong types or a non-mapping
    """
    with open(path, 'r', encoding='utf-8') as fd_cfg:
        try:
            data = yaml.load(fd_cfg, Loader=yaml.SafeLoader)
        except yaml.YAMLError as details:
            raise DomainError("Unable to parse config %s: %s"
                              % (path, details), "config") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise DomainError("Config %s must contain a mapping, got %s"
                          % (path, type(data).__name__), "config")
    unknown = sorted(str(_) for _ in data if _ not in DEFAULTS)
    if unknown:
        raise DomainError("Unknown config keys in %s: %s"
                          % (path, ", ".join(unknown)), "config")
    return {key: _coerce(key, value) for key, value in data.items()}


def effective_settings(overrides=None, config=None):
    """
    Merge the settings layers

    :param overrides: dict of explicitly set values (None values are
                      ignored so unset command-line flags fall through)
    :param config: dict loaded by :func:`load_config`
    :return: dict with all DEFAULTS keys
    """
    settings = dict(DEFAULTS)
    for layer in (config or {}, overrides or {}):
        settings.update((key, value) for key, value in layer.items()
                        if value is not None)
    return settings


def sim_config(settings):
    """
    Build the (validated) SimConfig of the effective settings

    ``burn_in`` of None means 10% of ``steps``.
    """
    burn_in = settings["burn_in"]
    if burn_in is None:
        burn_in = int(settings["steps"]) // 10
    return SimConfig.desk(dt=settings["dt"], n_steps=settings["steps"],
                          burn_in_steps=burn_in, seed=settings["seed"],
                          renorm_interval=settings["renorm_interval"],
                          r_floor=settings["r_floor"])
