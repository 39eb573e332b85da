"""Run configuration: tolerances, empirical stand-ins for the non-constructive
constants, output settings.

Config files are plain ``key = value`` lines ('#' comments allowed); keys are
the names in DEFAULT_TOLERANCES / DEFAULT_CONSTANTS, or ``format``,
``path`` and ``workers``.  The environment variable PARA_RENORM_CONFIG names
a file read before command-line overrides.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field, replace

ENV_VAR = "PARA_RENORM_CONFIG"

DEFAULT_TOLERANCES = {
    "cf_exact": 0.0,
    "index": 1e-8,
    "sigma": 1e-12,
    "beta": 1e-10,
    "fatou_residual": 1e-6,
    "fatou_cv": 1e-6,
    "ecale_two_path": 1e-7,
    "commutation": 1e-8,
    "well_defined": 1e-7,
    "renorm_rel": 1e-2,
    "ply_boundary": 1e-10,
}

DEFAULT_CONSTANTS = {
    "D5_proxy": 2.0,
    "k_bar_proxy": 10.0,
    "k_prime_proxy": 1.0,
    "r3_proxy": 0.1,
    "r5_proxy": 0.05,
    "N": 20,
    "eps_imag": 1e-3,
    "iteration_cap": 100,
    "growth_C": 2.0,
    "mu_proxy": 0.1,
}

_INT_KEYS = {"N", "iteration_cap"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    constants: dict = field(default_factory=lambda: dict(DEFAULT_CONSTANTS))
    format: str = "json"
    path: str | None = None
    workers: int = 1

    def __post_init__(self):
        for k, v in self.tolerances.items():
            # exact comparisons carry a zero tolerance by design
            if v < 0 or (v == 0 and k != "cf_exact"):
                raise ConfigError(f"tolerance {k} must be > 0")
        if self.constants["iteration_cap"] < 1:
            raise ConfigError("iteration_cap must be >= 1")
        if self.constants["N"] < 2:
            raise ConfigError("N must be >= 2")
        if self.format not in ("json", "csv"):
            raise ConfigError("format must be json or csv")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    def tol(self, name: str) -> float:
        return self.tolerances[name]

    def const(self, name: str):
        return self.constants[name]

    def with_overrides(self, pairs: dict) -> "RunConfig":
        tol, const = dict(self.tolerances), dict(self.constants)
        top = {}
        for key, raw in pairs.items():
            if key in tol:
                tol[key] = float(raw)
            elif key in const:
                const[key] = int(raw) if key in _INT_KEYS else float(raw)
            elif key == "workers":
                top[key] = int(raw)
            elif key in ("format", "path"):
                top[key] = str(raw)
            else:
                raise ConfigError(f"unknown config key {key!r}")
        return replace(self, tolerances=tol, constants=const, **top)

    def to_json(self) -> dict:
        return {"tolerances": dict(sorted(self.tolerances.items())),
                "constants": dict(sorted(self.constants.items())),
                "format": self.format, "path": self.path, "workers": self.workers}


def read_pairs(path: str) -> dict:
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#",))
    parser.optionxform = str
    with open(path, encoding="utf-8") as fh:
        parser.read_string("[run]\n" + fh.read())
    return dict(parser["run"])


def load_config(path: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Defaults, then the file (``path`` or $PARA_RENORM_CONFIG), then overrides."""
    cfg = RunConfig()
    path = path or os.environ.get(ENV_VAR)
    if path:
        cfg = cfg.with_overrides(read_pairs(path))
    if overrides:
        cfg = cfg.with_overrides(overrides)
    return cfg
