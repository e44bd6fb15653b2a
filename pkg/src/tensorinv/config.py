"""Run configuration: budgets, cache location, output format, parallelism.

Values are resolved with precedence flags > environment > config file > defaults.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, fields
from typing import Mapping

from .errors import DomainError
from .delta import DEFAULT_MAX_NODES
from .kronecker import DEFAULT_MAX_BASIS, DEFAULT_MAX_PARTITION_SIZE

OUTPUT_FORMATS = ("plain", "json", "csv")

ENV_VARS = {
    "TI_CACHE_PATH": "cache_path",
    "TI_MAX_PARTITION_SIZE": "max_partition_size",
    "TI_THREADS": "threads",
}


@dataclass(frozen=True)
class RunConfig:
    max_partition_size: int = DEFAULT_MAX_PARTITION_SIZE
    max_basis: int = DEFAULT_MAX_BASIS
    max_nodes: int = DEFAULT_MAX_NODES
    cache_path: str | None = None
    output: str = "plain"
    threads: int = 1
    allow_large: bool = False

    def __post_init__(self) -> None:
        for name in ("max_partition_size", "max_basis", "max_nodes", "threads"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value <= 0:
                raise DomainError(f"config: '{name}' must be a positive integer, got {value!r}")
        if self.output not in OUTPUT_FORMATS:
            raise DomainError(f"config: 'output' must be one of {OUTPUT_FORMATS}, got {self.output!r}")

    def merged(self, overrides: Mapping) -> "RunConfig":
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise DomainError(f"config: unknown key(s) {sorted(unknown)}")
        return dataclasses.replace(self, **{k: v for k, v in overrides.items() if v is not None})


def _from_env(environ: Mapping[str, str]) -> dict:
    out: dict = {}
    for var, key in ENV_VARS.items():
        if var in environ and environ[var] != "":
            raw = environ[var]
            if key == "cache_path":
                out[key] = raw
            else:
                try:
                    out[key] = int(raw)
                except ValueError:
                    raise DomainError(f"environment: {var} must be an integer, got {raw!r}") from None
    return out


def _from_file(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise DomainError(f"config file {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise DomainError(f"config file {path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    if not isinstance(data, dict):
        raise DomainError(f"config file {path}: top level must be an object")
    return data


def resolve_config(flags: Mapping | None = None, config_file: str | None = None,
                   environ: Mapping[str, str] | None = None) -> RunConfig:
    cfg = RunConfig()
    if config_file:
        cfg = cfg.merged(_from_file(config_file))
    cfg = cfg.merged(_from_env(os.environ if environ is None else environ))
    if flags:
        cfg = cfg.merged(flags)
    return cfg
