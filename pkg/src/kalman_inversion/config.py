"""Run configuration: INI-style file plus command-line overrides.

Two sections. `[experiment]` holds the grid definition; `[problem]` holds
per-problem overrides (validated against the chosen problem's key set).
Every key has a default, so an empty file is a valid configuration. List
values are comma-separated. Unknown sections or keys are hard errors.

Defaults:
    [experiment]
    problem        = exp_sin        (exp_sin | lorenz96 | darcy | linear)
    algorithms     = eki            (any of eki, etki, uki)
    schedules      = none, recursive  (none | original | recursive | constant:<c>)
    n_trials       = 10
    iterations     = 20
    ensemble_size  = 10
    ensemble_sizes = <ensemble_size>  (values for an ensemble_size sweep)
    dt             = 1.0            (list; grid axis for EKI)
    base_seed      = 1000
    out            = results
    uki_alpha      = 1.0
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace

from .harness import ALGORITHMS
from .problems import PROBLEM_OVERRIDES
from .schedules import parse_schedule

EXPERIMENT_KEYS = {
    "problem",
    "algorithms",
    "schedules",
    "n_trials",
    "iterations",
    "ensemble_size",
    "ensemble_sizes",
    "dt",
    "base_seed",
    "out",
    "uki_alpha",
}

SECTIONS = {"experiment", "problem"}


class ConfigError(Exception):
    """Invalid configuration file or flag value."""


@dataclass(frozen=True)
class RunConfig:
    problem: str = "exp_sin"
    overrides: dict = field(default_factory=dict)
    algorithms: tuple[str, ...] = ("eki",)
    schedules: tuple[str, ...] = ("none", "recursive")
    n_trials: int = 10
    iterations: int = 20
    ensemble_size: int = 10
    ensemble_sizes: tuple[int, ...] | None = None
    dt: tuple[float, ...] = (1.0,)
    base_seed: int = 1000
    out: str = "results"
    uki_alpha: float = 1.0
    header_comment: bool = True

    def sweep_values(self, axis: str):
        if axis == "dt":
            return self.dt
        if axis == "ensemble_size":
            return self.ensemble_sizes if self.ensemble_sizes is not None else (self.ensemble_size,)
        if axis == "schedule":
            return self.schedules
        raise ConfigError(f"unknown sweep axis {axis!r} (expected ensemble_size, dt, or schedule)")


def _split_list(text: str) -> list[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def _parse_typed(key: str, text: str, kind, what: str):
    try:
        return kind(text)
    except ValueError as exc:
        raise ConfigError(f"invalid value for {key!r}: {text!r} is not a valid {what}") from exc


def _coerce_override(key: str, text: str):
    for kind in (int, float):
        try:
            return kind(text)
        except ValueError:
            continue
    return text


def _validate(config: RunConfig) -> RunConfig:
    if config.problem not in PROBLEM_OVERRIDES:
        raise ConfigError(
            f"invalid value for 'problem': {config.problem!r} "
            f"(choose from {', '.join(sorted(PROBLEM_OVERRIDES))})"
        )
    for algorithm in config.algorithms:
        if algorithm not in ALGORITHMS:
            raise ConfigError(
                f"invalid value for 'algorithms': {algorithm!r} (choose from {', '.join(ALGORITHMS)})"
            )
    for label in config.schedules:
        try:
            parse_schedule(label)
        except ValueError as exc:
            raise ConfigError(f"invalid value for 'schedules': {exc}") from exc
    if config.n_trials < 1:
        raise ConfigError("invalid value for 'n_trials': must be >= 1")
    if config.iterations < 1:
        raise ConfigError("invalid value for 'iterations': must be >= 1")
    if config.ensemble_size < 1:
        raise ConfigError("invalid value for 'ensemble_size': must be >= 1")
    if any(dt <= 0 for dt in config.dt):
        raise ConfigError("invalid value for 'dt': timesteps must be positive")
    if not 0.0 < config.uki_alpha <= 1.0:
        raise ConfigError("invalid value for 'uki_alpha': must be in (0, 1]")
    unknown = set(config.overrides) - PROBLEM_OVERRIDES[config.problem]
    if unknown:
        raise ConfigError(
            f"unknown [problem] key(s) for {config.problem}: {', '.join(sorted(unknown))}"
        )
    return config


def parse_config(path: str | None = None, flag_overrides: dict | None = None) -> RunConfig:
    """Build a RunConfig from an optional INI file and flag overrides.

    Flags take precedence over file values; unspecified fields fall back to
    the documented defaults.
    """
    config = RunConfig()
    if path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        try:
            with open(path) as handle:
                parser.read_file(handle)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"config parse error: {exc}") from exc

        unknown_sections = set(parser.sections()) - SECTIONS
        if unknown_sections:
            raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown_sections))}")
        if parser.defaults():
            raise ConfigError(
                f"keys outside a section: {', '.join(sorted(parser.defaults()))}"
            )

        if parser.has_section("experiment"):
            section = parser["experiment"]
            unknown = set(section) - EXPERIMENT_KEYS
            if unknown:
                raise ConfigError(f"unknown [experiment] key(s): {', '.join(sorted(unknown))}")
            updates = {}
            if "problem" in section:
                updates["problem"] = section["problem"].strip()
            if "algorithms" in section:
                updates["algorithms"] = tuple(a.lower() for a in _split_list(section["algorithms"]))
            if "schedules" in section:
                updates["schedules"] = tuple(_split_list(section["schedules"]))
            if "n_trials" in section:
                updates["n_trials"] = _parse_typed("n_trials", section["n_trials"], int, "integer")
            if "iterations" in section:
                updates["iterations"] = _parse_typed("iterations", section["iterations"], int, "integer")
            if "ensemble_size" in section:
                updates["ensemble_size"] = _parse_typed(
                    "ensemble_size", section["ensemble_size"], int, "integer"
                )
            if "ensemble_sizes" in section:
                updates["ensemble_sizes"] = tuple(
                    _parse_typed("ensemble_sizes", v, int, "integer")
                    for v in _split_list(section["ensemble_sizes"])
                )
            if "dt" in section:
                updates["dt"] = tuple(
                    _parse_typed("dt", v, float, "number") for v in _split_list(section["dt"])
                )
            if "base_seed" in section:
                updates["base_seed"] = _parse_typed("base_seed", section["base_seed"], int, "integer")
            if "out" in section:
                updates["out"] = section["out"].strip()
            if "uki_alpha" in section:
                updates["uki_alpha"] = _parse_typed("uki_alpha", section["uki_alpha"], float, "number")
            config = replace(config, **updates)

        if parser.has_section("problem"):
            overrides = {
                key: _coerce_override(key, value) for key, value in parser["problem"].items()
            }
            config = replace(config, overrides=overrides)

    flags = dict(flag_overrides or {})
    renames = {"trials": "n_trials", "seed": "base_seed"}
    updates = {}
    for key, value in flags.items():
        if value is None:
            continue
        updates[renames.get(key, key)] = value
    if updates:
        config = replace(config, **updates)
    return _validate(config)
