"""Run settings: defaults < config file < environment (RADIAL_*) < CLI flags."""
import configparser
import os
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional

import numpy as np
from dotenv import load_dotenv
from pydantic import ValidationError

from app.core.exceptions import ConfigError
from app.schemas.config import IntegrationConfig, RunConfig, SweepSpec
from app.schemas.params import SystemParams
from app.services import params_core

load_dotenv()

ENV_PREFIX = "RADIAL_"

# flag -> (config-file section, RunConfig/IntegrationConfig field, parser)
FLAGS: Dict[str, tuple] = {
    "N": ("params", "N", float),
    "p": ("params", "p", float),
    "m": ("params", "m", float),
    "q": ("params", "q", float),
    "alpha": ("params", "alpha", float),
    "beta": ("params", "beta", float),
    "a": ("initial", "a", float),
    "b": ("initial", "b", float),
    "r0": ("solver", "r0", float),
    "rmax": ("solver", "r_max", float),
    "rtol": ("solver", "rtol", float),
    "atol": ("solver", "atol", float),
    "cap": ("solver", "blowup_cap", float),
    "monitor_policy": ("solver", "monitor_policy", str),
    "samples_per_decade": ("solver", "samples_per_decade", int),
    "out": ("output", "out", str),
    "seed": ("output", "seed", int),
    "workers": ("output", "workers", int),
}

# Figure-1 exponents; used by commands that do not require explicit parameters
FIGURE1_PARAMS = {"N": 3, "p": 10.0, "m": 2.0, "q": 4.0, "alpha": 1.0, "beta": 1.0}


# ---------------------------------------------------------------------
# VALUE PARSING
# ---------------------------------------------------------------------
def parse_values(text: str) -> List[float]:
    """'2,3,4' -> [2, 3, 4];  'start:stop:num' -> linspace."""
    text = text.strip()
    try:
        if ":" in text:
            start, stop, num = text.split(":")
            return [float(x) for x in np.linspace(float(start), float(stop), int(num))]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"Cannot parse value list '{text}': {exc}")


def _convert(flag: str, raw: Any) -> Any:
    parser = FLAGS[flag][2]
    try:
        return parser(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"Invalid value for {flag}: {raw!r}")


# ---------------------------------------------------------------------
# SOURCES
# ---------------------------------------------------------------------
def read_config_file(path: Optional[Path]) -> Dict[str, Any]:
    """Flat key=value lines under [params] [initial] [solver] [output] [sweep]."""
    if path is None:
        return {}
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Config file not found: {path}")

    parser = configparser.ConfigParser()
    parser.optionxform = str
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"Cannot parse config file {path}: {exc}")

    values: Dict[str, Any] = {}
    by_field = {(section, name): flag for flag, (section, name, _) in FLAGS.items()}
    for section in parser.sections():
        for key, raw in parser.items(section):
            if section == "sweep":
                values.setdefault("sweep", {})[key] = raw
                continue
            flag = by_field.get((section, key)) or (key if key in FLAGS else None)
            if flag is None:
                raise ConfigError(f"Unknown key '{key}' in section [{section}] of {path}")
            values[flag] = _convert(flag, raw)
    return values


def read_environment(environ: Optional[Mapping[str, str]] = None) -> Dict[str, Any]:
    environ = os.environ if environ is None else environ
    values = {}
    for flag in FLAGS:
        raw = environ.get(f"{ENV_PREFIX}{flag.upper()}")
        if raw is not None and raw != "":
            values[flag] = _convert(flag, raw)
    return values


def config_path_from(cli_value: Optional[str], environ: Optional[Mapping[str, str]] = None) -> Optional[Path]:
    environ = os.environ if environ is None else environ
    value = cli_value or environ.get(f"{ENV_PREFIX}CONFIG")
    return Path(value) if value else None


# ---------------------------------------------------------------------
# MERGE
# ---------------------------------------------------------------------
def merge_sources(
    cli: Mapping[str, Any],
    environ: Optional[Mapping[str, str]] = None,
    base: Optional[Mapping[str, Any]] = None,
) -> Dict[str, Any]:
    merged: Dict[str, Any] = dict(base or {})
    merged.update(read_config_file(config_path_from(cli.get("config"), environ)))
    merged.update(read_environment(environ))
    merged.update({key: value for key, value in cli.items() if key in FLAGS and value is not None})

    sweep = dict(merged.get("sweep", {}))
    for item in cli.get("grid") or []:
        key, _, raw = item.partition("=")
        if not raw:
            raise ConfigError(f"--grid expects KEY=VALUES, got '{item}'")
        sweep[key.strip()] = raw
    if cli.get("random_points") is not None:
        sweep["random_points"] = cli["random_points"]
    merged["sweep"] = sweep
    return merged


def _sweep_spec(raw: Mapping[str, Any]) -> SweepSpec:
    grid = {}
    extras: Dict[str, Any] = {}
    for key, value in raw.items():
        if key in params_core.PARAM_KEYS:
            grid[key] = parse_values(str(value)) if not isinstance(value, list) else value
        elif key in ("random_points", "solve"):
            extras[key] = value
        else:
            raise ConfigError(f"Unknown sweep key '{key}'")
    if isinstance(extras.get("solve"), str):
        extras["solve"] = extras["solve"].strip().lower() in ("1", "true", "yes", "on")
    return SweepSpec(grid=grid, **extras)


def _validated_params(merged: Dict[str, Any]) -> SystemParams:
    return params_core.validate({key: merged[key] for key in params_core.PARAM_KEYS if key in merged})


def build_run_config(
    cli: Mapping[str, Any],
    environ: Optional[Mapping[str, str]] = None,
    base: Optional[Mapping[str, Any]] = None,
    make_params: Optional[Callable[[Dict[str, Any]], SystemParams]] = None,
) -> RunConfig:
    merged = merge_sources(cli, environ, base)
    make_params = make_params or _validated_params

    try:
        params = make_params(merged)

        solver = {FLAGS[flag][1]: merged[flag] for flag in FLAGS if FLAGS[flag][0] == "solver" and flag in merged}
        run = {FLAGS[flag][1]: merged[flag] for flag in ("a", "b", "out", "seed", "workers") if flag in merged}
        return RunConfig(
            params=params,
            integration=IntegrationConfig(**solver),
            sweep=_sweep_spec(merged["sweep"]),
            **run,
        )
    except ValidationError as exc:
        raise ConfigError(f"Invalid configuration: {exc.errors(include_url=False)}")
