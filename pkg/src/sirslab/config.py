"""Config-file parsing for the command line tools.

The format is flat key-value text with sections [model], [incidence],
[simulation] and [ensemble]; rates are in 1/time units.  See the shipped
files under configs/ for complete examples.
"""

from __future__ import annotations

import configparser
import hashlib
from pathlib import Path
from typing import Optional

from .core import ModelParams, ParameterError
from .ensemble import EnsembleConfig
from .engine import SimConfig
from .incidence import ConfigurationError, IncidenceSpec


class ConfigError(ValueError):
    """The config file is missing or malformed; the message names the
    offending section/field."""


_MODEL_KEYS = ("lambda", "mu", "beta", "gamma", "delta", "eta", "sigma", "tau")


def _get_float(section, key: str, where: str, default=None) -> float:
    if key not in section:
        if default is not None:
            return default
        raise ConfigError(f"missing required field `{key}` in [{where}]")
    try:
        return float(section[key])
    except ValueError:
        raise ConfigError(
            f"field `{key}` in [{where}] is not a number: {section[key]!r}")


def _read(path) -> configparser.ConfigParser:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}")
    return parser


def load_model_params(parser: configparser.ConfigParser) -> ModelParams:
    if "model" not in parser:
        raise ConfigError("missing [model] section")
    sec = parser["model"]
    vals = {k: _get_float(sec, k, "model") for k in _MODEL_KEYS}
    try:
        return ModelParams(lam=vals["lambda"], mu=vals["mu"],
                           beta=vals["beta"], gamma=vals["gamma"],
                           delta=vals["delta"], eta=vals["eta"],
                           sigma=vals["sigma"], tau=vals["tau"])
    except ParameterError as exc:
        raise ConfigError(f"[model]: {exc}")


def load_incidence(parser: configparser.ConfigParser,
                   tau: float, base_dir: Path) -> IncidenceSpec:
    sec = parser["incidence"] if "incidence" in parser else {}
    kind = sec.get("kind", "dirac")
    try:
        if kind == "dirac":
            return IncidenceSpec.dirac(tau)
        if kind == "uniform":
            return IncidenceSpec.uniform(tau)
        if kind == "exponential":
            return IncidenceSpec.exponential(
                _get_float(sec, "rate", "incidence"), tau)
        if kind == "saturated":
            return IncidenceSpec.saturated(
                _get_float(sec, "alpha", "incidence"),
                _get_float(sec, "q", "incidence"), tau)
        if kind == "tabulated":
            if "table" not in sec:
                raise ConfigError(
                    "missing required field `table` in [incidence]")
            table_path = Path(sec["table"])
            if not table_path.is_absolute():
                table_path = base_dir / table_path
            return IncidenceSpec.tabulated_from_file(table_path, tau)
    except ConfigurationError as exc:
        raise ConfigError(f"[incidence]: {exc}")
    raise ConfigError(f"unknown incidence kind {kind!r} in [incidence]")


def load_sim_config(path, *, dt: Optional[float] = None,
                    t_end: Optional[float] = None,
                    clamp_policy: Optional[str] = None,
                    record_stride: Optional[int] = None) -> SimConfig:
    """Build a SimConfig from a config file, with optional CLI overrides."""
    parser = _read(path)
    params = load_model_params(parser)
    incidence = load_incidence(parser, params.tau, Path(path).parent)
    sec = parser["simulation"] if "simulation" in parser else {}
    try:
        return SimConfig(
            params=params,
            incidence=incidence,
            dt=dt if dt is not None else _get_float(sec, "dt", "simulation", 0.1),
            t_end=(t_end if t_end is not None
                   else _get_float(sec, "t_end", "simulation", 300.0)),
            initial_history=(
                _get_float(sec, "s0", "simulation", 0.7),
                _get_float(sec, "i0", "simulation", 0.3),
                _get_float(sec, "r0", "simulation", 0.0),
            ),
            clamp_policy=(clamp_policy if clamp_policy is not None
                          else sec.get("clamp_policy", "clamp")),
            record_stride=(record_stride if record_stride is not None
                           else int(_get_float(sec, "record_stride",
                                               "simulation", 1))),
        )
    except ConfigurationError as exc:
        raise ConfigError(f"[simulation]: {exc}")


def load_ensemble_config(path, sim: SimConfig, *,
                         n_paths: Optional[int] = None,
                         base_seed: Optional[int] = None,
                         probe_times=None,
                         n_jobs: Optional[int] = None) -> EnsembleConfig:
    parser = _read(path)
    sec = parser["ensemble"] if "ensemble" in parser else {}
    if probe_times is None:
        raw = sec.get("probe_times", "")
        probe_times = tuple(float(x) for x in raw.split(",") if x.strip())
    try:
        return EnsembleConfig(
            sim=sim,
            n_paths=(n_paths if n_paths is not None
                     else int(_get_float(sec, "n_paths", "ensemble", 1000))),
            base_seed=(base_seed if base_seed is not None
                       else int(_get_float(sec, "base_seed", "ensemble", 0))),
            probe_times=tuple(probe_times),
            functional=sec.get("functional", "disease_free_deviation"),
            failure_budget=int(_get_float(sec, "failure_budget", "ensemble", 0)),
            n_jobs=(n_jobs if n_jobs is not None
                    else int(_get_float(sec, "n_jobs", "ensemble", 1))),
            chunk_size=int(_get_float(sec, "chunk_size", "ensemble", 0)),
        )
    except ValueError as exc:
        raise ConfigError(f"[ensemble]: {exc}")


def config_digest(path) -> str:
    """Stable hash of the canonicalized configuration (sections and keys
    sorted, whitespace and comments stripped)."""
    parser = _read(path)
    lines = []
    for section in sorted(parser.sections()):
        for key in sorted(parser[section]):
            lines.append(f"{section}.{key}={parser[section][key].strip()}")
    blob = "\n".join(lines).encode()
    return hashlib.sha256(blob).hexdigest()
