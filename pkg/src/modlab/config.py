"""Flat key-value experiment configs (INI syntax, typed blocks).

Every experiment declares a schema ``{section: {key: (parser, default)}}``.
Unknown sections or keys and unparsable values are rejected with the field
path (``section.key``) before any computation starts; the fully resolved
parameters are echoed into the report.

Example::

    [experiment]
    id = occupation-check
    seeds = 7

    [path]
    kind = brownian
    T = 1.0
    n = 262144
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending field path."""


def parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_float(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "+inf", "infinity"):
        return math.inf
    if t in ("pi", "2pi"):
        return math.pi * (2 if t == "2pi" else 1)
    return float(t)


def parse_float_list(text: str) -> list[float]:
    return [parse_float(x) for x in text.split(",") if x.strip()]


def parse_int_list(text: str) -> list[int]:
    """Non-negative ``"1,2,5"`` or inclusive ranges ``"0-9"`` (may be mixed)."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            a, b = (int(x) for x in part.split("-", 1))
            if b < a:
                raise ValueError(f"empty range {part!r}")
            out.extend(range(a, b + 1))
        else:
            out.append(int(part))
    return out


def parse_ints(text: str) -> list[int]:
    """Comma-separated signed integers."""
    return [int(x) for x in text.split(",") if x.strip()]


def parse_optional_float(text: str):
    return None if text.strip().lower() in ("", "none") else parse_float(text)


def parse_str(text: str) -> str:
    return text.strip()


EXPERIMENT_IDS = (
    "path", "localtime", "irregularity", "occupation-check", "strichartz-transfer",
    "cw-vanishing", "solve", "blowup-contrast", "atoms-suite", "resonance-suite",
)

# CLI subcommand -> experiment id
SUBCOMMANDS = {
    "path": "path",
    "localtime": "localtime",
    "irregularity": "irregularity",
    "occupation-check": "occupation-check",
    "strichartz": "strichartz-transfer",
    "cw": "cw-vanishing",
    "solve": "solve",
    "blowup": "blowup-contrast",
    "atoms": "atoms-suite",
    "resonance": "resonance-suite",
}


@dataclass
class ExperimentConfig:
    experiment: str
    params: dict
    seeds: list = field(default_factory=lambda: [0])
    jobs: int = 1
    source: str | None = None

    def echo(self) -> dict:
        return {"experiment": self.experiment, "seeds": list(self.seeds), "jobs": self.jobs,
                "params": self.params}


def _resolve(schema: dict, raw: dict, experiment: str) -> dict:
    params = {}
    for section, body in raw.items():
        if section not in schema:
            raise ConfigError(f"{section}: unknown section for experiment {experiment!r}")
        for key in body:
            if key not in schema[section]:
                raise ConfigError(f"{section}.{key}: unknown key")
    for section, keys in schema.items():
        params[section] = {}
        for key, (parser, default) in keys.items():
            text = raw.get(section, {}).get(key)
            if text is None:
                params[section][key] = default
                continue
            try:
                params[section][key] = parser(text)
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"{section}.{key}: {exc}") from None
    return params


def load_config(source, experiment: str | None = None, schema_for=None) -> ExperimentConfig:
    """Parse an INI file (path or text) against the schema of its experiment.

    Parameters
    ----------
    source : path-like, str or None
        Config file, literal INI text (if it contains a newline), or ``None``
        for the experiment defaults.
    experiment : str, optional
        Expected experiment id (from the CLI subcommand).
    schema_for : callable
        ``schema_for(experiment_id) -> schema``; defaults to the registry in
        :mod:`modlab.experiments`.
    """
    if schema_for is None:
        from .experiments import schema_for
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    origin = None
    if source is not None:
        text = str(source)
        if "\n" not in text:
            p = Path(text)
            if not p.is_file():
                raise ConfigError(f"config: file not found: {p}")
            origin = str(p)
            text = p.read_text()
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"config: {exc}") from None
    raw = {s: dict(cp[s]) for s in cp.sections()}
    head = raw.pop("experiment", {})
    exp_id = head.pop("id", None)
    if exp_id is None:
        exp_id = experiment
    if exp_id is None:
        raise ConfigError("experiment.id: missing")
    if exp_id not in EXPERIMENT_IDS:
        raise ConfigError(f"experiment.id: unknown experiment {exp_id!r}")
    if experiment is not None and exp_id != experiment:
        raise ConfigError(f"experiment.id: config is for {exp_id!r}, command runs {experiment!r}")
    schema = schema_for(exp_id)
    seeds_default = schema.get("experiment", {}).get("seeds", (None, [0]))[1]
    try:
        seeds = parse_int_list(head.pop("seeds")) if "seeds" in head else list(seeds_default)
        jobs = int(head.pop("jobs", "1"))
    except ValueError as exc:
        raise ConfigError(f"experiment: {exc}") from None
    if head:
        raise ConfigError(f"experiment.{sorted(head)[0]}: unknown key")
    if not seeds or any(s < 0 for s in seeds):
        raise ConfigError("experiment.seeds: need at least one non-negative seed")
    if jobs < 1:
        raise ConfigError("experiment.jobs: must be >= 1")
    body = {k: v for k, v in schema.items() if k != "experiment"}
    params = _resolve(body, raw, exp_id)
    return ExperimentConfig(exp_id, params, seeds, jobs, origin)


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "none"
    if isinstance(v, (list, tuple)):
        return ", ".join(_format_value(x) for x in v)
    if isinstance(v, float):
        return "inf" if v == math.inf else repr(v)
    return str(v)


def format_ini(cfg: ExperimentConfig) -> str:
    """INI text that :func:`load_config` parses back to ``cfg`` (every key explicit)."""
    lines = ["[experiment]", f"id = {cfg.experiment}",
             f"seeds = {', '.join(str(s) for s in cfg.seeds)}", f"jobs = {cfg.jobs}"]
    for section, body in cfg.params.items():
        lines += ["", f"[{section}]"]
        lines += [f"{k} = {_format_value(v)}" for k, v in body.items()]
    return "\n".join(lines) + "\n"
