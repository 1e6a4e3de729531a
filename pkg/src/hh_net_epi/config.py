"""Experiment configuration files.

A config is an INI file with exactly one section naming the command::

    [analytics]
    n = 3
    lambda_L = 1
    lambda_G = 0.1
    degree = poisson mean=5
    infectious_period = fixed c=1
    initial = uniform            ; or "degree 5"

Distributions are ``<family> key=value ...``.  Grids are comma lists
(``100,200,400``) or inclusive ranges ``start:stop:step``.  Keys are
case-insensitive.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from hh_net_epi.analytics import ModelParams
from hh_net_epi.degree_dist import Constant, DegreeDistribution, Geometric, Poisson, PowerLaw, PowerLawCutoff
from hh_net_epi.errors import ConfigError
from hh_net_epi.infectious_period import Exponential, Fixed, InfectiousPeriod, ZeroOrInfinite

COMMANDS = ("analytics", "critical-curve", "sweep", "convergence", "simulate")
STOCHASTIC = ("convergence", "simulate")
DEGREE_FAMILIES = ("poisson", "geometric", "constant", "powerlaw", "powerlaw_cutoff")


@dataclass
class ExperimentConfig:
    command: str
    values: dict[str, str]
    source: Path | None = None
    lines: dict[str, int] = field(default_factory=dict)
    seed: int | None = None
    output_path: Path | None = None

    def where(self, key: str) -> str:
        line = self.lines.get(key)
        loc = f"[{self.command}] {key}"
        return f"{self.source or '<config>'}:{line}: {loc}" if line else loc

    def has(self, key: str) -> bool:
        return key.lower() in self.values

    def raw(self, key: str, default=None) -> str | None:
        return self.values.get(key.lower(), default)

    def require(self, key: str) -> str:
        v = self.raw(key)
        if v is None or not v.strip():
            raise ConfigError("missing required field", self.where(key.lower()))
        return v

    def number(self, key: str, default=None, kind=float):
        text = self.raw(key)
        if text is None:
            if default is None:
                self.require(key)
            return default
        try:
            value = float(text)
        except ValueError:
            raise ConfigError(f"expected a number, got {text!r}", self.where(key.lower())) from None
        if kind is int:
            if value != int(value):
                raise ConfigError(f"expected an integer, got {text!r}", self.where(key.lower()))
            return int(value)
        return value

    def flag(self, key: str, default: bool = False) -> bool:
        text = self.raw(key)
        if text is None:
            return default
        low = text.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"expected a boolean, got {text!r}", self.where(key.lower()))

    def grid(self, key: str, kind=float) -> list:
        text = self.require(key)
        try:
            values = parse_grid(text)
        except ValueError as exc:
            raise ConfigError(str(exc), self.where(key.lower())) from None
        if kind is int:
            if any(v != int(v) for v in values):
                raise ConfigError("grid must contain integers", self.where(key.lower()))
            return [int(v) for v in values]
        return values


def parse_grid(text: str) -> list[float]:
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range grid must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise ValueError(f"empty or invalid range {text!r}")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        # rounding keeps decimal grids free of accumulated drift
        return [round(start + i * step, 12) for i in range(count)]
    values = [float(v) for v in re.split(r"[,\s]+", text) if v]
    if not values:
        raise ValueError("grid is empty")
    return values


def _kv_tokens(tokens: list[str], where: str) -> dict[str, float]:
    out = {}
    for tok in tokens:
        if "=" not in tok:
            raise ConfigError(f"expected key=value, got {tok!r}", where)
        k, v = tok.split("=", 1)
        try:
            out[k.strip().lower()] = float(v)
        except ValueError:
            raise ConfigError(f"non-numeric value in {tok!r}", where) from None
    return out


def _tokens(text: str) -> list[str]:
    return [t for t in re.split(r"[,\s]+", text.strip()) if t]


def _build_degree(family: str, kw: dict[str, float], extra: dict) -> DegreeDistribution:
    if family == "poisson":
        return Poisson(kw.pop("mean"), **extra)
    if family == "geometric":
        if "mean" in kw:
            return Geometric.from_mean(kw.pop("mean"), **extra)
        return Geometric(kw.pop("p"), **extra)
    if family == "constant":
        return Constant(int(kw.pop("d")), **extra)
    if family == "powerlaw":
        start = int(kw.pop("support_start", 0))
        return PowerLaw(int(kw.pop("k_star")), kw.pop("a"), support_start=start, **extra)
    return PowerLawCutoff(kw.pop("kappa"), kw.pop("a"), **extra)


def make_degree(family: str, kw: dict[str, float], where: str = "degree") -> DegreeDistribution:
    if family not in DEGREE_FAMILIES:
        raise ConfigError(f"unknown degree family {family!r}; choose from {', '.join(DEGREE_FAMILIES)}", where)
    kw = dict(kw)
    cap = kw.pop("tail_cap", None)
    extra = {"tail_cap": int(cap)} if cap is not None else {}
    try:
        dist = _build_degree(family, kw, extra)
    except KeyError as exc:
        raise ConfigError(f"{family} needs parameter {exc.args[0]!r}", where) from None
    except ValueError as exc:
        raise ConfigError(str(exc), where) from None
    if kw:
        raise ConfigError(f"unknown {family} parameter(s): {', '.join(sorted(kw))}", where)
    return dist


def parse_degree(text: str, where: str = "degree") -> DegreeDistribution:
    toks = _tokens(text)
    if not toks:
        raise ConfigError("empty degree specification", where)
    return make_degree(toks[0].lower(), _kv_tokens(toks[1:], where), where)


def parse_period(text: str, where: str = "infectious_period") -> InfectiousPeriod:
    toks = _tokens(text)
    if not toks:
        raise ConfigError("empty infectious period specification", where)
    kind, kw = toks[0].lower(), _kv_tokens(toks[1:], where)
    builders = {
        "fixed": (Fixed, "c"),
        "zero_or_infinite": (ZeroOrInfinite, "p"),
        "exponential": (Exponential, "mean"),
    }
    if kind not in builders:
        raise ConfigError(f"unknown infectious period {kind!r}; choose from {', '.join(builders)}", where)
    cls, name = builders[kind]
    if set(kw) != {name}:
        raise ConfigError(f"{kind} takes exactly one parameter {name}=...", where)
    try:
        return cls(kw[name])
    except ValueError as exc:
        raise ConfigError(str(exc), where) from None


def parse_initial(text: str | None, where: str = "initial") -> int | None:
    if text is None:
        return None
    toks = _tokens(text)
    if toks == ["uniform"]:
        return None
    if len(toks) == 2 and toks[0] == "degree" and toks[1].isdigit():
        return int(toks[1])
    raise ConfigError(f"initial must be 'uniform' or 'degree <d>', got {text!r}", where)


def model_params(cfg: ExperimentConfig, **overrides) -> ModelParams:
    """Build ModelParams from the shared fields; ``overrides`` skip the lookup."""
    def get(name, fn):
        return overrides[name] if name in overrides else fn()

    try:
        return ModelParams(
            n=get("n", lambda: cfg.number("n", kind=int)),
            lambda_L=get("lambda_L", lambda: cfg.number("lambda_l")),
            lambda_G=get("lambda_G", lambda: cfg.number("lambda_g")),
            degree=get("degree", lambda: parse_degree(cfg.require("degree"), cfg.where("degree"))),
            period=get("period", lambda: parse_period(cfg.require("infectious_period"), cfg.where("infectious_period"))),
            initial_degree=get("initial_degree", lambda: parse_initial(cfg.raw("initial"), cfg.where("initial"))),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc), f"[{cfg.command}]") from None


def _key_lines(text: str) -> dict[str, int]:
    lines = {}
    for no, line in enumerate(text.splitlines(), start=1):
        m = re.match(r"\s*([A-Za-z_][\w.-]*)\s*[=:]", line)
        if m:
            lines.setdefault(m.group(1).lower(), no)
    return lines


def load_config(path, seed: int | None = None, output_path=None) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", str(path)) from None
    return parse_config(text, source=path, seed=seed, output_path=output_path)


def parse_config(text: str, source=None, seed: int | None = None, output_path=None) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    try:
        parser.read_string(text, source=str(source or "<config>"))
    except configparser.Error as exc:
        raise ConfigError(str(exc).replace("\n", " "), str(source or "<config>")) from None
    sections = parser.sections()
    if len(sections) != 1:
        raise ConfigError(f"expected exactly one [command] section, found {len(sections)}", str(source or "<config>"))
    command = sections[0].strip().lower()
    if command not in COMMANDS:
        raise ConfigError(f"unknown command section [{command}]; choose from {', '.join(COMMANDS)}",
                          str(source or "<config>"))
    cfg = ExperimentConfig(command=command, values=dict(parser[sections[0]]), source=source,
                           lines=_key_lines(text))
    if seed is not None:
        cfg.seed = seed
    elif cfg.has("seed"):
        cfg.seed = cfg.number("seed", kind=int)
    if output_path is not None:
        cfg.output_path = Path(output_path)
    elif cfg.has("output"):
        cfg.output_path = Path(cfg.raw("output"))
    if command in STOCHASTIC and cfg.seed is None:
        raise ConfigError("stochastic commands need a seed (config 'seed' or --seed)", cfg.where("seed"))
    return cfg
