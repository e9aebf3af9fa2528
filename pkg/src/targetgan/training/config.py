"""Run configuration: variants, routes and the key=value config file."""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping

from ..chem.elements import MAX_ATOMS
from ..nets.config import DecoderConfig, DiscriminatorConfig, EncoderConfig, ModelConfig
from ..pocket.types import MAX_POCKET_ATOMS
from .errors import ConfigError


class Variant(str, Enum):
    PROT = "Prot"
    CROSSLOSS = "CrossLoss"
    LIGAND = "Ligand"
    RL = "RL"
    NOTARGET = "NoTarget"

    @property
    def two_stage(self) -> bool:
        return self in (Variant.PROT, Variant.LIGAND, Variant.RL)

    @property
    def cond_kind(self) -> str | None:
        if self is Variant.PROT:
            return "pocket"
        if self in (Variant.LIGAND, Variant.RL):
            return "ligand"
        return None

    @property
    def needs_inhibitors(self) -> bool:
        return self is not Variant.NOTARGET

    @property
    def tag(self) -> int:
        return list(Variant).index(self)


class Route(str, Enum):
    WARMUP = "WarmUp"
    JOINT = "Joint"


@dataclass(frozen=True)
class TrainConfig:
    variant: Variant = Variant.NOTARGET
    route: Route = Route.JOINT
    lr: float = 1e-5
    batch: int = 128
    epochs: int = 50
    beta1: float = 0.9
    beta2: float = 0.999
    lambda_gp: float = 10.0
    rl_coeff: float = 0.1
    rl_stages: str = "both"
    rl_tau: float = 1.0
    warmup_epochs: int = 10
    seed: int = 0
    split_ratio: float = 0.9
    validity_samples: int = 256
    # network sizes
    depth: int = 8
    heads: int = 8
    model_dim: int = 128
    embed_hidden: int = 64
    ff_mult: int = 2
    dropout: float = 0.0
    max_atoms: int = MAX_ATOMS
    pocket_atoms: int = MAX_POCKET_ATOMS
    disc_sizes: tuple[int, ...] = (256, 128, 64, 32, 16, 1)
    input_mode: str = "noise"
    perturb_sigma: float = 0.5
    # data
    general: str = ""
    inhibitors: str = ""
    pocket: str = ""
    out_dir: str = "run"

    def __post_init__(self) -> None:
        object.__setattr__(self, "variant", _enum(Variant, self.variant))
        object.__setattr__(self, "route", _enum(Route, self.route))
        object.__setattr__(self, "disc_sizes", tuple(int(s) for s in self.disc_sizes))
        checks = [
            (self.lr > 0, "lr must be positive"),
            (self.batch > 0, "batch must be positive"),
            (self.epochs >= 0, "epochs must be non-negative"),
            (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0, "betas must lie in [0, 1)"),
            (self.lambda_gp >= 0, "lambda_gp must be non-negative"),
            (self.rl_coeff >= 0, "rl_coeff must be non-negative"),
            (self.rl_tau > 0, "rl_tau must be positive"),
            (self.rl_stages in ("both", "g2"), "rl_stages must be 'both' or 'g2'"),
            (self.warmup_epochs >= 0, "warmup_epochs must be non-negative"),
            (0.0 < self.split_ratio < 1.0, "split_ratio must lie in (0, 1)"),
            (self.validity_samples >= 0, "validity_samples must be non-negative"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)
        try:
            self.model_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def model_config(self) -> ModelConfig:
        enc = EncoderConfig(self.depth, self.heads, self.model_dim, self.embed_hidden, self.ff_mult,
                            self.dropout, max_atoms=self.max_atoms)
        dec = DecoderConfig(self.depth, self.heads, self.model_dim, self.embed_hidden, self.ff_mult,
                            self.dropout, pocket_atoms=self.pocket_atoms)
        return ModelConfig(enc, dec, DiscriminatorConfig(self.disc_sizes), self.input_mode,
                           self.perturb_sigma)

    def replace(self, **kw) -> "TrainConfig":
        return dataclasses.replace(self, **kw)

    def to_dict(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            out[f.name] = v.value if isinstance(v, Enum) else list(v) if isinstance(v, tuple) else v
        return out

    def to_text(self) -> str:
        lines = []
        for k, v in self.to_dict().items():
            if isinstance(v, list):
                v = ",".join(str(x) for x in v)
            lines.append(f"{k} = {v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_mapping(cls, values: Mapping[str, object]) -> "TrainConfig":
        """Build from string or typed values; unknown keys are rejected."""
        kinds = {f.name: f for f in dataclasses.fields(cls)}
        kw = {}
        for key, raw in values.items():
            if key not in kinds:
                raise ConfigError(f"unknown config key {key!r}")
            kw[key] = _coerce(key, kinds[key].default, raw)
        try:
            return cls(**kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


def _enum(kind, value):
    if isinstance(value, kind):
        return value
    for member in kind:
        if str(value).lower() == member.value.lower():
            return member
    raise ConfigError(f"unknown {kind.__name__.lower()} {value!r}; expected one of "
                      + ", ".join(m.value for m in kind))


def _coerce(key: str, default, raw):
    if not isinstance(raw, str):
        return raw
    raw = raw.strip()
    try:
        if isinstance(default, Enum):
            return raw
        if isinstance(default, bool):
            return raw.lower() in ("1", "true", "yes")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            return tuple(int(x) for x in raw.split(",") if x.strip())
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return raw


def parse_config_text(text: str) -> dict[str, str]:
    cp = configparser.ConfigParser(delimiters=("=",), comment_prefixes=("#",),
                                   inline_comment_prefixes=None, interpolation=None)
    try:
        cp.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    return dict(cp["run"])


def load_config(path: str | Path, overrides: Mapping[str, object] | None = None) -> TrainConfig:
    """Read a key=value file; ``overrides`` win over file values.

    Relative data paths are resolved against the config file's directory.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    values: dict[str, object] = dict(parse_config_text(text))
    for key in ("general", "inhibitors", "pocket"):
        v = values.get(key)
        if isinstance(v, str) and v and not Path(v).is_absolute():
            values[key] = str(path.parent / v)
    values.update(overrides or {})
    return TrainConfig.from_mapping(values)
