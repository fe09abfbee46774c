"""Training configuration and its flat ``key = value`` file format."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from hjbr.hjb import CostConfig
from hjbr.tracking import PESchedule


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending field."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


SEED_FIELDS = ("seed_reservoir", "seed_critic", "seed_actor", "seed_noise", "seed_data")

# file key -> attribute, where they differ
_ALIASES = {"lambda": "ridge_lambda"}
_REVERSE = {v: k for k, v in _ALIASES.items()}


@dataclass
class TrainConfig:
    # learning
    epochs: int = 30
    dt: float = 0.05
    eta: float = 2.0
    r: float = 10.0
    R_file: str = ""
    alpha_c: float = 0.001
    alpha_a: float = 5.0
    pe_a0: float = 0.05
    pe_decay: float = 0.85
    ridge_lambda: float = 0.3
    u_max: float = 0.0  # 0 selects 5 / sqrt(N)
    consolidate: str = "mean"
    pe_on_g: bool = False
    guard_norm: float = 1e6
    # reservoir
    n_r: int = 30
    n_plastic: int = 100
    plastic_mode: str = "random"
    spectral_radius: float = 0.9
    input_scale: float = 5.0
    alpha1: float = 1.0
    phi: str = "tanh"
    encoding: str = "identity"
    encoding_k: int = 0
    # critic / actor features
    feature_kind: str = "reservoir"
    n_c: int = 32
    n_a: int = 32
    feature_leak: float = 1.0
    feature_scale: float = 1.0
    # seeds
    seed_reservoir: int = 1
    seed_critic: int = 2
    seed_actor: int = 3
    seed_noise: int = 4
    seed_data: int = 5

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        def need(cond, key, msg):
            if not cond:
                raise ConfigError(f"{_REVERSE.get(key, key)}: {msg}", _REVERSE.get(key, key))

        need(self.epochs >= 0, "epochs", "must be >= 0")
        need(self.dt > 0, "dt", "must be > 0")
        need(self.eta > 0, "eta", "must be > 0")
        need(self.r > 0, "r", "must be > 0")
        need(self.alpha_c >= 0, "alpha_c", "must be >= 0")
        need(self.alpha_a >= 0, "alpha_a", "must be >= 0")
        need(self.pe_a0 >= 0, "pe_a0", "must be >= 0")
        need(0 <= self.pe_decay <= 1, "pe_decay", "must be in [0, 1]")
        need(self.ridge_lambda >= 0, "ridge_lambda", "must be >= 0")
        need(self.u_max >= 0, "u_max", "must be >= 0")
        need(self.consolidate in ("mean", "last"), "consolidate", "must be 'mean' or 'last'")
        need(self.n_r > 0, "n_r", "must be > 0")
        need(0 < self.n_plastic <= self.n_r**2, "n_plastic", "must be in (0, n_r^2]")
        need(self.plastic_mode in ("random", "first"), "plastic_mode", "must be 'random' or 'first'")
        need(self.alpha1 > 0, "alpha1", "must be > 0")
        need(self.phi in ("tanh", "logistic"), "phi", "must be 'tanh' or 'logistic'")
        need(self.encoding in ("identity", "projection"), "encoding", "must be 'identity' or 'projection'")
        need(self.encoding != "projection" or self.encoding_k > 0, "encoding_k", "must be > 0 for projection")
        need(self.feature_kind in ("reservoir", "projection"), "feature_kind", "must be 'reservoir' or 'projection'")
        need(self.n_c > 0, "n_c", "must be > 0")
        need(self.n_a > 0, "n_a", "must be > 0")
        need(self.guard_norm > 0, "guard_norm", "must be > 0")

    @property
    def u_limit(self) -> float:
        return self.u_max if self.u_max > 0 else 5.0 / np.sqrt(self.n_plastic)

    @property
    def pe_schedule(self) -> PESchedule:
        return PESchedule(a0=self.pe_a0, decay=self.pe_decay)

    def cost(self, t_f: float | None = None) -> CostConfig:
        if self.R_file:
            try:
                R = np.loadtxt(self.R_file, ndmin=2)
            except (OSError, ValueError) as exc:
                raise ConfigError(f"R_file: {exc}", "R_file") from None
            if R.shape != (self.n_plastic, self.n_plastic):
                raise ConfigError(f"R_file: expected {self.n_plastic}x{self.n_plastic}, got {R.shape}", "R_file")
            try:
                return CostConfig(self.eta, R, t_f)
            except ValueError as exc:
                raise ConfigError(f"R_file: {exc}", "R_file") from None
        return CostConfig.scalar(self.eta, self.r, self.n_plastic, t_f)

    @property
    def seeds(self) -> dict:
        return {k: getattr(self, k) for k in SEED_FIELDS}

    def with_seed_override(self, base: int) -> "TrainConfig":
        return dataclasses.replace(self, **{k: base + i for i, k in enumerate(SEED_FIELDS)})

    def to_dict(self) -> dict:
        return {_REVERSE.get(f.name, f.name): getattr(self, f.name) for f in fields(self)}

    def dumps(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.to_dict().items())


def _coerce(key: str, typ, text: str):
    try:
        if typ is bool:
            low = text.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(text)
            return low in ("true", "1", "yes")
        if typ is int:
            return int(text)
        if typ is float:
            return float(text)
        return text
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {text!r} as {typ.__name__}", key) from None


def parse_config(text: str) -> TrainConfig:
    types = {f.name: f.type for f in fields(TrainConfig)}
    pytypes = {"int": int, "float": float, "str": str, "bool": bool}
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, _, val = (p.strip() for p in line.partition("="))
        attr = _ALIASES.get(key, key)
        if attr not in types or attr in _REVERSE and key != _REVERSE[attr]:
            raise ConfigError(f"line {lineno}: unknown key {key!r}", key)
        values[attr] = _coerce(key, pytypes[types[attr]], val)
    return TrainConfig(**values)


def load_config(path) -> TrainConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
