"""Scenario configuration: sectioned key=value files.

Sections [market], [gaussian], [spread], [pricing], [output] and, for the
`derive` command, [operators] with entries in the textual operator syntax.
Unknown sections or keys are rejected, and physical quantities are
validated on load (positive spreads, delta in [-1, 1], weights in [0, 1]).
"""

from __future__ import annotations

import configparser
import hashlib
import math
from dataclasses import dataclass, fields
from pathlib import Path

from .gaussian import GaussianModelParams
from .market import MarketState, WavepacketParams
from .spread import SpreadParams

__all__ = [
    "ConfigError",
    "MarketConfig",
    "GaussianConfig",
    "SpreadConfig",
    "PricingConfig",
    "OutputConfig",
    "OperatorsConfig",
    "ScenarioConfig",
    "load_config",
    "default_config",
]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class MarketConfig:
    x_mid: float = 0.0
    eps0: float = 0.1
    spread_x: float = 1.0
    spread_eps: float = 0.05
    w_o: float = 0.5
    rotation_angle: float = 0.0

    def to_state(self) -> MarketState:
        packet = WavepacketParams(self.x_mid, self.eps0, self.spread_x, self.spread_eps)
        return MarketState.from_weight(self.w_o, packet)


@dataclass(frozen=True)
class GaussianConfig:
    vol_x: float = 0.2
    vol_eps: float = 0.1
    rotation_angle: float = 0.0
    t: float = 1.0
    skew_theta_min: float = -math.pi / 4
    skew_theta_max: float = math.pi / 4
    skew_theta_count: int = 33

    def to_params(self) -> GaussianModelParams:
        return GaussianModelParams(self.vol_x, self.vol_eps, self.rotation_angle, self.t)


@dataclass(frozen=True)
class SpreadConfig:
    vol: float = 0.2
    eps: float = 0.1
    delta: float = 0.2
    t: float = 1.0
    x0: float = 0.0
    fft_grid_size: int = 4096
    fft_z_max: float | None = None
    fp_truncation: int = 12

    def to_params(self) -> SpreadParams:
        return SpreadParams(self.vol, self.eps, self.delta, self.t, self.x0)


@dataclass(frozen=True)
class PricingConfig:
    payoff: str = "call"
    strike: float = 0.0
    model: str = "spread"
    drift_mode: str = "martingale"
    custom_table: str | None = None
    smile_strike_min: float | None = None
    smile_strike_max: float | None = None
    smile_strike_count: int = 17
    mc_samples: int = 1_000_000
    moments_k_max: int = 6


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"


@dataclass(frozen=True)
class OperatorsConfig:
    H: str = "[[0, 0], [0, 0]]"
    L: str = ""
    S: str = "[[1, 0], [0, 1]]"
    X: str = ""


_SECTION_TYPES = {
    "market": MarketConfig,
    "gaussian": GaussianConfig,
    "spread": SpreadConfig,
    "pricing": PricingConfig,
    "output": OutputConfig,
    "operators": OperatorsConfig,
}


@dataclass(frozen=True)
class ScenarioConfig:
    market: MarketConfig
    gaussian: GaussianConfig
    spread: SpreadConfig
    pricing: PricingConfig
    output: OutputConfig
    operators: OperatorsConfig | None = None

    def digest(self) -> str:
        lines = []
        for section in ("market", "gaussian", "spread", "pricing", "output", "operators"):
            value = getattr(self, section)
            if value is None:
                continue
            for f in fields(value):
                lines.append(f"{section}.{f.name}={getattr(value, f.name)!r}")
        blob = "\n".join(sorted(lines)).encode()
        return hashlib.sha256(blob).hexdigest()


def default_config() -> ScenarioConfig:
    return ScenarioConfig(
        market=MarketConfig(),
        gaussian=GaussianConfig(),
        spread=SpreadConfig(),
        pricing=PricingConfig(),
        output=OutputConfig(),
    )


def _convert(section: str, key: str, raw: str, type_name: str):
    # dataclass annotations are strings here (postponed evaluation)
    try:
        if type_name in ("float", "float | None"):
            return float(raw)
        if type_name == "int":
            return int(raw)
        if type_name in ("str", "str | None"):
            return raw
    except ValueError as err:
        raise ConfigError(f"[{section}] {key} = {raw!r}: {err}") from None
    raise ConfigError(f"[{section}] {key}: unsupported type {type_name!r}")


def _build_section(name: str, cls, items) -> object:
    allowed = {f.name: f.type for f in fields(cls)}
    values = {}
    for key, raw in items:
        if key not in allowed:
            raise ConfigError(f"unknown key [{name}] {key}")
        values[key] = _convert(name, key, raw, allowed[key])
    try:
        return cls(**values)
    except TypeError as err:
        raise ConfigError(f"section [{name}]: {err}") from None


def _validate(cfg: ScenarioConfig) -> ScenarioConfig:
    try:
        cfg.market.to_state()
    except ValueError as err:
        raise ConfigError(f"section [market]: {err}") from None
    try:
        cfg.gaussian.to_params()
    except ValueError as err:
        raise ConfigError(f"section [gaussian]: {err}") from None
    try:
        cfg.spread.to_params()
    except ValueError as err:
        raise ConfigError(f"section [spread]: {err}") from None
    if cfg.spread.fft_grid_size < 2 or cfg.spread.fft_grid_size & (cfg.spread.fft_grid_size - 1):
        raise ConfigError("[spread] fft_grid_size must be a power of two")
    if cfg.pricing.payoff not in ("call", "put", "digital_call", "custom"):
        raise ConfigError(f"[pricing] unknown payoff {cfg.pricing.payoff!r}")
    if cfg.pricing.model not in ("gaussian", "spread"):
        raise ConfigError(f"[pricing] unknown model {cfg.pricing.model!r}")
    if cfg.pricing.drift_mode not in ("martingale", "classical_pde"):
        raise ConfigError(f"[pricing] unknown drift_mode {cfg.pricing.drift_mode!r}")
    if cfg.pricing.mc_samples < 1:
        raise ConfigError("[pricing] mc_samples must be positive")
    if cfg.pricing.moments_k_max < 2:
        raise ConfigError("[pricing] moments_k_max must be at least 2")
    if cfg.gaussian.skew_theta_count < 2:
        raise ConfigError("[gaussian] skew_theta_count must be at least 2")
    return cfg


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read(path)
    except configparser.Error as err:
        raise ConfigError(f"{path}: {err}") from None
    sections = {}
    for name in parser.sections():
        if name not in _SECTION_TYPES:
            raise ConfigError(f"unknown section [{name}]")
        sections[name] = _build_section(name, _SECTION_TYPES[name], parser.items(name))
    cfg = ScenarioConfig(
        market=sections.get("market", MarketConfig()),
        gaussian=sections.get("gaussian", GaussianConfig()),
        spread=sections.get("spread", SpreadConfig()),
        pricing=sections.get("pricing", PricingConfig()),
        output=sections.get("output", OutputConfig()),
        operators=sections.get("operators"),
    )
    return _validate(cfg)
