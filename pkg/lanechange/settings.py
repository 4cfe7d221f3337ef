"""Experiment configuration bundle and its flat key-value file format.

One setting per line::

    # comment
    sim.npc_count = 20
    train.lr = 1e-4
    encoder.v_ceil = none

Sections map onto the config dataclasses; values are parsed by field type.
"""

from __future__ import annotations

import math
import types
import typing
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Tuple

from .agent.config import TrainConfig, TrainConfigError
from .reward import RewardConfig, RewardConfigError
from .safety_filter import SafetyConfig, SafetyConfigError
from .sim.world import SimConfig, TrackConfig, WorldConfigError
from .state_encoder import EncoderConfig, EncoderError

TRUE_WORDS = {"true", "yes", "on", "1"}
FALSE_WORDS = {"false", "no", "off", "0"}
NONE_WORDS = {"none", "null", ""}


class ConfigError(Exception):
    """Raised for unreadable, malformed or inconsistent configuration."""


@dataclass
class RunConfig:
    episodes: int = 100
    master_seed: int = 0
    # Seconds between two lane decisions; a whole number of sim steps.
    decision_period: float = 1.0
    checkpoint_every: int = 10
    eval_episodes: int = 10
    filter_on: bool = True
    write_trace: bool = False
    workers: int = 1

    def validate(self) -> None:
        if self.episodes < 0:
            raise ConfigError(f"run.episodes must be non-negative, got {self.episodes}.")
        if self.master_seed < 0:
            raise ConfigError(f"run.master_seed must be non-negative, got {self.master_seed}.")
        if self.decision_period <= 0:
            raise ConfigError(f"run.decision_period must be positive, got {self.decision_period}.")
        if self.checkpoint_every <= 0:
            raise ConfigError(f"run.checkpoint_every must be positive, got {self.checkpoint_every}.")
        if self.eval_episodes < 0:
            raise ConfigError(f"run.eval_episodes must be non-negative, got {self.eval_episodes}.")
        if self.workers < 1:
            raise ConfigError(f"run.workers must be at least 1, got {self.workers}.")


@dataclass
class ExperimentConfig:
    track: TrackConfig = field(default_factory=TrackConfig)
    sim: SimConfig = field(default_factory=SimConfig)
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    reward: RewardConfig = field(default_factory=RewardConfig)
    safety: SafetyConfig = field(default_factory=SafetyConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    run: RunConfig = field(default_factory=RunConfig)

    SECTIONS = ("track", "sim", "encoder", "reward", "safety", "train", "run")

    @property
    def steps_per_decision(self) -> int:
        return int(round(self.run.decision_period / self.sim.dt))

    def validate(self) -> None:
        """Run every section's own checks, re-raising them as ``ConfigError``."""
        try:
            self.track.validate()
            self.sim.validate(self.track)
            self.encoder.validate()
            self.reward.validate()
            self.safety.validate()
            self.train.validate()
        except (WorldConfigError, EncoderError, RewardConfigError, SafetyConfigError, TrainConfigError) as exc:
            raise ConfigError(str(exc)) from exc
        self.run.validate()

        steps = self.run.decision_period / self.sim.dt
        if steps < 1 or not math.isclose(steps, round(steps), abs_tol=1e-9):
            raise ConfigError(
                f"run.decision_period ({self.run.decision_period}) must be a whole multiple of sim.dt ({self.sim.dt})."
            )


def _parse_value(raw: str, annotation: Any, where: str) -> Any:
    text = raw.strip()
    origin = typing.get_origin(annotation)
    if origin is typing.Union or origin is types.UnionType:
        options = [arg for arg in typing.get_args(annotation) if arg is not type(None)]
        if text.lower() in NONE_WORDS:
            return None
        return _parse_value(text, options[0], where)

    if annotation is bool:
        lowered = text.lower()
        if lowered in TRUE_WORDS:
            return True
        if lowered in FALSE_WORDS:
            return False
        raise ConfigError(f"{where}: expected true/false, got '{text}'.")
    if annotation is int:
        try:
            return int(text)
        except ValueError:
            raise ConfigError(f"{where}: expected an integer, got '{text}'.") from None
    if annotation is float:
        try:
            value = float(text)
        except ValueError:
            raise ConfigError(f"{where}: expected a number, got '{text}'.") from None
        if not math.isfinite(value):
            raise ConfigError(f"{where}: value must be finite, got '{text}'.")
        return value
    raise ConfigError(f"{where}: unsupported setting type {annotation!r}.")


def _split_line(line: str, where: str) -> Tuple[str, str, str]:
    content = line.split("#", 1)[0].strip()
    if "=" not in content:
        raise ConfigError(f"{where}: expected 'section.key = value', got '{line.strip()}'.")
    name, value = (part.strip() for part in content.split("=", 1))
    if name.count(".") != 1:
        raise ConfigError(f"{where}: setting name '{name}' must look like section.key.")
    section, key = name.split(".")
    return section, key, value


def parse_config(text: str, *, source: str = "<config>") -> ExperimentConfig:
    config = ExperimentConfig()
    seen: Dict[str, int] = {}

    for number, line in enumerate(text.splitlines(), start=1):
        where = f"{source}:{number}"
        if not line.split("#", 1)[0].strip():
            continue
        section, key, value = _split_line(line, where)
        if section not in ExperimentConfig.SECTIONS:
            raise ConfigError(f"{where}: unknown section '{section}'.")

        target = getattr(config, section)
        hints = typing.get_type_hints(type(target))
        if key not in {f.name for f in fields(target)}:
            raise ConfigError(f"{where}: unknown setting '{section}.{key}'.")
        name = f"{section}.{key}"
        if name in seen:
            raise ConfigError(f"{where}: '{name}' already set on line {seen[name]}.")
        seen[name] = number
        setattr(target, key, _parse_value(value, hints[key], where))

    config.validate()
    return config


def load_config(path: str | Path) -> ExperimentConfig:
    config_path = Path(path)
    if not config_path.exists():
        raise ConfigError(f"Config file not found: {config_path}")
    try:
        text = config_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"Cannot read config file {config_path}: {exc}") from exc
    config = parse_config(text, source=str(config_path))
    print(f"[Config] Loaded {config_path}")
    return config


def _format_value(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(value)


def dump_config(config: ExperimentConfig) -> str:
    """Inverse of ``parse_config``: every setting, one per line."""
    lines: List[str] = []
    for section in ExperimentConfig.SECTIONS:
        target = getattr(config, section)
        for f in fields(target):
            lines.append(f"{section}.{f.name} = {_format_value(getattr(target, f.name))}")
        lines.append("")
    return "\n".join(lines)


def save_config(config: ExperimentConfig, path: str | Path) -> Path:
    out = Path(path)
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(dump_config(config), encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"Cannot write config file {out}: {exc}") from exc
    return out
