"""Schema-versioned run configuration shared by every CLI command."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from usgesture.classifier import HierarchyConfig
from usgesture.dsp import DEFAULT_CLUTTER_FACTOR, DEFAULT_GATE_S
from usgesture.errors import ConfigError, InvalidConfigError
from usgesture.evaluation import DatasetSpec, EvalConfig
from usgesture.features import N_PEAKS, PROFILE_LEN
from usgesture.pulse import PulseTrainConfig

SCHEMA_VERSION = 1
CONFIG_ENV_VAR = "USGESTURE_CONFIG"


@dataclass(frozen=True)
class DspConfig:
    clutter_factor: float = DEFAULT_CLUTTER_FACTOR
    gate_s: tuple[float, float] = DEFAULT_GATE_S
    speed_of_sound_mps: float = 343.0

    def __post_init__(self):
        object.__setattr__(self, "gate_s", tuple(float(v) for v in self.gate_s))
        if not 0 <= self.clutter_factor <= 1:
            raise InvalidConfigError("dsp.clutter_factor must lie in [0, 1]")
        if len(self.gate_s) != 2 or not 0 <= self.gate_s[0] < self.gate_s[1]:
            raise InvalidConfigError("dsp.gate_s must be an increasing pair of delays")


@dataclass(frozen=True)
class FeatureConfig:
    n_peaks: int = N_PEAKS
    profile_len: int = PROFILE_LEN

    def __post_init__(self):
        if self.n_peaks < 1 or self.profile_len < 1:
            raise InvalidConfigError("features.n_peaks and features.profile_len must be >= 1")


def _build(cls, section: str, data) -> object:
    if not isinstance(data, dict):
        raise InvalidConfigError(f"section {section!r} must be a mapping")
    unknown = set(data) - set(cls.__dataclass_fields__)
    if unknown:
        raise InvalidConfigError(f"unknown keys in {section!r}: {sorted(unknown)}")
    if hasattr(cls, "from_dict") and cls not in (DspConfig, FeatureConfig):
        return cls.from_dict(data)
    try:
        return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in data.items()})
    except TypeError as exc:
        raise InvalidConfigError(f"section {section!r}: {exc}") from exc


def _plain(obj) -> dict:
    if hasattr(obj, "to_dict"):
        d = obj.to_dict()
    else:
        d = dict(obj.__dict__)
    return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}


@dataclass(frozen=True)
class RunConfig:
    pulse_train: PulseTrainConfig = field(default_factory=PulseTrainConfig)
    dsp: DspConfig = field(default_factory=DspConfig)
    features: FeatureConfig = field(default_factory=FeatureConfig)
    dataset: DatasetSpec = field(default_factory=DatasetSpec)
    classifier: HierarchyConfig = field(default_factory=HierarchyConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    schema_version: int = SCHEMA_VERSION

    SECTIONS = {
        "pulse_train": PulseTrainConfig,
        "dsp": DspConfig,
        "features": FeatureConfig,
        "dataset": DatasetSpec,
        "classifier": HierarchyConfig,
        "eval": EvalConfig,
    }

    def __post_init__(self):
        d = self.dataset
        if (d.clutter_factor, tuple(d.gate_s)) != (self.dsp.clutter_factor, tuple(self.dsp.gate_s)):
            # The dataset renders with the dsp section's settings.
            object.__setattr__(self, "dataset", DatasetSpec.from_dict(
                {**d.to_dict(), "clutter_factor": self.dsp.clutter_factor,
                 "gate_s": list(self.dsp.gate_s)}))

    def to_dict(self) -> dict:
        out = {"schema_version": self.schema_version}
        for name in self.SECTIONS:
            out[name] = _plain(getattr(self, name))
        return out

    @classmethod
    def from_dict(cls, data: dict) -> RunConfig:
        if not isinstance(data, dict):
            raise InvalidConfigError("configuration must be a mapping")
        data = dict(data)
        version = data.pop("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise InvalidConfigError(f"unsupported schema_version {version!r}")
        unknown = set(data) - set(cls.SECTIONS)
        if unknown:
            raise InvalidConfigError(f"unknown configuration sections: {sorted(unknown)}")
        try:
            kwargs = {name: _build(sec, name, data[name])
                      for name, sec in cls.SECTIONS.items() if name in data}
            return cls(**kwargs)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise InvalidConfigError(str(exc)) from exc

    def with_overrides(self, assignments: list[str]) -> RunConfig:
        """Apply ``section.key=value`` assignments; values parse as JSON."""
        data = self.to_dict()
        for item in assignments:
            key, sep, raw = item.partition("=")
            parts = key.strip().split(".")
            if not sep or len(parts) != 2:
                raise InvalidConfigError(f"override {item!r} must look like section.key=value")
            section, name = parts
            if section not in data:
                raise InvalidConfigError(f"unknown configuration section {section!r}")
            try:
                value = json.loads(raw)
            except json.JSONDecodeError:
                value = raw
            data[section][name] = value
        return RunConfig.from_dict(data)


def load_config(path=None, overrides: list[str] | None = None) -> RunConfig:
    """Defaults, then the config file (argument or env var), then overrides."""
    path = path or os.environ.get(CONFIG_ENV_VAR)
    if path:
        p = Path(path)
        if not p.is_file():
            raise InvalidConfigError(f"configuration file {p} not found")
        try:
            data = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise InvalidConfigError(f"{p}: invalid JSON ({exc})") from exc
        if isinstance(data, dict):
            # Snapshots written next to outputs also record the command line.
            data.pop("command", None)
        cfg = RunConfig.from_dict(data)
    else:
        cfg = RunConfig()
    return cfg.with_overrides(overrides or [])
