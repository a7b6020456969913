"""Run configuration: one JSON document holding every module config.

Layout (all sections optional, unknown keys rejected)::

    {
      "seed": 0,
      "vmd":       {VmdConfig fields},        # augmentation / decompose
      "label_vmd": {VmdConfig fields},        # VMD inside the labeler
      "label":     {LabelConfig fields},
      "kernel":    {KernelConfig fields},
      "encoder":   {EncoderConfig fields except seed},
      "gen":       {GenConfig fields},
      "run":       {"command": ..., "args": {...}}
    }

Precedence is defaults < file < command-line flags. The fully resolved
document (``RunConfig.to_dict``) is what every run writes to its sidecar,
and it is itself a valid config file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from .encoder import PRESETS, EncoderConfig
from .errors import ArgumentError
from .kmmd import KernelConfig
from .prony import LABEL_VMD_CONFIG, LabelConfig
from .synth import GenConfig
from .vmd import VmdConfig

DEFAULT_SCALE = "desk"
SECTIONS = {
    "vmd": VmdConfig,
    "label_vmd": VmdConfig,
    "label": LabelConfig,
    "kernel": KernelConfig,
    "encoder": EncoderConfig,
    "gen": GenConfig,
}
TOP_KEYS = {"seed", "run", *SECTIONS}


class ConfigError(ArgumentError):
    """Malformed or inconsistent configuration."""


def _field_names(cls) -> set[str]:
    names = {f.name for f in fields(cls) if f.init}
    return names - {"seed"} if cls is EncoderConfig else names


def _plain(cfg) -> dict:
    out = {}
    for f in fields(cfg):
        if not f.init or (isinstance(cfg, EncoderConfig) and f.name == "seed"):
            continue
        v = getattr(cfg, f.name)
        out[f.name] = list(v) if isinstance(v, tuple) else v
    return out


def default_encoder(scale: str = DEFAULT_SCALE, seed: int = 0) -> EncoderConfig:
    return EncoderConfig.preset(scale, seed=seed)


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    vmd: VmdConfig = VmdConfig()
    label_vmd: VmdConfig = LABEL_VMD_CONFIG
    label: LabelConfig = LabelConfig()
    kernel: KernelConfig = KernelConfig()
    encoder: EncoderConfig = field(default_factory=default_encoder)
    gen: GenConfig = GenConfig()
    run: dict = field(default_factory=dict)

    def __post_init__(self):
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        if self.encoder.seed != self.seed:
            object.__setattr__(self, "encoder", replace(self.encoder, seed=self.seed))

    def to_dict(self) -> dict:
        doc: dict[str, Any] = {"seed": self.seed}
        for name in SECTIONS:
            doc[name] = _plain(getattr(self, name))
        doc["run"] = self.run
        return doc

    def with_run(self, command: str, args: dict) -> "RunConfig":
        return replace(self, run={"command": command, "args": args})


def _build(cls, base, overrides: dict, section: str):
    if not isinstance(overrides, dict):
        raise ConfigError(f"section {section!r} must be an object")
    unknown = set(overrides) - _field_names(cls)
    if unknown:
        raise ConfigError(f"unknown key(s) in {section!r}: {sorted(unknown)}")
    try:
        return replace(base, **overrides)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"section {section!r}: {exc}") from exc


def from_dict(doc: dict, base: RunConfig | None = None) -> RunConfig:
    """Merge ``doc`` over ``base`` (defaults when omitted)."""
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    unknown = set(doc) - TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {sorted(unknown)}")
    base = base or RunConfig()
    seed = doc.get("seed", base.seed)
    kw: dict[str, Any] = {"seed": seed}
    for name, cls in SECTIONS.items():
        current = getattr(base, name)
        section = dict(doc.get(name, {}))
        if name == "encoder" and "scale_preset" in section:
            scale = section["scale_preset"]
            if scale not in PRESETS:
                raise ConfigError(f"unknown scale_preset {scale!r}")
            current = replace(current, **PRESETS[scale])
        kw[name] = _build(cls, current, section, name)
    run = doc.get("run", base.run)
    if not isinstance(run, dict):
        raise ConfigError("'run' must be an object")
    return RunConfig(run=run, **kw)


def load_config(path) -> RunConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return from_dict(doc)


def apply_scale(cfg: RunConfig, scale: str) -> RunConfig:
    """Reset the preset-controlled encoder fields to the named scale."""
    if scale not in PRESETS:
        raise ConfigError(f"unknown scale {scale!r}")
    enc = replace(cfg.encoder, scale_preset=scale, **PRESETS[scale])
    return replace(cfg, encoder=enc)


def dumps(doc: dict) -> str:
    """Canonical JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def override(cfg: RunConfig, section: str, **values) -> RunConfig:
    """Set fields of one section, skipping values that are ``None``."""
    values = {k: v for k, v in values.items() if v is not None}
    if not values:
        return cfg
    if section == "seed":
        return replace(cfg, seed=values["seed"])
    return replace(cfg, **{section: _build(SECTIONS[section], getattr(cfg, section), values,
                                           section)})


__all__ = ["RunConfig", "ConfigError", "from_dict", "load_config", "apply_scale", "dumps",
           "override", "default_encoder"]
