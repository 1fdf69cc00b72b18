"""Flat key-value run configuration with env-var overrides.

Config files contain `key = value` lines with section-prefixed keys
(`encoder.scheme = hybrid`). Any key can be overridden through environment
variables prefixed NEUEDGE_, with dots replaced by underscores
(NEUEDGE_ENCODER_SCHEME=rate). One global seed deterministically derives all
module seeds.
"""

from __future__ import annotations

import os

from .adapt import AdaptConfig
from .encoding import EncoderConfig
from .errors import ConfigError
from .mapping import CHIP_PRESETS, ChipModel, MapperConfig
from .training import TrainConfig

ENV_PREFIX = "NEUEDGE_"

DEFAULTS: dict[str, str] = {
    "seed": "42",
    "dataset": "",
    "network": "desk-mlp",
    "chip": "desk16",
    "mapping": "",
    "out": "out",
    "adaptive": "off",
    "val_fraction": "0.25",
    "encoder.scheme": "hybrid",
    "encoder.n_timesteps": "20",
    "encoder.alpha": "0.25",
    "encoder.v_th_base": "1.0",
    "trainer.epochs": "20",
    "trainer.batch_size": "16",
    "trainer.learning_rate": "0.01",
    "trainer.lambda_hw": "0.0",
    "trainer.surrogate_width": "1.0",
    "trainer.grad_mode": "hard_forward",
    "trainer.grad_clip": "1.0",
    "mapper.beta1": "1.0",
    "mapper.beta2": "1.0",
    "mapper.beta3": "1.0",
    "mapper.max_iters": "20000",
    "mapper.n_restarts": "16",
    "adapt.a_target": "0.5",
    "adapt.gamma": "1.0",
    "adapt.th_min": "",
    "adapt.th_max": "",
    "adapt.window": "1",
    "adapt.mode": "standard",
}

# Fixed per-module offsets for deriving module seeds from the global seed.
_SEED_OFFSETS = {"encoder": 1, "trainer": 2, "mapper": 3, "adapt": 4, "data": 5, "split": 6}


def derive_seed(global_seed: int, module: str) -> int:
    if module not in _SEED_OFFSETS:
        raise ConfigError(f"unknown seed domain {module!r}")
    return (global_seed * 100_003 + _SEED_OFFSETS[module]) % (2**31)


def parse_config_file(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in DEFAULTS:
                raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
            out[key] = value.strip()
    return out


def env_overrides(environ=None) -> dict[str, str]:
    environ = os.environ if environ is None else environ
    key_by_env = {ENV_PREFIX + k.replace(".", "_").upper(): k for k in DEFAULTS}
    return {
        key_by_env[name]: value
        for name, value in environ.items()
        if name in key_by_env
    }


class RunConfig:
    """Merged defaults + config file + env vars + CLI flags, with typed
    accessors building the per-module config objects."""

    def __init__(self, values: dict[str, str]):
        self.values = values

    @classmethod
    def load(cls, path: str | None = None, overrides: dict[str, str] | None = None
             ) -> "RunConfig":
        values = dict(DEFAULTS)
        if path:
            values.update(parse_config_file(path))
        values.update(env_overrides())
        if overrides:
            values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(values)

    def _get(self, key, cast):
        raw = self.values[key]
        try:
            return cast(raw)
        except ValueError as exc:
            raise ConfigError(f"config key {key} = {raw!r}: {exc}") from exc

    @property
    def seed(self) -> int:
        return self._get("seed", int)

    @property
    def out_dir(self) -> str:
        return self.values["out"]

    @property
    def adaptive(self) -> bool:
        raw = self.values["adaptive"].lower()
        if raw not in ("on", "off"):
            raise ConfigError(f"adaptive must be on|off, got {raw!r}")
        return raw == "on"

    def encoder_config(self) -> EncoderConfig:
        return EncoderConfig(
            scheme=self.values["encoder.scheme"],
            n_timesteps=self._get("encoder.n_timesteps", int),
            alpha=self._get("encoder.alpha", float),
            v_th_base=self._get("encoder.v_th_base", float),
            seed=derive_seed(self.seed, "encoder"),
        )

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            epochs=self._get("trainer.epochs", int),
            batch_size=self._get("trainer.batch_size", int),
            learning_rate=self._get("trainer.learning_rate", float),
            lambda_hw=self._get("trainer.lambda_hw", float),
            surrogate_width=self._get("trainer.surrogate_width", float),
            grad_mode=self.values["trainer.grad_mode"],
            grad_clip=self._get("trainer.grad_clip", float),
            seed=derive_seed(self.seed, "trainer"),
        )

    def mapper_config(self) -> MapperConfig:
        return MapperConfig(
            beta1=self._get("mapper.beta1", float),
            beta2=self._get("mapper.beta2", float),
            beta3=self._get("mapper.beta3", float),
            max_iters=self._get("mapper.max_iters", int),
            n_restarts=self._get("mapper.n_restarts", int),
            seed=derive_seed(self.seed, "mapper"),
        )

    def adapt_config(self) -> AdaptConfig:
        def opt_float(key):
            raw = self.values[key]
            return float(raw) if raw else None

        return AdaptConfig(
            a_target=self._get("adapt.a_target", float),
            gamma=self._get("adapt.gamma", float),
            th_min=opt_float("adapt.th_min"),
            th_max=opt_float("adapt.th_max"),
            window=self._get("adapt.window", int),
            mode=self.values["adapt.mode"],
        )

    def chip(self) -> ChipModel:
        name = self.values["chip"]
        if name in CHIP_PRESETS:
            return CHIP_PRESETS[name]
        return load_chip_file(name)

    def render(self) -> str:
        return "\n".join(f"{k} = {self.values[k]}" for k in DEFAULTS) + "\n"


def load_chip_file(path: str) -> ChipModel:
    """Chip model from a key-value file with fields mirroring ChipModel."""
    if not os.path.exists(path):
        raise ConfigError(
            f"chip {path!r} is neither a preset ({', '.join(CHIP_PRESETS)}) nor a file"
        )
    fields = {
        "name": str, "n_cores": int, "neurons_per_core": int, "synapses_per_core": int,
        "e_sop": float, "e_spike": float, "inter_core_cost": float,
        "e_update": float, "e_route": float,
    }
    kwargs = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in fields:
                raise ConfigError(f"{path}:{lineno}: unknown chip field {key!r}")
            try:
                kwargs[key] = fields[key](value.strip())
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from exc
    return ChipModel(**kwargs)
