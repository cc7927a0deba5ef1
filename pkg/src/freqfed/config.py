"""Experiment configuration: one flat YAML mapping with a full default set.

Keys (all optional)::

    dataset          directory holding manifest.tsv (from ``gen-data``)
    output_dir       where train/evaluate write their outputs
    preset           synthetic corpus preset for gen-data: default | cast
    per_domain       samples generated per domain
    size             image height and width
    clients          domain ids used as training clients
    held_out         domain id kept out of training
    train_fraction   per-domain train share (rest is the test split)
    rounds, lr, mu, augment, beta, alpha, threshold_mode, mix_variant,
    aggregation, aug_per_image, fixed_lambda, workers
                     federation settings (``lr`` is the local SGD rate)
    seed             master seed: init weights, augmentation draws, splits
"""

from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml

from .federation import FederationConfig


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    dataset: str = "data"
    output_dir: str = "runs/default"
    preset: str = "default"
    per_domain: int = 60
    size: int = 64
    clients: list = field(default_factory=lambda: [0, 1, 2])
    held_out: int = 3
    train_fraction: float = 0.9
    rounds: int = 20
    lr: float = 0.5
    mu: float = 0.0
    augment: bool = True
    beta: float = 0.1
    alpha: float = 0.05
    threshold_mode: str = "hard"
    mix_variant: str = "literal"
    aggregation: str | list = "size"
    aug_per_image: int = 1
    fixed_lambda: float | None = None
    workers: int = 1
    seed: int = 0

    def federation(self):
        return FederationConfig(
            rounds=self.rounds,
            local_lr=self.lr,
            mu=self.mu,
            augment=self.augment,
            beta=self.beta,
            alpha=self.alpha,
            threshold_mode=self.threshold_mode,
            mix_variant=self.mix_variant,
            aggregation=self.aggregation,
            seed=self.seed,
            aug_per_image=self.aug_per_image,
            fixed_lambda=self.fixed_lambda,
            workers=self.workers,
        )

    def validate(self):
        from .data import PRESETS

        errors = self.federation().validate()
        if self.preset not in PRESETS:
            errors.append(f"preset must be one of {sorted(PRESETS)}, got {self.preset!r}")
        if self.per_domain < 1:
            errors.append(f"per_domain must be >= 1, got {self.per_domain}")
        if self.size < 3:
            errors.append(f"size must be >= 3, got {self.size}")
        if not self.clients:
            errors.append("clients must list at least one training domain")
        elif len(set(self.clients)) != len(self.clients):
            errors.append(f"clients contains duplicates: {self.clients}")
        if self.held_out in self.clients:
            errors.append(f"held_out domain {self.held_out} is also a training client")
        if not 0 < self.train_fraction < 1:
            errors.append(f"train_fraction must lie in (0, 1), got {self.train_fraction}")
        return errors

    def to_dict(self):
        return asdict(self)


KEYS = {f.name for f in fields(ExperimentConfig)}


def parse_override(text):
    """``key=value`` with the value parsed as YAML."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not key=value")
    key, value = text.split("=", 1)
    return key.strip(), yaml.safe_load(value)


def load_config(path=None, overrides=()):
    """Defaults, then the YAML file, then ``key=value`` overrides."""
    values = {}
    if path is not None:
        loaded = yaml.safe_load(Path(path).read_text())
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        values.update(loaded)
    for item in overrides:
        key, value = item if isinstance(item, tuple) else parse_override(item)
        values[key] = value
    unknown = sorted(set(values) - KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    try:
        cfg = ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    errors = cfg.validate()
    if errors:
        raise ConfigError("invalid config:\n  " + "\n  ".join(errors))
    return cfg


def dump_config(cfg, path):
    Path(path).write_text(yaml.safe_dump(cfg.to_dict(), sort_keys=True))
