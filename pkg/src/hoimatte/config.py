"""Run configuration: nested frozen dataclasses with dotted-key overrides."""
import dataclasses
import json
from dataclasses import dataclass, field

from .scene import SynthConfig

STAGES = ("pretrain", "sup1", "sup2", "cl_selfsup", "refine")
ABLATIONS = ("full", "cs_only", "dc_only")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SplitSizes:
    pretrain: int = 100
    labeled_train: int = 200
    labeled_test: int = 50
    unlabeled_train: int = 400
    unlabeled_test: int = 50


@dataclass(frozen=True)
class ModelConfig:
    fp_widths: tuple = (16, 32, 64)
    cl_widths: tuple = (8, 16, 32, 64)
    disc_widths: tuple = (16, 32, 64, 64)
    rn_widths: tuple = (4, 8, 8, 4)


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-4
    batch_size: int = 4
    lambda_a: float = 1.0
    lambda_com: float = 0.5
    lambda_cl: float = 1.0
    lambda_cs: float = 6.0
    lambda_dc: float = 1.0
    # pull towards the stage-entry prediction during self-supervision; 0 disables
    lambda_anchor: float = 1.0
    tau: float = 0.5
    top_k: int = 4
    ablation: str = "full"
    bbar_pool: int = 64


@dataclass(frozen=True)
class EpochConfig:
    pretrain: int = 20
    sup1: int = 10
    sup2: int = 30
    cl_selfsup: int = 25
    refine: int = 20


@dataclass(frozen=True)
class Config:
    seed: int = 0
    synth: SynthConfig = field(default_factory=SynthConfig)
    splits: SplitSizes = field(default_factory=SplitSizes)
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    epochs: EpochConfig = field(default_factory=EpochConfig)

    def to_dict(self):
        return _to_dict(self)


@dataclass(frozen=True)
class StageConfig:
    stage: str
    epochs: int
    lr: float = 1e-4
    batch_size: int = 4
    lambda_a: float = 1.0
    lambda_com: float = 0.5
    lambda_cl: float = 1.0
    lambda_cs: float = 6.0
    lambda_dc: float = 1.0
    lambda_anchor: float = 1.0
    tau: float = 0.5
    seed: int = 0
    ablation: str = "full"
    top_k: int = 4
    bbar_pool: int = 64

    def __post_init__(self):
        if self.stage not in STAGES:
            raise ConfigError(f"unknown stage {self.stage!r}; expected one of {STAGES}")
        if self.ablation not in ABLATIONS:
            raise ConfigError(f"unknown ablation {self.ablation!r}; expected one of {ABLATIONS}")
        if not 0 < self.tau < 1:
            raise ConfigError("tau must lie in (0, 1)")
        for name in ("lambda_a", "lambda_com", "lambda_cl", "lambda_cs", "lambda_dc", "lambda_anchor", "lr"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be nonnegative")
        if self.epochs < 0 or self.batch_size < 1 or self.top_k < 0:
            raise ConfigError("epochs >= 0, batch_size >= 1 and top_k >= 0 required")

    @property
    def effective_lambda_cs(self):
        return 0.0 if self.ablation == "dc_only" else self.lambda_cs

    @property
    def effective_lambda_dc(self):
        return 0.0 if self.ablation == "cs_only" else self.lambda_dc


def stage_config(cfg, stage):
    t = cfg.train
    return StageConfig(
        stage=stage,
        epochs=getattr(cfg.epochs, stage),
        lr=t.lr,
        batch_size=t.batch_size,
        lambda_a=t.lambda_a,
        lambda_com=t.lambda_com,
        lambda_cl=t.lambda_cl,
        lambda_cs=t.lambda_cs,
        lambda_dc=t.lambda_dc,
        lambda_anchor=t.lambda_anchor,
        tau=t.tau,
        seed=cfg.seed,
        ablation=t.ablation,
        top_k=t.top_k,
        bbar_pool=t.bbar_pool,
    )


def desk_preset(cfg=None):
    """Halve every stage's epoch count."""
    cfg = cfg or Config()
    e = cfg.epochs
    halved = EpochConfig(**{f.name: getattr(e, f.name) // 2 for f in dataclasses.fields(e)})
    return dataclasses.replace(cfg, epochs=halved)


def _to_dict(obj):
    if dataclasses.is_dataclass(obj):
        return {f.name: _to_dict(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, tuple):
        return list(obj)
    return obj


def flat_items(cfg, prefix=""):
    """Yield ``(dotted_key, value)`` for every leaf of ``cfg``."""
    for f in dataclasses.fields(cfg):
        value = getattr(cfg, f.name)
        key = prefix + f.name
        if dataclasses.is_dataclass(value):
            yield from flat_items(value, key + ".")
        else:
            yield key, value


def valid_keys(cfg=None):
    return [k for k, _ in flat_items(cfg or Config())]


def _coerce(current, raw):
    if isinstance(raw, str):
        try:
            raw = json.loads(raw)
        except json.JSONDecodeError:
            pass
    if isinstance(current, bool):
        return bool(raw)
    if isinstance(current, int):
        if isinstance(raw, float) and not raw.is_integer():
            raise ConfigError(f"expected an integer, got {raw!r}")
        return int(raw)
    if isinstance(current, float):
        return float(raw)
    if isinstance(current, tuple):
        return tuple(raw)
    return raw


def set_key(cfg, key, raw):
    parts = key.split(".")
    node = cfg
    for p in parts[:-1]:
        if not (dataclasses.is_dataclass(node) and hasattr(node, p)):
            node = None
            break
        node = getattr(node, p)
    if node is None or not dataclasses.is_dataclass(node) or parts[-1] not in {
        f.name for f in dataclasses.fields(node)
    } or dataclasses.is_dataclass(getattr(node, parts[-1])):
        raise ConfigError(
            f"unknown config key {key!r}; valid keys: {', '.join(valid_keys(cfg))}"
        )
    value = _coerce(getattr(node, parts[-1]), raw)

    def rebuild(obj, path):
        if len(path) == 1:
            return dataclasses.replace(obj, **{path[0]: value})
        child = rebuild(getattr(obj, path[0]), path[1:])
        return dataclasses.replace(obj, **{path[0]: child})

    try:
        return rebuild(cfg, parts)
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def apply_overrides(cfg, overrides):
    """Apply ``key=value`` strings (or a mapping of dotted keys)."""
    if isinstance(overrides, dict):
        items = overrides.items()
    else:
        items = []
        for item in overrides:
            if "=" not in item:
                raise ConfigError(f"override {item!r} is not of the form key=value")
            k, v = item.split("=", 1)
            items.append((k.strip(), v.strip()))
    for k, v in items:
        cfg = set_key(cfg, k, v)
    return cfg


def _flatten_mapping(d, prefix=""):
    for k, v in d.items():
        if isinstance(v, dict):
            yield from _flatten_mapping(v, prefix + k + ".")
        else:
            yield prefix + k, v


def from_dict(d, base=None):
    return apply_overrides(base or Config(), dict(_flatten_mapping(d)))


def load_config(path, base=None):
    with open(path) as fh:
        return from_dict(json.load(fh), base)
