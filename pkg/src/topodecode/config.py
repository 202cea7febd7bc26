"""Training configuration and its key-value text file format.

Config files hold one ``key = value`` pair per line; ``#`` starts a
comment. Keys match the TrainConfig field names; ``split`` is written as
``test,train`` fractions in chronological order.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

__all__ = ["TrainConfig", "read_config", "write_config", "config_from_dict"]


@dataclass
class TrainConfig:
    kind: str = "hd"
    arch: str = "scrnn"
    epochs: int = 50
    batch_size: int = 32
    learning_rate: float = 0.001
    dropout: float = 0.2
    nn_layers: int = 1
    hidden_size: int = 64
    layer_width: int = 128
    sc_layers: int = 2
    n_filters: int = 2
    degree: int = 1
    k_max: int = 2
    seq_len: int = 5
    n_col: int = 1
    p: float = 0.3
    t_bin: float = 0.1
    seed: int = 0
    split: tuple[float, float] = (0.25, 0.75)

    def __post_init__(self):
        if isinstance(self.split, list):
            self.split = tuple(self.split)
        for name in (
            "epochs", "batch_size", "nn_layers", "hidden_size", "layer_width",
            "sc_layers", "n_filters", "degree", "k_max", "seq_len", "n_col",
        ):
            if getattr(self, name) < (0 if name == "epochs" else 1):
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.learning_rate < 0 or self.t_bin <= 0:
            raise ValueError("learning_rate must be >= 0 and t_bin > 0")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must be in [0, 1), got {self.dropout}")
        if not 0.0 < self.p <= 1.0:
            raise ValueError(f"p must be in (0, 1], got {self.p}")
        if abs(sum(self.split) - 1.0) > 1e-9:
            raise ValueError(f"split fractions must sum to 1, got {self.split}")

    def replace(self, **overrides) -> "TrainConfig":
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data.update(overrides)
        return TrainConfig(**data)


_INT_KEYS = {
    "epochs", "batch_size", "nn_layers", "hidden_size", "layer_width",
    "sc_layers", "n_filters", "degree", "k_max", "seq_len", "n_col", "seed",
}
_FLOAT_KEYS = {"learning_rate", "dropout", "p", "t_bin"}
_STR_KEYS = {"kind", "arch"}


def config_from_dict(data: dict) -> TrainConfig:
    kwargs = {}
    for key, raw in data.items():
        if key in _INT_KEYS:
            kwargs[key] = int(raw)
        elif key in _FLOAT_KEYS:
            kwargs[key] = float(raw)
        elif key in _STR_KEYS:
            kwargs[key] = str(raw)
        elif key == "split":
            if isinstance(raw, str):
                raw = raw.split(",")
            kwargs[key] = tuple(float(x) for x in raw)
        else:
            raise KeyError(f"unknown config key {key!r}")
    return TrainConfig(**kwargs)


def read_config(path) -> TrainConfig:
    data = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            data[key] = value
    return config_from_dict(data)


def write_config(cfg: TrainConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for f in fields(cfg):
            value = getattr(cfg, f.name)
            if f.name == "split":
                value = ",".join(repr(v) for v in value)
            fh.write(f"{f.name} = {value}\n")
