"""Training hyper-parameters, the search grid and seed derivation."""
import itertools
from dataclasses import asdict, dataclass, fields, replace

import numpy as np
from django.conf import settings

# search space per hyper-parameter
GRID = {
    "batch_size": (128, 256, 512),
    "learning_rate": (0.0005, 0.001, 0.005),
    "weight_decay": (0.0, 1e-5, 1e-4),
    "experts": (1, 3, 5, 7, 9),
    "alpha": (0.01, 0.1, 1.0, 5.0),
    "beta": (0.01, 0.1, 1.0, 5.0),
    "psi": (0.1, 0.2, 0.3),
}


@dataclass(frozen=True)
class TrainConfig:
    seed: int = 0
    batch_size: int = 128
    learning_rate: float = 0.001
    weight_decay: float = 0.0
    optimizer: str = "sgd"
    encoder: str = "gin"
    num_layers: int = 5
    hidden_dim: int = 300
    readout: str = "mean"
    experts: int = 3
    alpha: float = 0.1
    beta: float = 0.1
    psi: float = 0.2
    margin: float = 0.5
    patience: int = 3
    epochs_rec: int = 100
    epochs_total: int = 200
    gamma: float = 0.1
    tau: float = 0.1
    split: str = "scaffold"
    split_ratios: tuple = (0.8, 0.1, 0.1)
    ablation: str = "none"

    @classmethod
    def defaults(cls):
        return cls.from_dict(getattr(settings, "ASEMOL_DEFAULTS", {}))

    @classmethod
    def from_dict(cls, values):
        names = {f.name for f in fields(cls)}
        known = {k: v for k, v in values.items() if k in names}
        if "split_ratios" in known:
            known["split_ratios"] = tuple(float(r) for r in known["split_ratios"])
        return cls(**known)

    def as_dict(self):
        data = asdict(self)
        data["split_ratios"] = list(self.split_ratios)
        return data

    def updated(self, **changes):
        if "split_ratios" in changes:
            changes["split_ratios"] = tuple(changes["split_ratios"])
        return replace(self, **changes)

    def off_grid(self):
        return {name: getattr(self, name) for name, values in GRID.items() if getattr(self, name) not in values}


def grid(base=None):
    """Every TrainConfig of the search space, other fields taken from ``base``."""
    base = base or TrainConfig()
    names = list(GRID)
    for values in itertools.product(*(GRID[n] for n in names)):
        yield base.updated(**dict(zip(names, values)))


@dataclass(frozen=True)
class Seeds:
    """Independent integer seeds for each random consumer, derived from one seed."""

    split: int
    encoder: int
    head: int
    experts: int
    noise: int
    shuffle: int

    @classmethod
    def derive(cls, seed):
        children = np.random.SeedSequence(seed).spawn(6)
        values = [int(child.generate_state(1)[0]) for child in children]
        return cls(*values)
