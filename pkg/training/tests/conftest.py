import pytest

from training.config import TrainConfig
from training.synthetic import planted_amide_dataset, planted_amide_frame

TINY = {
    "hidden_dim": 8,
    "num_layers": 2,
    "experts": 2,
    "batch_size": 8,
    "epochs_rec": 2,
    "epochs_total": 2,
    "learning_rate": 0.01,
}


@pytest.fixture
def tiny_config():
    return TrainConfig(**TINY)


@pytest.fixture(scope="module")
def planted():
    return planted_amide_dataset(40, seed=1)


@pytest.fixture
def planted_csv(tmp_path):
    path = tmp_path / "planted.csv"
    planted_amide_frame(40, seed=1).to_csv(path, index=False)
    return str(path)
