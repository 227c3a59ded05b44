import numpy as np
import pytest

from encoder.gnn import EncoderConfig, GraphEncoder
from moldata.ingest import build_dataset
from motifs.attribution import PredictionHead

MOLECULES = [
    "CC(=O)Nc1ccccc1",
    "CCOC(=O)c1ccccc1",
    "c1ccccc1CCc1ccncc1",
    "CCN(CC)CC",
    "CS(=O)(=O)Nc1ccccc1",
    "COc1ccccc1C(=O)NC",
    "C=CCc1ccccc1",
    "CCO",
]


def make_model(seed=0, dim=8, layers=2, num_tasks=1, readout="mean", variant="gin"):
    rng = np.random.default_rng(seed)
    encoder = GraphEncoder(EncoderConfig(variant, layers, dim, readout), rng)
    head = PredictionHead(dim, num_tasks, rng)
    return encoder, head


@pytest.fixture
def dataset():
    labels = [[i % 2] for i in range(len(MOLECULES))]
    return build_dataset(MOLECULES, ["y"], labels)
