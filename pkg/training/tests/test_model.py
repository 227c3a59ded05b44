import numpy as np
import pytest

from autodiff.optim import build_optimizer
from autodiff.testing import analytic_gradient, numeric_gradient, relative_error
from encoder.gnn import GraphBatch
from experts.moe import importance_loss, total_loss
from moldata.ingest import build_dataset
from motifs.recognition import RecognitionConfig, assign_motifs, batches, recognition_epoch
from training.config import Seeds, TrainConfig
from training.metrics import task_loss
from training.model import ASEMol

MOLECULES = ["CC(=O)Nc1ccccc1", "COc1ccccc1CCN", "c1ccncc1C(=O)OCC"]
LABELS = [[1, 0], [0, 1], [1, 1]]


@pytest.fixture
def small():
    dataset = build_dataset(MOLECULES, ["a", "b"], LABELS)
    config = TrainConfig(hidden_dim=8, num_layers=2, experts=2, gamma=0.0, seed=11)
    model = ASEMol(config, 2, Seeds.derive(config.seed)).eval()
    assignments = assign_motifs(dataset.records, model.encoder, model.head, 0.5, range(3), 8)
    return dataset, model, assignments


def test_total_loss_gradient_matches_finite_differences(small):
    dataset, model, assignments = small
    batch = GraphBatch.from_graphs([r.graph for r in dataset.records])
    rng = np.random.default_rng(2)
    for param in model.parameters():
        param.data = param.data + rng.normal(scale=0.1, size=param.shape)

    def loss():
        prediction, *_ = model(batch, assignments)
        return total_loss(
            task_loss(prediction.logits, dataset.labels), importance_loss(prediction.routings, 0.0), 0.5
        )

    for name, param in model.named_parameters():
        if name.startswith("head."):
            continue
        analytic = analytic_gradient(loss, param)
        numeric = numeric_gradient(loss, param)
        assert relative_error(analytic, numeric) < 1e-4, name


def test_parameter_groups(small):
    _, model, _ = small
    recognition = {id(p) for p in model.recognition_parameters()}
    prediction = {id(p) for p in model.prediction_parameters()}
    moe = {id(p) for p in model.moe.parameters()}
    head = {id(p) for p in model.head.parameters()}
    assert not recognition & moe
    assert not prediction & head
    assert {id(p) for p in model.encoder.parameters()} <= recognition & prediction


def test_recognition_never_touches_the_experts(small):
    dataset, model, _ = small
    model.train()
    before = model.moe.state_dict()
    optimizer = build_optimizer("sgd", model.recognition_parameters(), 0.1, 0.0)
    recognition_epoch(dataset.records, batches(range(3), 3), model.encoder, model.head, optimizer, RecognitionConfig())
    assert all(p.grad is None for p in model.moe.parameters())
    after = model.moe.state_dict()
    assert all(np.array_equal(before[k], after[k]) for k in before)


def test_predict_is_deterministic_and_restores_mode(small):
    dataset, model, assignments = small
    model.train()
    first = model.predict(dataset.records, assignments, batch_size=2)
    second = model.predict(dataset.records, assignments, batch_size=3)
    assert first.shape == (3, 2)
    assert np.allclose(first, second, atol=1e-12)
    assert model.training


def test_recognizer_logits_shape(small):
    dataset, model, _ = small
    assert model.recognizer_logits(dataset.records, batch_size=2).shape == (3, 2)
