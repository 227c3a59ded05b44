import numpy as np
import pytest

from moldata.checkpoint import Checkpoint
from moldata.reports import render_line
from motifs import recognition
from training.services import TrainingService, dataset_digest
from training.trainer import Trainer, TrainingDiverged


def run(dataset, config):
    lines = []
    result = Trainer(dataset, config, on_report=lambda record: lines.append(render_line(record))).fit()
    return result, lines


def test_fit_reports_both_phases(planted, tiny_config):
    result, lines = run(planted, tiny_config)
    phases = [r.phase for r in result.reports]
    assert phases.count("prediction") == tiny_config.epochs_total
    assert 1 <= phases.count("recognition") <= tiny_config.epochs_rec
    assert len(lines) == len(result.reports)
    summary = result.summary
    assert summary["type"] == "summary"
    assert 1 <= summary["best_epoch"] <= tiny_config.epochs_total
    assert sum(summary["split_sizes"]) == len(planted)
    assert len(result.assignments) == len(planted)


def test_same_seed_gives_identical_reports(planted, tiny_config):
    first, first_lines = run(planted, tiny_config)
    second, second_lines = run(planted, tiny_config)
    assert first_lines == second_lines
    assert render_line(first.summary) == render_line(second.summary)
    state_a, state_b = first.model.state_dict(), second.model.state_dict()
    assert all(np.array_equal(state_a[k], state_b[k]) for k in state_a)


def test_no_recognition_ablation_skips_phase_one(planted, tiny_config):
    result, _ = run(planted, tiny_config.updated(ablation="no-recognition"))
    assert result.summary["recognition_epochs"] == 0
    assert all(r.phase == "prediction" for r in result.reports)


def test_non_finite_loss_raises_with_last_good_state(planted, tiny_config, monkeypatch):
    monkeypatch.setattr("training.trainer.task_loss", lambda logits, labels: logits.sum() * float("nan"))
    config = tiny_config.updated(epochs_rec=0)
    with pytest.raises(TrainingDiverged) as info:
        Trainer(planted, config).fit()
    assert info.value.phase == "prediction"
    model = TrainingService.diverged_model(planted, config, info.value.last_good_state)
    assert set(model.state_dict()) == set(info.value.last_good_state)


def test_recognition_divergence_keeps_the_last_completed_epoch(planted, tiny_config, monkeypatch):
    real_epoch = recognition.recognition_epoch
    real_loss = recognition.task_loss
    after_first = {}
    calls = []

    def epoch(records, index_batches, encoder, head, optimizer, config):
        calls.append(len(index_batches))
        if len(calls) == 2:
            monkeypatch.setattr(recognition, "task_loss", lambda logits, labels: real_loss(logits, labels) * float("nan"))
        losses = real_epoch(records, index_batches, encoder, head, optimizer, config)
        after_first.setdefault("encoder", encoder.state_dict())
        after_first.setdefault("head", head.state_dict())
        return losses

    monkeypatch.setattr(recognition, "recognition_epoch", epoch)
    config = tiny_config.updated(epochs_rec=4)
    trainer = Trainer(planted, config)
    with pytest.raises(TrainingDiverged) as info:
        trainer.fit()

    assert len(calls) == 2
    assert info.value.phase == "recognition"
    state = info.value.last_good_state
    initial = Trainer(planted, config).build_model().state_dict()
    assert set(state) == set(initial)
    for part in ("encoder", "head"):
        for name, value in after_first[part].items():
            assert np.array_equal(state[f"{part}.{name}"], value)
    assert any(
        not np.array_equal(state[f"encoder.{name}"], initial[f"encoder.{name}"])
        for name in after_first["encoder"]
    )
    assert [(r.phase, r.epoch) for r in info.value.reports] == [("recognition", 1)]


def test_checkpoint_restores_identical_predictions(planted, tiny_config):
    result, _ = run(planted, tiny_config)
    checkpoint = TrainingService.build_checkpoint(
        result.model, planted, result.assignments, split=result.split
    )
    restored_checkpoint = Checkpoint.from_bytes(checkpoint.to_bytes())
    model = TrainingService.restore(restored_checkpoint)
    assignments = TrainingService.motifs_for(model, restored_checkpoint, planted)
    assert assignments == result.assignments
    original = result.model.predict(planted.records, result.assignments)
    assert np.array_equal(model.predict(planted.records, assignments), original)
    assert restored_checkpoint.metadata["dataset_digest"] == dataset_digest(planted)


def test_evaluate_reports_per_task_and_test_auc(planted, tiny_config):
    result, _ = run(planted, tiny_config)
    checkpoint = TrainingService.build_checkpoint(result.model, planted, result.assignments, split=result.split)
    record = TrainingService.evaluate(checkpoint, planted)
    assert record["type"] == "evaluation"
    assert record["molecules"] == len(planted)
    assert set(record["per_task_auc"]) == {"active"}
    assert "test_auc" in record


def test_foreign_dataset_gets_recognised_motifs(planted, tiny_config):
    from training.synthetic import planted_amide_dataset

    result, _ = run(planted, tiny_config)
    checkpoint = TrainingService.build_checkpoint(result.model, planted, result.assignments, split=result.split)
    other = planted_amide_dataset(12, seed=9)
    assignments = TrainingService.motifs_for(result.model, checkpoint, other)
    assert len(assignments) == len(other)
    assert TrainingService.train_indices(checkpoint, other) == []
    assert "test_auc" not in TrainingService.evaluate(checkpoint, other)


def test_evaluate_rejects_other_tasks(planted, tiny_config):
    from moldata.ingest import build_dataset

    model = TrainingService.fresh(planted, tiny_config).model
    checkpoint = TrainingService.build_checkpoint(model, planted)
    with pytest.raises(ValueError):
        TrainingService.evaluate(checkpoint, build_dataset(["CCO"], ["other"], [[1]]))


def test_compare_ablation_reports_the_difference(planted, tiny_config):
    main, baseline, comparison = TrainingService.compare_ablation(planted, tiny_config)
    assert baseline.summary["config"]["experts"] == 1
    assert baseline.summary["config"]["beta"] == 0.0
    assert baseline.summary["config"]["psi"] == 1.0
    if np.isfinite(main.summary["test_auc"]) and np.isfinite(baseline.summary["test_auc"]):
        assert comparison["auc_difference"] == pytest.approx(
            main.summary["test_auc"] - baseline.summary["test_auc"]
        )


def test_compare_ablation_labels_each_run(planted, tiny_config):
    records = []
    config = tiny_config.updated(epochs_rec=1, epochs_total=2)
    main, baseline, _ = TrainingService.compare_ablation(planted, config, records.append)
    runs = [record["run"] for record in records]
    assert all(record["type"] == "epoch" for record in records)
    assert runs == ["main"] * len(main.reports) + ["baseline"] * len(baseline.reports)
    assert (main.summary["run"], baseline.summary["run"]) == ("main", "baseline")
