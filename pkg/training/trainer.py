"""
Two-phase training.

Phase 1 trains the encoder and the recognition head on the task loss plus
the motif margin loss until motif assignments settle. Motifs are then
frozen for every molecule, and phase 2 trains the encoder and the experts
on the task loss plus the importance loss, keeping the weights with the
best validation ROC-AUC.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from autodiff.optim import build_optimizer
from autodiff.tensor import Tape
from encoder.gnn import GraphBatch
from experts.moe import importance_loss, total_loss
from moldata.reports import LossReport
from motifs.recognition import (
    DivergenceError,
    RecognitionConfig,
    assign_motifs,
    batches,
    run_recognition,
)

from .config import Seeds
from .metrics import per_task_auc, roc_auc, task_loss
from .model import ASEMol
from .serializers import check_summary
from .splits import make_split

logger = logging.getLogger(__name__)

SPLITS = ("train", "valid", "test")


class TrainingDiverged(RuntimeError):
    """A loss became non-finite; ``last_good_state`` holds the weights before it."""

    def __init__(self, message, last_good_state, phase, reports=()):
        super().__init__(message)
        self.last_good_state = last_good_state
        self.phase = phase
        self.reports = list(reports)


@dataclass
class TrainingResult:
    model: ASEMol
    assignments: list
    split: tuple
    reports: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)


class Trainer:
    def __init__(self, dataset, config, on_report=None):
        self.dataset = dataset
        self.records = dataset.records
        self.config = config
        self.seeds = Seeds.derive(config.seed)
        self.on_report = on_report
        self.reports = []

    def split(self):
        return make_split(
            [r.scaffold for r in self.records], self.config.split, self.config.split_ratios, self.seeds.split
        )

    def build_model(self):
        return ASEMol(self.config, self.dataset.num_tasks, self.seeds)

    def _emit(self, report):
        self.reports.append(report)
        if self.on_report:
            self.on_report(report.as_record())

    def _labels(self, indices):
        return self.dataset.labels[np.asarray(indices, dtype=np.int64)]

    def split_auc(self, logits, parts):
        auc = {}
        for name, indices in zip(SPLITS, parts):
            if len(indices) == 0:
                auc[name] = float("nan")
                continue
            auc[name] = roc_auc(logits[indices], self._labels(indices), self.dataset.task_names)
        return auc

    def recognize(self, model, train):
        config = self.config
        recognition = RecognitionConfig(
            psi=config.psi,
            margin=config.margin,
            alpha=config.alpha,
            epochs=config.epochs_rec,
            patience=config.patience,
        )
        optimizer = build_optimizer(
            config.optimizer, model.recognition_parameters(), config.learning_rate, config.weight_decay
        )
        parts = self._parts

        def evaluate():
            return self.split_auc(model.recognizer_logits(self.records, config.batch_size), parts)

        return run_recognition(
            self.records, train, model.encoder, model.head, optimizer, recognition,
            config.batch_size, self._shuffle, evaluate,
        )

    def prediction_epoch(self, model, optimizer, train, assignments):
        config = self.config
        totals = np.zeros(3)
        index_batches = batches(train, config.batch_size, self._shuffle)
        model.train()
        for indices in index_batches:
            members = [self.records[i] for i in indices]
            batch = GraphBatch.from_graphs([r.graph for r in members])
            with Tape() as tape:
                prediction, *_ = model(batch, [assignments[i] for i in indices])
                loss_task = task_loss(prediction.logits, self._labels(indices))
                loss_imp = importance_loss(prediction.routings, config.gamma)
                loss = total_loss(loss_task, loss_imp, config.beta)
                if not np.isfinite(loss.item()):
                    raise DivergenceError(f"total loss became {loss.item()}")
                optimizer.zero_grad()
                tape.backward(loss)
            optimizer.step()
            totals += [loss_task.item(), loss_imp.item(), loss.item()]
        return totals / max(len(index_batches), 1)

    def fit(self):
        config = self.config
        train, valid, test = self._parts = self.split()
        self._shuffle = np.random.default_rng(self.seeds.shuffle)
        model = self.build_model()
        recognition_epochs = 0

        if config.ablation == "no-recognition" or config.epochs_rec == 0:
            logger.info("Skipping motif recognition; motifs come from the untrained recognizer")
        else:
            try:
                recognition = self.recognize(model, train)
            except DivergenceError as exc:
                for report in exc.reports:
                    self._emit(report)
                model.encoder.load_state_dict(exc.last_good["encoder"])
                model.head.load_state_dict(exc.last_good["head"])
                raise TrainingDiverged(str(exc), model.state_dict(), "recognition", self.reports) from exc
            recognition_epochs = recognition.epochs_run
            for report in recognition.reports:
                self._emit(report)

        assignments = assign_motifs(self.records, model.encoder, model.head, config.psi, train, config.batch_size)

        optimizer = build_optimizer(
            config.optimizer, model.prediction_parameters(), config.learning_rate, config.weight_decay
        )
        best_score, best_epoch, best_state, best_auc = -math.inf, 0, model.state_dict(), {}
        last_good = model.state_dict()
        for epoch in range(1, config.epochs_total + 1):
            try:
                losses = self.prediction_epoch(model, optimizer, train, assignments)
            except DivergenceError as exc:
                raise TrainingDiverged(str(exc), last_good, "prediction", self.reports) from exc
            last_good = model.state_dict()
            auc = self.split_auc(model.predict(self.records, assignments, config.batch_size), self._parts)
            self._emit(LossReport(
                epoch=epoch,
                phase="prediction",
                loss_task=float(losses[0]),
                loss_imp=float(losses[1]),
                loss_total=float(losses[2]),
                auc=auc,
            ))
            logger.info(
                f"Epoch {epoch}: L_task={losses[0]:.4f} L_imp={losses[1]:.4f} "
                f"valid AUC={auc['valid']:.4f}"
            )
            score = auc["valid"] if np.isfinite(auc["valid"]) else -math.inf
            if epoch == 1 or score > best_score:
                best_score, best_epoch, best_state, best_auc = score, epoch, last_good, auc

        model.load_state_dict(best_state)
        logits = model.predict(self.records, assignments, config.batch_size)
        summary = {
            "type": "summary",
            "seed": config.seed,
            "phase": "prediction",
            "best_epoch": best_epoch,
            "recognition_epochs": recognition_epochs,
            "train_auc": best_auc.get("train"),
            "valid_auc": best_auc.get("valid"),
            "test_auc": best_auc.get("test"),
            "per_task_test_auc": per_task_auc(logits[test], self._labels(test)) if len(test) else [],
            "split_sizes": [len(train), len(valid), len(test)],
            "diverged": False,
            "config": config.as_dict(),
        }
        return TrainingResult(model, assignments, self._parts, list(self.reports), check_summary(summary))
