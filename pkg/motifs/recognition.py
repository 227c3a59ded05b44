"""Motif recognition: encoder + head trained on task and margin losses."""
import logging
from dataclasses import dataclass, field

import numpy as np

from autodiff.tensor import Tape, no_grad
from encoder.gnn import ConfigurationError, GraphBatch
from moldata.reports import LossReport
from training.metrics import task_loss

from .attribution import (
    attribute_batch,
    margin_loss,
    motif_embeddings,
    pseudo_labels,
    select_motifs,
    whole_molecule_assignment,
)

logger = logging.getLogger(__name__)


class DivergenceError(RuntimeError):
    """A loss became non-finite.

    ``run_recognition`` attaches ``last_good`` (encoder and head weights after
    the last completed epoch) and the reports of the completed epochs.
    """

    def __init__(self, message, last_good=None, reports=()):
        super().__init__(message)
        self.last_good = last_good
        self.reports = list(reports)


@dataclass(frozen=True)
class RecognitionConfig:
    psi: float = 0.2
    margin: float = 0.5
    alpha: float = 0.1
    epochs: int = 100
    patience: int = 3

    def __post_init__(self):
        if not 0 < self.psi <= 1:
            raise ConfigurationError(f"psi must lie in (0, 1], got {self.psi}")
        if self.margin <= 0:
            raise ConfigurationError(f"margin must be positive, got {self.margin}")
        if self.alpha < 0:
            raise ConfigurationError(f"alpha must be non-negative, got {self.alpha}")
        if self.epochs < 0 or self.patience < 1:
            raise ConfigurationError(f"need epochs >= 0 and patience >= 1, got {self.epochs}/{self.patience}")


@dataclass
class RecognitionResult:
    assignments: dict
    reports: list = field(default_factory=list)
    epochs_run: int = 0
    stopped_early: bool = False


def batches(indices, batch_size, rng=None):
    """Split ``indices`` into consecutive chunks, shuffled first when ``rng`` is given."""
    order = np.asarray(indices, dtype=np.int64)
    if rng is not None:
        order = order[rng.permutation(order.size)]
    return [order[i:i + batch_size] for i in range(0, order.size, batch_size)]


def _assign(records, scores_per_molecule, psi):
    assignments = []
    for record, scores in zip(records, scores_per_molecule):
        if scores is None:
            assignments.append(whole_molecule_assignment(record.graph))
        else:
            assignments.append(select_motifs(scores, record.fragments, psi))
    return assignments


def recognition_epoch(records, index_batches, encoder, head, optimizer, config):
    """One pass of L_rec = L_task + alpha * L_margin; returns (losses, assignments)."""
    readout = encoder.config.readout
    totals = np.zeros(3)
    assignments = {}
    for indices in index_batches:
        members = [records[i] for i in indices]
        labels = np.stack([r.labels for r in members])
        batch = GraphBatch.from_graphs([r.graph for r in members])
        with Tape() as tape:
            h_v, h = encoder(batch)
            logits = head(h)
            loss_task = task_loss(logits, labels)
            scores = attribute_batch(batch, [r.fragments for r in members], h_v, h, head, labels, readout)
            chosen = _assign(members, scores, config.psi)
            h_pos, h_neg = motif_embeddings(h_v, batch, chosen, readout)
            loss_margin = margin_loss(h, h_pos, h_neg, config.margin)
            loss_rec = loss_task + loss_margin * config.alpha
            if not np.isfinite(loss_rec.item()):
                raise DivergenceError(f"recognition loss became {loss_rec.item()}")
            optimizer.zero_grad()
            tape.backward(loss_rec)
        optimizer.step()
        totals += [loss_task.item(), loss_margin.item(), loss_rec.item()]
        assignments.update({int(i): a for i, a in zip(indices, chosen)})
    totals /= max(len(index_batches), 1)
    return totals, assignments


def run_recognition(records, train_indices, encoder, head, optimizer, config, batch_size, rng, evaluate=None):
    """Recognition epochs until assignments hold for ``patience`` epochs or ``epochs`` is reached."""
    encoder.train()
    head.train()
    result = RecognitionResult(assignments={})
    stable = 0
    for epoch in range(1, config.epochs + 1):
        last_good = {"encoder": encoder.state_dict(), "head": head.state_dict()}
        try:
            losses, assignments = recognition_epoch(
                records, batches(train_indices, batch_size, rng), encoder, head, optimizer, config
            )
        except DivergenceError as exc:
            exc.last_good = last_good
            exc.reports = list(result.reports)
            raise

        stable = stable + 1 if assignments == result.assignments else 0
        result.assignments = assignments
        result.epochs_run = epoch
        report = LossReport(
            epoch=epoch,
            phase="recognition",
            loss_task=float(losses[0]),
            loss_margin=float(losses[1]),
            loss_rec=float(losses[2]),
            auc=evaluate() if evaluate else {},
        )
        result.reports.append(report)
        logger.info(
            f"Recognition epoch {epoch}: L_task={report.loss_task:.4f} "
            f"L_margin={report.loss_margin:.4f} stable={stable}"
        )
        if stable >= config.patience:
            result.stopped_early = True
            logger.info(f"Motif assignments unchanged for {stable} epochs; recognition stops at epoch {epoch}")
            break
    return result


def attribution_scores(records, encoder, head, train_indices, batch_size):
    """Attribution scores of every record's fragments.

    Training records are attributed against their own labels; every other
    record against the head's thresholded prediction.
    """
    train = set(int(i) for i in train_indices)
    readout = encoder.config.readout
    results = []
    for indices in batches(range(len(records)), batch_size):
        members = [records[i] for i in indices]
        batch = GraphBatch.from_graphs([r.graph for r in members])
        with no_grad():
            h_v, h = encoder(batch)
            guesses = pseudo_labels(head(h).data)
        labels = np.stack([
            r.labels if int(i) in train else guesses[k]
            for k, (i, r) in enumerate(zip(indices, members))
        ])
        results.extend(attribute_batch(batch, [r.fragments for r in members], h_v, h, head, labels, readout))
    return results


def assign_motifs(records, encoder, head, psi, train_indices, batch_size):
    """Frozen motif assignment for every record."""
    scores = attribution_scores(records, encoder, head, train_indices, batch_size)
    assignments = _assign(records, scores, psi)
    degenerate = sum(a.degenerate for a in assignments)
    if degenerate:
        logger.warning(f"{degenerate} of {len(assignments)} molecules have a single fragment; both motifs are the whole molecule")
    return assignments
