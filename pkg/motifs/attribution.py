"""
Fragment attribution and motif selection.

A fragment's attribution for a task is the change in the head's logit when
the molecule is read out through the fragment's atoms only, signed so that
a positive value always pushes toward the observed label.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from autodiff import tensor as ad
from autodiff.nn import Linear, Module
from autodiff.tensor import Tensor, no_grad
from encoder.gnn import GraphBatch, readout_segments
from moldata.ingest import MISSING

logger = logging.getLogger(__name__)


class PredictionHead(Module):
    """d -> d -> T multilayer perceptron producing task logits."""

    def __init__(self, dim, num_tasks, rng):
        self.hidden = Linear(dim, dim, rng)
        self.output = Linear(dim, num_tasks, rng)

    def forward(self, h):
        return self.output(ad.relu(self.hidden(h)))


@dataclass(frozen=True)
class AttributionScore:
    fragment: int
    per_task: np.ndarray
    aggregate: float


@dataclass(frozen=True)
class MotifAssignment:
    positive_fragments: tuple
    negative_fragments: tuple
    positive_nodes: tuple
    negative_nodes: tuple
    degenerate: bool = False

    def positive_mask(self, num_atoms):
        return _mask(self.positive_nodes, num_atoms)

    def negative_mask(self, num_atoms):
        return _mask(self.negative_nodes, num_atoms)

    def category(self, fragment):
        if fragment in self.positive_fragments:
            return "positive"
        if fragment in self.negative_fragments:
            return "negative"
        return "unrelated"

    def as_record(self):
        return {
            "positive_fragments": list(self.positive_fragments),
            "negative_fragments": list(self.negative_fragments),
            "positive_nodes": list(self.positive_nodes),
            "negative_nodes": list(self.negative_nodes),
            "degenerate": self.degenerate,
        }

    @classmethod
    def from_record(cls, record):
        return cls(
            positive_fragments=tuple(record["positive_fragments"]),
            negative_fragments=tuple(record["negative_fragments"]),
            positive_nodes=tuple(record["positive_nodes"]),
            negative_nodes=tuple(record["negative_nodes"]),
            degenerate=bool(record["degenerate"]),
        )


def _mask(nodes, num_atoms):
    m = np.zeros(num_atoms)
    m[list(nodes)] = 1.0
    return m


def score_fragments(full_logits, fragment_logits, labels, whole=None):
    """Signed logit differences; ``None`` when no label is observed.

    ``whole[j]`` marks fragments covering the entire molecule; their
    observed scores are exactly zero.
    """
    labels = np.asarray(labels, dtype=np.float64)
    observed = labels != MISSING
    if not observed.any():
        return None
    full_logits = np.asarray(full_logits, dtype=np.float64)
    sign = np.where(labels == 1.0, 1.0, -1.0)
    scores = []
    for j, logits in enumerate(np.atleast_2d(fragment_logits)):
        per_task = np.where(observed, sign * (logits - full_logits), np.nan)
        if whole is not None and whole[j]:
            per_task = np.where(observed, 0.0, np.nan)
        scores.append(AttributionScore(j, per_task, float(np.mean(per_task[observed]))))
    return scores


def motif_size(num_fragments, psi):
    return max(1, min(num_fragments, math.ceil(psi * num_fragments - 1e-9)))


def select_motifs(scores, fragments, psi):
    """Top-k and bottom-k fragments by aggregate score, ties to the lower index."""
    aggregates = [s.aggregate for s in scores]
    count = len(aggregates)
    k = motif_size(count, psi)
    positive = sorted(sorted(range(count), key=lambda j: (-aggregates[j], j))[:k])
    ascending = sorted(range(count), key=lambda j: (aggregates[j], j))
    if count >= 2 * k:
        ascending = [j for j in ascending if j not in positive]
    negative = sorted(ascending[:k])
    return MotifAssignment(
        positive_fragments=tuple(positive),
        negative_fragments=tuple(negative),
        positive_nodes=tuple(sorted(i for j in positive for i in fragments[j].node_indices)),
        negative_nodes=tuple(sorted(i for j in negative for i in fragments[j].node_indices)),
        degenerate=count == 1,
    )


def whole_molecule_assignment(graph):
    nodes = tuple(range(graph.num_atoms))
    return MotifAssignment((0,), (0,), nodes, nodes, degenerate=True)


def fragment_rows(batch, fragment_lists):
    """Stacked node rows and segment ids for every fragment in the batch."""
    rows, segments = [], []
    segment = 0
    for offset, fragments in zip(batch.offsets, fragment_lists):
        for fragment in fragments:
            rows.extend(offset + i for i in fragment.node_indices)
            segments.extend([segment] * len(fragment))
            segment += 1
    return np.asarray(rows, dtype=np.int64), np.asarray(segments, dtype=np.int64), segment


def attribute_batch(batch, fragment_lists, node_embeddings, graph_embeddings, head, labels, readout="mean"):
    """Attribution scores for every molecule of a batch, from detached embeddings.

    Returns one list of scores per molecule, or ``None`` for molecules
    without an observed label.
    """
    with no_grad():
        h_v = Tensor(node_embeddings.data)
        full = head(Tensor(graph_embeddings.data)).data
        rows, segments, total = fragment_rows(batch, fragment_lists)
        pooled = readout_segments(ad.gather_rows(h_v, rows), segments, total, readout)
        fragment_logits = head(pooled).data

    results = []
    start = 0
    for k, fragments in enumerate(fragment_lists):
        stop = start + len(fragments)
        whole = [len(f) == batch.sizes[k] for f in fragments]
        scores = score_fragments(full[k], fragment_logits[start:stop], labels[k], whole)
        if scores is None:
            logger.warning(f"Skipping attribution for molecule {k} of the batch: no observed labels")
        results.append(scores)
        start = stop
    return results


def attribute(graph, fragments, encoder, head, labels):
    """Attribution scores of ``fragments`` of one featurized molecule."""
    batch = GraphBatch.from_graphs([graph])
    with no_grad():
        h_v, h = encoder(batch)
    return attribute_batch(batch, [fragments], h_v, h, head, np.atleast_2d(labels), encoder.config.readout)[0]


def pseudo_labels(logits):
    """The head's own hard predictions, used where true labels must stay hidden."""
    return (np.asarray(logits) >= 0.0).astype(np.float64)


def motif_embeddings(node_embeddings, batch, assignments, readout="mean"):
    """Differentiable (H^pos, H^neg) rows for the molecules of a batch."""
    pos_rows, pos_segments, neg_rows, neg_segments = [], [], [], []
    for k, (offset, assignment) in enumerate(zip(batch.offsets, assignments)):
        pos_rows.extend(offset + i for i in assignment.positive_nodes)
        pos_segments.extend([k] * len(assignment.positive_nodes))
        neg_rows.extend(offset + i for i in assignment.negative_nodes)
        neg_segments.extend([k] * len(assignment.negative_nodes))
    count = len(assignments)
    h_pos = readout_segments(ad.gather_rows(node_embeddings, pos_rows), pos_segments, count, readout)
    h_neg = readout_segments(ad.gather_rows(node_embeddings, neg_rows), neg_segments, count, readout)
    return h_pos, h_neg


def margin_loss(h, h_pos, h_neg, margin):
    """mean(-max(sigmoid(<H,H+>) - sigmoid(<H,H->) + margin, 0)); lies in [-(1+margin), 0]."""
    positive = ad.sigmoid(ad.sum(h * h_pos, axis=1))
    negative = ad.sigmoid(ad.sum(h * h_neg, axis=1))
    return ad.mean(-ad.relu(positive - negative + margin))
