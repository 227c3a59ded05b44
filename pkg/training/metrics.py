"""Masked multi-task loss and ROC-AUC."""
import logging

import numpy as np
import pandas as pd

from autodiff import tensor as ad
from autodiff.tensor import ContractError, Tensor
from moldata.ingest import MISSING

logger = logging.getLogger(__name__)


def task_loss(logits, labels):
    """Mean binary cross-entropy with logits over the observed label entries."""
    labels = np.asarray(labels, dtype=np.float64).reshape(logits.shape)
    observed = labels != MISSING
    count = int(observed.sum())
    if count == 0:
        raise ContractError("task_loss: the batch has no observed labels")
    targets = Tensor(np.where(observed, labels, 0.0))
    per_entry = ad.softplus(logits) - logits * targets
    return ad.sum(per_entry * Tensor(observed.astype(np.float64))) / float(count)


def task_auc(scores, labels):
    """P(score_pos > score_neg) + 0.5 P(tie) for one task; None if single-class."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    observed = labels != MISSING
    scores, labels = scores[observed], labels[observed]
    positives = int((labels == 1).sum())
    negatives = int((labels == 0).sum())
    if positives == 0 or negatives == 0:
        return None
    ranks = pd.Series(scores).rank(method="average").to_numpy()
    rank_sum = ranks[labels == 1].sum()
    return float((rank_sum - positives * (positives + 1) / 2.0) / (positives * negatives))


def per_task_auc(scores, labels, task_names=None):
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if scores.ndim == 1:
        scores, labels = scores[:, None], labels[:, None]
    values = []
    for t in range(scores.shape[1]):
        value = task_auc(scores[:, t], labels[:, t])
        if value is None:
            name = task_names[t] if task_names else t
            logger.info(f"Task {name} has a single class in this split; excluded from ROC-AUC")
        values.append(value)
    return values


def roc_auc(scores, labels, task_names=None):
    """Mean ROC-AUC over tasks having both classes; NaN when none does."""
    values = [v for v in per_task_auc(scores, labels, task_names) if v is not None]
    if not values:
        logger.warning("No task has both classes; ROC-AUC undefined")
        return float("nan")
    return float(np.mean(values))
