"""
Motif-conditioned mixture of experts.

The positive bank reads the positive motif embedding and is routed by it;
the negative bank reads the negative motif embedding and is routed by the
joint [positive, negative] projection. A linear combiner maps the two
T-wide logit streams to the final task logits.
"""
import logging
from dataclasses import dataclass

import numpy as np

from autodiff import tensor as ad
from autodiff.nn import Linear, Module, Parameter, glorot_uniform
from autodiff.tensor import ContractError, Tensor
from encoder.gnn import ConfigurationError

logger = logging.getLogger(__name__)

POSITIVE = "positive"
NEGATIVE = "negative"
ABLATIONS = ("none", "no-positive", "no-negative", "no-recognition")


class ExpertBank(Module):
    """K linear experts, each mapping a d-vector to T task logits."""

    def __init__(self, kind, num_experts, dim, num_tasks, rng):
        if num_experts < 1:
            raise ConfigurationError(f"an expert bank needs at least one expert, got {num_experts}")
        self.kind = kind
        self.dim = dim
        self.weights = [Parameter(glorot_uniform(rng, dim, num_tasks)) for _ in range(num_experts)]

    @property
    def num_experts(self):
        return len(self.weights)

    def forward(self, h_sub):
        if h_sub.ndim != 2 or h_sub.shape[1] != self.dim:
            raise ConfigurationError(f"{self.kind} experts expect width {self.dim}, got shape {h_sub.shape}")
        return [ad.matmul(h_sub, w) for w in self.weights]


class Router(Module):
    """Softmax gate over K experts with temperature and training-time noise."""

    def __init__(self, kind, num_experts, dim, rng, temperature=0.1, noise_rng=None, noise_scale=None):
        self.kind = kind
        self.num_experts = num_experts
        self.temperature = temperature
        self.noise_scale = 1.0 / num_experts if noise_scale is None else noise_scale
        self.noise_rng = noise_rng
        self.projection = Linear(dim, dim, rng)
        width = dim if kind == POSITIVE else 2 * dim
        self.routing = Parameter(glorot_uniform(rng, width, num_experts, shape=(num_experts, width)))

    def embedding(self, h_pos, h_neg=None):
        if self.kind == POSITIVE:
            return self.projection(h_pos)
        return ad.concat([self.projection(h_pos), self.projection(h_neg)], axis=1)

    def logits(self, z):
        out = ad.matmul(z, ad.transpose(self.routing)) / self.temperature
        if self.training and self.noise_rng is not None and self.noise_scale > 0:
            out = out + Tensor(self.noise_rng.normal(0.0, self.noise_scale, size=out.shape))
        return out

    def forward(self, h_pos, h_neg=None):
        return ad.softmax(self.logits(self.embedding(h_pos, h_neg)), axis=1)


def combine(scores, expert_outputs):
    """sum_k r[:, k] * E_k for a batch of routing rows."""
    num_experts = len(expert_outputs)
    out = None
    for k, e in enumerate(expert_outputs):
        pick = np.zeros((num_experts, 1))
        pick[k, 0] = 1.0
        term = ad.matmul(scores, Tensor(pick)) * e
        out = term if out is None else out + term
    return out


@dataclass
class MoEPrediction:
    o_pos: Tensor
    o_neg: Tensor
    logits: Tensor
    r_pos: Tensor
    r_neg: Tensor
    routings: tuple

    def expert_pairs(self):
        return list(zip(self.r_pos.data.argmax(axis=1).tolist(), self.r_neg.data.argmax(axis=1).tolist()))


class MixtureOfExperts(Module):
    def __init__(self, dim, num_tasks, num_experts, rng, temperature=0.1, noise_rng=None, ablation="none"):
        if ablation not in ABLATIONS:
            raise ConfigurationError(f"Unknown ablation '{ablation}', expected one of {ABLATIONS}")
        self.ablation = ablation
        self.num_tasks = num_tasks
        self.positive_experts = ExpertBank(POSITIVE, num_experts, dim, num_tasks, rng)
        self.negative_experts = ExpertBank(NEGATIVE, num_experts, dim, num_tasks, rng)
        self.positive_router = Router(POSITIVE, num_experts, dim, rng, temperature, noise_rng)
        self.negative_router = Router(NEGATIVE, num_experts, dim, rng, temperature, noise_rng)
        self.combiner = Linear(2 * num_tasks, num_tasks, rng)
        self.combiner.weight.data = 0.5 * np.vstack([np.eye(num_tasks), np.eye(num_tasks)])

    def forward(self, h_pos, h_neg):
        r_pos = self.positive_router(h_pos)
        r_neg = self.negative_router(h_pos, h_neg)
        o_pos = combine(r_pos, self.positive_experts(h_pos))
        o_neg = combine(r_neg, self.negative_experts(h_neg))
        routings = []
        if self.ablation == "no-positive":
            o_pos = o_pos * 0.0
        else:
            routings.append(r_pos)
        if self.ablation == "no-negative":
            o_neg = o_neg * 0.0
        else:
            routings.append(r_neg)
        logits = self.combiner(ad.concat([o_pos, o_neg], axis=1))
        return MoEPrediction(o_pos, o_neg, logits, r_pos, r_neg, tuple(routings))


def coefficient_of_variation_squared(scores):
    """(population std / mean)^2 of the per-expert importance sum(scores, axis=0)."""
    importance = ad.sum(scores, axis=0)
    mean = ad.mean(importance)
    if mean.item() <= 0:
        raise ContractError("expert importance must be positive")
    centred = importance - mean
    return ad.mean(centred * centred) / (mean * mean)


def importance_loss(routings, gamma=0.1):
    """Summed per-bank cv^2; a bank below ``gamma`` contributes its value without gradient."""
    total = Tensor(0.0)
    for scores in routings:
        cv2 = coefficient_of_variation_squared(scores)
        if cv2.item() < gamma:
            cv2 = ad.stop_gradient(cv2)
        total = total + cv2
    return total


def total_loss(loss_task, loss_imp, beta):
    return loss_task + loss_imp * beta
