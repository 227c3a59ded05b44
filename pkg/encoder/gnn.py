"""
Message-passing encoders over a batch of molecular graphs.

A batch is the disjoint union of its graphs: node rows are stacked, every
bond contributes two directed edges, and per-graph readouts are segment
reductions over the node rows.
"""
import logging
from dataclasses import dataclass

import numpy as np

from autodiff import tensor as ad
from autodiff.nn import Linear, Module, Parameter
from autodiff.tensor import ContractError, Tensor
from chem.features import ATOM_FEATURE_DIM, BOND_FEATURE_DIM

logger = logging.getLogger(__name__)

VARIANTS = ("gin", "gcn")
READOUTS = ("mean", "sum", "max")


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class EncoderConfig:
    variant: str = "gin"
    num_layers: int = 5
    hidden_dim: int = 300
    readout: str = "mean"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigurationError(f"Unknown encoder variant '{self.variant}', expected one of {VARIANTS}")
        if self.readout not in READOUTS:
            raise ConfigurationError(f"Unknown readout '{self.readout}', expected one of {READOUTS}")
        if self.num_layers < 1:
            raise ConfigurationError(f"num_layers must be >= 1, got {self.num_layers}")
        if self.hidden_dim < 1:
            raise ConfigurationError(f"hidden_dim must be >= 1, got {self.hidden_dim}")


@dataclass
class GraphBatch:
    x: np.ndarray
    edge_src: np.ndarray
    edge_dst: np.ndarray
    edge_attr: np.ndarray
    node_graph: np.ndarray
    offsets: np.ndarray
    sizes: np.ndarray

    @property
    def num_nodes(self):
        return self.x.shape[0]

    @property
    def num_graphs(self):
        return len(self.sizes)

    @property
    def in_degree(self):
        return np.bincount(self.edge_dst, minlength=self.num_nodes)

    @classmethod
    def from_graphs(cls, graphs):
        if not graphs:
            raise ContractError("cannot batch an empty list of graphs")
        xs, src, dst, attrs, owner = [], [], [], [], []
        offset = 0
        offsets = []
        for k, graph in enumerate(graphs):
            if graph.atom_features is None:
                raise ContractError(f"graph '{graph.source_smiles}' has not been featurized")
            offsets.append(offset)
            xs.append(graph.atom_features)
            for bond, feature in zip(graph.bonds, graph.bond_features):
                src += [bond.begin + offset, bond.end + offset]
                dst += [bond.end + offset, bond.begin + offset]
                attrs += [feature, feature]
            owner.append(np.full(graph.num_atoms, k))
            offset += graph.num_atoms
        return cls(
            x=np.concatenate(xs),
            edge_src=np.asarray(src, dtype=np.int64),
            edge_dst=np.asarray(dst, dtype=np.int64),
            edge_attr=np.asarray(attrs, dtype=np.float64).reshape(-1, graphs[0].bond_features.shape[1]),
            node_graph=np.concatenate(owner).astype(np.int64),
            offsets=np.asarray(offsets, dtype=np.int64),
            sizes=np.asarray([g.num_atoms for g in graphs], dtype=np.int64),
        )


def readout_segments(h, segments, num_segments, kind="mean"):
    """Pool rows of ``h`` into ``num_segments`` rows by segment id."""
    segments = np.asarray(segments, dtype=np.int64)
    if kind == "max":
        return ad.segment_max(h, segments, num_segments)
    pooled = ad.scatter_add_rows(h, segments, num_segments)
    if kind == "sum":
        return pooled
    counts = np.bincount(segments, minlength=num_segments).astype(np.float64)
    if (counts == 0).any():
        raise ContractError("mean readout over an empty segment")
    return pooled * Tensor((1.0 / counts)[:, None])


def readout(node_embeddings, kind="mean"):
    """Graph embedding (1×d) of a single graph's node embeddings."""
    return readout_segments(node_embeddings, np.zeros(node_embeddings.shape[0], dtype=np.int64), 1, kind)


def readout_masked(node_embeddings, mask, kind="mean"):
    """Readout over the rows where ``mask`` is 1; the mean divides by their count."""
    mask = np.asarray(mask)
    if mask.shape != (node_embeddings.shape[0],):
        raise ContractError(f"mask of shape {mask.shape} for {node_embeddings.shape[0]} nodes")
    rows = np.flatnonzero(mask)
    if rows.size == 0:
        raise ContractError("masked readout needs at least one selected node")
    return readout(ad.gather_rows(node_embeddings, rows), kind)


class GCNLayer(Module):
    def __init__(self, dim, bond_dim, rng):
        self.linear = Linear(dim, dim, rng)
        self.bond = Linear(bond_dim, dim, rng, bias=False)

    def forward(self, h, batch):
        messages = ad.gather_rows(h, batch.edge_src) + self.bond(Tensor(batch.edge_attr))
        pooled = ad.scatter_add_rows(messages, batch.edge_dst, batch.num_nodes) + h
        scale = Tensor((1.0 / (batch.in_degree + 1.0))[:, None])
        return ad.relu(self.linear(pooled * scale))


class GINLayer(Module):
    def __init__(self, dim, bond_dim, rng):
        self.eps = Parameter(np.zeros((1, 1)))
        self.bond = Linear(bond_dim, dim, rng, bias=False)
        self.hidden = Linear(dim, dim, rng)
        self.output = Linear(dim, dim, rng)

    def forward(self, h, batch):
        messages = ad.gather_rows(h, batch.edge_src) + self.bond(Tensor(batch.edge_attr))
        pooled = ad.scatter_add_rows(messages, batch.edge_dst, batch.num_nodes)
        return self.output(ad.relu(self.hidden(h * (self.eps + 1.0) + pooled)))


class GraphEncoder(Module):
    """Input projection followed by ``num_layers`` GCN or GIN layers."""

    def __init__(self, config, rng, atom_dim=ATOM_FEATURE_DIM, bond_dim=BOND_FEATURE_DIM):
        self.config = config
        self.input = Linear(atom_dim, config.hidden_dim, rng)
        layer = GINLayer if config.variant == "gin" else GCNLayer
        self.layers = [layer(config.hidden_dim, bond_dim, rng) for _ in range(config.num_layers)]

    @property
    def dim(self):
        return self.config.hidden_dim

    def node_embeddings(self, batch):
        if batch.x.shape[1] != self.input.in_features:
            raise ConfigurationError(
                f"atom features have {batch.x.shape[1]} columns, encoder expects {self.input.in_features}"
            )
        if batch.edge_attr.size and batch.edge_attr.shape[1] != self.layers[0].bond.in_features:
            raise ConfigurationError(
                f"bond features have {batch.edge_attr.shape[1]} columns, "
                f"encoder expects {self.layers[0].bond.in_features}"
            )
        h = self.input(Tensor(batch.x))
        last = len(self.layers) - 1
        for i, layer in enumerate(self.layers):
            h = layer(h, batch)
            if self.config.variant == "gin" and i < last:
                h = ad.relu(h)
        return h

    def forward(self, batch):
        """(node embeddings N×d, graph embeddings G×d) for a GraphBatch."""
        h = self.node_embeddings(batch)
        return h, readout_segments(h, batch.node_graph, batch.num_graphs, self.config.readout)

    def encode(self, graph):
        return self.forward(GraphBatch.from_graphs([graph]))
