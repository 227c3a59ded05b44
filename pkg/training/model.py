"""The full model: encoder, motif-conditioned experts and the recognition head."""
import numpy as np

from autodiff.nn import Module
from autodiff.tensor import no_grad
from encoder.gnn import EncoderConfig, GraphBatch, GraphEncoder
from experts.moe import MixtureOfExperts
from motifs.attribution import PredictionHead, motif_embeddings


class ASEMol(Module):
    def __init__(self, config, num_tasks, seeds):
        self.config = config
        self.num_tasks = num_tasks
        self.encoder = GraphEncoder(
            EncoderConfig(config.encoder, config.num_layers, config.hidden_dim, config.readout),
            np.random.default_rng(seeds.encoder),
        )
        self.head = PredictionHead(config.hidden_dim, num_tasks, np.random.default_rng(seeds.head))
        self.noise_rng = np.random.default_rng(seeds.noise)
        self.moe = MixtureOfExperts(
            config.hidden_dim,
            num_tasks,
            config.experts,
            np.random.default_rng(seeds.experts),
            temperature=config.tau,
            noise_rng=self.noise_rng,
            ablation=config.ablation,
        )

    def recognition_parameters(self):
        return self.encoder.parameters() + self.head.parameters()

    def prediction_parameters(self):
        return self.encoder.parameters() + self.moe.parameters()

    def forward(self, batch, assignments):
        """(MoEPrediction, H, H^pos, H^neg) for a batch with frozen motif assignments."""
        h_v, h = self.encoder(batch)
        h_pos, h_neg = motif_embeddings(h_v, batch, assignments, self.config.readout)
        return self.moe(h_pos, h_neg), h, h_pos, h_neg

    def evaluate_batches(self, records, assignments, batch_size=256):
        """Forward outputs per batch, computed with noise off and no tape."""
        was_training = self.training
        self.eval()
        outputs = []
        try:
            with no_grad():
                for start in range(0, len(records), batch_size):
                    members = records[start:start + batch_size]
                    batch = GraphBatch.from_graphs([r.graph for r in members])
                    outputs.append(self(batch, assignments[start:start + batch_size]))
        finally:
            self.train(was_training)
        return outputs

    def predict(self, records, assignments, batch_size=256):
        chunks = [prediction.logits.data for prediction, *_ in self.evaluate_batches(records, assignments, batch_size)]
        return np.concatenate(chunks) if chunks else np.zeros((0, self.num_tasks))

    def recognizer_logits(self, records, batch_size=256):
        with no_grad():
            chunks = [
                self.head(self.encoder(GraphBatch.from_graphs([r.graph for r in records[i:i + batch_size]]))[1]).data
                for i in range(0, len(records), batch_size)
            ]
        return np.concatenate(chunks) if chunks else np.zeros((0, self.num_tasks))

