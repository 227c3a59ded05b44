import hashlib
import logging

import numpy as np

from moldata.checkpoint import Checkpoint
from moldata.ingest import ingest
from motifs.attribution import MotifAssignment
from motifs.recognition import assign_motifs

from .config import Seeds, TrainConfig
from .metrics import per_task_auc, roc_auc
from .model import ASEMol
from .serializers import check_summary
from .trainer import Trainer, TrainingResult

logger = logging.getLogger(__name__)


def dataset_digest(dataset):
    joined = "\n".join(r.smiles for r in dataset.records)
    return hashlib.sha256(joined.encode("utf-8")).hexdigest()


def _tagged(on_report, run):
    if on_report is None:
        return None
    return lambda record: on_report({**record, "run": run})


class TrainingService:

    @staticmethod
    def load_dataset(path):
        """
        Ingest a dataset file; rows that cannot be used are dropped and counted
        """
        return ingest(path)

    @staticmethod
    def train(dataset, config, on_report=None):
        return Trainer(dataset, config, on_report).fit()

    @staticmethod
    def compare_ablation(dataset, config, on_report=None):
        """
        Train the configured model and the single-expert baseline (K=1, beta=0, psi=1) on one seed.
        Epoch records and summaries carry ``run``: ``main`` or ``baseline``.
        """
        main = Trainer(dataset, config, _tagged(on_report, "main")).fit()
        baseline_config = config.updated(experts=1, beta=0.0, psi=1.0)
        baseline = Trainer(dataset, baseline_config, _tagged(on_report, "baseline")).fit()
        main.summary["run"] = "main"
        baseline.summary["run"] = "baseline"

        comparison = {
            "type": "comparison",
            "seed": config.seed,
            "test_auc": main.summary["test_auc"],
            "baseline_test_auc": baseline.summary["test_auc"],
            "auc_difference": main.summary["test_auc"] - baseline.summary["test_auc"],
        }
        return main, baseline, comparison

    @staticmethod
    def fresh(dataset, config):
        """
        An untrained model with motifs from the untrained recognizer; the baseline for eval
        """
        trainer = Trainer(dataset, config)
        split = trainer.split()
        model = trainer.build_model()
        assignments = assign_motifs(dataset.records, model.encoder, model.head, config.psi, split[0], config.batch_size)
        summary = {"type": "summary", "seed": config.seed, "phase": "initial", "config": config.as_dict()}
        return TrainingResult(model, assignments, split, [], check_summary(summary))

    @staticmethod
    def diverged_model(dataset, config, state):
        model = ASEMol(config, dataset.num_tasks, Seeds.derive(config.seed))
        model.load_state_dict(state)
        return model

    @staticmethod
    def build_checkpoint(model, dataset, assignments=None, phase="prediction", split=None):
        metadata = {"dataset_digest": dataset_digest(dataset), "num_records": len(dataset)}
        if split is not None:
            metadata["split"] = [[int(i) for i in part] for part in split]
        return Checkpoint(
            config=model.config.as_dict(),
            phase=phase,
            task_names=list(dataset.task_names),
            parameters=model.state_dict(),
            rng_state=model.noise_rng.bit_generator.state,
            motifs=[a.as_record() for a in assignments] if assignments is not None else None,
            metadata=metadata,
        )

    @staticmethod
    def restore(checkpoint):
        config = TrainConfig.from_dict(checkpoint.config)
        model = ASEMol(config, len(checkpoint.task_names), Seeds.derive(config.seed))
        model.load_state_dict(checkpoint.parameters)
        if checkpoint.rng_state:
            model.noise_rng.bit_generator.state = checkpoint.rng_state
        return model

    @staticmethod
    def train_indices(checkpoint, dataset):
        split = checkpoint.metadata.get("split")
        if split and checkpoint.metadata.get("dataset_digest") == dataset_digest(dataset):
            return split[0]
        return []

    @staticmethod
    def motifs_for(model, checkpoint, dataset):
        """
        Stored motifs when the checkpoint was trained on this very dataset,
        otherwise motifs inferred from the recognizer's own predictions
        """
        stored = checkpoint.motifs
        if stored is not None and checkpoint.metadata.get("dataset_digest") == dataset_digest(dataset):
            return [MotifAssignment.from_record(m) for m in stored]
        logger.info("Checkpoint motifs do not belong to this dataset; recognising motifs without labels")
        return assign_motifs(
            dataset.records, model.encoder, model.head, model.config.psi, [], model.config.batch_size
        )

    @staticmethod
    def evaluate(checkpoint, dataset):
        if list(checkpoint.task_names) != list(dataset.task_names):
            raise ValueError(f"checkpoint tasks {checkpoint.task_names} differ from dataset tasks {dataset.task_names}")
        model = TrainingService.restore(checkpoint)
        assignments = TrainingService.motifs_for(model, checkpoint, dataset)
        logits = model.predict(dataset.records, assignments, model.config.batch_size)
        labels = dataset.labels
        record = {
            "type": "evaluation",
            "molecules": len(dataset),
            "auc": roc_auc(logits, labels, dataset.task_names),
            "per_task_auc": dict(zip(dataset.task_names, per_task_auc(logits, labels, dataset.task_names))),
        }
        split = checkpoint.metadata.get("split")
        if split and checkpoint.metadata.get("dataset_digest") == dataset_digest(dataset):
            test = np.asarray(split[2], dtype=np.int64)
            record["test_auc"] = roc_auc(logits[test], labels[test]) if test.size else float("nan")
        return record
