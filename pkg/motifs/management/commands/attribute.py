from django.core.management.base import BaseCommand, CommandError

from moldata.reports import JsonLinesWriter
from motifs.recognition import attribution_scores
from training.cli import load_checkpoint_or_fail, load_dataset_or_fail
from training.services import TrainingService


class Command(BaseCommand):
    help = 'Export per-fragment attributions and the selected motifs of every molecule'

    def add_arguments(self, parser):
        parser.add_argument('checkpoint', help='Checkpoint written by the train command')
        parser.add_argument('--data', required=True, help='CSV/TSV with the tasks the checkpoint was trained on')
        parser.add_argument('--out', help='Write the records to this file instead of stdout')

    def handle(self, *args, **options):
        checkpoint = load_checkpoint_or_fail(options['checkpoint'])
        dataset = load_dataset_or_fail(options['data'])
        if list(checkpoint.task_names) != list(dataset.task_names):
            raise CommandError(f"checkpoint tasks {checkpoint.task_names} differ from dataset tasks {dataset.task_names}")
        model = TrainingService.restore(checkpoint)
        assignments = TrainingService.motifs_for(model, checkpoint, dataset)
        scores = attribution_scores(
            dataset.records, model.encoder, model.head,
            TrainingService.train_indices(checkpoint, dataset), model.config.batch_size,
        )

        with JsonLinesWriter(options['out']) as writer:
            for record, assignment, fragment_scores in zip(dataset.records, assignments, scores):
                fragments = []
                for j, fragment in enumerate(record.fragments):
                    score = fragment_scores[j] if fragment_scores else None
                    fragments.append({
                        'atoms': list(fragment.node_indices),
                        'attribution': score.aggregate if score else None,
                        'per_task': score.per_task.tolist() if score else None,
                        'category': assignment.category(j),
                    })
                line = writer.write({
                    'smiles': record.smiles,
                    'row': record.row,
                    'fragments': fragments,
                    'positive_nodes': list(assignment.positive_nodes),
                    'negative_nodes': list(assignment.negative_nodes),
                    'degenerate': assignment.degenerate,
                })
                if not options['out']:
                    self.stdout.write(line)
        self.stdout.write(self.style.SUCCESS(f'Attributed {len(dataset)} molecules'))
