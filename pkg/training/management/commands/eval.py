from django.core.management.base import BaseCommand, CommandError

from moldata.reports import render_line
from training.cli import load_checkpoint_or_fail, load_dataset_or_fail
from training.services import TrainingService


class Command(BaseCommand):
    help = 'Evaluate a checkpoint on a dataset and print per-task and mean ROC-AUC'

    def add_arguments(self, parser):
        parser.add_argument('checkpoint', help='Checkpoint written by the train command')
        parser.add_argument('--data', required=True, help='CSV/TSV with the tasks the checkpoint was trained on')

    def handle(self, *args, **options):
        checkpoint = load_checkpoint_or_fail(options['checkpoint'])
        dataset = load_dataset_or_fail(options['data'])
        try:
            record = TrainingService.evaluate(checkpoint, dataset)
        except ValueError as exc:
            raise CommandError(str(exc))
        self.stdout.write(render_line(record))
        self.stdout.write(self.style.SUCCESS(f"Mean ROC-AUC {record['auc']:.4f} over {len(dataset)} molecules"))
