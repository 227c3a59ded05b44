from django.core.management.base import BaseCommand, CommandError

from moldata.reports import JsonLinesWriter
from training.cli import load_checkpoint_or_fail, load_dataset_or_fail
from training.services import TrainingService


class Command(BaseCommand):
    help = 'Export positive and negative routing scores and the chosen expert pair of every molecule'

    def add_arguments(self, parser):
        parser.add_argument('checkpoint', help='Checkpoint written by the train command')
        parser.add_argument('--data', required=True, help='CSV/TSV with the tasks the checkpoint was trained on')
        parser.add_argument('--out', help='Write the records to this file instead of stdout')
        parser.add_argument(
            '--with-embedding', action='store_true', help='Include the graph and motif embeddings H, H_pos, H_neg',
        )

    def handle(self, *args, **options):
        checkpoint = load_checkpoint_or_fail(options['checkpoint'])
        dataset = load_dataset_or_fail(options['data'])
        if list(checkpoint.task_names) != list(dataset.task_names):
            raise CommandError(f"checkpoint tasks {checkpoint.task_names} differ from dataset tasks {dataset.task_names}")
        model = TrainingService.restore(checkpoint)
        assignments = TrainingService.motifs_for(model, checkpoint, dataset)
        outputs = model.evaluate_batches(dataset.records, assignments, model.config.batch_size)

        records = iter(dataset.records)
        with JsonLinesWriter(options['out']) as writer:
            for prediction, h, h_pos, h_neg in outputs:
                pairs = prediction.expert_pairs()
                for k, pair in enumerate(pairs):
                    record = next(records)
                    entry = {
                        'smiles': record.smiles,
                        'row': record.row,
                        'labels': [None if y < 0 else int(y) for y in record.labels],
                        'r_pos': prediction.r_pos.data[k].tolist(),
                        'r_neg': prediction.r_neg.data[k].tolist(),
                        'experts': list(pair),
                    }
                    if options['with_embedding']:
                        entry['h'] = h.data[k].tolist()
                        entry['h_pos'] = h_pos.data[k].tolist()
                        entry['h_neg'] = h_neg.data[k].tolist()
                    line = writer.write(entry)
                    if not options['out']:
                        self.stdout.write(line)
        self.stdout.write(self.style.SUCCESS(f'Exported routing of {len(dataset)} molecules'))
