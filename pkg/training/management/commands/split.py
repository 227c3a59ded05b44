from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from training.cli import add_config_arguments, load_dataset_or_fail, resolve_config
from training.config import Seeds
from training.splits import make_split

NAMES = ('train', 'valid', 'test')


class Command(BaseCommand):
    help = 'Split a dataset into train/valid/test and write one index file per part'

    def add_arguments(self, parser):
        parser.add_argument('--data', required=True, help='CSV/TSV with a smiles column and task columns')
        parser.add_argument('--out', required=True, help='Directory for train.txt, valid.txt and test.txt')
        add_config_arguments(parser)

    def handle(self, *args, **options):
        config = resolve_config(options)
        dataset = load_dataset_or_fail(options['data'])
        if len(dataset) == 0:
            raise CommandError(f"{options['data']}: no usable molecules")
        parts = make_split(
            [r.scaffold for r in dataset.records], config.split, config.split_ratios, Seeds.derive(config.seed).split
        )
        out = Path(options['out'])
        out.mkdir(parents=True, exist_ok=True)
        for name, indices in zip(NAMES, parts):
            rows = [str(dataset.records[i].row) for i in indices]
            (out / f'{name}.txt').write_text(''.join(f'{row}\n' for row in rows), encoding='utf-8')
        sizes = ', '.join(f'{name}={len(p)}' for name, p in zip(NAMES, parts))
        self.stdout.write(self.style.SUCCESS(f'{config.split.capitalize()} split of {len(dataset)} molecules: {sizes}'))
