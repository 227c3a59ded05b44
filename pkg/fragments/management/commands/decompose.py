from django.core.management.base import BaseCommand, CommandError

from chem.features import featurize
from chem.smiles import SmilesParseError, parse_smiles
from fragments.brics import brics_decompose
from moldata.ingest import DatasetFormatError, read_table
from moldata.reports import JsonLinesWriter


class Command(BaseCommand):
    help = 'Split molecules into BRICS fragments, one JSON line per molecule'

    def add_arguments(self, parser):
        parser.add_argument('smiles', nargs='*', help='SMILES strings to decompose')
        parser.add_argument('--data', help='Delimited table with a smiles column')
        parser.add_argument('--out', help='Write the records to this file instead of stdout')
        parser.add_argument('--summary', action='store_true', help='Append the average fragment count')

    def handle(self, *args, **options):
        molecules = list(options['smiles'])
        if options['data']:
            try:
                molecules += read_table(options['data'], require_tasks=False)[0]
            except (DatasetFormatError, OSError) as exc:
                raise CommandError(str(exc))
        if not molecules:
            raise CommandError('Nothing to decompose: pass SMILES arguments or --data')

        counts = []
        with JsonLinesWriter(options['out']) as writer:
            for text in molecules:
                try:
                    graph = featurize(parse_smiles(text))
                except SmilesParseError as exc:
                    raise CommandError(f"'{text}': {exc}")
                fragments = brics_decompose(graph)
                counts.append(len(fragments))
                line = writer.write({
                    'smiles': text,
                    'fragments': len(fragments),
                    'atoms': [list(f.node_indices) for f in fragments],
                    'rules': [list(f.rule_ids) for f in fragments],
                })
                if not options['out']:
                    self.stdout.write(line)

            if options['summary']:
                line = writer.write({
                    'type': 'summary',
                    'molecules': len(counts),
                    'avg_fragments': sum(counts) / len(counts),
                    'max_fragments': max(counts),
                })
                if not options['out']:
                    self.stdout.write(line)

        self.stdout.write(self.style.SUCCESS(f'Decomposed {len(counts)} molecules'))
