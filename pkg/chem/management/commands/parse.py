from django.core.management.base import BaseCommand, CommandError

from chem.canonical import canonical_smiles
from chem.scaffold import murcko_scaffold
from chem.smiles import SmilesParseError, parse_smiles
from moldata.ingest import DatasetFormatError, read_table
from moldata.reports import render_line


class Command(BaseCommand):
    help = 'Parse SMILES and print canonical graph statistics, one JSON line per molecule'

    def add_arguments(self, parser):
        parser.add_argument('smiles', nargs='*', help='SMILES strings to parse')
        parser.add_argument('--data', help='Delimited table with a smiles column')

    def handle(self, *args, **options):
        molecules = list(options['smiles'])
        if options['data']:
            try:
                molecules += read_table(options['data'], require_tasks=False)[0]
            except (DatasetFormatError, OSError) as exc:
                raise CommandError(str(exc))
        if not molecules:
            raise CommandError('Nothing to parse: pass SMILES arguments or --data')

        for text in molecules:
            try:
                graph = parse_smiles(text)
            except SmilesParseError as exc:
                raise CommandError(f"'{text}': {exc}")
            self.stdout.write(render_line({
                'smiles': text,
                'canonical': canonical_smiles(graph),
                'atoms': graph.num_atoms,
                'bonds': graph.num_bonds,
                'rings': graph.num_rings,
                'aromatic_atoms': sum(a.is_aromatic for a in graph.atoms),
                'scaffold': murcko_scaffold(graph),
                'dropped_components': graph.provenance.get('dropped_components', 0),
            }))
        self.stdout.write(self.style.SUCCESS(f'Parsed {len(molecules)} molecules'))
