import logging
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from moldata.checkpoint import save_checkpoint
from moldata.reports import JsonLinesWriter
from training.cli import add_config_arguments, load_dataset_or_fail, resolve_config
from training.serializers import check_summary
from training.services import TrainingService
from training.trainer import TrainingDiverged

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = 'Train ASE-Mol on a dataset and write a checkpoint plus JSON-lines epoch reports'

    def add_arguments(self, parser):
        parser.add_argument('--data', required=True, help='CSV/TSV with a smiles column and 0/1 task columns')
        parser.add_argument('--out', help='Directory for model.ckpt and reports.jsonl')
        parser.add_argument('--checkpoint', help='Checkpoint path (overrides --out)')
        parser.add_argument('--reports', help='Reports path (overrides --out)')
        parser.add_argument(
            '--compare-ablation', action='store_true',
            help='Also train the single-expert baseline (K=1, beta=0, psi=1) and report the AUC difference',
        )
        parser.add_argument(
            '--fresh', action='store_true',
            help='Skip training and write the untrained checkpoint',
        )
        add_config_arguments(parser)

    def _paths(self, options):
        out = Path(options['out']) if options['out'] else None
        if out:
            out.mkdir(parents=True, exist_ok=True)
        checkpoint = options['checkpoint'] or (str(out / 'model.ckpt') if out else None)
        reports = options['reports'] or (str(out / 'reports.jsonl') if out else None)
        return checkpoint, reports

    def handle(self, *args, **options):
        config = resolve_config(options)
        dataset = load_dataset_or_fail(options['data'])
        if len(dataset) == 0:
            raise CommandError(f"{options['data']}: no usable molecules")
        checkpoint_path, reports_path = self._paths(options)

        with JsonLinesWriter(reports_path) as writer:
            writer.write(dataset.summary)
            try:
                if options['fresh']:
                    result, phase = TrainingService.fresh(dataset, config), 'initial'
                elif options['compare_ablation']:
                    result, baseline, comparison = TrainingService.compare_ablation(dataset, config, writer.write)
                    phase = 'prediction'
                else:
                    result, phase = TrainingService.train(dataset, config, writer.write), 'prediction'
            except TrainingDiverged as exc:
                logger.error(f"Training diverged during {exc.phase}: {exc}")
                writer.write(check_summary({
                    'type': 'summary', 'seed': config.seed, 'phase': exc.phase, 'diverged': True,
                    'config': config.as_dict(),
                }))
                if checkpoint_path:
                    model = TrainingService.diverged_model(dataset, config, exc.last_good_state)
                    save_checkpoint(
                        TrainingService.build_checkpoint(model, dataset, phase=f'diverged-{exc.phase}'),
                        checkpoint_path,
                    )
                raise CommandError(f"Training diverged during {exc.phase}: {exc}")

            self.stdout.write(writer.write(result.summary))
            if options['compare_ablation'] and not options['fresh']:
                self.stdout.write(writer.write(baseline.summary))
                self.stdout.write(writer.write(comparison))

        if checkpoint_path:
            checkpoint = TrainingService.build_checkpoint(
                result.model, dataset, result.assignments, phase=phase, split=result.split
            )
            save_checkpoint(checkpoint, checkpoint_path)
        self.stdout.write(self.style.SUCCESS(f'Trained on {len(dataset)} molecules (seed {config.seed})'))
