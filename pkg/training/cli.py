"""Hyper-parameter flags shared by the train, eval and split commands."""
import json

from django.core.management.base import CommandError

from moldata.checkpoint import CheckpointIntegrityError, UnsupportedCheckpointVersion, load_checkpoint
from moldata.ingest import DatasetFormatError

from .serializers import TrainConfigSerializer
from .services import TrainingService

# (flag, config key, type)
CONFIG_FLAGS = (
    ('--seed', 'seed', int),
    ('--encoder', 'encoder', str),
    ('--experts', 'experts', int),
    ('--psi', 'psi', float),
    ('--alpha', 'alpha', float),
    ('--beta', 'beta', float),
    ('--gamma', 'gamma', float),
    ('--tau', 'tau', float),
    ('--margin', 'margin', float),
    ('--patience', 'patience', int),
    ('--batch-size', 'batch_size', int),
    ('--lr', 'learning_rate', float),
    ('--weight-decay', 'weight_decay', float),
    ('--optimizer', 'optimizer', str),
    ('--hidden-dim', 'hidden_dim', int),
    ('--num-layers', 'num_layers', int),
    ('--readout', 'readout', str),
    ('--split', 'split', str),
    ('--epochs-rec', 'epochs_rec', int),
    ('--epochs-total', 'epochs_total', int),
    ('--ablation', 'ablation', str),
)


def add_config_arguments(parser):
    parser.add_argument('--config', help='JSON file of hyper-parameters; flags override it')
    for flag, dest, kind in CONFIG_FLAGS:
        parser.add_argument(flag, dest=dest, type=kind, default=None)
    parser.add_argument(
        '--split-ratios', dest='split_ratios', type=float, nargs=3, default=None,
        metavar=('TRAIN', 'VALID', 'TEST'),
    )


def _one_line(errors):
    if isinstance(errors, dict):
        return '; '.join(f"{key}: {_one_line(value)}" for key, value in errors.items())
    if isinstance(errors, (list, tuple)):
        return ' '.join(_one_line(value) for value in errors)
    return str(errors)


def resolve_config(options):
    """Settings defaults, then the --config file, then explicit flags; validated as one document."""
    values = {}
    if options.get('config'):
        try:
            with open(options['config'], encoding='utf-8') as handle:
                values = json.load(handle)
        except (OSError, json.JSONDecodeError) as exc:
            raise CommandError(f"Cannot read configuration {options['config']}: {exc}")
        if not isinstance(values, dict):
            raise CommandError(f"Configuration {options['config']} must be a JSON object")
    for _, dest, _ in CONFIG_FLAGS:
        if options.get(dest) is not None:
            values[dest] = options[dest]
    if options.get('split_ratios') is not None:
        values['split_ratios'] = list(options['split_ratios'])

    serializer = TrainConfigSerializer(data=values)
    if not serializer.is_valid():
        raise CommandError(f"Invalid configuration: {_one_line(serializer.errors)}")
    return serializer.to_config()


def load_dataset_or_fail(path):
    try:
        return TrainingService.load_dataset(path)
    except (DatasetFormatError, OSError) as exc:
        raise CommandError(str(exc))


def load_checkpoint_or_fail(path):
    try:
        return load_checkpoint(path)
    except UnsupportedCheckpointVersion as exc:
        raise CommandError(f"{path}: {exc}")
    except (CheckpointIntegrityError, OSError) as exc:
        raise CommandError(f"{path}: corrupt checkpoint: {exc}")
