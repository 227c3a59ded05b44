# training/serializers.py
import logging
import math

from rest_framework import serializers

from .config import GRID, TrainConfig

logger = logging.getLogger(__name__)


class TrainConfigSerializer(serializers.Serializer):
    """Validates a configuration file or flag overrides; every field is optional."""

    seed = serializers.IntegerField(required=False, min_value=0)
    batch_size = serializers.IntegerField(required=False, min_value=1)
    learning_rate = serializers.FloatField(required=False, min_value=0.0)
    weight_decay = serializers.FloatField(required=False, min_value=0.0)
    optimizer = serializers.ChoiceField(choices=['sgd', 'adamw'], required=False)
    encoder = serializers.ChoiceField(choices=['gin', 'gcn'], required=False)
    num_layers = serializers.IntegerField(required=False, min_value=1)
    hidden_dim = serializers.IntegerField(required=False, min_value=1)
    readout = serializers.ChoiceField(choices=['mean', 'sum', 'max'], required=False)
    experts = serializers.IntegerField(required=False, min_value=1)
    alpha = serializers.FloatField(required=False, min_value=0.0)
    beta = serializers.FloatField(required=False, min_value=0.0)
    psi = serializers.FloatField(required=False, min_value=0.0, max_value=1.0)
    margin = serializers.FloatField(required=False)
    patience = serializers.IntegerField(required=False, min_value=1)
    epochs_rec = serializers.IntegerField(required=False, min_value=0)
    epochs_total = serializers.IntegerField(required=False, min_value=1)
    gamma = serializers.FloatField(required=False, min_value=0.0)
    tau = serializers.FloatField(required=False)
    split = serializers.ChoiceField(choices=['scaffold', 'random'], required=False)
    split_ratios = serializers.ListField(
        child=serializers.FloatField(min_value=0.0), min_length=3, max_length=3, required=False
    )
    ablation = serializers.ChoiceField(
        choices=['none', 'no-positive', 'no-negative', 'no-recognition'], required=False
    )

    def validate_psi(self, value):
        if value <= 0:
            raise serializers.ValidationError("psi must be greater than 0")
        return value

    def validate_margin(self, value):
        if value <= 0:
            raise serializers.ValidationError("margin must be greater than 0")
        return value

    def validate_tau(self, value):
        if value <= 0:
            raise serializers.ValidationError("tau must be greater than 0")
        return value

    def validate_split_ratios(self, value):
        if not math.isclose(sum(value), 1.0, abs_tol=1e-9):
            raise serializers.ValidationError(f"split ratios must sum to 1, got {sum(value)}")
        return value

    def validate(self, attrs):
        unknown = sorted(set(self.initial_data) - set(self.fields))
        if unknown:
            raise serializers.ValidationError({key: "Unknown configuration key." for key in unknown})
        for name, value in attrs.items():
            if name in GRID and value not in GRID[name]:
                logger.warning(f"{name}={value} lies outside the search grid {list(GRID[name])}")
        return attrs

    def to_config(self, base=None):
        """Merge the validated values over ``base`` (defaults from settings)."""
        base = base or TrainConfig.defaults()
        return base.updated(**self.validated_data)


class SummarySerializer(serializers.Serializer):
    """Final record of a training run; untrained and diverged runs carry only the head fields."""

    type = serializers.CharField(default='summary')
    seed = serializers.IntegerField()
    phase = serializers.ChoiceField(
        choices=['initial', 'prediction', 'recognition', 'diverged-recognition', 'diverged-prediction']
    )
    best_epoch = serializers.IntegerField(required=False, min_value=0)
    recognition_epochs = serializers.IntegerField(required=False, min_value=0)
    valid_auc = serializers.FloatField(allow_null=True, required=False)
    test_auc = serializers.FloatField(allow_null=True, required=False)
    train_auc = serializers.FloatField(allow_null=True, required=False)
    per_task_test_auc = serializers.ListField(child=serializers.FloatField(allow_null=True), required=False)
    split_sizes = serializers.ListField(child=serializers.IntegerField(min_value=0), required=False)
    diverged = serializers.BooleanField(default=False)
    config = serializers.DictField()


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def check_summary(summary):
    """Validate a summary record before it is reported; returns it unchanged."""
    serializer = SummarySerializer(data={key: _json_safe(value) for key, value in summary.items()})
    serializer.is_valid(raise_exception=True)
    return summary

