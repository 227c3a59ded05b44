"""JSON-lines records: per-epoch loss reports and summaries."""
import math
from dataclasses import asdict, dataclass, field

from rest_framework.renderers import JSONRenderer

_renderer = JSONRenderer()


def _finite_or_none(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _finite_or_none(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite_or_none(v) for v in value]
    return value


def render_line(record):
    """One compact JSON document with non-finite floats written as null."""
    return _renderer.render(_finite_or_none(record), renderer_context={"indent": None}).decode("utf-8")


@dataclass
class LossReport:
    epoch: int
    phase: str
    loss_task: float
    loss_margin: float = 0.0
    loss_rec: float = 0.0
    loss_imp: float = 0.0
    loss_total: float = 0.0
    auc: dict = field(default_factory=dict)

    def as_record(self):
        return {"type": "epoch", **asdict(self)}


class JsonLinesWriter:
    """Appends records to ``path``; ``None`` collects them in memory only."""

    def __init__(self, path=None):
        self.path = path
        self.lines = []
        self._handle = open(path, "w", encoding="utf-8") if path else None

    def write(self, record):
        line = render_line(record)
        self.lines.append(line)
        if self._handle:
            self._handle.write(line + "\n")
            self._handle.flush()
        return line

    def close(self):
        if self._handle:
            self._handle.close()
            self._handle = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
