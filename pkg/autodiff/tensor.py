"""
Reverse-mode automatic differentiation over dense float64 arrays.

Every differentiable operation records its inputs and a local gradient
rule on the active ``Tape``. ``backward`` replays the tape once, in
reverse recording order, and accumulates gradients into ``Tensor.grad``.
"""
import logging
import threading
from contextlib import contextmanager

import numpy as np

logger = logging.getLogger(__name__)


class ShapeError(ValueError):
    """Operand shapes are incompatible for the requested operation."""


class GatherIndexError(IndexError):
    """A row index passed to gather/scatter is out of bounds."""


class ContractError(RuntimeError):
    """A caller broke an operation's precondition."""


class Tensor:
    """An n-dimensional float64 array with gradient bookkeeping."""

    def __init__(self, data, requires_grad=False):
        self.data = np.array(data, dtype=np.float64)
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self._tape = None
        self._record = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def size(self):
        return self.data.size

    @property
    def ndim(self):
        return self.data.ndim

    def item(self):
        if self.data.size != 1:
            raise ContractError(f"item() needs a single element, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def numpy(self):
        return self.data.copy()

    def __repr__(self):
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def sum(self, axis=None, keepdims=False):
        return sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return mean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    @property
    def T(self):
        return transpose(self)


class _Record:
    __slots__ = ("output", "inputs", "backward")

    def __init__(self, output, inputs, backward):
        self.output = output
        self.inputs = inputs
        self.backward = backward


class Tape:
    """Ordered list of recorded operations; confined to one thread."""

    def __init__(self):
        self.records = []

    def __len__(self):
        return len(self.records)

    def __enter__(self):
        _stack().append(self)
        return self

    def __exit__(self, exc_type, exc, tb):
        _stack().pop()
        return False

    def record(self, output, inputs, backward):
        output._tape = self
        output._record = len(self.records)
        self.records.append(_Record(output, inputs, backward))

    def reset(self):
        for rec in self.records:
            rec.output._tape = None
            rec.output._record = None
        self.records = []

    def backward(self, loss):
        if loss.size != 1:
            raise ContractError(f"backward() needs a scalar loss, got shape {loss.shape}")
        if not self.records or loss._tape is not self:
            raise ContractError("loss was not recorded on this tape (tape is empty)")

        # Intermediate gradients belong to this pass only; leaves accumulate.
        for rec in self.records:
            rec.output.grad = None
        loss.grad = np.ones_like(loss.data)

        for rec in reversed(self.records[: loss._record + 1]):
            upstream = rec.output.grad
            if upstream is None:
                continue
            for tensor, grad in zip(rec.inputs, rec.backward(upstream)):
                if grad is None or not tensor.requires_grad:
                    continue
                grad = np.asarray(grad, dtype=np.float64).reshape(tensor.shape)
                if tensor.grad is None:
                    tensor.grad = grad.copy()
                else:
                    tensor.grad = tensor.grad + grad


_local = threading.local()
_NO_GRAD = object()


def _stack():
    if not hasattr(_local, "stack"):
        _local.stack = []
    return _local.stack


def current_tape():
    """The tape new operations record onto; None outside a ``Tape`` or inside ``no_grad``."""
    stack = _stack()
    if not stack:
        return None
    top = stack[-1]
    return None if top is _NO_GRAD else top


@contextmanager
def no_grad():
    stack = _stack()
    stack.append(_NO_GRAD)
    try:
        yield
    finally:
        stack.pop()


def backward(loss):
    """Populate ``grad`` on every requires_grad tensor reachable from ``loss``."""
    if not isinstance(loss, Tensor) or loss._tape is None:
        raise ContractError("loss has no recorded operations (tape is empty)")
    loss._tape.backward(loss)


def _wrap(value):
    return value if isinstance(value, Tensor) else Tensor(value)


def _make(data, inputs, backward_rule):
    requires_grad = any(t.requires_grad for t in inputs)
    tape = current_tape() if requires_grad else None
    out = Tensor(data, requires_grad=tape is not None)
    if tape is not None:
        tape.record(out, inputs, backward_rule)
    return out


def _broadcast_shape(op, a, b):
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"{op}: incompatible shapes {a.shape} and {b.shape}") from None


def _unbroadcast(grad, shape):
    """Sum ``grad`` over the axes that broadcasting expanded to reach it."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


# Elementwise arithmetic

def add(a, b):
    a, b = _wrap(a), _wrap(b)
    _broadcast_shape("add", a, b)

    def rule(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return _make(a.data + b.data, (a, b), rule)


def sub(a, b):
    a, b = _wrap(a), _wrap(b)
    _broadcast_shape("sub", a, b)

    def rule(g):
        return _unbroadcast(g, a.shape), -_unbroadcast(g, b.shape)

    return _make(a.data - b.data, (a, b), rule)


def mul(a, b):
    a, b = _wrap(a), _wrap(b)
    _broadcast_shape("mul", a, b)

    def rule(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return _make(a.data * b.data, (a, b), rule)


def div(a, b):
    a, b = _wrap(a), _wrap(b)
    _broadcast_shape("div", a, b)

    def rule(g):
        return (
            _unbroadcast(g / b.data, a.shape),
            _unbroadcast(-g * a.data / (b.data * b.data), b.shape),
        )

    return _make(a.data / b.data, (a, b), rule)


def neg(x):
    x = _wrap(x)
    return _make(-x.data, (x,), lambda g: (-g,))


def broadcast_row(x, rows):
    """Repeat a length-n vector (or 1×n matrix) into a rows×n matrix."""
    x = _wrap(x)
    if x.ndim == 0 or x.ndim > 2 or (x.ndim == 2 and x.shape[0] != 1):
        raise ShapeError(f"broadcast_row: expected a row vector, got shape {x.shape}")
    width = x.shape[-1]

    def rule(g):
        return (g.sum(axis=0).reshape(x.shape),)

    return _make(np.broadcast_to(x.data.reshape(1, width), (rows, width)).copy(), (x,), rule)


# Linear algebra and shape

def matmul(a, b):
    a, b = _wrap(a), _wrap(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: incompatible shapes {a.shape} and {b.shape}")

    def rule(g):
        return g @ b.data.T, a.data.T @ g

    return _make(a.data @ b.data, (a, b), rule)


def reshape(x, shape):
    x = _wrap(x)
    try:
        out = x.data.reshape(shape)
    except ValueError:
        raise ShapeError(f"reshape: cannot view shape {x.shape} as {tuple(shape)}") from None
    return _make(out, (x,), lambda g: (g.reshape(x.shape),))


def transpose(x):
    x = _wrap(x)
    if x.ndim != 2:
        raise ShapeError(f"transpose: expected a matrix, got shape {x.shape}")
    return _make(x.data.T, (x,), lambda g: (g.T,))


def concat(tensors, axis=0):
    tensors = [_wrap(t) for t in tensors]
    try:
        out = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError:
        shapes = " and ".join(str(t.shape) for t in tensors)
        raise ShapeError(f"concat: incompatible shapes {shapes}") from None
    cuts = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def rule(g):
        return tuple(np.split(g, cuts, axis=axis))

    return _make(out, tuple(tensors), rule)


# Nonlinearities

def _stable_sigmoid(x):
    e = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def sigmoid(x):
    x = _wrap(x)
    s = _stable_sigmoid(x.data)
    return _make(s, (x,), lambda g: (g * s * (1.0 - s),))


def relu(x):
    """max(x, 0); the subgradient at exactly 0 is 0."""
    x = _wrap(x)
    active = (x.data > 0).astype(np.float64)
    return _make(x.data * active, (x,), lambda g: (g * active,))


maximum_zero = relu


def exp(x):
    x = _wrap(x)
    out = np.exp(x.data)
    return _make(out, (x,), lambda g: (g * out,))


def log(x):
    x = _wrap(x)
    return _make(np.log(x.data), (x,), lambda g: (g / x.data,))


def softplus(x):
    """log(1 + exp(x)), computed without overflow."""
    x = _wrap(x)
    return _make(np.logaddexp(0.0, x.data), (x,), lambda g: (g * _stable_sigmoid(x.data),))


def softmax(x, axis=-1):
    x = _wrap(x)
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    s = e / e.sum(axis=axis, keepdims=True)

    def rule(g):
        return (s * (g - (g * s).sum(axis=axis, keepdims=True)),)

    return _make(s, (x,), rule)


# Reductions

def _expand_reduced(g, shape, axis, keepdims):
    if axis is None:
        return np.broadcast_to(np.reshape(g, (1,) * len(shape)), shape)
    if not keepdims:
        g = np.expand_dims(g, axis)
    return np.broadcast_to(g, shape)


def sum(x, axis=None, keepdims=False):
    x = _wrap(x)
    out = x.data.sum(axis=axis, keepdims=keepdims)

    def rule(g):
        return (_expand_reduced(g, x.shape, axis, keepdims),)

    return _make(out, (x,), rule)


def mean(x, axis=None, keepdims=False):
    x = _wrap(x)
    count = x.data.size if axis is None else np.prod([x.shape[a] for a in np.atleast_1d(axis)])
    out = x.data.mean(axis=axis, keepdims=keepdims)

    def rule(g):
        return (_expand_reduced(g, x.shape, axis, keepdims) / count,)

    return _make(out, (x,), rule)


# Row indexing

def _check_rows(op, indices, bound):
    indices = np.asarray(indices, dtype=np.int64).reshape(-1)
    if indices.size and (indices.min() < 0 or indices.max() >= bound):
        raise GatherIndexError(f"{op}: row index out of bounds for {bound} rows")
    return indices


def gather_rows(x, indices):
    x = _wrap(x)
    indices = _check_rows("gather_rows", indices, x.shape[0])

    def rule(g):
        full = np.zeros_like(x.data)
        np.add.at(full, indices, g)
        return (full,)

    return _make(x.data[indices], (x,), rule)


def scatter_add_rows(x, indices, num_rows):
    """out[indices[i]] += x[i]; rows never addressed stay zero."""
    x = _wrap(x)
    indices = _check_rows("scatter_add_rows", indices, num_rows)
    if indices.size != x.shape[0]:
        raise ShapeError(f"scatter_add_rows: {indices.size} indices for shape {x.shape}")
    out = np.zeros((num_rows,) + x.shape[1:])
    np.add.at(out, indices, x.data)
    return _make(out, (x,), lambda g: (g[indices],))


def segment_max(x, segments, num_segments):
    """Column-wise maximum of the rows of ``x`` sharing a segment id."""
    x = _wrap(x)
    segments = _check_rows("segment_max", segments, num_segments)
    if segments.size != x.shape[0]:
        raise ShapeError(f"segment_max: {segments.size} segment ids for shape {x.shape}")
    if np.unique(segments).size != num_segments:
        raise ContractError("segment_max: every segment needs at least one row")
    out = np.full((num_segments, x.shape[1]), -np.inf)
    np.maximum.at(out, segments, x.data)

    # the gradient goes to the first row reaching the maximum
    winner = np.full(out.shape, -1, dtype=np.int64)
    for row, seg in enumerate(segments):
        hit = (x.data[row] == out[seg]) & (winner[seg] < 0)
        winner[seg, hit] = row

    def rule(g):
        full = np.zeros_like(x.data)
        cols = np.broadcast_to(np.arange(x.shape[1]), winner.shape)
        np.add.at(full, (winner.reshape(-1), cols.reshape(-1)), g.reshape(-1))
        return (full,)

    return _make(out, (x,), rule)


def stop_gradient(x):
    """Same value as ``x``; no gradient flows back through the result."""
    x = _wrap(x)
    return Tensor(x.data.copy(), requires_grad=False)
