"""
Dense tensors with reverse-mode automatic differentiation.

Every differentiable op appends one record to a Graph. Records are kept in
append order, which is a valid topological order, so backward simply walks
the list in reverse. Tapes started from different leaves merge the first
time an op combines them. Sampled noise and inputs are leaves with
requires_grad=False; parameters are leaves with requires_grad=True.

Broadcasting is limited to scalar-with-tensor and equal shapes. Anything
else goes through an explicit op (expand_rows).
"""
import threading
from contextlib import contextmanager
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import special

from advdrop.core.config import settings
from advdrop.core.exceptions import (
    ContractError,
    DimensionError,
    DomainError,
    LabelRangeError,
)

ArrayLike = Union[np.ndarray, float, int, Sequence]

_state = threading.local()


def default_dtype() -> np.dtype:
    return np.dtype(getattr(_state, "dtype", None) or settings.DEFAULT_DTYPE)


def grad_enabled() -> bool:
    return getattr(_state, "grad_enabled", True)


@contextmanager
def no_grad():
    """Disable graph recording on this thread."""
    previous = grad_enabled()
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = previous


@contextmanager
def precision(dtype: str):
    """Temporarily change the dtype used for new tensors on this thread."""
    previous = getattr(_state, "dtype", None)
    _state.dtype = np.dtype(dtype).name
    try:
        yield
    finally:
        _state.dtype = previous


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


class Tensor:
    """A dense array that may participate in a Graph."""

    def __init__(
        self,
        data: ArrayLike,
        requires_grad: bool = False,
        dtype: Optional[Union[str, np.dtype]] = None,
        name: Optional[str] = None,
    ):
        self.data = _frozen(np.array(data, dtype=dtype or default_dtype(), copy=True))
        self.requires_grad = requires_grad
        self.name = name
        self.grad: Optional[np.ndarray] = np.zeros_like(self.data) if requires_grad else None
        self._graph: Optional["Graph"] = None
        self._node: Optional["Node"] = None

    @classmethod
    def _from_op(cls, data: np.ndarray) -> "Tensor":
        t = cls.__new__(cls)
        t.data = _frozen(np.asarray(data))
        t.requires_grad = False
        t.name = None
        t.grad = None
        t._graph = None
        t._node = None
        return t

    # Introspection
    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def is_leaf(self) -> bool:
        return self._node is None

    def numpy(self) -> np.ndarray:
        return np.array(self.data, copy=True)

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self) -> None:
        if self.requires_grad:
            self.grad = np.zeros_like(self.data)

    def backward(self) -> None:
        backward(self)

    def __repr__(self) -> str:
        tag = f", name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad}{tag})"

    # Operators
    def __add__(self, other): return add(self, other)
    def __radd__(self, other): return add(other, self)
    def __sub__(self, other): return add(self, neg(other) if isinstance(other, Tensor) else -np.asarray(other))
    def __rsub__(self, other): return add(other, neg(self))
    def __mul__(self, other): return mul(self, other)
    def __rmul__(self, other): return mul(other, self)
    def __neg__(self): return neg(self)
    def __matmul__(self, other): return matmul(self, other)

    def __truediv__(self, other):
        if isinstance(other, Tensor):
            raise ContractError("Division is only supported by constants", details={"shape": list(other.shape)})
        return mul(self, 1.0 / float(other))

    @property
    def T(self) -> "Tensor":
        return transpose(self)


class Parameter(Tensor):
    """
    Trainable leaf.

    keep_mask, when set, marks entries that are frozen at zero: the
    optimizer zeroes their gradient and velocity and never updates them.
    """

    def __init__(self, data: ArrayLike, name: Optional[str] = None, dtype=None):
        super().__init__(data, requires_grad=True, dtype=dtype, name=name)
        self.keep_mask: Optional[np.ndarray] = None

    def assign(self, value: ArrayLike) -> None:
        """Replace the stored values; shape must be unchanged."""
        value = np.array(value, dtype=self.data.dtype, copy=True)
        if value.shape != self.data.shape:
            raise DimensionError(
                f"Cannot assign shape {value.shape} to parameter {self.name} of shape {self.data.shape}"
            )
        if self.keep_mask is not None:
            value = value * self.keep_mask
        self.data = _frozen(value)

    def set_keep_mask(self, mask: Optional[np.ndarray]) -> None:
        if mask is not None:
            mask = np.asarray(mask, dtype=bool)
            if mask.shape != self.data.shape:
                raise DimensionError(f"Mask shape {mask.shape} does not match {self.data.shape}")
        self.keep_mask = mask
        if mask is not None:
            self.data = _frozen(self.data * mask)


def as_tensor(value: Union[Tensor, ArrayLike]) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


class Node:
    """One recorded op: output = op(inputs)."""

    __slots__ = ("index", "op", "inputs", "output", "backward_fn")

    def __init__(self, index: int, op: str, inputs: List[Tensor], output: Tensor,
                 backward_fn: Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]):
        self.index = index
        self.op = op
        self.inputs = inputs
        self.output = output
        self.backward_fn = backward_fn


class Graph:
    """Append-only tape of op records."""

    def __init__(self):
        self.nodes: List[Node] = []
        self.visit_counts: List[int] = []

    def __len__(self) -> int:
        return len(self.nodes)

    def absorb(self, other: "Graph") -> None:
        """Append another tape; two tapes meeting for the first time share no records."""
        for node in other.nodes:
            node.index = len(self.nodes)
            self.nodes.append(node)
            node.output._graph = self
        other.nodes = []

    def record(self, op: str, inputs: List[Tensor], output: Tensor, backward_fn) -> Node:
        node = Node(len(self.nodes), op, inputs, output, backward_fn)
        self.nodes.append(node)
        output._graph = self
        output._node = node
        output.requires_grad = True
        return node

    def backward(self, loss: Tensor) -> None:
        pending = {id(loss): np.ones_like(loss.data)}
        self.visit_counts = [0] * len(self.nodes)
        for node in reversed(self.nodes):
            self.visit_counts[node.index] += 1
            upstream = pending.pop(id(node.output), None)
            if upstream is None:
                continue
            for tensor, g in zip(node.inputs, node.backward_fn(upstream)):
                if g is None or not tensor.requires_grad:
                    continue
                if tensor.is_leaf:
                    tensor.grad = tensor.grad + g if tensor.grad is not None else np.array(g)
                else:
                    key = id(tensor)
                    pending[key] = pending[key] + g if key in pending else g


def _recording_graph(inputs: Sequence[Tensor]) -> Optional[Graph]:
    if not grad_enabled() or not any(t.requires_grad for t in inputs):
        return None
    graphs = {id(t._graph): t._graph for t in inputs if t._graph is not None}
    graphs = sorted(graphs.values(), key=len, reverse=True)
    if not graphs:
        return Graph()
    for other in graphs[1:]:
        graphs[0].absorb(other)
    return graphs[0]


def _emit(op: str, inputs: List[Tensor], data: np.ndarray, backward_fn) -> Tensor:
    out = Tensor._from_op(data)
    graph = _recording_graph(inputs)
    if graph is not None:
        graph.record(op, inputs, out, backward_fn)
    return out


def _check_broadcast(a: Tensor, b: Tensor, op: str) -> None:
    if a.shape != b.shape and a.ndim != 0 and b.ndim != 0:
        raise DimensionError(
            f"{op}: shapes {a.shape} and {b.shape} are not equal and neither is a scalar",
            details={"left": list(a.shape), "right": list(b.shape)},
        )


def _fit(grad: np.ndarray, target: Tensor) -> np.ndarray:
    return np.asarray(grad.sum()) if target.ndim == 0 and grad.ndim != 0 else grad


# Binary ops
def _pair(a, b) -> Tuple[Tensor, Tensor]:
    """Promote constants to scalar tensors of the other operand's dtype."""
    if isinstance(a, Tensor) and not isinstance(b, Tensor):
        return a, Tensor(b, dtype=a.dtype)
    if isinstance(b, Tensor) and not isinstance(a, Tensor):
        return Tensor(a, dtype=b.dtype), b
    return as_tensor(a), as_tensor(b)


def add(a, b) -> Tensor:
    a, b = _pair(a, b)
    _check_broadcast(a, b, "add")
    return _emit("add", [a, b], a.data + b.data, lambda g: (_fit(g, a), _fit(g, b)))


def mul(a, b) -> Tensor:
    a, b = _pair(a, b)
    _check_broadcast(a, b, "mul")
    return _emit("mul", [a, b], a.data * b.data,
                 lambda g: (_fit(g * b.data, a), _fit(g * a.data, b)))


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(
            f"matmul: cannot multiply {a.shape} by {b.shape}",
            details={"left": list(a.shape), "right": list(b.shape)},
        )
    return _emit("matmul", [a, b], a.data @ b.data, lambda g: (g @ b.data.T, a.data.T @ g))


# Unary ops
def neg(t) -> Tensor:
    t = as_tensor(t)
    return _emit("neg", [t], -t.data, lambda g: (-g,))


def relu(t) -> Tensor:
    t = as_tensor(t)
    active = t.data > 0
    return _emit("relu", [t], np.where(active, t.data, 0.0).astype(t.dtype), lambda g: (g * active,))


def sigmoid(t) -> Tensor:
    t = as_tensor(t)
    s = special.expit(t.data)
    return _emit("sigmoid", [t], s, lambda g: (g * s * (1.0 - s),))


def softplus(t) -> Tensor:
    t = as_tensor(t)
    return _emit("softplus", [t], np.logaddexp(0.0, t.data).astype(t.dtype),
                 lambda g: (g * special.expit(t.data),))


def ln(t) -> Tensor:
    t = as_tensor(t)
    if np.any(t.data <= 0):
        raise DomainError("ln: input must be strictly positive", details={"min": float(np.min(t.data))})
    return _emit("ln", [t], np.log(t.data), lambda g: (g / t.data,))


def exp(t) -> Tensor:
    t = as_tensor(t)
    out = np.exp(t.data)
    return _emit("exp", [t], out, lambda g: (g * out,))


def maximum(t, floor: float) -> Tensor:
    """Clamp from below by a constant; gradient is zero where clamped."""
    t = as_tensor(t)
    above = t.data >= floor
    return _emit("maximum", [t], np.where(above, t.data, floor).astype(t.dtype), lambda g: (g * above,))


def elementwise(op: str, *args) -> Tensor:
    """Dispatch by name: add, mul, relu, sigmoid, softplus, ln, exp, neg."""
    table = {"add": add, "mul": mul, "relu": relu, "sigmoid": sigmoid,
             "softplus": softplus, "ln": ln, "exp": exp, "neg": neg}
    if op not in table:
        raise ContractError(f"Unknown elementwise op: {op}")
    return table[op](*args)


# Shape ops
def transpose(t) -> Tensor:
    t = as_tensor(t)
    if t.ndim != 2:
        raise DimensionError(f"transpose expects a matrix, got shape {t.shape}")
    return _emit("transpose", [t], t.data.T, lambda g: (g.T,))


def expand_rows(v, n: int) -> Tensor:
    """Repeat a vector (or scalar) into n identical rows."""
    v = as_tensor(v)
    if v.ndim > 1:
        raise DimensionError(f"expand_rows expects a vector or scalar, got shape {v.shape}")
    width = v.shape[0] if v.ndim == 1 else 1
    data = np.broadcast_to(v.data, (n, width)).copy()
    return _emit("expand_rows", [v], data,
                 lambda g: (g.sum(axis=0) if v.ndim == 1 else np.asarray(g.sum()),))


# Reductions
def _check_axis(t: Tensor, axis: Optional[int]) -> None:
    if axis is not None and not -t.ndim <= axis < t.ndim:
        raise DimensionError(f"axis {axis} out of bounds for shape {t.shape}")


def reduce_sum(t, axis: Optional[int] = None) -> Tensor:
    t = as_tensor(t)
    _check_axis(t, axis)

    def backward_fn(g):
        if axis is None:
            return (np.broadcast_to(g, t.shape).copy(),)
        return (np.broadcast_to(np.expand_dims(g, axis), t.shape).copy(),)

    return _emit("sum", [t], np.asarray(t.data.sum(axis=axis)), backward_fn)


def reduce_mean(t, axis: Optional[int] = None) -> Tensor:
    t = as_tensor(t)
    _check_axis(t, axis)
    extent = t.size if axis is None else t.shape[axis]

    def backward_fn(g):
        g = g / extent
        if axis is None:
            return (np.broadcast_to(g, t.shape).copy(),)
        return (np.broadcast_to(np.expand_dims(g, axis), t.shape).copy(),)

    return _emit("mean", [t], np.asarray(t.data.mean(axis=axis)), backward_fn)


def reduce(op: str, t, axis: Optional[int] = None) -> Tensor:
    if op == "sum":
        return reduce_sum(t, axis)
    if op == "mean":
        return reduce_mean(t, axis)
    raise ContractError(f"Unknown reduction: {op}")


# Losses
def softmax_cross_entropy(logits, labels: ArrayLike) -> Tensor:
    """Batch-mean negative log-softmax at the labelled class."""
    logits = as_tensor(logits)
    labels = np.asarray(labels, dtype=np.int64)
    if logits.ndim != 2 or labels.shape != (logits.shape[0],):
        raise DimensionError(
            f"softmax_cross_entropy: logits {logits.shape} and labels {labels.shape} disagree"
        )
    n, c = logits.shape
    if n == 0:
        raise DimensionError("softmax_cross_entropy: empty batch")
    if np.any(labels < 0) or np.any(labels >= c):
        raise LabelRangeError(
            f"Labels must lie in [0, {c})",
            details={"min": int(labels.min()), "max": int(labels.max()), "classes": c},
        )
    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    rows = np.arange(n)
    loss = np.mean(log_norm - shifted[rows, labels])

    def backward_fn(g):
        probs = np.exp(shifted - log_norm[:, None])
        probs[rows, labels] -= 1.0
        return (g * probs / n,)

    return _emit("softmax_cross_entropy", [logits], np.asarray(loss, dtype=logits.dtype), backward_fn)


def mse(prediction, target: ArrayLike) -> Tensor:
    """Mean squared error over every element."""
    prediction = as_tensor(prediction)
    target = np.asarray(target, dtype=prediction.dtype)
    if target.size != prediction.size:
        raise DimensionError(f"mse: target size does not match prediction shape {prediction.shape}")
    target = target.reshape(prediction.shape)
    diff = prediction.data - target
    return _emit("mse", [prediction], np.asarray(np.mean(diff * diff)),
                 lambda g: (g * 2.0 * diff / diff.size,))


def backward(loss: Tensor) -> None:
    """Accumulate d(loss)/d(leaf) into every requires_grad leaf reachable from loss."""
    if loss.size != 1 or loss.ndim != 0:
        raise ContractError(
            f"backward needs a scalar loss, got shape {loss.shape}",
            details={"shape": list(loss.shape)},
        )
    if loss.is_leaf:
        if not loss.requires_grad:
            raise ContractError("Loss is not connected to any trainable tensor")
        loss.grad = loss.grad + np.ones_like(loss.data)
        return
    loss._graph.backward(loss)
