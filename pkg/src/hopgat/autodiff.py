"""Dense float64 tensors with tape-based reverse-mode differentiation.

Every operation computes its result eagerly with numpy and, when a
``GradientTape`` is active and an input is tracked, records a backward
closure onto the tape. ``GradientTape.backward`` walks the records once in
reverse order and accumulates gradients into every tensor on the path to the
loss. Without an active tape the same functions run in plain evaluation mode
and record nothing.

All arrays are float64. Results are bit-identical across runs for the same
inputs; the only randomness (dropout) draws from an explicitly passed
``numpy.random.Generator``.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np

# When True, every op output is checked for NaN/inf and a FloatingPointError
# is raised at the op that produced it. Module-level so tests and callers can
# toggle it.
FINITE_CHECKS = True


class Tensor:
    """A dense float64 array plus gradient bookkeeping.

    ``data`` is treated as read-only between forward and backward; the
    optimizer mutates it in place only after the tape for the step has been
    consumed. ``grad`` is ``None`` until a backward pass deposits into it.
    Set ``retain_grad`` on an intermediate to keep its gradient after
    backward; leaf gradients are always kept.
    """

    __slots__ = ("data", "grad", "requires_grad", "retain_grad")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = bool(requires_grad)
        self.retain_grad = False

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data.reshape(()))

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.data.shape}{flag})"

    # Operator sugar; the module-level functions do the real work.
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

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def sum(self, axis=None, keepdims: bool = False):
        return reduce_sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims: bool = False):
        return reduce_mean(self, axis=axis, keepdims=keepdims)

    def reshape(self, shape):
        return reshape(self, shape)


def as_tensor(x, requires_grad: bool = False) -> Tensor:
    """Lift ndarrays/scalars to (untracked) tensors; pass tensors through."""
    if isinstance(x, Tensor):
        return x
    return Tensor(x, requires_grad=requires_grad)


def parameter(data) -> Tensor:
    """A tracked leaf tensor (copies its input so callers can reuse buffers)."""
    return Tensor(np.array(data, dtype=np.float64), requires_grad=True)


_TAPE_STACK: list["GradientTape"] = []


def _active_tape() -> "GradientTape | None":
    return _TAPE_STACK[-1] if _TAPE_STACK else None


class GradientTape:
    """Ordered record of executed ops, replayed once in reverse by backward.

    Records are appended in execution order, so every record's inputs were
    produced before it: the list is already topologically sorted. backward
    visits each record exactly once. Gradients of intermediates are freed as
    soon as they have been propagated (unless ``retain_grad`` is set), which
    keeps peak memory proportional to the live frontier instead of the whole
    tape.
    """

    def __init__(self):
        self._records: list[
            tuple[tuple[Tensor, ...], Tensor, Callable[[np.ndarray], Sequence[np.ndarray | None]]]
        ] = []

    def __enter__(self) -> "GradientTape":
        _TAPE_STACK.append(self)
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        popped = _TAPE_STACK.pop()
        assert popped is self

    def _record(self, inputs, output, backward_fn) -> None:
        self._records.append((inputs, output, backward_fn))

    @property
    def num_records(self) -> int:
        return len(self._records)

    def backward(self, loss: Tensor) -> None:
        """Accumulate d(loss)/d(tensor) into ``grad`` for all tracked tensors.

        ``loss`` must be a scalar produced under this tape. Calling backward
        twice accumulates (gradients add), matching the linearity of
        differentiation.
        """
        if loss.data.size != 1:
            raise ValueError(
                f"backward expects a scalar loss, got shape {loss.data.shape}"
            )
        if not loss.requires_grad:
            raise RuntimeError("loss does not depend on any tracked tensor")
        loss.grad = np.ones_like(loss.data)
        for inputs, output, backward_fn in reversed(self._records):
            g = output.grad
            if g is None:
                continue
            for tensor, piece in zip(inputs, backward_fn(g)):
                if piece is None or not tensor.requires_grad:
                    continue
                if tensor.grad is None:
                    tensor.grad = np.zeros_like(tensor.data)
                tensor.grad += piece
            if not output.retain_grad:
                output.grad = None


def _finalize(inputs: tuple[Tensor, ...], out_data: np.ndarray, backward_fn, op_name: str) -> Tensor:
    if FINITE_CHECKS and not np.all(np.isfinite(out_data)):
        raise FloatingPointError(f"{op_name} produced non-finite values")
    tape = _active_tape()
    tracked = tape is not None and any(t.requires_grad for t in inputs)
    out = Tensor(out_data, requires_grad=tracked)
    if tracked:
        tape._record(inputs, out, backward_fn)
    return out


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to ``shape``."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, d in enumerate(shape) if d == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data + b.data

    def backward(g):
        return _unbroadcast(g, a.data.shape), _unbroadcast(g, b.data.shape)

    return _finalize((a, b), out, backward, "add")


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data - b.data

    def backward(g):
        return _unbroadcast(g, a.data.shape), _unbroadcast(-g, b.data.shape)

    return _finalize((a, b), out, backward, "sub")


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data * b.data

    def backward(g):
        ga = _unbroadcast(g * b.data, a.data.shape) if a.requires_grad else None
        gb = _unbroadcast(g * a.data, b.data.shape) if b.requires_grad else None
        return ga, gb

    return _finalize((a, b), out, backward, "mul")


def neg(a) -> Tensor:
    a = as_tensor(a)

    def backward(g):
        return (-g,)

    return _finalize((a,), -a.data, backward, "neg")


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise ValueError(
            f"matmul expects 2-D operands, got {a.data.shape} @ {b.data.shape}"
        )
    if a.data.shape[1] != b.data.shape[0]:
        raise ValueError(
            f"matmul inner dimensions differ: {a.data.shape} @ {b.data.shape}"
        )
    out = a.data @ b.data

    def backward(g):
        ga = g @ b.data.T if a.requires_grad else None
        gb = a.data.T @ g if b.requires_grad else None
        return ga, gb

    return _finalize((a, b), out, backward, "matmul")


def exp(a) -> Tensor:
    a = as_tensor(a)
    with np.errstate(over="ignore"):
        out = np.exp(a.data)

    def backward(g):
        return (g * out,)

    return _finalize((a,), out, backward, "exp")


def log(a) -> Tensor:
    a = as_tensor(a)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(a.data)

    def backward(g):
        return (g / a.data,)

    return _finalize((a,), out, backward, "log")


def sigmoid(a) -> Tensor:
    a = as_tensor(a)
    x = a.data
    # Branching keeps exp arguments non-positive so there is no overflow.
    out = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))), np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))

    def backward(g):
        return (g * out * (1.0 - out),)

    return _finalize((a,), out, backward, "sigmoid")


def softplus(a) -> Tensor:
    """log(1 + exp(x)), computed without overflow for large |x|."""
    a = as_tensor(a)
    x = a.data
    out = np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))

    def backward(g):
        s = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))), np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))
        return (g * s,)

    return _finalize((a,), out, backward, "softplus")


def leaky_relu(a, slope: float = 0.2) -> Tensor:
    a = as_tensor(a)
    x = a.data
    out = np.where(x > 0, x, slope * x)

    def backward(g):
        return (g * np.where(x > 0, 1.0, slope),)

    return _finalize((a,), out, backward, "leaky_relu")


def elu(a) -> Tensor:
    a = as_tensor(a)
    x = a.data
    out = np.where(x > 0, x, np.expm1(np.minimum(x, 0.0)))

    def backward(g):
        return (g * np.where(x > 0, 1.0, np.exp(np.minimum(x, 0.0))),)

    return _finalize((a,), out, backward, "elu")


def reduce_sum(a, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    out = a.data.sum(axis=axis, keepdims=keepdims)

    def backward(g):
        if axis is None:
            return (np.broadcast_to(g, a.data.shape),)
        if not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.data.shape),)

    return _finalize((a,), out, backward, "reduce_sum")


def reduce_mean(a, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    out = a.data.mean(axis=axis, keepdims=keepdims)
    count = a.data.size if axis is None else a.data.shape[axis]

    def backward(g):
        if axis is None:
            return (np.broadcast_to(g, a.data.shape) / count,)
        if not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.data.shape) / count,)

    return _finalize((a,), out, backward, "reduce_mean")


def reshape(a, shape) -> Tensor:
    a = as_tensor(a)
    out = a.data.reshape(shape)

    def backward(g):
        return (g.reshape(a.data.shape),)

    return _finalize((a,), out, backward, "reshape")


def concat(tensors: Iterable[Tensor], axis: int = 0) -> Tensor:
    ts = tuple(as_tensor(t) for t in tensors)
    if not ts:
        raise ValueError("concat needs at least one tensor")
    out = np.concatenate([t.data for t in ts], axis=axis)
    sizes = [t.data.shape[axis] for t in ts]
    offsets = np.cumsum(sizes)[:-1]

    def backward(g):
        return np.split(g, offsets, axis=axis)

    return _finalize(ts, out, backward, "concat")


def take(a, indices) -> Tensor:
    """Gather ``a[indices]`` along axis 0; indices may be any integer array.

    The backward pass scatter-adds, so repeated indices accumulate.
    """
    a = as_tensor(a)
    idx = np.asarray(indices)
    if not np.issubdtype(idx.dtype, np.integer):
        raise ValueError("take expects integer indices")
    if idx.size and (idx.min() < 0 or idx.max() >= a.data.shape[0]):
        raise IndexError(
            f"take index out of range for axis of length {a.data.shape[0]}"
        )
    out = a.data[idx]

    def backward(g):
        ga = np.zeros_like(a.data)
        np.add.at(ga, idx, g)
        return (ga,)

    return _finalize((a,), out, backward, "take")


def masked_softmax(logits, mask) -> Tensor:
    """Softmax along the last axis restricted to ``mask``.

    Off-mask entries are exactly zero in the output and receive zero
    gradient. The max over the masked entries is subtracted before
    exponentiation, so arbitrarily large logits do not overflow. A row with
    no True entry has no valid normalizer and raises.
    """
    a = as_tensor(logits)
    m = np.asarray(mask, dtype=bool)
    if m.shape != a.data.shape:
        raise ValueError(f"mask shape {m.shape} != logits shape {a.data.shape}")
    if not m.any(axis=-1).all():
        raise ValueError("masked_softmax: a row of the mask has no True entries")
    shifted = np.where(m, a.data, -np.inf)
    shifted = shifted - shifted.max(axis=-1, keepdims=True)
    z = np.exp(shifted)  # exactly 0 off-mask, <= 1 on-mask
    out = z / z.sum(axis=-1, keepdims=True)

    def backward(g):
        inner = (g * out).sum(axis=-1, keepdims=True)
        return (out * (g - inner),)

    return _finalize((a,), out, backward, "masked_softmax")


def dropout(a, rate: float, rng: np.random.Generator | None, training: bool) -> Tensor:
    """Inverted dropout: zero with probability ``rate``, scale by 1/(1-rate).

    Identity (and no RNG draw) when not training or rate == 0, so evaluation
    consumes no randomness. The forward mask is reused in backward.
    """
    a = as_tensor(a)
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if not training or rate == 0.0:
        return a
    if rng is None:
        raise ValueError("dropout in training mode needs a random generator")
    keep = 1.0 - rate
    mask = (rng.random(a.data.shape) < keep) / keep
    out = a.data * mask

    def backward(g):
        return (g * mask,)

    return _finalize((a,), out, backward, "dropout")


class Adam:
    """Adam with bias correction. ``step`` clears gradients afterwards.

    Calling ``step`` while some parameter has no gradient is a usage error
    (the loss did not touch it, or backward was not run) and raises.
    """

    def __init__(
        self,
        params: Iterable[Tensor],
        learning_rate: float = 0.001,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.params = list(params)
        if not self.params:
            raise ValueError("Adam needs at least one parameter")
        self.learning_rate = float(learning_rate)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.step_count = 0
        self._m = [np.zeros_like(p.data) for p in self.params]
        self._v = [np.zeros_like(p.data) for p in self.params]

    def step(self) -> None:
        for i, p in enumerate(self.params):
            if p.grad is None:
                raise RuntimeError(
                    f"Adam.step: parameter {i} has no gradient; run backward first"
                )
        self.step_count += 1
        t = self.step_count
        bc1 = 1.0 - self.beta1**t
        bc2 = 1.0 - self.beta2**t
        for p, m, v in zip(self.params, self._m, self._v):
            g = p.grad
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p.data -= self.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + self.eps)
            p.grad = None

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad = None
