"""Reverse-mode autodiff over dense float64 numpy arrays.

A ``Tensor`` wraps an ndarray and remembers how it was produced; the
implicit DAG of parent links is the computation graph. ``backward`` walks
that graph once in reverse topological order and returns a gradient per
reachable tensor. Inside a ``no_grad()`` block no links are recorded, so
the same code doubles as a fast inference path.

Only the op set needed by the learners is provided: matmul, elementwise
arithmetic, tanh/relu, exp/log, softmax, sum/mean, reshape/concat/slice,
and clipping with straight-through gradients.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "Tensor",
    "as_tensor",
    "backward",
    "concat",
    "gaussian_log_prob",
    "no_grad",
    "set_strict_finite",
    "softmax",
    "GraphError",
    "NonFiniteError",
]

VARIANCE_FLOOR = 1e-8

_grad_enabled = True
_strict_finite = False


class GraphError(RuntimeError):
    """Misuse of the computation graph (non-scalar loss, bad shapes)."""


class NonFiniteError(FloatingPointError):
    """A NaN or Inf appeared where only finite values are allowed."""


def set_strict_finite(enabled: bool) -> None:
    """Check every op result for NaN/Inf. Slow; meant for tests."""
    global _strict_finite
    _strict_finite = bool(enabled)


@contextmanager
def no_grad():
    """Run ops without recording the graph (pure forward evaluation)."""
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


def _coerce(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    return arr


class Tensor:
    __slots__ = ("data", "requires_grad", "_parents", "_vjp")

    def __init__(
        self,
        values,
        requires_grad: bool = False,
        _parents: tuple[Tensor, ...] = (),
        _vjp: Callable[[np.ndarray], tuple] | None = None,
    ):
        self.data = _coerce(values)
        if _strict_finite and not np.all(np.isfinite(self.data)):
            raise NonFiniteError("non-finite values in tensor")
        self.requires_grad = requires_grad
        if _grad_enabled:
            self._parents = _parents
            self._vjp = _vjp
        else:
            self._parents = ()
            self._vjp = None

    # -- basic introspection ------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, grad={self.requires_grad})"

    def detach(self) -> Tensor:
        return Tensor(self.data)

    # -- graph construction helpers ----------------------------------------

    @staticmethod
    def _make(data: np.ndarray, parents: tuple[Tensor, ...], vjp) -> Tensor:
        if _grad_enabled and any(p._tracked() for p in parents):
            return Tensor(data, _parents=parents, _vjp=vjp)
        return Tensor(data)

    def _tracked(self) -> bool:
        return self.requires_grad or self._vjp is not None

    # -- arithmetic ----------------------------------------------------------

    def __neg__(self) -> Tensor:
        return self._make(-self.data, (self,), lambda g: (-g,))

    def __add__(self, other) -> Tensor:
        other = as_tensor(other)
        out = self.data + other.data
        sa, sb = self.data.shape, other.data.shape
        return self._make(
            out, (self, other), lambda g: (_unbroadcast(g, sa), _unbroadcast(g, sb))
        )

    __radd__ = __add__

    def __sub__(self, other) -> Tensor:
        other = as_tensor(other)
        out = self.data - other.data
        sa, sb = self.data.shape, other.data.shape
        return self._make(
            out, (self, other), lambda g: (_unbroadcast(g, sa), _unbroadcast(-g, sb))
        )

    def __rsub__(self, other) -> Tensor:
        return as_tensor(other).__sub__(self)

    def __mul__(self, other) -> Tensor:
        other = as_tensor(other)
        out = self.data * other.data
        a, b = self.data, other.data
        return self._make(
            out,
            (self, other),
            lambda g: (_unbroadcast(g * b, a.shape), _unbroadcast(g * a, b.shape)),
        )

    __rmul__ = __mul__

    def __truediv__(self, other) -> Tensor:
        other = as_tensor(other)
        out = self.data / other.data
        a, b = self.data, other.data
        return self._make(
            out,
            (self, other),
            lambda g: (
                _unbroadcast(g / b, a.shape),
                _unbroadcast(-g * a / (b * b), b.shape),
            ),
        )

    def __rtruediv__(self, other) -> Tensor:
        return as_tensor(other).__truediv__(self)

    def __matmul__(self, other) -> Tensor:
        other = as_tensor(other)
        if self.data.ndim != 2 or other.data.ndim != 2:
            raise GraphError("matmul expects 2-D operands")
        out = self.data @ other.data
        a, b = self.data, other.data
        return self._make(out, (self, other), lambda g: (g @ b.T, a.T @ g))

    def __getitem__(self, key) -> Tensor:
        out = self.data[key]
        shape = self.data.shape

        def vjp(g):
            full = np.zeros(shape)
            np.add.at(full, key, g)
            return (full,)

        return self._make(np.array(out, dtype=np.float64), (self,), vjp)

    # -- elementwise nonlinearities ------------------------------------------

    def tanh(self) -> Tensor:
        out = np.tanh(self.data)
        return self._make(out, (self,), lambda g: (g * (1.0 - out * out),))

    def relu(self) -> Tensor:
        out = np.maximum(self.data, 0.0)
        mask = self.data > 0.0
        return self._make(out, (self,), lambda g: (g * mask,))

    def exp(self) -> Tensor:
        out = np.exp(self.data)
        return self._make(out, (self,), lambda g: (g * out,))

    def log(self) -> Tensor:
        a = self.data
        return self._make(np.log(a), (self,), lambda g: (g / a,))

    def clip_straight_through(
        self, lo: float = -1.0, hi: float = 1.0, band: float = 0.1
    ) -> Tensor:
        """Clip forward; pass gradients unchanged within ``band`` past the
        bounds and zero them beyond."""
        a = self.data
        out = np.clip(a, lo, hi)
        pass_mask = (a >= lo - band) & (a <= hi + band)
        return self._make(out, (self,), lambda g: (g * pass_mask,))

    # -- reductions ------------------------------------------------------------

    def sum(self, axis: int | None = None) -> Tensor:
        out = self.data.sum(axis=axis)
        shape = self.data.shape

        def vjp(g):
            if axis is None:
                return (np.broadcast_to(g, shape).copy(),)
            return (np.broadcast_to(np.expand_dims(g, axis), shape).copy(),)

        return self._make(np.asarray(out, dtype=np.float64), (self,), vjp)

    def mean(self, axis: int | None = None) -> Tensor:
        n = self.data.size if axis is None else self.data.shape[axis]
        return self.sum(axis=axis) * (1.0 / n)

    # -- shape ops ---------------------------------------------------------------

    def reshape(self, *shape: int) -> Tensor:
        old = self.data.shape
        out = self.data.reshape(*shape)
        return self._make(out, (self,), lambda g: (g.reshape(old),))


def as_tensor(values) -> Tensor:
    if isinstance(values, Tensor):
        return values
    return Tensor(values)


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum gradient over axes that were broadcast in the forward op."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    out = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def vjp(g):
        return tuple(np.array_split(g, splits, axis=axis))

    return Tensor._make(out, tuple(tensors), vjp)


def softmax(logits: Tensor, axis: int = -1) -> Tensor:
    """Numerically stable softmax (max-subtracted, shift invariant)."""
    z = logits.data
    shifted = z - z.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def vjp(g):
        inner = (g * out).sum(axis=axis, keepdims=True)
        return (out * (g - inner),)

    return Tensor._make(out, (logits,), vjp)


def gaussian_log_prob(
    x: Tensor | np.ndarray,
    mean: Tensor | np.ndarray,
    variance: float,
    axis: int | None = None,
) -> Tensor:
    """Sum of independent-Gaussian log densities with a shared scalar variance.

    ``axis=None`` sums over every element; otherwise the sum runs over one
    axis, leaving a log density per remaining row.
    """
    if variance <= VARIANCE_FLOOR:
        raise ValueError(f"variance {variance} at or below floor {VARIANCE_FLOOR}")
    x = as_tensor(x)
    mean = as_tensor(mean)
    diff = x - mean
    n_axis = x.data.size if axis is None else x.data.shape[axis]
    const = -0.5 * math.log(2.0 * math.pi * variance) * n_axis
    quad = (diff * diff).sum(axis=axis) * (-0.5 / variance)
    return quad + const


def backward(loss: Tensor, wrt: Iterable[Tensor] | None = None) -> dict[int, np.ndarray]:
    """Reverse-mode sweep from a scalar loss.

    Returns gradients keyed by ``id(tensor)``. Tensors in ``wrt`` that the
    loss never touched map to zeros, matching their shapes.
    """
    if loss.data.ndim != 0:
        raise GraphError(f"loss must be scalar, got shape {loss.shape}")

    topo: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(loss, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            topo.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in seen:
                stack.append((p, False))

    grads: dict[int, np.ndarray] = {id(loss): np.ones(())}
    for node in reversed(topo):
        g = grads.get(id(node))
        if g is None or node._vjp is None:
            continue
        parent_grads = node._vjp(g)
        for parent, pg in zip(node._parents, parent_grads):
            if pg is None:
                continue
            acc = grads.get(id(parent))
            grads[id(parent)] = pg if acc is None else acc + pg

    if wrt is not None:
        for t in wrt:
            grads.setdefault(id(t), np.zeros(t.shape))
    return grads
