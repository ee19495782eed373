"""Minimal reverse-mode differentiation over numpy arrays.

Tensors form an implicit computation tape through parent links; backward()
walks the tape once in reverse topological order. Only the operations needed
by the layer zoo are provided: matmul, fixed-operator matvec, broadcast
add/mul, concat, the activation family, filter-axis softmax, and masked
cross-entropy. Gradients land on Parameter.grad and are zeroed by the
optimizer between steps.
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import DimensionMismatch, TapeConsumed
from .graph import Graph, OperatorKind, apply_operator, apply_operator_transpose

_param_ids = itertools.count()


class Tensor:
    """Node of the computation tape; wraps a float64 ndarray."""

    __slots__ = ("value", "parents", "_vjp", "requires_grad", "grad")

    def __init__(self, value, parents=(), vjp=None, requires_grad=False):
        self.value = np.asarray(value, dtype=np.float64)
        self.parents = tuple(parents)
        self._vjp = vjp  # maps upstream grad -> tuple of parent grads
        self.requires_grad = requires_grad
        self.grad = None

    @property
    def shape(self):
        return self.value.shape


class Parameter(Tensor):
    """Trainable tensor with an accumulated gradient and a unique id."""

    __slots__ = ("pid",)

    def __init__(self, value):
        super().__init__(value, requires_grad=True)
        self.grad = np.zeros_like(self.value)
        self.pid = next(_param_ids)

    def zero_grad(self):
        self.grad[...] = 0.0


def constant(value) -> Tensor:
    return Tensor(value)


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _unbroadcast(grad: np.ndarray, shape) -> np.ndarray:
    """Sum grad over the axes numpy broadcast to reach grad.shape from shape."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for ax, size in enumerate(shape):
        if size == 1 and grad.shape[ax] != 1:
            grad = grad.sum(axis=ax, keepdims=True)
    return grad


def add(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    out = a.value + b.value
    return Tensor(out, (a, b),
                  lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)))


def sub(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    out = a.value - b.value
    return Tensor(out, (a, b),
                  lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)))


def mul(a, b) -> Tensor:
    """Elementwise (Hadamard) product with numpy broadcasting."""
    a, b = _as_tensor(a), _as_tensor(b)
    out = a.value * b.value
    av, bv = a.value, b.value
    return Tensor(out, (a, b),
                  lambda g: (_unbroadcast(g * bv, a.shape), _unbroadcast(g * av, b.shape)))


def scale(a, c: float) -> Tensor:
    a = _as_tensor(a)
    return Tensor(a.value * c, (a,), lambda g: (g * c,))


def matmul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    if a.value.shape[-1] != b.value.shape[0]:
        raise DimensionMismatch(f"matmul {a.shape} @ {b.shape}")
    av, bv = a.value, b.value
    return Tensor(av @ bv, (a, b), lambda g: (g @ bv.T, av.T @ g))


def op_apply(g: Graph, kind: OperatorKind, x) -> Tensor:
    """Fixed sparse diffusion operator; backward applies the transpose."""
    x = _as_tensor(x)
    out = apply_operator(g, kind, x.value)
    return Tensor(out, (x,),
                  lambda grad: (apply_operator_transpose(g, kind, grad),))


def concat_cols(tensors) -> Tensor:
    tensors = [_as_tensor(t) for t in tensors]
    widths = [t.value.shape[1] for t in tensors]
    out = np.concatenate([t.value for t in tensors], axis=1)
    splits = np.cumsum(widths)[:-1]

    def vjp(g):
        return tuple(np.split(g, splits, axis=1))

    return Tensor(out, tensors, vjp)


def stack_filters(tensors) -> Tensor:
    """Stack equal-shape tensors along a new leading (filter) axis."""
    tensors = [_as_tensor(t) for t in tensors]
    out = np.stack([t.value for t in tensors], axis=0)

    def vjp(g):
        return tuple(g[i] for i in range(len(tensors)))

    return Tensor(out, tensors, vjp)


def take_filter(a, i: int) -> Tensor:
    """Select slice i along the leading axis."""
    a = _as_tensor(a)
    shape = a.value.shape

    def vjp(g):
        full = np.zeros(shape)
        full[i] = g
        return (full,)

    return Tensor(a.value[i], (a,), vjp)


def relu(a) -> Tensor:
    a = _as_tensor(a)
    mask = a.value > 0
    return Tensor(np.where(mask, a.value, 0.0), (a,), lambda g: (g * mask,))


def leaky_relu(a, slope: float = 0.2) -> Tensor:
    a = _as_tensor(a)
    pos = a.value > 0
    out = np.where(pos, a.value, slope * a.value)
    return Tensor(out, (a,), lambda g: (g * np.where(pos, 1.0, slope),))


def abs_val(a) -> Tensor:
    """|x| with subgradient 0 at x = 0."""
    a = _as_tensor(a)
    s = np.sign(a.value)
    return Tensor(np.abs(a.value), (a,), lambda g: (g * s,))


def abs_pow(a, q: float) -> Tensor:
    """|x|^q for q >= 1; derivative q |x|^(q-1) sign(x), 0 at the origin."""
    if q < 1:
        raise ValueError("q must be >= 1")
    a = _as_tensor(a)
    if q == 1.0:
        return abs_val(a)
    absx = np.abs(a.value)
    deriv = q * absx ** (q - 1.0) * np.sign(a.value)
    return Tensor(absx ** q, (a,), lambda g: (g * deriv,))


def softmax_filters(a) -> Tensor:
    """Softmax along axis 0 of a (filters, nodes[, width]) score stack."""
    a = _as_tensor(a)
    z = a.value - np.max(a.value, axis=0, keepdims=True)
    e = np.exp(z)
    s = e / np.sum(e, axis=0, keepdims=True)
    return Tensor(s, (a,),
                  lambda g: (s * (g - np.sum(g * s, axis=0, keepdims=True)),))


def masked_cross_entropy(logits, labels: np.ndarray, mask: np.ndarray) -> Tensor:
    """Softmax cross-entropy averaged over the masked nodes.

    labels are class ids for all nodes; only rows in mask contribute.
    """
    logits = _as_tensor(logits)
    mask = np.asarray(mask, dtype=np.int64)
    z = logits.value[mask]
    y = np.asarray(labels, dtype=np.int64)[mask]
    zmax = np.max(z, axis=1, keepdims=True)
    lse = zmax[:, 0] + np.log(np.sum(np.exp(z - zmax), axis=1))
    loss = np.mean(lse - z[np.arange(z.shape[0]), y])
    p = np.exp(z - zmax)
    p /= np.sum(p, axis=1, keepdims=True)

    def vjp(g):
        dz = p.copy()
        dz[np.arange(z.shape[0]), y] -= 1.0
        full = np.zeros_like(logits.value)
        full[mask] = dz * (g / z.shape[0])
        return (full,)

    return Tensor(loss, (logits,), vjp)


def backward(root: Tensor):
    """Accumulate d root / d leaf into every reachable Parameter's .grad."""
    if root.value.ndim != 0:
        raise DimensionMismatch("backward expects a scalar root")
    topo: list[Tensor] = []
    seen: set[int] = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            topo.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            if id(p) not in seen:
                stack.append((p, False))

    grads: dict[int, np.ndarray] = {id(root): np.ones_like(root.value)}
    for node in reversed(topo):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if isinstance(node, Parameter):
            node.grad += g
        if node._vjp is None:
            continue
        for parent, pgrad in zip(node.parents, node._vjp(g)):
            acc = grads.get(id(parent))
            grads[id(parent)] = pgrad if acc is None else acc + pgrad


class Tape:
    """Handle returned by forward passes; backward() may run exactly once."""

    def __init__(self, loss: Tensor):
        self.loss = loss
        self._consumed = False

    def backward(self):
        if self._consumed:
            raise TapeConsumed("backward() already ran on this tape")
        self._consumed = True
        backward(self.loss)
