"""Minimal reverse-mode automatic differentiation over numpy arrays.

A :class:`Tensor` wraps a float64 ndarray and records the operation that
produced it; ``backward()`` walks the graph in reverse topological order.
Just the operations the encoder and loss need, nothing speculative. All
gradients are accumulated, so call :func:`zero_grads` between steps.
"""

from __future__ import annotations

import numpy as np
from scipy.special import erf

_INV_SQRT2 = 1.0 / np.sqrt(2.0)
_INV_SQRT2PI = 1.0 / np.sqrt(2.0 * np.pi)


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum a broadcast gradient back down to ``shape``."""
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


class Tensor:
    """Array node in the autodiff graph."""

    __slots__ = ("data", "grad", "_backward", "_prev")

    def __init__(self, data, _prev=()):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = np.zeros_like(self.data)
        self._backward = None
        self._prev = _prev

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        return f"Tensor(shape={self.data.shape})"

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        other = other if isinstance(other, Tensor) else Tensor(other)
        out = Tensor(self.data + other.data, (self, other))

        def backward():
            self.grad += _unbroadcast(out.grad, self.data.shape)
            other.grad += _unbroadcast(out.grad, other.data.shape)
        out._backward = backward
        return out

    def __mul__(self, other):
        other = other if isinstance(other, Tensor) else Tensor(other)
        out = Tensor(self.data * other.data, (self, other))

        def backward():
            self.grad += _unbroadcast(out.grad * other.data, self.data.shape)
            other.grad += _unbroadcast(out.grad * self.data, other.data.shape)
        out._backward = backward
        return out

    def __pow__(self, exponent):
        if not isinstance(exponent, (int, float)):
            raise TypeError("only scalar exponents are supported")
        out = Tensor(self.data ** exponent, (self,))

        def backward():
            self.grad += out.grad * exponent * self.data ** (exponent - 1)
        out._backward = backward
        return out

    def __matmul__(self, other):
        other = other if isinstance(other, Tensor) else Tensor(other)
        if self.data.ndim != 2 or other.data.ndim != 2:
            raise ValueError("matmul expects 2-d tensors")
        out = Tensor(self.data @ other.data, (self, other))

        def backward():
            self.grad += out.grad @ other.data.T
            other.grad += self.data.T @ out.grad
        out._backward = backward
        return out

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other if isinstance(other, Tensor) else Tensor(np.negative(other)))

    def __rsub__(self, other):
        return Tensor(other) + (-self)

    def __truediv__(self, other):
        if isinstance(other, Tensor):
            return self * other ** -1.0
        return self * (1.0 / other)

    # -- reductions and reshaping -------------------------------------------

    def sum(self, axis=None, keepdims=False):
        out = Tensor(self.data.sum(axis=axis, keepdims=keepdims), (self,))

        def backward():
            g = out.grad
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            self.grad += np.broadcast_to(g, self.data.shape)
        out._backward = backward
        return out

    def mean(self, axis=None, keepdims=False):
        count = self.data.size if axis is None else self.data.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)

    @property
    def T(self):
        out = Tensor(self.data.T, (self,))

        def backward():
            self.grad += out.grad.T
        out._backward = backward
        return out

    # -- nonlinearities -------------------------------------------------------

    def relu(self):
        out = Tensor(np.maximum(self.data, 0.0), (self,))

        def backward():
            self.grad += out.grad * (self.data > 0)
        out._backward = backward
        return out

    def gelu(self):
        inner = erf(self.data * _INV_SQRT2)
        out = Tensor(0.5 * self.data * (1.0 + inner), (self,))

        def backward():
            pdf = _INV_SQRT2PI * np.exp(-0.5 * self.data ** 2)
            self.grad += out.grad * (0.5 * (1.0 + inner) + self.data * pdf)
        out._backward = backward
        return out

    def exp(self):
        out = Tensor(np.exp(self.data), (self,))

        def backward():
            self.grad += out.grad * out.data
        out._backward = backward
        return out

    def log(self):
        out = Tensor(np.log(self.data), (self,))

        def backward():
            self.grad += out.grad / self.data
        out._backward = backward
        return out

    def softmax(self, axis=-1):
        shifted = self.data - self.data.max(axis=axis, keepdims=True)
        e = np.exp(shifted)
        s = e / e.sum(axis=axis, keepdims=True)
        out = Tensor(s, (self,))

        def backward():
            inner = (out.grad * s).sum(axis=axis, keepdims=True)
            self.grad += s * (out.grad - inner)
        out._backward = backward
        return out

    def log_softmax(self, axis=-1):
        shifted = self.data - self.data.max(axis=axis, keepdims=True)
        lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
        out = Tensor(shifted - lse, (self,))

        def backward():
            soft = np.exp(out.data)
            self.grad += out.grad - soft * out.grad.sum(axis=axis, keepdims=True)
        out._backward = backward
        return out

    # -- graph traversal ------------------------------------------------------

    def backward(self):
        if self.data.ndim != 0 and self.data.size != 1:
            raise ValueError("backward() needs a scalar loss")
        topo = []
        seen = set()
        stack = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for child in node._prev:
                if id(child) not in seen:
                    stack.append((child, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is not None:
                node._backward()


def gather_rows(x: Tensor, index) -> Tensor:
    """Select rows of a 2-d tensor by integer index (with repeats)."""
    index = np.asarray(index, dtype=np.int64)
    out = Tensor(x.data[index], (x,))

    def backward():
        np.add.at(x.grad, index, out.grad)
    out._backward = backward
    return out


def concat(tensors, axis=1) -> Tensor:
    tensors = list(tensors)
    out = Tensor(np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors))
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def backward():
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            sl = [slice(None)] * out.grad.ndim
            sl[axis] = slice(lo, hi)
            t.grad += out.grad[tuple(sl)]
    out._backward = backward
    return out


def stack_weight(weights: Tensor, stack: np.ndarray) -> Tensor:
    """Weighted sum over the leading axis of a constant stack.

    ``weights`` has shape ``(r,)`` and ``stack`` shape ``(r, ...)``; the
    result is ``sum_k weights[k] * stack[k]``. The stack itself is constant,
    only the weights carry gradient.
    """
    stack = np.asarray(stack, dtype=np.float64)
    if weights.data.shape != (stack.shape[0],):
        raise ValueError(
            f"need {stack.shape[0]} weights, got shape {weights.data.shape}")
    out = Tensor(np.tensordot(weights.data, stack, axes=1), (weights,))
    trailing_axes = tuple(range(1, stack.ndim))

    def backward():
        out_axes = tuple(range(out.grad.ndim))
        weights.grad += np.tensordot(stack, out.grad, axes=(trailing_axes, out_axes))
    out._backward = backward
    return out


def zero_grads(tensors) -> None:
    for t in tensors:
        t.grad = np.zeros_like(t.data)
