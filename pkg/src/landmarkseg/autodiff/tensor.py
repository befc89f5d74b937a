"""Dense float64 tensors with reverse-mode automatic differentiation.

Every operation records its parents and a backward closure; calling
``backward()`` on a scalar loss walks the graph in reverse topological
order and accumulates gradients into ``.grad`` of every tensor that has
``requires_grad`` set. All storage is numpy float64.
"""

import threading

import numpy as np

from ..errors import DimensionError


def _unbroadcast(grad, shape):
    """Sum `grad` down to `shape`, undoing numpy broadcasting."""
    if grad.shape == tuple(shape):
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


class Tensor:
    """A dense array plus an optional gradient accumulator."""

    __slots__ = ("data", "grad", "requires_grad", "_backward", "_parents",
                 "_grad_owned", "name")

    def __init__(self, data, requires_grad=False, name=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self._backward = None
        self._parents = ()
        self._grad_owned = False
        self.name = name

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    def item(self):
        return float(self.data)

    def detach(self):
        return Tensor(self.data.copy())

    def zero_grad(self):
        self.grad = None
        self._grad_owned = False

    def check_finite(self):
        if not np.isfinite(self.data).all():
            raise ArithmeticError(
                f"tensor{'' if self.name is None else ' ' + self.name} contains NaN/Inf"
            )
        return self

    def _accumulate(self, g):
        # first contribution is borrowed by reference (backward closures hand
        # over fresh arrays); copy-on-write kicks in at the second contribution
        if self.grad is None:
            self.grad = g
            self._grad_owned = False
        elif self._grad_owned:
            self.grad += g
        else:
            self.grad = self.grad + g
            self._grad_owned = True

    def backward(self, gradient=None):
        """Propagate gradients from this tensor back through the graph."""
        if gradient is None:
            if self.data.size != 1:
                raise DimensionError("backward() without gradient requires a scalar tensor")
            gradient = np.ones_like(self.data)
        topo = []
        seen = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in seen:
                    stack.append((parent, False))
        self._accumulate(np.broadcast_to(gradient, self.data.shape))
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return mul(self, -1.0)

    def __sub__(self, other):
        return add(self, mul(other, -1.0) if isinstance(other, Tensor) else -np.asarray(other))

    def __rsub__(self, other):
        return add(mul(self, -1.0), other)

    def __truediv__(self, other):
        if isinstance(other, Tensor):
            return mul(self, power(other, -1.0))
        return mul(self, 1.0 / np.asarray(other, dtype=np.float64))

    def __matmul__(self, other):
        return matmul(self, other)

    def reshape(self, *shape):
        return reshape(self, shape if len(shape) > 1 else shape[0])

    def sum(self, axis=None, keepdims=False):
        return tensor_sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return tensor_mean(self, axis=axis, keepdims=keepdims)


def as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _make(data, parents, backward):
    out = Tensor(data)
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward
    return out


def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    out_data = a.data + b.data

    def backward(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g, a.data.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(g, b.data.shape))

    return _make(out_data, (a, b), backward)


def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    out_data = a.data * b.data

    def backward(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g * b.data, a.data.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(g * a.data, b.data.shape))

    return _make(out_data, (a, b), backward)


def power(a, exponent):
    a = as_tensor(a)
    e = float(exponent)
    out_data = a.data ** e

    def backward(g):
        if a.requires_grad:
            a._accumulate(g * e * a.data ** (e - 1.0))

    return _make(out_data, (a,), backward)


def square(a):
    a = as_tensor(a)
    out_data = a.data * a.data

    def backward(g):
        if a.requires_grad:
            a._accumulate(g * 2.0 * a.data)

    return _make(out_data, (a,), backward)


def exp(a):
    a = as_tensor(a)
    out_data = np.exp(a.data)

    def backward(g):
        if a.requires_grad:
            a._accumulate(g * out_data)

    return _make(out_data, (a,), backward)


def log(a):
    a = as_tensor(a)
    out_data = np.log(a.data)

    def backward(g):
        if a.requires_grad:
            a._accumulate(g / a.data)

    return _make(out_data, (a,), backward)


def clamp_min(a, floor):
    """Elementwise max(a, floor); gradient is zero where the floor is active."""
    a = as_tensor(a)
    mask = a.data >= floor
    out_data = np.where(mask, a.data, floor)

    def backward(g):
        if a.requires_grad:
            a._accumulate(g * mask)

    return _make(out_data, (a,), backward)


def relu(a):
    a = as_tensor(a)
    out_data = np.maximum(a.data, 0.0)

    def backward(g):
        if a.requires_grad:
            a._accumulate(g * (out_data > 0))

    return _make(out_data, (a,), backward)


def reshape(a, shape):
    a = as_tensor(a)
    out_data = a.data.reshape(shape)

    def backward(g):
        if a.requires_grad:
            a._accumulate(g.reshape(a.data.shape))

    return _make(out_data, (a,), backward)


def tensor_sum(a, axis=None, keepdims=False):
    a = as_tensor(a)
    out_data = a.data.sum(axis=axis, keepdims=keepdims)

    def backward(g):
        if not a.requires_grad:
            return
        if axis is None:
            a._accumulate(np.broadcast_to(g, a.data.shape))
            return
        if not keepdims:
            g = np.expand_dims(g, axis)
        a._accumulate(np.broadcast_to(g, a.data.shape))

    return _make(out_data, (a,), backward)


def tensor_mean(a, axis=None, keepdims=False):
    a = as_tensor(a)
    n = a.data.size if axis is None else np.prod(
        [a.data.shape[ax] for ax in (axis if isinstance(axis, tuple) else (axis,))]
    )
    return mul(tensor_sum(a, axis=axis, keepdims=keepdims), 1.0 / float(n))


def matmul(a, b):
    """Matrix product with numpy broadcasting over leading batch dimensions."""
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim < 1 or b.data.ndim < 1:
        raise DimensionError("matmul requires at least 1-D operands")
    if a.data.shape[-1] != b.data.shape[-2 if b.data.ndim > 1 else 0]:
        raise DimensionError(
            f"matmul inner dimensions disagree: {a.data.shape} @ {b.data.shape}"
        )
    out_data = a.data @ b.data

    def backward(g):
        if a.requires_grad:
            ga = g @ np.swapaxes(b.data, -1, -2) if b.data.ndim > 1 else np.outer(g, b.data)
            a._accumulate(_unbroadcast(ga, a.data.shape))
        if b.requires_grad:
            gb = np.swapaxes(a.data, -1, -2) @ g if a.data.ndim > 1 else np.outer(a.data, g)
            b._accumulate(_unbroadcast(gb, b.data.shape))

    return _make(out_data, (a, b), backward)


def softmax(a, axis):
    """Numerically stable softmax along `axis`."""
    a = as_tensor(a)
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out_data = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        if a.requires_grad:
            dot = (g * out_data).sum(axis=axis, keepdims=True)
            a._accumulate(out_data * (g - dot))

    return _make(out_data, (a,), backward)


def concat_rows(tensors):
    """Stack 2-D tensors along axis 0 (used to batch per-sample outputs)."""
    ts = [as_tensor(t) for t in tensors]
    out_data = np.concatenate([t.data for t in ts], axis=0)
    offsets = np.cumsum([0] + [t.data.shape[0] for t in ts])

    def backward(g):
        for t, lo, hi in zip(ts, offsets[:-1], offsets[1:]):
            if t.requires_grad:
                t._accumulate(g[lo:hi])

    return _make(out_data, tuple(ts), backward)


# -- spatial operations (images are C×H×W, optionally with a leading batch) --


def _as_batched(x):
    if x.ndim == 3:
        return x[None], True
    if x.ndim == 4:
        return x, False
    raise DimensionError(f"expected C×H×W or N×C×H×W input, got shape {x.shape}")


_conv_workspaces = threading.local()


def _workspace(tag, shape):
    """Reusable scratch array (per thread, per role); contents are undefined."""
    pool = getattr(_conv_workspaces, "pool", None)
    if pool is None:
        pool = _conv_workspaces.pool = {}
    need = int(np.prod(shape))
    buf = pool.get(tag)
    if buf is None or buf.size < need:
        buf = pool[tag] = np.empty(need)
    return buf[:need].reshape(shape)


def _im2col(xd_cf, tag, c, n, h, w, kh, kw, ph, pw):
    """Patch matrix (c*kh*kw, n*h*w) from channel-first input (c, n, h, w),
    built in a pooled workspace via one long slice copy per kernel offset."""
    xt = _workspace(tag + "_pad", (c, n, h + 2 * ph, w + 2 * pw))
    if ph or pw:
        xt[...] = 0.0
        xt[:, :, ph:ph + h, pw:pw + w] = xd_cf
    else:
        xt[...] = xd_cf
    cols = _workspace(tag, (c, kh * kw, n, h, w))
    for i in range(kh):
        for j in range(kw):
            cols[:, i * kw + j] = xt[:, :, i:i + h, j:j + w]
    return cols.reshape(c * kh * kw, n * h * w)


def conv2d(x, weight, bias=None):
    """2-D cross-correlation with odd kernels, unit stride and 'same' zero padding.

    x: (C_in,H,W) or (N,C_in,H,W); weight: (C_out,C_in,kh,kw); bias: (C_out,).

    im2col + GEMM on pooled scratch buffers; the patch matrix is rebuilt in
    backward rather than retained, keeping the live set small.
    """
    x, weight = as_tensor(x), as_tensor(weight)
    xd, single = _as_batched(x.data)
    if weight.data.ndim != 4:
        raise DimensionError(f"conv2d weight must be 4-D, got shape {weight.data.shape}")
    c_out, c_in, kh, kw = weight.data.shape
    if kh % 2 == 0 or kw % 2 == 0:
        raise DimensionError("conv2d kernel extents must be odd")
    n, c_x, h, w = xd.shape
    if c_x != c_in:
        raise DimensionError(f"conv2d channel mismatch: input has {c_x}, kernels expect {c_in}")
    ph, pw = kh // 2, kw // 2
    m = n * h * w
    cols = _im2col(xd.transpose(1, 0, 2, 3), "conv_x", c_in, n, h, w, kh, kw, ph, pw)
    wmat = weight.data.reshape(c_out, c_in * kh * kw)
    out = np.matmul(wmat, cols, out=_workspace("conv_out", (c_out, m)))
    parents = [x, weight]
    if bias is not None:
        bias = as_tensor(bias)
        if bias.data.shape != (c_out,):
            raise DimensionError(f"conv2d bias must have shape ({c_out},)")
        out += bias.data[:, None]
        parents.append(bias)
    # .copy() is load-bearing: out lives in pooled scratch that the next call
    # overwrites, and for n == 1 the transpose would already be contiguous
    out_data = out.reshape(c_out, n, h, w).transpose(1, 0, 2, 3).copy()
    if single:
        out_data = out_data[0]

    def backward(g):
        gb = g[None] if single else g
        gb_cf = gb.transpose(1, 0, 2, 3)
        if weight.requires_grad:
            g_flat = _workspace("conv_gflat", (c_out, n, h, w))
            g_flat[...] = gb_cf
            g_flat = g_flat.reshape(c_out, m)
            cols = _im2col(xd.transpose(1, 0, 2, 3), "conv_x",
                           c_in, n, h, w, kh, kw, ph, pw)
            weight._accumulate((g_flat @ cols.T).reshape(weight.data.shape))
        if bias is not None and bias.requires_grad:
            bias._accumulate(gb.sum(axis=(0, 2, 3)))
        if x.requires_grad:
            # input gradient is the correlation of g with channel-swapped,
            # spatially flipped kernels; reuse the im2col machinery on g
            gcols = _im2col(gb_cf, "conv_g", c_out, n, h, w, kh, kw, ph, pw)
            w_back = weight.data.transpose(1, 0, 2, 3)[:, :, ::-1, ::-1].reshape(
                c_in, c_out * kh * kw)
            dx_flat = np.matmul(w_back, gcols,
                                out=_workspace("conv_dx", (c_in, m)))
            dx = dx_flat.reshape(c_in, n, h, w).transpose(1, 0, 2, 3).copy()
            x._accumulate(dx[0] if single else dx)

    return _make(out_data, tuple(parents), backward)


def maxpool2d(x):
    """2×2 max pooling; on ties the gradient goes to the first element in
    row-major window order."""
    x = as_tensor(x)
    xd, single = _as_batched(x.data)
    n, c, h, w = xd.shape
    if h % 2 or w % 2:
        raise DimensionError(f"maxpool2d requires even spatial extents, got {h}×{w}")
    windows = xd.reshape(n, c, h // 2, 2, w // 2, 2).transpose(0, 1, 2, 4, 3, 5)
    flat = windows.reshape(n, c, h // 2, w // 2, 4)
    arg = flat.argmax(axis=-1)  # first occurrence wins ties
    out_data = np.take_along_axis(flat, arg[..., None], axis=-1)[..., 0]
    if single:
        out_data = out_data[0]

    def backward(g):
        gb = g[None] if single else g
        dflat = np.zeros((n, c, h // 2, w // 2, 4))
        np.put_along_axis(dflat, arg[..., None], gb[..., None], axis=-1)
        dx = dflat.reshape(n, c, h // 2, w // 2, 2, 2).transpose(0, 1, 2, 4, 3, 5)
        dx = dx.reshape(n, c, h, w)
        x._accumulate(dx[0] if single else dx)

    return _make(out_data, (x,), backward)


def upsample2x(x):
    """Nearest-neighbour 2× upsampling; backward sums the 4 descendant gradients."""
    x = as_tensor(x)
    xd, single = _as_batched(x.data)
    n, c, h, w = xd.shape
    out_data = np.empty((n, c, 2 * h, 2 * w))
    out_data.reshape(n, c, h, 2, w, 2)[...] = xd[:, :, :, None, :, None]
    if single:
        out_data = out_data[0]

    def backward(g):
        gb = g[None] if single else g
        dx = gb.reshape(n, c, h, 2, w, 2).sum(axis=(3, 5))
        x._accumulate(dx[0] if single else dx)

    return _make(out_data, (x,), backward)
