"""Small reverse-mode autodiff over numpy arrays.

Only the handful of primitives the parser needs are provided: affine maps,
elementwise nonlinearities, concatenation, row lookups, gathers and fused LSTM
kernels.  There is no broadcasting beyond adding a bias row to a batch.

Every op returns a :class:`Tensor` that remembers its parents and a closure
accumulating gradients into them.  Node ids are drawn from a global counter,
so sorting the nodes reachable from a loss by id gives a valid reverse
topological order.
"""

from __future__ import annotations

import itertools
import os
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

_ids = itertools.count()

_DTYPE = np.dtype(np.float64 if os.environ.get("POLYPARSE_DETERMINISTIC") else np.float32)


class DimensionError(ValueError):
    """Operand shapes do not conform."""


class UsageError(ValueError):
    """An op or helper was called outside its contract."""


def default_dtype() -> np.dtype:
    return _DTYPE


def set_default_dtype(dtype) -> None:
    global _DTYPE
    _DTYPE = np.dtype(dtype)


class Tensor:
    __slots__ = ("value", "grad", "requires_grad", "parents", "backward_fn", "id", "name")

    def __init__(
        self,
        value,
        requires_grad: bool = False,
        parents: tuple = (),
        backward_fn: Callable[[np.ndarray], None] | None = None,
        name: str | None = None,
    ):
        self.value = np.asarray(value)
        if self.value.dtype.kind != "f":
            self.value = self.value.astype(_DTYPE)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.parents = parents
        self.backward_fn = backward_fn
        self.id = next(_ids)
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    @property
    def size(self) -> int:
        return self.value.size

    def __repr__(self):
        label = f" {self.name}" if self.name else ""
        return f"<Tensor{label} shape={self.shape} grad={'yes' if self.requires_grad else 'no'}>"

    def accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.array(g, dtype=self.value.dtype, copy=True)
        else:
            self.grad += g

    def zero_grad(self) -> None:
        self.grad = None


def constant(value, dtype=None) -> Tensor:
    return Tensor(np.asarray(value, dtype=dtype or _DTYPE))


def parameter(value, name: str | None = None, dtype=None) -> Tensor:
    return Tensor(np.array(value, dtype=dtype or _DTYPE), requires_grad=True, name=name)


def _node(value, parents: Sequence[Tensor], backward_fn) -> Tensor:
    needs = any(p.requires_grad for p in parents)
    if not needs:
        return Tensor(value)
    return Tensor(value, True, tuple(parents), backward_fn)


# ---------------------------------------------------------------------------
# primitives


def add(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise DimensionError(f"add: shapes {a.shape} and {b.shape} differ")

    def bw(g):
        if a.requires_grad:
            a.accumulate(g)
        if b.requires_grad:
            b.accumulate(g)

    return _node(a.value + b.value, (a, b), bw)


def sub(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise DimensionError(f"sub: shapes {a.shape} and {b.shape} differ")

    def bw(g):
        if a.requires_grad:
            a.accumulate(g)
        if b.requires_grad:
            b.accumulate(-g)

    return _node(a.value - b.value, (a, b), bw)


def mul(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise DimensionError(f"mul: shapes {a.shape} and {b.shape} differ")

    def bw(g):
        if a.requires_grad:
            a.accumulate(g * b.value)
        if b.requires_grad:
            b.accumulate(g * a.value)

    return _node(a.value * b.value, (a, b), bw)


def scale(a: Tensor, c: float) -> Tensor:
    def bw(g):
        a.accumulate(g * c)

    return _node(a.value * c, (a,), bw)


def add_scalar(a: Tensor, c: float) -> Tensor:
    def bw(g):
        a.accumulate(g)

    return _node(a.value + c, (a,), bw)


def tanh(a: Tensor) -> Tensor:
    out = np.tanh(a.value)

    def bw(g):
        a.accumulate(g * (1.0 - out * out))

    return _node(out, (a,), bw)


def sigmoid(a: Tensor) -> Tensor:
    out = _sigmoid(a.value)

    def bw(g):
        a.accumulate(g * out * (1.0 - out))

    return _node(out, (a,), bw)


def relu(a: Tensor) -> Tensor:
    mask = a.value > 0

    def bw(g):
        a.accumulate(g * mask)

    return _node(a.value * mask, (a,), bw)


def total(a: Tensor) -> Tensor:
    """Sum of all entries, as a 0-d tensor."""

    def bw(g):
        a.accumulate(np.broadcast_to(g, a.shape))

    return _node(np.asarray(a.value.sum()), (a,), bw)


def reshape(a: Tensor, shape: tuple[int, ...]) -> Tensor:
    old = a.shape

    def bw(g):
        a.accumulate(g.reshape(old))

    return _node(a.value.reshape(shape), (a,), bw)


def concat(parts: Sequence[Tensor], axis: int = -1) -> Tensor:
    if not parts:
        raise UsageError("concat needs at least one part")
    for p in parts:
        if p.size == 0:
            raise UsageError("concat parts must be non-empty")
    if len(parts) == 1:
        return parts[0]
    ndim = parts[0].value.ndim
    ax = axis % ndim
    for p in parts[1:]:
        if p.value.ndim != ndim or any(
            p.shape[d] != parts[0].shape[d] for d in range(ndim) if d != ax
        ):
            raise DimensionError(
                f"concat: shapes {parts[0].shape} and {p.shape} disagree off axis {axis}"
            )
    out = np.concatenate([p.value for p in parts], axis=ax)
    bounds = np.cumsum([0] + [p.shape[ax] for p in parts])

    def bw(g):
        for p, lo, hi in zip(parts, bounds[:-1], bounds[1:]):
            if p.requires_grad:
                idx = [slice(None)] * ndim
                idx[ax] = slice(lo, hi)
                p.accumulate(g[tuple(idx)])

    return _node(out, parts, bw)


def stack(rows: Sequence[Tensor]) -> Tensor:
    """Stack equally shaped tensors along a new leading axis."""
    if not rows:
        raise UsageError("stack needs at least one tensor")
    shape = rows[0].shape
    for r in rows:
        if r.shape != shape:
            raise DimensionError(f"stack: shapes {shape} and {r.shape} differ")

    def bw(g):
        for i, r in enumerate(rows):
            if r.requires_grad:
                r.accumulate(g[i])

    return _node(np.stack([r.value for r in rows]), rows, bw)


def slice_last(a: Tensor, start: int, stop: int) -> Tensor:
    def bw(g):
        full = np.zeros_like(a.value)
        full[..., start:stop] = g
        a.accumulate(full)

    return _node(a.value[..., start:stop], (a,), bw)


def lookup(table: Tensor, idx) -> Tensor:
    """Rows of ``table`` selected by an integer index array of any shape."""
    idx = np.asarray(idx, dtype=np.int64)
    if table.value.ndim != 2:
        raise DimensionError(f"lookup: table must be 2-d, got {table.shape}")
    if idx.size and (idx.min() < 0 or idx.max() >= table.shape[0]):
        raise DimensionError(f"lookup: index out of range for table {table.shape}")

    def bw(g):
        full = np.zeros_like(table.value)
        np.add.at(full, idx.reshape(-1), g.reshape(-1, table.shape[1]))
        table.accumulate(full)

    return _node(table.value[idx], (table,), bw)


def take(a: Tensor, idx) -> Tensor:
    """Gather along the last axis: ``out[..., j] = a[..., idx[j]]``."""
    idx = np.asarray(idx, dtype=np.int64)

    def bw(g):
        full = np.zeros_like(a.value)
        np.add.at(full, (..., idx), g)
        a.accumulate(full)

    return _node(a.value[..., idx], (a,), bw)


def pick(a: Tensor, cols) -> Tensor:
    """One entry per row of a matrix: ``out[r] = a[r, cols[r]]``."""
    cols = np.asarray(cols, dtype=np.int64)
    if a.value.ndim != 2 or cols.shape != (a.shape[0],):
        raise DimensionError(f"pick: matrix {a.shape} with column index {cols.shape}")
    rows = np.arange(a.shape[0])

    def bw(g):
        full = np.zeros_like(a.value)
        full[rows, cols] = g
        a.accumulate(full)

    return _node(a.value[rows, cols], (a,), bw)


def affine(W: Tensor, x: Tensor, b: Tensor) -> Tensor:
    """``W x + b`` for a vector ``x``, or row-wise ``x W^T + b`` for a batch."""
    if W.value.ndim != 2 or b.shape != (W.shape[0],) or x.value.ndim not in (1, 2) \
            or x.shape[-1] != W.shape[1]:
        raise DimensionError(
            f"affine: W {W.shape}, x {x.shape}, b {b.shape} do not conform"
        )
    out = x.value @ W.value.T + b.value

    def bw(g):
        if W.requires_grad:
            W.accumulate(np.outer(g, x.value) if g.ndim == 1 else g.T @ x.value)
        if x.requires_grad:
            x.accumulate(g @ W.value)
        if b.requires_grad:
            b.accumulate(g if g.ndim == 1 else g.sum(axis=0))

    return _node(out, (W, x, b), bw)


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


# ---------------------------------------------------------------------------
# LSTM kernels
#
# Gate layout in W (rows): input, forget, output, candidate.  W has shape
# (4d, e + d) acting on concat(x, h).


def _lstm_dims(W: Tensor, b: Tensor, e: int) -> int:
    if W.value.ndim != 2 or W.shape[0] % 4:
        raise DimensionError(f"lstm: weight shape {W.shape} is not (4d, e+d)")
    d = W.shape[0] // 4
    if W.shape[1] != e + d or b.shape != (4 * d,):
        raise DimensionError(
            f"lstm: weight {W.shape} / bias {b.shape} do not match input width {e}, hidden {d}"
        )
    return d


def lstm_step(h: Tensor, c: Tensor, x: Tensor, W: Tensor, b: Tensor) -> tuple[Tensor, Tensor]:
    """One LSTM cell update; works on vectors or on a batch of rows."""
    d = _lstm_dims(W, b, x.shape[-1])
    if h.shape[-1] != d or c.shape != h.shape or h.value.ndim != x.value.ndim:
        raise DimensionError(f"lstm_step: state {h.shape}/{c.shape} vs hidden {d}, input {x.shape}")
    hx = np.concatenate([x.value, h.value], axis=-1)
    z = hx @ W.value.T + b.value
    i = _sigmoid(z[..., :d])
    f = _sigmoid(z[..., d:2 * d])
    o = _sigmoid(z[..., 2 * d:3 * d])
    gc = np.tanh(z[..., 3 * d:])
    c_new = f * c.value + i * gc
    tc = np.tanh(c_new)
    h_new = o * tc
    e = x.shape[-1]

    def bw(g):
        dh = g[..., :d]
        dc = g[..., d:] + dh * o * (1.0 - tc * tc)
        dz = np.concatenate(
            [
                dc * gc * i * (1.0 - i),
                dc * c.value * f * (1.0 - f),
                dh * tc * o * (1.0 - o),
                dc * i * (1.0 - gc * gc),
            ],
            axis=-1,
        )
        if W.requires_grad:
            W.accumulate(np.outer(dz, hx) if dz.ndim == 1 else dz.T @ hx)
        if b.requires_grad:
            b.accumulate(dz if dz.ndim == 1 else dz.sum(axis=0))
        dhx = dz @ W.value
        if x.requires_grad:
            x.accumulate(dhx[..., :e])
        if h.requires_grad:
            h.accumulate(dhx[..., e:])
        if c.requires_grad:
            c.accumulate(dc * f)

    state = _node(np.concatenate([h_new, c_new], axis=-1), (h, c, x, W, b), bw)
    return slice_last(state, 0, d), slice_last(state, d, 2 * d)


def lstm_sequence(X: Tensor, W: Tensor, b: Tensor, lengths=None) -> Tensor:
    """Run an LSTM left to right over ``X`` of shape (T, B, e) from a zero state.

    Returns the hidden states, shape (T, B, d).  With ``lengths`` given, steps
    at or beyond a row's length leave that row's state unchanged, so the final
    state of row ``r`` sits at ``out[lengths[r] - 1, r]``.  Equivalent to
    repeated :func:`lstm_step` calls, with backpropagation through time done
    inside a single node.
    """
    if X.value.ndim != 3:
        raise DimensionError(f"lstm_sequence: expected (T, B, e) input, got {X.shape}")
    T, B, e = X.shape
    if T == 0:
        raise UsageError("lstm_sequence: empty sequence")
    d = _lstm_dims(W, b, e)
    dtype = X.value.dtype
    if lengths is None:
        masks = None
    else:
        lengths = np.asarray(lengths)
        masks = (np.arange(T)[:, None] < lengths[None, :]).astype(dtype)[..., None]

    Wv, bv = W.value, b.value
    HX = np.empty((T, B, e + d), dtype=dtype)
    gates = np.empty((T, B, 4 * d), dtype=dtype)
    C = np.empty((T, B, d), dtype=dtype)
    TC = np.empty((T, B, d), dtype=dtype)
    H = np.empty((T, B, d), dtype=dtype)
    Cprev = np.empty((T, B, d), dtype=dtype)
    h = np.zeros((B, d), dtype=dtype)
    c = np.zeros((B, d), dtype=dtype)
    for t in range(T):
        HX[t, :, :e] = X.value[t]
        HX[t, :, e:] = h
        z = HX[t] @ Wv.T + bv
        gz = gates[t]
        gz[:, :3 * d] = _sigmoid(z[:, :3 * d])
        gz[:, 3 * d:] = np.tanh(z[:, 3 * d:])
        Cprev[t] = c
        cn = gz[:, d:2 * d] * c + gz[:, :d] * gz[:, 3 * d:]
        tcn = np.tanh(cn)
        hn = gz[:, 2 * d:3 * d] * tcn
        TC[t] = tcn
        if masks is not None:
            m = masks[t]
            cn = m * cn + (1.0 - m) * c
            hn = m * hn + (1.0 - m) * h
        C[t] = cn
        H[t] = hn
        h, c = hn, cn

    def bw(G):
        dW = np.zeros_like(Wv)
        db = np.zeros_like(bv)
        dX = np.zeros_like(X.value)
        dh_next = np.zeros((B, d), dtype=dtype)
        dc_next = np.zeros((B, d), dtype=dtype)
        for t in range(T - 1, -1, -1):
            dh = G[t] + dh_next
            dc = dc_next
            if masks is not None:
                m = masks[t]
                pass_h, pass_c = (1.0 - m) * dh, (1.0 - m) * dc
                dh, dc = m * dh, m * dc
            gz = gates[t]
            i, f, o, gc = gz[:, :d], gz[:, d:2 * d], gz[:, 2 * d:3 * d], gz[:, 3 * d:]
            tcn = TC[t]
            dc = dc + dh * o * (1.0 - tcn * tcn)
            dz = np.concatenate(
                [
                    dc * gc * i * (1.0 - i),
                    dc * Cprev[t] * f * (1.0 - f),
                    dh * tcn * o * (1.0 - o),
                    dc * i * (1.0 - gc * gc),
                ],
                axis=1,
            )
            dW += dz.T @ HX[t]
            db += dz.sum(axis=0)
            dhx = dz @ Wv
            dX[t] = dhx[:, :e]
            dh_next = dhx[:, e:]
            dc_next = dc * f
            if masks is not None:
                dh_next = dh_next + pass_h
                dc_next = dc_next + pass_c
        if W.requires_grad:
            W.accumulate(dW)
        if b.requires_grad:
            b.accumulate(db)
        if X.requires_grad:
            X.accumulate(dX)

    return _node(H, (X, W, b), bw)


def bilstm_encode(
    inputs: Sequence[Tensor], layers: Sequence[tuple[tuple[Tensor, Tensor], tuple[Tensor, Tensor]]]
) -> list[Tensor]:
    """Stacked bidirectional LSTM over a sequence of vectors.

    ``layers`` holds ``((W_fwd, b_fwd), (W_bwd, b_bwd))`` per layer.  Output
    ``i`` of a layer is the forward state after reading items ``1..i`` joined
    with the backward state after reading items ``n..i``.
    """
    if not inputs:
        raise UsageError("bilstm_encode: empty sequence")
    if not layers:
        raise UsageError("bilstm_encode: need at least one layer")
    n = len(inputs)
    X = reshape(stack(list(inputs)), (n, 1, inputs[0].shape[-1]))
    out = bilstm_matrix(X, layers)
    return [reshape(lookup(out, [i]), (out.shape[1],)) for i in range(n)]


def bilstm_matrix(X: Tensor, layers) -> Tensor:
    """Like :func:`bilstm_encode` for a single sequence packed as (T, 1, e).

    Returns a (T, 2d) matrix.
    """
    T = X.shape[0]
    rev = np.arange(T - 1, -1, -1)
    cur = X
    for (Wf, bf), (Wb, bb) in layers:
        fwd = lstm_sequence(cur, Wf, bf)
        flipped = _flip_time(cur, rev)
        bwd = _flip_time(lstm_sequence(flipped, Wb, bb), rev)
        cur = concat([fwd, bwd], axis=-1)
    return reshape(cur, (T, cur.shape[-1]))


def _flip_time(a: Tensor, order) -> Tensor:
    def bw(g):
        full = np.empty_like(g)
        full[order] = g
        a.accumulate(full)

    return _node(a.value[order], (a,), bw)


def reverse_within_length(a: Tensor, lengths) -> Tensor:
    """Reverse each column ``r`` of a (T, B, e) tensor over its first ``lengths[r]`` steps.

    Padding steps stay in place.  The permutation is its own inverse.
    """
    T, B = a.shape[:2]
    lengths = np.asarray(lengths)
    t = np.arange(T)[:, None]
    src = np.where(t < lengths[None, :], lengths[None, :] - 1 - t, t)
    cols = np.broadcast_to(np.arange(B)[None, :], (T, B))

    def bw(g):
        full = np.zeros_like(a.value)
        full[src, cols] = g
        a.accumulate(full)

    return _node(a.value[src, cols], (a,), bw)


# ---------------------------------------------------------------------------
# backward


def backward(loss: Tensor, parameters: Iterable[Tensor] = ()) -> dict[int, np.ndarray]:
    """Backpropagate from a scalar ``loss``.

    Gradients accumulate into ``.grad`` of every reachable tensor that
    requires one.  Each tensor in ``parameters`` gets an entry in the
    returned mapping (keyed by ``id``), zero-filled when unreachable; their
    ``.grad`` stays ``None`` in that case so optimizers can tell the
    difference.
    """
    if loss.size != 1:
        raise UsageError(f"backward needs a scalar loss, got shape {loss.shape}")
    params = list(parameters)
    if loss.requires_grad:
        nodes = _reachable(loss)
        loss.accumulate(np.ones_like(loss.value))
        for node in sorted(nodes, key=lambda t: t.id, reverse=True):
            if node.backward_fn is not None and node.grad is not None:
                node.backward_fn(node.grad)
                if node.parents:
                    # interior nodes do not keep gradients around
                    node.grad = None
    return {
        p.id: (p.grad if p.grad is not None else np.zeros_like(p.value)) for p in params
    }


def _reachable(root: Tensor) -> list[Tensor]:
    seen = {root.id}
    out = [root]
    todo = [root]
    while todo:
        node = todo.pop()
        for p in node.parents:
            if p.requires_grad and p.id not in seen:
                seen.add(p.id)
                out.append(p)
                todo.append(p)
    return out


# ---------------------------------------------------------------------------
# optimizers


class SGD:
    kind = "sgd"

    def __init__(self, lr: float = 0.1):
        if lr <= 0:
            raise UsageError("learning rate must be positive")
        self.lr = lr
        self.t = 0

    def step(self, params: Mapping[str, Tensor]) -> None:
        touched = [p for p in params.values() if p.grad is not None]
        if not touched:
            raise UsageError("optimizer step without gradients; call backward first")
        self.t += 1
        for p in touched:
            p.value -= self.lr * p.grad
            p.grad = None


class Adam:
    kind = "adam"

    def __init__(self, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        if lr <= 0:
            raise UsageError("learning rate must be positive")
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}
        self.steps: dict[str, int] = {}

    def step(self, params: Mapping[str, Tensor]) -> None:
        touched = [(k, p) for k, p in params.items() if p.grad is not None]
        if not touched:
            raise UsageError("optimizer step without gradients; call backward first")
        self.t += 1
        for name, p in touched:
            g = p.grad
            if name not in self.m:
                self.m[name] = np.zeros_like(p.value)
                self.v[name] = np.zeros_like(p.value)
                self.steps[name] = 0
            # per-parameter step counts: tensors idle in a step keep their moments
            t = self.steps[name] = self.steps[name] + 1
            m, v = self.m[name], self.v[name]
            m *= self.beta1
            m += (1 - self.beta1) * g
            v *= self.beta2
            v += (1 - self.beta2) * g * g
            mhat = m / (1 - self.beta1 ** t)
            vhat = v / (1 - self.beta2 ** t)
            p.value -= (self.lr * mhat / (np.sqrt(vhat) + self.eps)).astype(p.value.dtype)
            p.grad = None


def make_optimizer(kind: str = "adam", lr: float | None = None):
    if kind == "adam":
        return Adam(lr if lr is not None else 1e-3)
    if kind == "sgd":
        return SGD(lr if lr is not None else 0.1)
    raise UsageError(f"unknown optimizer {kind!r}")


# ---------------------------------------------------------------------------
# initialisation


def glorot(rng: np.random.Generator, shape: tuple[int, int], dtype=None) -> np.ndarray:
    limit = np.sqrt(6.0 / (shape[0] + shape[1]))
    return rng.uniform(-limit, limit, size=shape).astype(dtype or _DTYPE)


def lookup_init(rng: np.random.Generator, shape: tuple[int, ...], dtype=None) -> np.ndarray:
    """Uniform init for lookup rows, scaled by the embedding width only."""
    limit = np.sqrt(3.0 / shape[-1])
    return rng.uniform(-limit, limit, size=shape).astype(dtype or _DTYPE)


def lstm_init(rng: np.random.Generator, input_dim: int, hidden: int, dtype=None):
    W = glorot(rng, (4 * hidden, input_dim + hidden), dtype)
    b = np.zeros(4 * hidden, dtype=dtype or _DTYPE)
    b[hidden:2 * hidden] = 1.0
    return W, b
