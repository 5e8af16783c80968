"""Differentiable numeric kernel: primitives, parameter store, init, Adam, serialization.

Reverse-mode differentiation is delegated to torch autograd on float64
tensors.  This module fixes the primitive set the model is allowed to use,
checks shapes up front, and owns parameter storage, optimizer state and the
on-disk parameter format, so the rest of the package never touches
``torch.nn`` or ``torch.optim``.
"""

from __future__ import annotations

import math
import struct
from collections import OrderedDict
from typing import Callable, Dict, Iterable, Iterator, Optional, Sequence, Tuple

import numpy as np
import torch

from .errors import ContractError, DimensionError, FormatError

DTYPE = torch.float64
LAYER_NORM_EPS = 1e-5

MAGIC = b"HLT1"
FORMAT_VERSION = 1

Tensor = torch.Tensor


def tensor(data, requires_grad: bool = False) -> Tensor:
    t = torch.as_tensor(np.asarray(data, dtype=np.float64)).clone()
    return t.requires_grad_(requires_grad)


def zeros(*shape, requires_grad: bool = False) -> Tensor:
    return torch.zeros(*shape, dtype=DTYPE, requires_grad=requires_grad)


# -- primitives --------------------------------------------------------------


def _same_shape(name: str, a: Tensor, b: Tensor) -> None:
    if a.shape != b.shape:
        try:
            torch.broadcast_shapes(a.shape, b.shape)
        except RuntimeError:
            raise DimensionError(f"{name}: incompatible shapes {tuple(a.shape)} and {tuple(b.shape)}") from None


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.ndim < 1 or b.ndim < 1 or a.shape[-1] != b.shape[0 if b.ndim == 1 else -2]:
        raise DimensionError(f"matmul: cannot multiply {tuple(a.shape)} by {tuple(b.shape)}")
    return a @ b


def add(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("add", a, b)
    return a + b


def mul(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("mul", a, b)
    return a * b


def div(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("div", a, b)
    return a / b


def concat(parts: Sequence[Tensor], dim: int = -1) -> Tensor:
    ref = parts[0].shape
    for p in parts[1:]:
        if p.ndim != len(ref) or any(s != r for i, (s, r) in enumerate(zip(p.shape, ref)) if i != dim % len(ref)):
            raise DimensionError(f"concat: shapes {tuple(ref)} and {tuple(p.shape)} differ off axis {dim}")
    return torch.cat(list(parts), dim=dim)


def gather_rows(table: Tensor, index) -> Tensor:
    """Select rows of ``table`` by integer labels."""
    index = torch.as_tensor(index, dtype=torch.long)
    if index.numel() and (int(index.min()) < 0 or int(index.max()) >= table.shape[0]):
        raise DimensionError(f"gather_rows: label out of range for table with {table.shape[0]} rows")
    return table[index]


def relu(x: Tensor) -> Tensor:
    return torch.relu(x)


def softplus(x: Tensor) -> Tensor:
    return torch.nn.functional.softplus(x)


def tanh(x: Tensor) -> Tensor:
    return torch.tanh(x)


def exp(x: Tensor) -> Tensor:
    return torch.exp(x)


def log(x: Tensor) -> Tensor:
    return torch.log(x)


def sqrt(x: Tensor) -> Tensor:
    return torch.sqrt(x)


def cosh(x: Tensor) -> Tensor:
    return torch.cosh(x)


def sinh(x: Tensor) -> Tensor:
    return torch.sinh(x)


def acosh_clamped(x: Tensor) -> Tensor:
    """``acosh(max(x, 1))``; inputs below 1 map to 0 and get zero gradient."""
    return torch.acosh(x.clamp_min(1.0))


def sum(x: Tensor, dim=None) -> Tensor:  # noqa: A001 - mirrors the primitive name
    return x.sum() if dim is None else x.sum(dim)


def mean(x: Tensor, dim=None) -> Tensor:
    return x.mean() if dim is None else x.mean(dim)


def layer_norm(x: Tensor, gain: Optional[Tensor] = None, bias: Optional[Tensor] = None, eps: float = LAYER_NORM_EPS) -> Tensor:
    """Normalize over the last axis, then apply the optional affine terms."""
    mu = x.mean(-1, keepdim=True)
    var = ((x - mu) ** 2).mean(-1, keepdim=True)
    y = (x - mu) / torch.sqrt(var + eps)
    if gain is not None:
        if gain.shape[-1] != x.shape[-1]:
            raise DimensionError("layer_norm: gain length does not match feature axis")
        y = y * gain
    if bias is not None:
        y = y + bias
    return y


def log_softmax(x: Tensor, dim: int = -1) -> Tensor:
    return torch.log_softmax(x, dim=dim)


PRIMITIVES: Dict[str, Callable] = {
    "matmul": matmul,
    "add": add,
    "mul": mul,
    "div": div,
    "concat": lambda a, b: concat([a, b]),
    "gather_rows": lambda t: gather_rows(t, [2, 0, 0]),
    "relu": relu,
    "softplus": softplus,
    "tanh": tanh,
    "exp": exp,
    "log": log,
    "sqrt": sqrt,
    "cosh": cosh,
    "sinh": sinh,
    "acosh_clamped": acosh_clamped,
    "sum": sum,
    "mean": mean,
    "layer_norm": layer_norm,
    "log_softmax": log_softmax,
}


# -- differentiation ---------------------------------------------------------


def backward(loss: Tensor) -> None:
    """Accumulate ``d loss / d p`` into ``p.grad`` for every leaf reachable from ``loss``."""
    if loss.numel() != 1 or loss.ndim != 0:
        raise ContractError(f"backward needs a scalar loss, got shape {tuple(loss.shape)}")
    loss.backward()


def finite_difference_grad(fn: Callable[[], Tensor], params: Sequence[Tensor], h: float = 1e-5):
    """Central differences of the scalar ``fn()`` w.r.t. each entry of each tensor in ``params``."""
    grads = []
    with torch.no_grad():
        for p in params:
            g = torch.zeros_like(p)
            flat, gflat = p.view(-1), g.view(-1)
            for i in range(flat.numel()):
                orig = flat[i].item()
                flat[i] = orig + h
                fp = float(fn())
                flat[i] = orig - h
                fm = float(fn())
                flat[i] = orig
                gflat[i] = (fp - fm) / (2.0 * h)
            grads.append(g)
    return grads


def relative_error(a: Tensor, b: Tensor, floor: float = 1e-12) -> float:
    """``||a - b|| / max(||a||, ||b||)``, treating two near-zero tensors as equal."""
    num = float((a - b).norm())
    den = max(float(a.norm()), float(b.norm()))
    if den < floor:
        return num
    return num / den


def check_gradients(fn: Callable[[], Tensor], params: Sequence[Tensor], h: float = 1e-5):
    """Return per-tensor relative errors between autograd and central differences."""
    for p in params:
        p.grad = None
    loss = fn()
    backward(loss)
    analytic = [p.grad.detach().clone() if p.grad is not None else torch.zeros_like(p) for p in params]
    numeric = finite_difference_grad(fn, params, h)
    for p in params:
        p.grad = None
    return [relative_error(a, n) for a, n in zip(analytic, numeric)]


# -- parameters --------------------------------------------------------------


def xavier_init(shape: Tuple[int, int], rng: np.random.Generator) -> Tensor:
    """Uniform in ``+-sqrt(6 / (fan_in + fan_out))``."""
    if len(shape) != 2:
        raise DimensionError(f"xavier_init needs a 2-D shape, got {shape}")
    fan_in, fan_out = shape
    bound = math.sqrt(6.0 / (fan_in + fan_out))
    return torch.from_numpy(rng.uniform(-bound, bound, size=shape))


class ParamStore:
    """Named trainable tensors plus Adam moment accumulators."""

    def __init__(self):
        self._params: "OrderedDict[str, Tensor]" = OrderedDict()
        self._m: Dict[str, Tensor] = {}
        self._v: Dict[str, Tensor] = {}
        self.step_count = 0

    def add(self, name: str, value) -> Tensor:
        if name in self._params:
            raise ContractError(f"duplicate parameter name {name!r}")
        t = torch.as_tensor(value, dtype=DTYPE).detach().clone().requires_grad_(True)
        self._params[name] = t
        self._m[name] = torch.zeros_like(t, requires_grad=False)
        self._v[name] = torch.zeros_like(t, requires_grad=False)
        return t

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __iter__(self) -> Iterator[str]:
        return iter(self._params)

    def __len__(self) -> int:
        return len(self._params)

    def items(self):
        return self._params.items()

    def values(self):
        return self._params.values()

    def zero_grad(self) -> None:
        for p in self._params.values():
            p.grad = None

    def state_dict(self) -> "OrderedDict[str, np.ndarray]":
        return OrderedDict((k, v.detach().numpy().copy()) for k, v in self._params.items())

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        if set(state) != set(self._params):
            missing = set(self._params) - set(state)
            extra = set(state) - set(self._params)
            raise ContractError(f"parameter set mismatch (missing {sorted(missing)}, unexpected {sorted(extra)})")
        with torch.no_grad():
            for k, p in self._params.items():
                src = torch.as_tensor(np.asarray(state[k], dtype=np.float64))
                if src.shape != p.shape:
                    raise DimensionError(f"{k}: stored shape {tuple(src.shape)} != {tuple(p.shape)}")
                p.copy_(src)


def adam_step(store: ParamStore, lr: float = 1e-4, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> None:
    """One bias-corrected Adam update of every parameter in ``store``."""
    for name, p in store.items():
        if p.grad is None:
            raise ContractError(f"parameter {name!r} has no gradient")
    store.step_count += 1
    t = store.step_count
    c1 = 1.0 - beta1**t
    c2 = 1.0 - beta2**t
    with torch.no_grad():
        for name, p in store.items():
            g = p.grad
            m, v = store._m[name], store._v[name]
            m.mul_(beta1).add_(g, alpha=1.0 - beta1)
            v.mul_(beta2).addcmul_(g, g, value=1.0 - beta2)
            p.sub_(lr * (m / c1) / ((v / c2).sqrt() + eps))


# -- serialization -----------------------------------------------------------


def dumps_params(params: Iterable[Tuple[str, np.ndarray]]) -> bytes:
    items = [(name, np.asarray(arr, dtype=np.float64)) for name, arr in params]
    out = [MAGIC, struct.pack("<II", FORMAT_VERSION, len(items))]
    for name, arr in items:
        raw = name.encode("utf-8")
        out.append(struct.pack("<H", len(raw)))
        out.append(raw)
        out.append(struct.pack("<B", arr.ndim))
        out.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        out.append(arr.astype("<f8").tobytes(order="C"))
    return b"".join(out)


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.buf):
            raise FormatError(f"truncated file while reading {what}", self.pos)
        chunk = self.buf[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str, what: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


def loads_params(buf: bytes) -> "OrderedDict[str, np.ndarray]":
    r = _Reader(buf)
    if r.take(4, "magic") != MAGIC:
        raise FormatError("bad magic, expected HLT1", 0)
    version, count = r.unpack("<II", "header")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported format version {version}", 4)
    out: "OrderedDict[str, np.ndarray]" = OrderedDict()
    for _ in range(count):
        (nlen,) = r.unpack("<H", "name length")
        start = r.pos
        try:
            name = r.take(nlen, "name").decode("utf-8")
        except UnicodeDecodeError:
            raise FormatError("parameter name is not valid UTF-8", start) from None
        (rank,) = r.unpack("<B", "rank")
        dims = r.unpack(f"<{rank}I", "dims") if rank else ()
        n = int(np.prod(dims)) if rank else 1
        data = np.frombuffer(r.take(8 * n, f"values of {name}"), dtype="<f8").astype(np.float64)
        out[name] = data.reshape(dims)
    if r.pos != len(buf):
        raise FormatError("trailing bytes after last parameter", r.pos)
    return out


def save_params(store: ParamStore, path) -> None:
    with open(path, "wb") as fh:
        fh.write(dumps_params(store.state_dict().items()))


def load_params(path) -> "OrderedDict[str, np.ndarray]":
    with open(path, "rb") as fh:
        return loads_params(fh.read())
