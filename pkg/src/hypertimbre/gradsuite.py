"""Finite-difference gradient suite over the kernel primitives and the full training loss."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Sequence

import numpy as np
import torch

from . import tensor as T
from .losstrain import total_loss
from .model import DualLatentVAE, LatentConfig

GRAD_TOL = 1e-4


@dataclass
class GradCase:
    name: str
    error: float
    tol: float = GRAD_TOL

    @property
    def ok(self) -> bool:
        return bool(np.isfinite(self.error)) and self.error <= self.tol


def _leaf(rng, *shape, low=-1.0, high=1.0):
    return T.tensor(rng.uniform(low, high, size=shape), requires_grad=True)


def _away_from_zero(rng, *shape):
    # relu has a kink at 0; keep samples clear of it
    x = rng.uniform(0.1, 1.0, size=shape) * rng.choice([-1.0, 1.0], size=shape)
    return T.tensor(x, requires_grad=True)


def primitive_cases(seed: int = 0) -> List[GradCase]:
    rng = np.random.default_rng([seed, 7])
    unary = {
        "relu": (T.relu, lambda: _away_from_zero(rng, 3, 4)),
        "softplus": (T.softplus, lambda: _leaf(rng, 3, 4, low=-3, high=3)),
        "tanh": (T.tanh, lambda: _leaf(rng, 3, 4, low=-2, high=2)),
        "exp": (T.exp, lambda: _leaf(rng, 3, 4)),
        "log": (T.log, lambda: _leaf(rng, 3, 4, low=0.5, high=2)),
        "sqrt": (T.sqrt, lambda: _leaf(rng, 3, 4, low=0.5, high=2)),
        "cosh": (T.cosh, lambda: _leaf(rng, 3, 4)),
        "sinh": (T.sinh, lambda: _leaf(rng, 3, 4)),
        "acosh_clamped": (T.acosh_clamped, lambda: _leaf(rng, 3, 4, low=1.2, high=3)),
        "sum": (lambda x: T.sum(x, dim=-1), lambda: _leaf(rng, 3, 4)),
        "mean": (lambda x: T.mean(x, dim=0), lambda: _leaf(rng, 3, 4)),
        "log_softmax": (T.log_softmax, lambda: _leaf(rng, 3, 4, low=-2, high=2)),
    }
    cases = []
    for name, (fn, make) in unary.items():
        x = make()
        wrng = np.random.default_rng([seed, 11, len(cases)])
        w = torch.from_numpy(wrng.standard_normal(tuple(fn(x.detach()).shape)))
        cases.append(_case(name, lambda fn=fn, x=x, w=w: (fn(x) * w).sum(), [x]))

    binary = {
        "matmul": (T.matmul, (3, 4), (4, 2)),
        "add": (T.add, (3, 4), (3, 4)),
        "mul": (T.mul, (3, 4), (3, 4)),
        "div": (T.div, (3, 4), None),
        "concat": (lambda a, b: T.concat([a, b]), (3, 4), (3, 2)),
    }
    for name, (fn, sa, sb) in binary.items():
        a = _leaf(rng, *sa)
        b = _leaf(rng, *sa, low=0.5, high=2) if sb is None else _leaf(rng, *sb)
        w = torch.from_numpy(rng.standard_normal(tuple(fn(a.detach(), b.detach()).shape)))
        cases.append(_case(name, lambda fn=fn, a=a, b=b, w=w: (fn(a, b) * w).sum(), [a, b]))

    table = _leaf(rng, 5, 3)
    idx = np.array([4, 0, 0, 2])
    w = torch.from_numpy(rng.standard_normal((4, 3)))
    cases.append(_case("gather_rows", lambda: (T.gather_rows(table, idx) * w).sum(), [table]))

    x, gain, bias = _leaf(rng, 3, 6), _leaf(rng, 6, low=0.5, high=1.5), _leaf(rng, 6)
    w = torch.from_numpy(rng.standard_normal((3, 6)))
    cases.append(_case("layer_norm", lambda: (T.layer_norm(x, gain, bias) * w).sum(), [x, gain, bias]))
    return cases


def _case(name: str, fn: Callable, params: Sequence[torch.Tensor]) -> GradCase:
    errs = T.check_gradients(fn, params)
    return GradCase(name, max(errs))


def tiny_config(geometry: str, radius: float) -> LatentConfig:
    return LatentConfig(dp=2, dt=2, geometry=geometry, radius=radius, n_pitch=3, n_timbre=3, input_shape=(4, 3), hidden=(8, 8))


def loss_cases(seed: int = 0) -> List[GradCase]:
    """The full training objective on a tiny model, w.r.t. every parameter, for each geometry setting."""
    cases = []
    for geometry, radius in (("euclidean", 1.0), ("hyperbolic", 1.0), ("hyperbolic", 100.0)):
        cfg = tiny_config(geometry, radius)
        model = DualLatentVAE(cfg, seed=seed)
        drng = np.random.default_rng([seed, 3])
        # zero biases put dead-layer rows exactly on a relu kink; check at a generic point instead
        with torch.no_grad():
            for p in model.store.values():
                p.add_(torch.from_numpy(drng.normal(0.0, 0.1, size=tuple(p.shape))))
        X = torch.from_numpy(drng.standard_normal((4, *cfg.input_shape)))
        y_p = np.array([0, 1, 2, 1])
        y_t = np.array([2, 0, 1, 1])
        params = list(model.store.values())

        def fn(model=model, X=X, y_p=y_p, y_t=y_t):
            return total_loss(model, X, y_p, y_t, np.random.default_rng([seed, 5])).total

        errs = T.check_gradients(fn, params)
        label = geometry if geometry == "euclidean" else f"{geometry} R={radius:g}"
        cases.append(GradCase(f"loss[{label}]", max(errs)))
    return cases


def run_suite(seed: int = 0) -> List[GradCase]:
    return primitive_cases(seed) + loss_cases(seed)
