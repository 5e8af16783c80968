"""Pseudo-hyperbolic (wrapped) Gaussian on the Lorentz model.

A sample is drawn as ``w ~ N(0, diag(sigma)^2)`` in R^d, lifted to the
origin's tangent space, transported to the mean and pushed through the
exponential map.  The density picks up the volume change of that map,
``(d - 1) * log(sinh(r)/r)`` with ``r = sqrt(-K) * ||w||``.

The batched kernels (``sample_wrapped``, ``log_density_wrapped``,
``label_log_posterior``) take raw tensors and are what the model uses; the
functions taking :class:`WrappedGaussianParams` are the validated single-
distribution surface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import torch

from . import lorentz as L
from .errors import GeometryError

LOG_2PI = math.log(2.0 * math.pi)


def gaussian_log_density(w: torch.Tensor, sigma: torch.Tensor) -> torch.Tensor:
    """Log density of ``N(0, diag(sigma)^2)`` at ``w``, summed over the last axis."""
    return (-0.5 * (w / sigma) ** 2 - torch.log(sigma) - 0.5 * LOG_2PI).sum(-1)


def sample_wrapped(mean, sigma, eps, curv: L.CurvatureLike):
    """Reparameterized draw: returns ``(z, w)`` with ``w = eps * sigma``."""
    mean, sigma, eps = L.as_tensor(mean), L.as_tensor(sigma), L.as_tensor(eps)
    w = eps * sigma
    z = L.proj(mean.expand(*w.shape[:-1], -1), L.lift_to_tangent(w), curv, check=False)
    return z, w


def tangent_coords_at_origin(z, mean, curv: L.CurvatureLike) -> torch.Tensor:
    """Invert the sampling map: the ``w`` in R^d that ``proj(mean, [0, w])`` sends to ``z``."""
    curv = L.as_curvature(curv)
    z, mean = L.as_tensor(z), L.as_tensor(mean)
    mean = mean.expand_as(z) if mean.shape != z.shape else mean
    u = L.log_map(mean, z, curv)
    o = L.origin(curv, z.shape[-1] - 1).expand_as(z)
    return L.parallel_transport(mean, o, u, curv)[..., 1:]


def log_density_wrapped(z, mean, sigma, curv: L.CurvatureLike, w=None) -> torch.Tensor:
    """Log density of the wrapped Gaussian at ``z``.

    Pass ``w`` when ``z`` came from :func:`sample_wrapped` with the same mean to
    skip the log-map/transport inversion.
    """
    curv = L.as_curvature(curv)
    sigma = L.as_tensor(sigma)
    if w is None:
        w = tangent_coords_at_origin(z, mean, curv)
    else:
        w = L.as_tensor(w)
    d = w.shape[-1]
    n2 = -curv.k * (w * w).sum(-1)
    return gaussian_log_density(w, sigma) - (d - 1) * L.log_sinhc(n2)


def label_log_posterior(log_likelihoods: torch.Tensor, log_class_prior: Optional[torch.Tensor] = None) -> torch.Tensor:
    """Bayes rule in log space over the last axis."""
    logits = log_likelihoods if log_class_prior is None else log_likelihoods + log_class_prior
    return torch.log_softmax(logits, dim=-1)


@dataclass(frozen=True)
class WrappedGaussianParams:
    mean: torch.Tensor
    sigma: torch.Tensor
    curvature: L.Curvature

    def __post_init__(self):
        object.__setattr__(self, "mean", L.as_tensor(self.mean))
        object.__setattr__(self, "sigma", L.as_tensor(self.sigma))
        if self.sigma.ndim != 1 or self.sigma.shape[0] != self.mean.shape[-1] - 1:
            raise GeometryError("sigma must have one entry per manifold dimension")
        if not bool((self.sigma > 0).all()):
            raise GeometryError("sigma entries must be positive")
        L.check_point(self.mean, self.curvature)

    @property
    def dim(self) -> int:
        return self.sigma.shape[0]


def sample(params: WrappedGaussianParams, rng: np.random.Generator, n: Optional[int] = None):
    """Draw one sample (or ``n`` stacked samples); returns ``(z, w)``."""
    shape = (params.dim,) if n is None else (n, params.dim)
    eps = torch.from_numpy(rng.standard_normal(shape))
    return sample_wrapped(params.mean, params.sigma, eps, params.curvature)


def log_density(z, params: WrappedGaussianParams, check: bool = True) -> torch.Tensor:
    z = L.as_tensor(z)
    if check:
        L.check_point(z, params.curvature)
    return log_density_wrapped(z, params.mean, params.sigma, params.curvature)


def kl_monte_carlo(q: WrappedGaussianParams, p: WrappedGaussianParams, n: int, rng: np.random.Generator) -> float:
    """Sample-average estimate of ``KL(q || p)`` from ``n`` draws of ``q``."""
    if q.curvature != p.curvature or q.dim != p.dim:
        raise GeometryError("KL needs distributions on the same manifold")
    z, _ = sample(q, rng, n)
    # both densities go through the same inversion so q == p cancels exactly
    diff = log_density_wrapped(z, q.mean, q.sigma, q.curvature) - log_density_wrapped(z, p.mean, p.sigma, p.curvature)
    return float(diff.mean())


def timbre_posterior(z, priors: Sequence[WrappedGaussianParams], class_prior=None) -> torch.Tensor:
    """Posterior probabilities of each prior component having generated ``z``."""
    if len(priors) == 0:
        raise GeometryError("timbre_posterior needs at least one prior component")
    z = L.as_tensor(z)
    loglik = torch.stack([log_density_wrapped(z, p.mean, p.sigma, p.curvature) for p in priors], dim=-1)
    if class_prior is None:
        log_prior = torch.full((len(priors),), -math.log(len(priors)), dtype=L.DTYPE)
    else:
        log_prior = torch.log(L.as_tensor(class_prior))
    return label_log_posterior(loglik, log_prior).exp()
