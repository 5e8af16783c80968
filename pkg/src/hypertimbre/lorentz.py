r"""Lorentz-model hyperbolic geometry.

Points of the d-dimensional hyperbolic space with curvature ``K < 0`` are
stored as ``d + 1`` ambient coordinates ``x`` with ``<x, x>_L = 1/K`` and
``x[0] > 0``.  All functions work on float64 torch tensors and broadcast over
leading batch dimensions; the last dimension holds the coordinates.  Every
operation is built from differentiable torch primitives so gradients flow
through it without hand-written backward rules.

Small-argument branches use Taylor expansions behind a double ``where`` so
that neither the value nor the gradient produces ``0/0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import torch

from .errors import DimensionError, GeometryError

DTYPE = torch.float64

# below this value of sqrt(-K) * ||v||_L the series expansions are used
SMALL_NORM = 1e-6
TANGENT_TOL = 1e-6
POINT_TOL = 1e-9
TRANSPORT_DENOM_MIN = 1e-12


@dataclass(frozen=True)
class Curvature:
    """Constant negative sectional curvature ``k`` and its radius ``R = 1/sqrt(-k)``."""

    k: float

    def __post_init__(self):
        if not (self.k < 0 and math.isfinite(self.k)):
            raise GeometryError(f"curvature must be finite and negative, got {self.k}")

    @classmethod
    def from_radius(cls, radius: float) -> "Curvature":
        if not radius > 0:
            raise GeometryError(f"curvature radius must be positive, got {radius}")
        return cls(-1.0 / (radius * radius))

    @property
    def radius(self) -> float:
        return 1.0 / math.sqrt(-self.k)

    @property
    def sqrt_neg_k(self) -> float:
        return math.sqrt(-self.k)


CurvatureLike = Union[Curvature, float]


def as_curvature(curv: CurvatureLike) -> Curvature:
    return curv if isinstance(curv, Curvature) else Curvature(float(curv))


def as_tensor(x) -> torch.Tensor:
    if isinstance(x, torch.Tensor):
        return x if x.dtype == DTYPE else x.to(DTYPE)
    return torch.as_tensor(x, dtype=DTYPE)


def lorentz_inner(a, b) -> torch.Tensor:
    """Minkowski inner product ``-a0*b0 + sum_i ai*bi`` over the last axis."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim == 0 or b.ndim == 0 or a.shape[-1] != b.shape[-1]:
        raise DimensionError(
            f"lorentz_inner needs equal trailing lengths, got {tuple(a.shape)} and {tuple(b.shape)}"
        )
    if a.shape[-1] < 2:
        raise DimensionError("lorentz_inner needs vectors of length >= 2")
    prod = a * b
    return prod[..., 1:].sum(-1) - prod[..., 0]


def lorentz_norm(v) -> torch.Tensor:
    """Norm of a tangent (spacelike) vector.

    Timelike inputs have no real norm; their negative self-product is clamped to 0.
    """
    return lorentz_inner(v, v).clamp_min(0.0).sqrt()


def origin(curv: CurvatureLike, d: int) -> torch.Tensor:
    if d < 1:
        raise DimensionError(f"manifold dimension must be >= 1, got {d}")
    curv = as_curvature(curv)
    o = torch.zeros(d + 1, dtype=DTYPE)
    o[0] = curv.radius
    return o


def _check_same_dim(*xs: torch.Tensor) -> None:
    n = xs[0].shape[-1]
    for x in xs[1:]:
        if x.shape[-1] != n:
            raise DimensionError(f"dimension mismatch: {n} vs {x.shape[-1]} coordinates")


def check_point(x, curv: CurvatureLike, tol: float = POINT_TOL) -> None:
    """Raise ``GeometryError`` unless every row of ``x`` lies on the hyperboloid.

    The constraint is tested in the scale-free form ``K<x,x>_L = 1`` with a
    tolerance that grows with ``-K * ||x||^2`` (the rounding floor of the
    product itself).
    """
    x = as_tensor(x)
    curv = as_curvature(curv)
    with torch.no_grad():
        resid = (curv.k * lorentz_inner(x, x) - 1.0).abs()
        scale = 1.0 - curv.k * (x * x).sum(-1)
        if bool((resid > tol * scale).any()) or bool((x[..., 0] <= 0).any()):
            raise GeometryError("point is not on the hyperboloid sheet")


def check_tangent(base, v, tol: float = TANGENT_TOL) -> None:
    base, v = as_tensor(base), as_tensor(v)
    with torch.no_grad():
        dot = lorentz_inner(v, base).abs()
        # normalize by the base scale so the check is independent of R
        bscale = base.norm(dim=-1)
        bound = tol * (1.0 + v.norm(dim=-1)) * bscale.clamp_min(1.0)
        if bool((dot > bound).any()):
            raise GeometryError(f"vector is not tangent at its base point (|<v,x>_L| = {dot.max().item():.3g})")


def _cosh_sinhc(n2: torch.Tensor):
    """Return ``cosh(n)`` and ``sinh(n)/n`` as functions of ``n**2``."""
    small = n2 < SMALL_NORM**2
    n = torch.where(small, torch.ones_like(n2), n2).sqrt()
    cosh = torch.where(small, 1.0 + n2 / 2.0, torch.cosh(n))
    sinhc = torch.where(small, 1.0 + n2 / 6.0, torch.sinh(n) / n)
    return cosh, sinhc


def _asinhc(s2: torch.Tensor) -> torch.Tensor:
    """``asinh(s)/s`` as a function of ``s**2``."""
    small = s2 < SMALL_NORM**2
    s = torch.where(small, torch.ones_like(s2), s2).sqrt()
    return torch.where(small, 1.0 - s2 / 6.0 + 3.0 * s2 * s2 / 40.0, torch.asinh(s) / s)


def log_sinhc(n2: torch.Tensor) -> torch.Tensor:
    """``log(sinh(n)/n)`` as a function of ``n**2``, overflow-safe for large ``n``."""
    small = n2 < 1e-4
    n = torch.where(small, torch.ones_like(n2), n2).sqrt()
    # log(sinh n) = n + log1p(-exp(-2n)) - log 2
    big = n + torch.log1p(-torch.exp(-2.0 * n)) - math.log(2.0) - torch.log(n)
    series = n2 / 6.0 - n2 * n2 / 180.0 + n2 * n2 * n2 / 2835.0
    return torch.where(small, series, big)


def distance(a, b, curv: CurvatureLike) -> torch.Tensor:
    """Geodesic distance ``R * acosh(K <a, b>_L)``.

    The argument is clamped below at 1 so coincident points give 0, not NaN.
    """
    a, b = as_tensor(a), as_tensor(b)
    _check_same_dim(a, b)
    curv = as_curvature(curv)
    arg = (curv.k * lorentz_inner(a, b)).clamp_min(1.0)
    return curv.radius * torch.acosh(arg)


def exp_map(base, v, curv: CurvatureLike, check: bool = True) -> torch.Tensor:
    """Map tangent vector ``v`` at ``base`` onto the manifold along the geodesic."""
    base, v = as_tensor(base), as_tensor(v)
    _check_same_dim(base, v)
    curv = as_curvature(curv)
    if check:
        check_tangent(base, v)
    n2 = (-curv.k * lorentz_inner(v, v)).clamp_min(0.0)
    cosh, sinhc = _cosh_sinhc(n2)
    return cosh.unsqueeze(-1) * base + sinhc.unsqueeze(-1) * v


def log_map(base, target, curv: CurvatureLike) -> torch.Tensor:
    """Tangent vector at ``base`` pointing to ``target`` with length equal to their distance.

    Uses ``u = asinh(s)/s * (target - K<base,target>_L base)`` with
    ``s = sqrt(-K) ||target - K<base,target>_L base||_L``, which equals the
    acosh form and stays well conditioned as ``target -> base``.
    """
    base, target = as_tensor(base), as_tensor(target)
    _check_same_dim(base, target)
    curv = as_curvature(curv)
    alpha = curv.k * lorentz_inner(base, target)
    v = target - alpha.unsqueeze(-1) * base
    s2 = (-curv.k * lorentz_inner(v, v)).clamp_min(0.0)
    return _asinhc(s2).unsqueeze(-1) * v


def parallel_transport(src, dst, v, curv: CurvatureLike) -> torch.Tensor:
    """Move tangent vector ``v`` from ``src`` to ``dst`` along their geodesic."""
    src, dst, v = as_tensor(src), as_tensor(dst), as_tensor(v)
    _check_same_dim(src, dst, v)
    curv = as_curvature(curv)
    denom = 1.0 + curv.k * lorentz_inner(src, dst)
    if bool((denom.detach().abs() < TRANSPORT_DENOM_MIN).any()):
        raise GeometryError("parallel transport between antipodal-degenerate points")
    coef = curv.k * lorentz_inner(dst, v) / denom
    return v - coef.unsqueeze(-1) * (src + dst)


def lift_to_tangent(w) -> torch.Tensor:
    """Embed ``w`` in R^d as the tangent vector ``[0, w]`` at the origin."""
    w = as_tensor(w)
    return torch.cat([torch.zeros_like(w[..., :1]), w], dim=-1)


def proj(base, w_at_origin, curv: CurvatureLike, check: bool = True) -> torch.Tensor:
    """Transport a tangent vector from the origin to ``base`` and apply the exponential map there."""
    base, w_at_origin = as_tensor(base), as_tensor(w_at_origin)
    curv = as_curvature(curv)
    o = origin(curv, base.shape[-1] - 1).expand_as(base)
    if check:
        check_tangent(o, w_at_origin)
    u = parallel_transport(o, base, w_at_origin, curv)
    return exp_map(base, u, curv, check=False)


def expmap0(xi, curv: CurvatureLike) -> torch.Tensor:
    """Point reached from the origin along tangent coordinates ``xi`` in R^d."""
    xi = as_tensor(xi)
    curv = as_curvature(curv)
    o = origin(curv, xi.shape[-1])
    return exp_map(o.expand(*xi.shape[:-1], -1), lift_to_tangent(xi), curv, check=False)


def logmap0(x, curv: CurvatureLike) -> torch.Tensor:
    """Inverse of :func:`expmap0`; returns the d spatial tangent coordinates at the origin."""
    x = as_tensor(x)
    curv = as_curvature(curv)
    o = origin(curv, x.shape[-1] - 1)
    return log_map(o.expand_as(x), x, curv)[..., 1:]


def project_to_manifold(coords, curv: CurvatureLike) -> torch.Tensor:
    """Repair floating-point drift by recomputing the time coordinate."""
    coords = as_tensor(coords)
    curv = as_curvature(curv)
    space = coords[..., 1:]
    x0 = (-1.0 / curv.k + (space * space).sum(-1, keepdim=True)).sqrt()
    return torch.cat([x0, space], dim=-1)


@dataclass(frozen=True)
class ManifoldPoint:
    """A validated point on the hyperboloid."""

    coords: torch.Tensor
    curvature: Curvature

    def __post_init__(self):
        object.__setattr__(self, "coords", as_tensor(self.coords))
        if self.coords.ndim != 1 or self.coords.shape[0] < 2:
            raise DimensionError("a manifold point needs a 1-D coordinate vector of length >= 2")
        check_point(self.coords, self.curvature)

    @property
    def dim(self) -> int:
        return self.coords.shape[0] - 1

    def _compatible(self, other: "ManifoldPoint") -> None:
        if other.curvature != self.curvature:
            raise GeometryError(f"curvature mismatch: {self.curvature.k} vs {other.curvature.k}")
        if other.dim != self.dim:
            raise GeometryError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def distance(self, other: "ManifoldPoint") -> float:
        self._compatible(other)
        return float(distance(self.coords, other.coords, self.curvature))

    def log(self, other: "ManifoldPoint") -> "TangentVector":
        self._compatible(other)
        return TangentVector(self, log_map(self.coords, other.coords, self.curvature))

    def exp(self, v: "TangentVector") -> "ManifoldPoint":
        if v.base is not self:
            self._compatible(v.base)
        return ManifoldPoint(exp_map(self.coords, v.coords, self.curvature), self.curvature)


@dataclass(frozen=True)
class TangentVector:
    """A vector in the tangent space of ``base``."""

    base: ManifoldPoint
    coords: torch.Tensor

    def __post_init__(self):
        object.__setattr__(self, "coords", as_tensor(self.coords))
        _check_same_dim(self.base.coords, self.coords)
        check_tangent(self.base.coords, self.coords)

    def norm(self) -> float:
        return float(lorentz_norm(self.coords))

    def transport(self, dst: ManifoldPoint) -> "TangentVector":
        self.base._compatible(dst)
        return TangentVector(dst, parallel_transport(self.base.coords, dst.coords, self.coords, dst.curvature))
