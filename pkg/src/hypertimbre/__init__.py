"""Hyperbolic timbre embedding with a dual-latent variational autoencoder."""

from . import data, hypergauss, lorentz, losstrain, metrics, model, tensor
from .errors import ConfigError, ContractError, DimensionError, FormatError, GeometryError
from .lorentz import Curvature, ManifoldPoint, TangentVector
from .model import DualLatentVAE, LatentConfig

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ContractError",
    "Curvature",
    "DimensionError",
    "DualLatentVAE",
    "FormatError",
    "GeometryError",
    "LatentConfig",
    "ManifoldPoint",
    "TangentVector",
    "data",
    "hypergauss",
    "lorentz",
    "losstrain",
    "metrics",
    "model",
    "tensor",
]
