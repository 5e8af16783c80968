"""Dual-latent VAE: Euclidean pitch latent, Euclidean or hyperbolic timbre latent.

All weights live in a :class:`~hypertimbre.tensor.ParamStore`; the networks
are plain functions of that store built from the kernel primitives.  The
timbre geometry is a small strategy object so the Euclidean baseline and the
Lorentz model share every other line of code.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Tuple

import numpy as np
import torch

from . import hypergauss as HG
from . import lorentz as L
from . import tensor as T
from .errors import ConfigError, DimensionError

PITCH_PRIOR_SIGMA = math.exp(-2.0)
TIMBRE_PRIOR_SIGMA = 1.0


@dataclass
class LatentConfig:
    dp: int = 8
    dt: int = 4
    geometry: str = "hyperbolic"
    radius: float = 100.0
    n_pitch: int = 20
    n_timbre: int = 12
    input_shape: Tuple[int, int] = (64, 16)
    hidden: Tuple[int, ...] = (256, 128)
    # how the decoder sees a hyperbolic latent: "ambient" (d+1 coords) or "tangent" (log map at origin)
    decoder_input: str = "ambient"

    def validate(self) -> None:
        if self.dp < 1 or self.dt < 1:
            raise ConfigError("latent dimensions must be >= 1")
        if self.n_pitch < 1 or self.n_timbre < 1:
            raise ConfigError("label counts must be >= 1")
        if self.geometry not in ("euclidean", "hyperbolic"):
            raise ConfigError(f"unknown geometry {self.geometry!r}")
        if not self.radius > 0:
            raise ConfigError("curvature radius must be positive")
        if self.decoder_input not in ("ambient", "tangent"):
            raise ConfigError(f"unknown decoder_input {self.decoder_input!r}")
        if len(self.input_shape) != 2 or min(self.input_shape) < 1:
            raise ConfigError("input_shape must be (n_mel, n_frames)")

    @property
    def input_size(self) -> int:
        return int(self.input_shape[0] * self.input_shape[1])

    def to_json(self) -> str:
        d = asdict(self)
        d["input_shape"] = list(self.input_shape)
        d["hidden"] = list(self.hidden)
        return json.dumps(d, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "LatentConfig":
        d = json.loads(text)
        d["input_shape"] = tuple(d["input_shape"])
        d["hidden"] = tuple(d["hidden"])
        cfg = cls(**d)
        cfg.validate()
        return cfg


# -- timbre geometries -------------------------------------------------------


class EuclideanTimbre:
    """Luo-style Gaussian timbre latent in R^dt."""

    name = "euclidean"

    def __init__(self, dt: int):
        self.dt = dt
        self.decoder_features_dim = dt

    def mean_from_output(self, xi):
        return xi

    def sample(self, mean, eta, eps):
        w = eps * eta
        return mean + w, w

    def log_density(self, z, mean, sigma, w=None):
        if w is None:
            w = z - mean
        return HG.gaussian_log_density(w, sigma)

    def decoder_features(self, z):
        return z

    def tangent_coords(self, z):
        return z

    def distance(self, a, b):
        return (L.as_tensor(a) - L.as_tensor(b)).norm(dim=-1)


class HyperbolicTimbre:
    """Pseudo-hyperbolic Gaussian timbre latent on the Lorentz model."""

    name = "hyperbolic"

    def __init__(self, dt: int, radius: float, decoder_input: str = "ambient"):
        self.dt = dt
        self.curv = L.Curvature.from_radius(radius)
        self.decoder_input = decoder_input
        self.decoder_features_dim = dt + 1 if decoder_input == "ambient" else dt

    def mean_from_output(self, xi):
        return L.expmap0(xi, self.curv)

    def sample(self, mean, eta, eps):
        return HG.sample_wrapped(mean, eta, eps, self.curv)

    def log_density(self, z, mean, sigma, w=None):
        return HG.log_density_wrapped(z, mean, sigma, self.curv, w=w)

    def decoder_features(self, z):
        return z if self.decoder_input == "ambient" else L.logmap0(z, self.curv)

    def tangent_coords(self, z):
        return L.logmap0(z, self.curv)

    def distance(self, a, b):
        return L.distance(a, b, self.curv)


def make_geometry(cfg: LatentConfig):
    if cfg.geometry == "euclidean":
        return EuclideanTimbre(cfg.dt)
    return HyperbolicTimbre(cfg.dt, cfg.radius, cfg.decoder_input)


# -- model -------------------------------------------------------------------


def _mlp_params(store: T.ParamStore, prefix: str, sizes, rng) -> None:
    for i, (a, b) in enumerate(zip(sizes[:-1], sizes[1:])):
        last = i == len(sizes) - 2
        tag = "out" if last else str(i)
        store.add(f"{prefix}.{tag}.W", T.xavier_init((a, b), rng))
        store.add(f"{prefix}.{tag}.b", np.zeros(b))
        if not last:
            store.add(f"{prefix}.{tag}.ln_gain", np.ones(b))
            store.add(f"{prefix}.{tag}.ln_bias", np.zeros(b))


def _mlp(store: T.ParamStore, prefix: str, x, n_layers: int):
    for i in range(n_layers - 1):
        p = f"{prefix}.{i}"
        x = T.relu(T.add(T.matmul(x, store[p + ".W"]), store[p + ".b"]))
        x = T.layer_norm(x, store[p + ".ln_gain"], store[p + ".ln_bias"])
    return T.add(T.matmul(x, store[prefix + ".out.W"]), store[prefix + ".out.b"])


@dataclass
class Encoded:
    xi_p: torch.Tensor
    log_eta_p: torch.Tensor
    xi_t: torch.Tensor
    mean_t: torch.Tensor
    log_eta_t: torch.Tensor


class DualLatentVAE:
    def __init__(self, cfg: LatentConfig, seed: int = 0, store: Optional[T.ParamStore] = None):
        cfg.validate()
        self.cfg = cfg
        self.geometry = make_geometry(cfg)
        if store is None:
            store = T.ParamStore()
            rng = np.random.default_rng(seed)
            h = list(cfg.hidden)
            _mlp_params(store, "enc_p", [cfg.input_size, *h, 2 * cfg.dp], rng)
            _mlp_params(store, "enc_t", [cfg.input_size, *h, 2 * cfg.dt], rng)
            _mlp_params(store, "dec", [cfg.dp + self.geometry.decoder_features_dim, *reversed(h), cfg.input_size], rng)
            store.add("cls.W", T.xavier_init((cfg.dp, cfg.n_pitch), rng))
            store.add("cls.b", np.zeros(cfg.n_pitch))
            store.add("prior.pitch_means", T.xavier_init((cfg.n_pitch, cfg.dp), rng))
            store.add("prior.timbre_tangents", T.xavier_init((cfg.n_timbre, cfg.dt), rng))
        self.store = store
        self.n_layers = len(cfg.hidden) + 1
        self.pitch_sigma = torch.full((cfg.dp,), PITCH_PRIOR_SIGMA, dtype=T.DTYPE)
        self.timbre_sigma = torch.full((cfg.dt,), TIMBRE_PRIOR_SIGMA, dtype=T.DTYPE)
        self.log_class_prior = torch.full((cfg.n_timbre,), -math.log(cfg.n_timbre), dtype=T.DTYPE)

    # -- parts

    def flatten(self, X) -> torch.Tensor:
        X = torch.as_tensor(np.asarray(X) if not isinstance(X, torch.Tensor) else X).to(T.DTYPE)
        if X.ndim == 2 and X.shape[-1] == self.cfg.input_size:
            return X
        if tuple(X.shape[-2:]) != tuple(self.cfg.input_shape):
            raise DimensionError(f"input shape {tuple(X.shape)} does not match configured {self.cfg.input_shape}")
        return X.reshape(*X.shape[:-2], self.cfg.input_size)

    def encode_pitch(self, X):
        out = _mlp(self.store, "enc_p", self.flatten(X), self.n_layers)
        return out[..., : self.cfg.dp], out[..., self.cfg.dp :]

    def encode_timbre(self, X):
        """Returns ``(mean, log_eta, xi)``; ``xi`` is the raw tangent output at the origin."""
        out = _mlp(self.store, "enc_t", self.flatten(X), self.n_layers)
        xi, log_eta = out[..., : self.cfg.dt], out[..., self.cfg.dt :]
        return self.geometry.mean_from_output(xi), log_eta, xi

    def encode(self, X) -> Encoded:
        xi_p, log_eta_p = self.encode_pitch(X)
        mean_t, log_eta_t, xi_t = self.encode_timbre(X)
        return Encoded(xi_p, log_eta_p, xi_t, mean_t, log_eta_t)

    def reparameterize_pitch(self, xi, log_eta, eps):
        return xi + eps * torch.exp(log_eta)

    def reparameterize_timbre(self, mean, log_eta, eps):
        """Returns ``(z, w)``; ``w`` is the Gaussian draw before it is mapped onto the latent space."""
        return self.geometry.sample(mean, torch.exp(log_eta), eps)

    def decode(self, z_p, z_t):
        feats = self.geometry.decoder_features(z_t)
        if z_p.shape[-1] != self.cfg.dp or feats.shape[-1] != self.geometry.decoder_features_dim:
            raise DimensionError("latent sizes do not match the model configuration")
        x = _mlp(self.store, "dec", T.concat([z_p, feats]), self.n_layers)
        return x.reshape(*x.shape[:-1], *self.cfg.input_shape)

    def pitch_logits(self, z_p):
        return T.add(T.matmul(z_p, self.store["cls.W"]), self.store["cls.b"])

    def classify_pitch(self, z_p):
        return torch.softmax(self.pitch_logits(z_p), dim=-1)

    # -- priors

    def pitch_prior_means(self):
        return self.store["prior.pitch_means"]

    def timbre_prior_means(self):
        return self.geometry.mean_from_output(self.store["prior.timbre_tangents"])

    def timbre_log_likelihoods(self, z_t, w=None):
        """``log p(z_t | y_t = j)`` for every label ``j``; shape ``(..., |T|)``."""
        means = self.timbre_prior_means()
        z = z_t.unsqueeze(-2).expand(*z_t.shape[:-1], means.shape[0], z_t.shape[-1])
        return self.geometry.log_density(z, means, self.timbre_sigma)

    def timbre_log_posterior(self, z_t):
        return HG.label_log_posterior(self.timbre_log_likelihoods(z_t), self.log_class_prior)

    # -- persistence

    def save(self, path) -> None:
        T.save_params(self.store, path)
        with open(str(path) + ".json", "w") as fh:
            fh.write(self.cfg.to_json() + "\n")

    @classmethod
    def load(cls, path) -> "DualLatentVAE":
        with open(str(path) + ".json") as fh:
            cfg = LatentConfig.from_json(fh.read())
        model = cls(cfg)
        model.store.load_state_dict(T.load_params(path))
        return model


def draw_normal(rng: np.random.Generator, *shape) -> torch.Tensor:
    return torch.from_numpy(rng.standard_normal(shape))
