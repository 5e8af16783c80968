"""Training objective and optimization loop.

The loss is the negative ELBO plus the pitch and timbre cross-entropies:

    total = -(recon - kl_pitch - kl_timbre_expected - kl_category) + ce_pitch + ce_timbre

with every term averaged over the batch.  ``kl_timbre_expected`` weights a
Monte-Carlo KL against each timbre prior by the approximate label posterior;
the label posterior is evaluated on the same latent draw.
"""

from __future__ import annotations

import copy
import io
import math
from dataclasses import dataclass, fields
from typing import Dict, List, Optional, Sequence

import numpy as np
import torch

from . import tensor as T
from .data import Dataset
from .errors import ConfigError, DimensionError, GeometryError
from .model import DualLatentVAE, draw_normal


# -- loss terms --------------------------------------------------------------


def kl_gaussian_diag(xi, eta, mu, sigma) -> torch.Tensor:
    """Closed-form ``KL(N(xi, diag(eta)^2) || N(mu, diag(sigma)^2))`` summed over the last axis."""
    xi, eta, mu, sigma = (torch.as_tensor(v, dtype=T.DTYPE) for v in (xi, eta, mu, sigma))
    if bool((eta <= 0).any()) or bool((sigma <= 0).any()):
        raise GeometryError("KL needs strictly positive scales")
    return (torch.log(sigma / eta) + (eta**2 + (xi - mu) ** 2) / (2.0 * sigma**2) - 0.5).sum(-1)


def kl_categorical_uniform(q=None, log_q=None) -> torch.Tensor:
    """``sum_j q_j log(|T| q_j)``; pass ``log_q`` to stay finite when probabilities underflow."""
    if log_q is None:
        q = torch.as_tensor(q, dtype=T.DTYPE)
        n = q.shape[-1]
        return (torch.xlogy(q, q) + q * math.log(n)).sum(-1)
    n = log_q.shape[-1]
    return (torch.exp(log_q) * (log_q + math.log(n))).sum(-1)


def q_timbre_label(model: DualLatentVAE, X, rng: Optional[np.random.Generator] = None, n_samples: int = 1) -> torch.Tensor:
    """Approximate ``q(y_t | X)``.

    With ``rng`` the expectation over the timbre posterior is estimated from
    ``n_samples`` draws; without it the posterior mean is plugged in.
    """
    mean, log_eta, _ = model.encode_timbre(X)
    if rng is None:
        return model.timbre_log_posterior(mean).exp()
    logs = []
    for _ in range(n_samples):
        z, _w = model.reparameterize_timbre(mean, log_eta, draw_normal(rng, *log_eta.shape))
        logs.append(model.timbre_log_posterior(z))
    return (torch.logsumexp(torch.stack(logs), dim=0) - math.log(n_samples)).exp()


LOSS_FIELDS = ("recon", "kl_pitch", "kl_timbre_expected", "kl_category", "ce_pitch", "ce_timbre", "total")


@dataclass
class LossBreakdown:
    recon: torch.Tensor
    kl_pitch: torch.Tensor
    kl_timbre_expected: torch.Tensor
    kl_category: torch.Tensor
    ce_pitch: torch.Tensor
    ce_timbre: torch.Tensor
    total: torch.Tensor

    def values(self) -> Dict[str, float]:
        return {f: float(getattr(self, f).detach()) for f in LOSS_FIELDS}

    def elbo(self, include_pitch_kl: bool = True) -> torch.Tensor:
        out = self.recon - self.kl_timbre_expected - self.kl_category
        return out - self.kl_pitch if include_pitch_kl else out


def total_loss(model: DualLatentVAE, X, y_p, y_t, rng: np.random.Generator, mc_samples: int = 1) -> LossBreakdown:
    cfg = model.cfg
    y_p = torch.as_tensor(np.asarray(y_p), dtype=torch.long)
    y_t = torch.as_tensor(np.asarray(y_t), dtype=torch.long)
    if y_p.numel() and (int(y_p.min()) < 0 or int(y_p.max()) >= cfg.n_pitch):
        raise GeometryError("pitch label out of range")
    if y_t.numel() and (int(y_t.min()) < 0 or int(y_t.max()) >= cfg.n_timbre):
        raise GeometryError("timbre label out of range")
    x = model.flatten(X)
    if x.shape[0] != y_p.shape[0] or x.shape[0] != y_t.shape[0]:
        raise DimensionError("batch sizes of inputs and labels differ")
    B = x.shape[0]

    enc = model.encode(x)
    eta_p = torch.exp(enc.log_eta_p)
    eta_t = torch.exp(enc.log_eta_t)

    z_p = model.reparameterize_pitch(enc.xi_p, enc.log_eta_p, draw_normal(rng, B, cfg.dp))
    draws = [model.reparameterize_timbre(enc.mean_t, enc.log_eta_t, draw_normal(rng, B, cfg.dt)) for _ in range(mc_samples)]

    x_hat = model.decode(z_p, draws[0][0])
    recon = -0.5 * ((x - x_hat.reshape(B, -1)) ** 2).sum(-1)

    mu_p = T.gather_rows(model.pitch_prior_means(), y_p)
    kl_pitch = kl_gaussian_diag(enc.xi_p, eta_p, mu_p, model.pitch_sigma.expand_as(mu_p))

    kl_per_label = 0.0
    log_posts = []
    for z_t, w in draws:
        log_q = model.geometry.log_density(z_t, enc.mean_t, eta_t, w=w)
        log_lik = model.timbre_log_likelihoods(z_t)
        kl_per_label = kl_per_label + (log_q.unsqueeze(-1) - log_lik)
        log_posts.append(T.log_softmax(log_lik + model.log_class_prior))
    kl_per_label = kl_per_label / mc_samples
    log_q_y = torch.logsumexp(torch.stack(log_posts), dim=0) - math.log(mc_samples)
    q_y = torch.exp(log_q_y)

    kl_timbre_expected = (q_y * kl_per_label).sum(-1)
    kl_category = kl_categorical_uniform(log_q=log_q_y)
    ce_pitch = -T.log_softmax(model.pitch_logits(z_p)).gather(-1, y_p[:, None]).squeeze(-1)
    ce_timbre = -log_q_y.gather(-1, y_t[:, None]).squeeze(-1)

    terms = [t.mean() for t in (recon, kl_pitch, kl_timbre_expected, kl_category, ce_pitch, ce_timbre)]
    recon, kl_pitch, kl_timbre_expected, kl_category, ce_pitch, ce_timbre = terms
    total = -(recon - kl_pitch - kl_timbre_expected - kl_category) + ce_pitch + ce_timbre
    return LossBreakdown(recon, kl_pitch, kl_timbre_expected, kl_category, ce_pitch, ce_timbre, total)


# -- configuration -----------------------------------------------------------


@dataclass
class TrainConfig:
    batch_size: int = 128
    lr: float = 5e-3
    max_epochs: int = 2000
    patience: int = 50
    max_steps: int = 0  # 0 means no step limit
    mc_samples: int = 1
    seed: int = 0
    # validation criterion: ELBO without the pitch KL ("elbo_no_pitch_kl") or the full ELBO ("elbo")
    criterion: str = "elbo_no_pitch_kl"

    def validate(self) -> None:
        for name in ("batch_size", "max_epochs", "mc_samples"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.patience < 0 or self.max_steps < 0 or self.seed < 0:
            raise ConfigError("patience, max_steps and seed must be non-negative")
        if not self.lr > 0:
            raise ConfigError("lr must be positive")
        if self.criterion not in ("elbo_no_pitch_kl", "elbo"):
            raise ConfigError(f"unknown criterion {self.criterion!r}")

    @classmethod
    def paper(cls) -> "TrainConfig":
        return cls(batch_size=128, lr=1e-4, max_epochs=1_000_000, patience=1000)


def parse_config_text(text: str, known: Sequence[str]) -> Dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment; unknown keys are errors."""
    out: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = value
    return out


def coerce(value: str, like):
    if isinstance(like, bool):
        return value.lower() in ("1", "true", "yes")
    if isinstance(like, int):
        return int(value)
    if isinstance(like, float):
        return float(value)
    if isinstance(like, tuple):
        return tuple(int(v) for v in value.replace(",", " ").split())
    return value


def load_train_config(path, base: Optional[TrainConfig] = None) -> TrainConfig:
    base = copy.copy(base or TrainConfig())
    with open(path) as fh:
        entries = parse_config_text(fh.read(), [f.name for f in fields(TrainConfig)])
    for k, v in entries.items():
        try:
            setattr(base, k, coerce(v, getattr(base, k)))
        except ValueError:
            raise ConfigError(f"bad value for {k}: {v!r}") from None
    base.validate()
    return base


# -- training loop -----------------------------------------------------------

LOG_COLUMNS = ("epoch", "step") + LOSS_FIELDS + ("val_criterion",)


@dataclass
class TrainResult:
    model: DualLatentVAE
    log: List[Dict[str, float]]
    best_epoch: int
    best_criterion: float
    steps: int

    def log_tsv(self) -> str:
        buf = io.StringIO()
        buf.write("\t".join(LOG_COLUMNS) + "\n")
        for row in self.log:
            buf.write("\t".join(_fmt(row[c]) for c in LOG_COLUMNS) + "\n")
        return buf.getvalue()


def _fmt(v) -> str:
    return str(v) if isinstance(v, int) else repr(float(v))


def validation_criterion(model: DualLatentVAE, X, y_p, y_t, seed: int, mc_samples: int, criterion: str) -> float:
    """ELBO on held-out data (higher is better), with a fixed noise stream so epochs are comparable."""
    with torch.no_grad():
        br = total_loss(model, X, y_p, y_t, np.random.default_rng([seed, 424242]), mc_samples)
    return float(br.elbo(include_pitch_kl=(criterion == "elbo")))


def train(dataset: Dataset, cfg: TrainConfig, model: DualLatentVAE, progress=None) -> TrainResult:
    """Mini-batch Adam with early stopping on the validation criterion.

    Returns the parameters of the best validation epoch.  ``progress`` is an
    optional callable receiving each log row.
    """
    cfg.validate()
    X_tr, yp_tr, yt_tr = dataset.subset("train")
    X_va, yp_va, yt_va = dataset.subset("val")
    if len(X_tr) == 0 or len(X_va) == 0:
        raise ConfigError("training needs non-empty train and val splits")
    X_tr = torch.from_numpy(X_tr.astype(np.float64))
    X_va = torch.from_numpy(X_va.astype(np.float64))
    rng = np.random.default_rng([cfg.seed, 1])
    batch = min(cfg.batch_size, len(X_tr))

    best = -math.inf
    best_epoch = -1
    best_state = model.store.state_dict()
    since_best = 0
    step = 0
    log: List[Dict[str, float]] = []
    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(len(X_tr))
        sums = dict.fromkeys(LOSS_FIELDS, 0.0)
        n_batches = 0
        for start in range(0, len(order), batch):
            idx = order[start : start + batch]
            model.store.zero_grad()
            br = total_loss(model, X_tr[idx], yp_tr[idx], yt_tr[idx], rng, cfg.mc_samples)
            T.backward(br.total)
            T.adam_step(model.store, lr=cfg.lr)
            for k, v in br.values().items():
                sums[k] += v
            n_batches += 1
            step += 1
            if cfg.max_steps and step >= cfg.max_steps:
                break
        crit = validation_criterion(model, X_va, yp_va, yt_va, cfg.seed, cfg.mc_samples, cfg.criterion)
        row = {"epoch": epoch, "step": step, **{k: v / n_batches for k, v in sums.items()}, "val_criterion": crit}
        log.append(row)
        if progress is not None:
            progress(row)
        if crit > best:
            best, best_epoch, since_best = crit, epoch, 0
            best_state = model.store.state_dict()
        else:
            since_best += 1
        if since_best > cfg.patience or (cfg.max_steps and step >= cfg.max_steps):
            break
    model.store.load_state_dict(best_state)
    model.store.zero_grad()
    return TrainResult(model, log, best_epoch, best, step)
