"""Timbre classification accuracy and hierarchical separability."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import torch

from .data import Dataset, family_pairs
from .errors import ContractError


def confusion_matrix(y_true, y_pred, n_classes: int) -> np.ndarray:
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (np.asarray(y_true), np.asarray(y_pred)), 1)
    return cm


def accuracy(y_true, y_pred) -> float:
    y_true, y_pred = np.asarray(y_true), np.asarray(y_pred)
    if y_true.size == 0:
        raise ContractError("accuracy of an empty split is undefined")
    return float((y_true == y_pred).sum()) / y_true.size


def map_predict(log_posterior) -> np.ndarray:
    """Arg-max over the last axis; ties go to the lowest class index."""
    return np.argmax(np.asarray(log_posterior), axis=-1)


def predict_timbre(model, X) -> np.ndarray:
    """MAP timbre labels with the latent set to the posterior mean."""
    with torch.no_grad():
        mean, _, _ = model.encode_timbre(torch.from_numpy(np.asarray(X, dtype=np.float64)))
        return map_predict(model.timbre_log_posterior(mean).numpy())


def timbre_accuracy(model, dataset: Dataset, split: str = "test") -> Tuple[float, np.ndarray]:
    X, _, y_t = dataset.subset(split)
    if len(X) == 0:
        raise ContractError(f"split {split!r} is empty")
    pred = predict_timbre(model, X)
    return accuracy(y_t, pred), confusion_matrix(y_t, pred, model.cfg.n_timbre)


@dataclass
class Separability:
    d_same: float
    d_diff: float
    s: float
    n_same: int
    n_diff: int
    diagnostic: str = ""


def hierarchical_separability(means, families: Sequence[int], distance: Callable) -> Separability:
    """Mean within-family and cross-family distances between prior means and their ratio.

    ``distance(a, b)`` receives two stacked coordinate arrays and returns the
    per-row distances.  A zero within-family distance leaves ``s`` undefined
    (NaN) with a diagnostic.
    """
    means = torch.as_tensor(np.asarray(means, dtype=np.float64))
    if means.shape[0] != len(families):
        raise ContractError("one family id per mean is required")
    same, diff = family_pairs(families)
    if len(means) < 2 or not same or not diff:
        raise ContractError("need at least one same-family and one cross-family pair")

    def mean_dist(pairs):
        a = means[[i for i, _ in pairs]]
        b = means[[j for _, j in pairs]]
        return float(torch.as_tensor(distance(a, b)).mean())

    d_same, d_diff = mean_dist(same), mean_dist(diff)
    if d_same == 0.0:
        return Separability(d_same, d_diff, math.nan, len(same), len(diff), "same-family prior means coincide; S undefined")
    return Separability(d_same, d_diff, d_diff / d_same, len(same), len(diff))


def euclidean_distance(a, b):
    return (torch.as_tensor(a) - torch.as_tensor(b)).norm(dim=-1)


@dataclass
class EvalReport:
    accuracy: float
    d_same: float
    d_diff: float
    s: float
    confusion: np.ndarray
    geometry: str
    radius: Optional[float]
    dt: int
    dp: int
    seed: int
    split: str
    timbre_names: List[str] = field(default_factory=list)
    diagnostic: str = ""

    def items(self) -> List[Tuple[str, str]]:
        rows = [
            ("geometry", self.geometry),
            ("radius", "-" if self.radius is None else repr(float(self.radius))),
            ("dt", str(self.dt)),
            ("dp", str(self.dp)),
            ("seed", str(self.seed)),
            ("split", self.split),
            ("n_examples", str(int(self.confusion.sum()))),
            ("accuracy", repr(self.accuracy)),
            ("d_same", repr(self.d_same)),
            ("d_diff", repr(self.d_diff)),
            ("S", repr(self.s)),
        ]
        for i, row in enumerate(self.confusion):
            rows.append((f"confusion.{i}", " ".join(str(int(c)) for c in row)))
        if self.diagnostic:
            rows.append(("diagnostic", self.diagnostic))
        return rows

    def to_keyvalue(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.items())

    def to_text(self) -> str:
        lines = [
            f"geometry   {self.geometry}" + ("" if self.radius is None else f" (R = {self.radius:g})"),
            f"latent     D_t = {self.dt}, D_p = {self.dp}, seed = {self.seed}",
            f"split      {self.split} ({int(self.confusion.sum())} examples)",
            f"accuracy   {self.accuracy:.4f}",
            f"D_same     {self.d_same:.6g}",
            f"D_diff     {self.d_diff:.6g}",
            f"S          {self.s:.6g}",
        ]
        if self.diagnostic:
            lines.append(f"note       {self.diagnostic}")
        lines.append("confusion (rows = true, cols = predicted)")
        width = max(3, len(str(int(self.confusion.max(initial=0)))))
        for i, row in enumerate(self.confusion):
            name = self.timbre_names[i] if i < len(self.timbre_names) else str(i)
            lines.append(f"  {name:>28s} " + " ".join(f"{int(c):>{width}d}" for c in row))
        return "\n".join(lines) + "\n"


def evaluate(model, dataset: Dataset, split: str = "test", seed: int = 0) -> EvalReport:
    acc, cm = timbre_accuracy(model, dataset, split)
    with torch.no_grad():
        means = model.timbre_prior_means().detach()
    sep = hierarchical_separability(means, dataset.families(), model.geometry.distance)
    return EvalReport(
        accuracy=acc,
        d_same=sep.d_same,
        d_diff=sep.d_diff,
        s=sep.s,
        confusion=cm,
        geometry=model.cfg.geometry,
        radius=None if model.cfg.geometry == "euclidean" else model.cfg.radius,
        dt=model.cfg.dt,
        dp=model.cfg.dp,
        seed=seed,
        split=split,
        timbre_names=list(dataset.timbre_names),
        diagnostic=sep.diagnostic,
    )
