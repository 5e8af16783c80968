"""Command-line interface: ``hypertimbre <subcommand> [flags]``."""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import fields
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import torch

from . import data as D
from .errors import ConfigError, ContractError, DimensionError, FormatError, GeometryError
from .losstrain import TrainConfig, coerce, parse_config_text, train
from .metrics import evaluate
from .model import DualLatentVAE, LatentConfig, draw_normal

MODEL_KEYS = ("hidden", "decoder_input")
SWEEP_RADII = (1.0, 10.0, 100.0)
SWEEP_DTS = (2, 4)


# -- helpers -----------------------------------------------------------------


def load_run_config(path: Optional[str]) -> Tuple[TrainConfig, Dict[str, object]]:
    """Training keys go to :class:`TrainConfig`; ``hidden`` and ``decoder_input`` configure the model."""
    cfg = TrainConfig()
    model_kw: Dict[str, object] = {}
    if path is None:
        return cfg, model_kw
    with open(path) as fh:
        entries = parse_config_text(fh.read(), [f.name for f in fields(TrainConfig)] + list(MODEL_KEYS))
    defaults = LatentConfig()
    for k, v in entries.items():
        try:
            if k in MODEL_KEYS:
                model_kw[k] = coerce(v, getattr(defaults, k))
            else:
                setattr(cfg, k, coerce(v, getattr(cfg, k)))
        except ValueError:
            raise ConfigError(f"bad value for {k}: {v!r}") from None
    cfg.validate()
    return cfg, model_kw


def latent_config(ds: D.Dataset, geometry: str, radius: float, dt: int, dp: int, **extra) -> LatentConfig:
    return LatentConfig(
        dp=dp, dt=dt, geometry=geometry, radius=radius, n_pitch=ds.n_pitch, n_timbre=ds.n_timbre, input_shape=ds.input_shape, **extra
    )


def to_poincare(x: np.ndarray, radius: float) -> np.ndarray:
    """Lorentz ambient coordinates to the Poincare ball of the same radius."""
    x = np.asarray(x, dtype=np.float64)
    return radius * x[..., 1:] / (radius + x[..., :1])


def _stem(path: str) -> Path:
    p = Path(path)
    return p.with_suffix("") if p.suffix else p


def _posterior_means(model: DualLatentVAE, X) -> np.ndarray:
    with torch.no_grad():
        mean, _, _ = model.encode_timbre(torch.from_numpy(np.asarray(X, dtype=np.float64)))
    return mean.numpy()


# -- subcommands -------------------------------------------------------------


def cmd_synth_data(args) -> int:
    cfg = D.CorpusConfig()
    if args.paper_scale:
        cfg.features = D.FeatureConfig.paper_scale()
    ds = D.build_corpus(cfg, seed=args.seed)
    D.save_dataset(ds, args.out)
    counts = {s: int((ds.split == i).sum()) for s, i in D.SPLIT_CODES.items()}
    print(f"wrote {args.out}: {len(ds)} examples, {ds.n_timbre} instruments, {ds.n_pitch} pitches, mel {ds.input_shape}, splits {counts}")
    return 0


def _train_one(ds, geometry, radius, dt, dp, seed, tcfg, model_kw, progress=None):
    model = DualLatentVAE(latent_config(ds, geometry, radius, dt, dp, **model_kw), seed=seed)
    return train(ds, tcfg, model, progress=progress)


def cmd_train(args) -> int:
    ds = D.load_dataset(args.data)
    tcfg, model_kw = load_run_config(args.config)
    tcfg.seed = args.seed
    if args.mc_samples is not None:
        tcfg.mc_samples = args.mc_samples
    if args.max_steps is not None:
        tcfg.max_steps = args.max_steps
    tcfg.validate()

    def progress(row):
        if args.verbose:
            print(f"epoch {row['epoch']:5d} step {row['step']:6d} loss {row['total']:.4f} val {row['val_criterion']:.4f}", file=sys.stderr)

    result = _train_one(ds, args.geometry, args.radius, args.dt, args.dp, args.seed, tcfg, model_kw, progress)
    result.model.save(args.out)
    stem = _stem(args.out)
    Path(f"{stem}.log.tsv").write_text(result.log_tsv())
    from . import plots

    plots.loss_curves(result.log, f"{stem}.loss.png")
    print(f"trained {len(result.log)} epochs / {result.steps} steps; best epoch {result.best_epoch} (criterion {result.best_criterion:.6g})")
    print(f"wrote {args.out}, {args.out}.json, {stem}.log.tsv, {stem}.loss.png")
    return 0


def cmd_eval(args) -> int:
    ds = D.load_dataset(args.data)
    model = DualLatentVAE.load(args.model)
    report = evaluate(model, ds, args.split, seed=args.seed)
    sys.stdout.write(report.to_text())
    if args.out:
        Path(args.out).write_text(report.to_keyvalue())
        from . import plots

        plots.confusion(report.confusion, ds.timbre_names, f"{_stem(args.out)}.confusion.png")
    return 0


def embed_rows(model: DualLatentVAE, ds: D.Dataset, split: str) -> Tuple[List[str], List[List[str]]]:
    idx = ds.indices(split)
    means = _posterior_means(model, ds.mel[idx])
    with torch.no_grad():
        priors = model.timbre_prior_means().numpy()
    header = ["example_id", "pitch_label", "timbre_label"] + [f"c{i}" for i in range(means.shape[1])]
    rows = [[str(i), str(int(ds.pitch[i])), str(int(ds.timbre[i]))] + [repr(float(c)) for c in m] for i, m in zip(idx, means)]
    # prior means share the file so separability can be recomputed from it alone
    rows += [[f"prior{j}", "-1", str(j)] + [repr(float(c)) for c in m] for j, m in enumerate(priors)]
    return header, rows


def cmd_embed(args) -> int:
    ds = D.load_dataset(args.data)
    model = DualLatentVAE.load(args.model)
    header, rows = embed_rows(model, ds, args.split)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    print(f"wrote {args.out} ({len(rows)} rows)")
    if model.cfg.dt == 2:
        from . import plots

        pts = np.array([[float(c) for c in r[3:]] for r in rows if not r[0].startswith("prior")])
        labels = [int(r[2]) for r in rows if not r[0].startswith("prior")]
        pri = np.array([[float(c) for c in r[3:]] for r in rows if r[0].startswith("prior")])
        boundary = None
        if model.cfg.geometry == "hyperbolic":
            pts, pri, boundary = to_poincare(pts, model.cfg.radius), to_poincare(pri, model.cfg.radius), model.cfg.radius
        title = f"{model.cfg.geometry} timbre space ({args.split})"
        svg = plots.embedding_scatter(pts, labels, ds.families(), pri, f"{_stem(args.out)}.svg", title=title, boundary_radius=boundary)
        print(f"wrote {svg}")
    return 0


def cmd_sample(args) -> int:
    model = DualLatentVAE.load(args.model)
    cfg = model.cfg
    if not 0 <= args.timbre_label < cfg.n_timbre or not 0 <= args.pitch_label < cfg.n_pitch:
        raise ConfigError("label out of range for this model")
    rng = np.random.default_rng(args.seed)
    with torch.no_grad():
        mu_p = model.pitch_prior_means()[args.pitch_label]
        z_p = mu_p + draw_normal(rng, cfg.dp) * model.pitch_sigma
        mu_t = model.timbre_prior_means()[args.timbre_label]
        z_t, _ = model.reparameterize_timbre(mu_t, torch.log(model.timbre_sigma), draw_normal(rng, cfg.dt))
        mel = model.decode(z_p[None], z_t[None])[0].numpy()
    if args.data:
        ds = D.load_dataset(args.data)
        mel = mel * ds.std + ds.mean
    buf = io.StringIO()
    np.savetxt(buf, mel, delimiter=",", fmt="%.9g")
    Path(args.out).write_text(buf.getvalue())
    from . import plots

    png = plots.mel_image(mel, f"{_stem(args.out)}.png", title=f"timbre {args.timbre_label}, pitch {args.pitch_label}")
    print(f"wrote {args.out} ({mel.shape[0]} mel bands x {mel.shape[1]} frames) and {png}")
    return 0


def cmd_gradcheck(args) -> int:
    from .gradsuite import run_suite

    cases = run_suite(args.seed)
    for c in cases:
        print(f"{'ok  ' if c.ok else 'FAIL'} {c.name:<28s} rel.err {c.error:.3e} (tol {c.tol:g})")
    failed = [c for c in cases if not c.ok]
    print(f"{len(cases) - len(failed)}/{len(cases)} gradient checks passed")
    return 1 if failed else 0


def sweep_cells() -> List[Tuple[str, Optional[float]]]:
    return [("euclidean", None)] + [("hyperbolic", r) for r in SWEEP_RADII]


def _row_label(geometry: str, radius: Optional[float]) -> str:
    return "Euclidean" if radius is None else f"hyperbolic R={radius:g}"


def format_table(title: str, table: np.ndarray, rows: Sequence[str], cols: Sequence[str]) -> str:
    width = max(len(r) for r in rows) + 2
    out = [title, " " * width + "".join(f"{c:>12s}" for c in cols)]
    for name, vals in zip(rows, table):
        out.append(f"{name:<{width}s}" + "".join(f"{v:>12.4f}" for v in vals))
    return "\n".join(out) + "\n"


def run_sweep(ds: D.Dataset, tcfg: TrainConfig, model_kw, dp: int, seed: int, progress=None):
    """Train every (geometry, R) x D_t cell; returns the accuracy and separability tables and per-cell reports."""
    cells = sweep_cells()
    acc = np.full((len(cells), len(SWEEP_DTS)), np.nan)
    sep = np.full_like(acc, np.nan)
    reports = {}
    for i, (geometry, radius) in enumerate(cells):
        for j, dt in enumerate(SWEEP_DTS):
            result = _train_one(ds, geometry, radius or 1.0, dt, dp, seed, tcfg, model_kw)
            report = evaluate(result.model, ds, "test", seed=seed)
            acc[i, j], sep[i, j] = report.accuracy, report.s
            reports[(geometry, radius, dt)] = (report, result)
            if progress is not None:
                progress(geometry, radius, dt, report, result)
    return acc, sep, reports


def cmd_sweep(args) -> int:
    ds = D.load_dataset(args.data)
    tcfg, model_kw = load_run_config(args.config)
    tcfg.seed = args.seed
    if args.mc_samples is not None:
        tcfg.mc_samples = args.mc_samples
    if args.max_steps is not None:
        tcfg.max_steps = args.max_steps
    tcfg.validate()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    def progress(geometry, radius, dt, report, result):
        tag = f"{geometry}" + ("" if radius is None else f"-R{radius:g}") + f"-dt{dt}"
        (out / f"{tag}.log.tsv").write_text(result.log_tsv())
        (out / f"{tag}.eval.txt").write_text(report.to_keyvalue())
        print(f"{tag}: accuracy {report.accuracy:.4f}  S {report.s:.4f}  ({result.steps} steps)", file=sys.stderr)

    acc, sep, _ = run_sweep(ds, tcfg, model_kw, args.dp, args.seed, progress)
    rows = [_row_label(g, r) for g, r in sweep_cells()]
    cols = [f"D_t={d}" for d in SWEEP_DTS]
    header = (
        f"# synthetic additive-synthesis corpus: {ds.n_timbre} instruments in {len(set(ds.families()))} families, "
        f"{ds.n_pitch} pitches, mel {ds.input_shape[0]}x{ds.input_shape[1]}; test split; seed {args.seed}; "
        f"D_p={args.dp}; max_steps={tcfg.max_steps}, lr={tcfg.lr:g}\n"
    )
    text = header + "\n" + format_table("timbre classification accuracy", acc, rows, cols) + "\n"
    text += format_table("hierarchical separability S", sep, rows, cols)
    (out / "summary.txt").write_text(text)
    with open(out / "summary.tsv", "w") as fh:
        fh.write("geometry\tradius\tdt\taccuracy\tS\n")
        for i, (g, r) in enumerate(sweep_cells()):
            for j, d in enumerate(SWEEP_DTS):
                fh.write(f"{g}\t{'-' if r is None else repr(r)}\t{d}\t{acc[i, j]!r}\t{sep[i, j]!r}\n")
    from . import plots

    plots.sweep_heatmap(acc, rows, cols, "timbre accuracy", out / "accuracy.png")
    plots.sweep_heatmap(sep, rows, cols, "separability S", out / "separability.png")
    sys.stdout.write(text)
    return 0


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hypertimbre", description="Dual-latent VAE with a hyperbolic timbre space.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, data=True, seed=0):
        if data:
            sp.add_argument("--data", required=True, help="MEL1 corpus file")
        sp.add_argument("--seed", type=int, default=seed)

    def geometry(sp):
        sp.add_argument("--geometry", choices=("euclidean", "hyperbolic"), default="hyperbolic")
        sp.add_argument("--radius", type=float, default=100.0, help="curvature radius R (K = -1/R^2)")
        sp.add_argument("--dt", type=int, default=4, help="timbre latent dimension")

    def training(sp):
        sp.add_argument("--dp", type=int, default=8, help="pitch latent dimension")
        sp.add_argument("--config", help="key = value training config")
        sp.add_argument("--mc-samples", type=int, default=None)
        sp.add_argument("--max-steps", type=int, default=None)

    sp = sub.add_parser("synth-data", help="build and save the synthetic corpus")
    common(sp, data=False)
    sp.add_argument("--out", required=True)
    sp.add_argument("--paper-scale", action="store_true", help="22.05 kHz, 256 mel bins, 43 frames")
    sp.set_defaults(func=cmd_synth_data)

    sp = sub.add_parser("train", help="train a model")
    common(sp)
    geometry(sp)
    training(sp)
    sp.add_argument("--out", required=True, help="model file (config sidecar written to <out>.json)")
    sp.add_argument("--verbose", action="store_true", help="per-epoch progress on stderr")
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("eval", help="accuracy, separability and confusion matrix")
    common(sp)
    sp.add_argument("--model", required=True)
    sp.add_argument("--split", choices=D.SPLITS, default="test")
    sp.add_argument("--out", help="key = value report file")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("embed", help="export posterior and prior means as CSV")
    common(sp)
    sp.add_argument("--model", required=True)
    sp.add_argument("--split", choices=D.SPLITS, default="test")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_embed)

    sp = sub.add_parser("sample", help="decode latents drawn from the label priors")
    common(sp, data=False)
    sp.add_argument("--data", help="corpus whose statistics undo the standardization")
    sp.add_argument("--model", required=True)
    sp.add_argument("--timbre-label", type=int, default=0)
    sp.add_argument("--pitch-label", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("gradcheck", help="finite-difference gradient suite")
    common(sp, data=False)
    sp.set_defaults(func=cmd_gradcheck)

    sp = sub.add_parser("sweep", help="geometry x R x D_t grid with summary tables")
    common(sp)
    training(sp)
    sp.add_argument("--out", required=True, help="output directory")
    sp.set_defaults(func=cmd_sweep)
    return p


RUNTIME_ERRORS = (ConfigError, ContractError, DimensionError, FormatError, GeometryError, OSError, ValueError)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    torch.set_num_threads(1)
    try:
        return args.func(args)
    except RUNTIME_ERRORS as exc:
        print(f"hypertimbre: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
