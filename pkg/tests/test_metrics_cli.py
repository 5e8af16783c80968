import csv
import math

import numpy as np
import pytest
import torch

from hypertimbre import data as D
from hypertimbre import lorentz as L
from hypertimbre.cli import main, to_poincare
from hypertimbre.errors import ContractError
from hypertimbre.metrics import (
    accuracy,
    confusion_matrix,
    euclidean_distance,
    hierarchical_separability,
    map_predict,
)
from hypertimbre.model import DualLatentVAE, LatentConfig

from test_model_loss import tiny_dataset

FOUR_POINTS = np.array([[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]])
FOUR_FAMILIES = [0, 0, 1, 1]


class TestAccuracy:
    def test_three_of_four(self):
        assert accuracy([0, 1, 2, 3], [0, 1, 2, 0]) == 0.75

    def test_empty(self):
        with pytest.raises(ContractError):
            accuracy([], [])

    def test_confusion(self):
        cm = confusion_matrix([0, 1, 1, 2], [0, 1, 2, 2], 3)
        assert cm.tolist() == [[1, 0, 0], [0, 1, 1], [0, 0, 1]]

    def test_ties_go_low(self):
        assert map_predict([[0.5, 0.5, 0.1]]).tolist() == [0]

    def test_two_class_fixture(self):
        cfg = LatentConfig(dp=2, dt=2, radius=10.0, n_pitch=2, n_timbre=2, input_shape=(2, 2), hidden=(4,))
        m = DualLatentVAE(cfg)
        with torch.no_grad():
            m.store["prior.timbre_tangents"].copy_(torch.tensor([[-3.0, 0.0], [3.0, 0.0]], dtype=torch.float64))
        rng = np.random.default_rng(0)
        y = np.array([0, 1] * 10)
        xi = torch.from_numpy(np.where(y[:, None] == 0, -3.0, 3.0) * np.array([1.0, 0.0]) + rng.normal(0, 0.3, size=(20, 2)))
        with torch.no_grad():
            pred = map_predict(m.timbre_log_posterior(m.geometry.mean_from_output(xi)).numpy())
        assert accuracy(y, pred) == 1.0


class TestSeparability:
    def test_four_point_fixture(self):
        sep = hierarchical_separability(FOUR_POINTS, FOUR_FAMILIES, euclidean_distance)
        assert sep.d_same == 1.0
        assert sep.d_diff == pytest.approx((20 + 2 * math.sqrt(101)) / 4, abs=1e-12)
        assert sep.s == pytest.approx((20 + 2 * math.sqrt(101)) / 4, abs=1e-9)
        assert (sep.n_same, sep.n_diff) == (2, 4)

    def test_equidistant(self):
        # regular simplex corners are pairwise equidistant
        pts = np.eye(4)
        assert hierarchical_separability(pts, FOUR_FAMILIES, euclidean_distance).s == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("c", [1e-3, 0.5, 7.0, 1e4])
    def test_scale_invariant(self, c):
        base = hierarchical_separability(FOUR_POINTS, FOUR_FAMILIES, euclidean_distance).s
        assert abs(hierarchical_separability(c * FOUR_POINTS, FOUR_FAMILIES, euclidean_distance).s - base) <= 1e-12 * base

    def test_coincident_same_family(self):
        pts = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [1.0, 0.0]])
        sep = hierarchical_separability(pts, FOUR_FAMILIES, euclidean_distance)
        assert math.isnan(sep.s) and sep.diagnostic

    def test_default_partition_counts(self):
        families = np.repeat(np.arange(4), (6, 3, 2, 1))
        same, diff = D.family_pairs(families)
        assert (len(same), len(diff)) == (19, 47)

    def test_hyperbolic_distance(self):
        curv = L.Curvature(-1.0)
        pts = L.expmap0(torch.from_numpy(FOUR_POINTS * 0.1), curv)
        sep = hierarchical_separability(pts, FOUR_FAMILIES, lambda a, b: L.distance(a, b, curv))
        assert sep.s > 1.0

    def test_needs_pairs(self):
        with pytest.raises(ContractError):
            hierarchical_separability(FOUR_POINTS[:2], [0, 1], euclidean_distance)


def test_poincare_map():
    curv = L.Curvature.from_radius(2.0)
    x = L.expmap0(torch.tensor([[0.3, -1.2], [5.0, 0.0]], dtype=torch.float64), curv).numpy()
    p = to_poincare(x, 2.0)
    assert np.all(np.linalg.norm(p, axis=-1) < 2.0)
    assert np.allclose(to_poincare(L.origin(curv, 2).numpy(), 2.0), 0.0)


# -- command line --------------------------------------------------------------


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    data = root / "tiny.mel1"
    D.save_dataset(tiny_dataset(), data)
    cfg = root / "run.cfg"
    cfg.write_text("batch_size = 8\nlr = 0.01\nhidden = 16, 12\npatience = 100\n")
    model = root / "m.hlt"
    argv = ["train", "--data", str(data), "--config", str(cfg), "--max-steps", "12", "--dt", "2", "--dp", "3", "--radius", "5", "--out", str(model)]
    assert main(argv) == 0
    return root, data, model


class TestCli:
    def test_unknown_subcommand(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["fly"])
        assert exc.value.code == 2
        assert "usage" in capsys.readouterr().err

    def test_unknown_flag(self):
        with pytest.raises(SystemExit) as exc:
            main(["eval", "--data", "x", "--model", "y", "--bogus"])
        assert exc.value.code == 2

    def test_runtime_failure(self, tmp_path, capsys):
        assert main(["eval", "--data", str(tmp_path / "missing.mel1"), "--model", str(tmp_path / "m.hlt")]) == 1
        assert "error" in capsys.readouterr().err

    def test_corrupt_data(self, tmp_path):
        bad = tmp_path / "bad.mel1"
        bad.write_bytes(b"MEL1\x01")
        assert main(["eval", "--data", str(bad), "--model", str(bad)]) == 1

    def test_bad_config_key(self, trained, tmp_path):
        _, data, _ = trained
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("learning_rate = 3\n")
        assert main(["train", "--data", str(data), "--config", str(cfg), "--out", str(tmp_path / "x.hlt")]) == 1

    def test_train_outputs(self, trained):
        root, _, model = trained
        for name in ("m.hlt", "m.hlt.json", "m.log.tsv", "m.loss.png"):
            assert (root / name).exists()
        log = (root / "m.log.tsv").read_text().splitlines()
        assert int(log[-1].split("\t")[1]) == 12

    def test_eval_deterministic(self, trained, tmp_path, capsys):
        _, data, model = trained
        outs = []
        for i in range(2):
            path = tmp_path / f"e{i}.txt"
            assert main(["eval", "--data", str(data), "--model", str(model), "--out", str(path)]) == 0
            outs.append((path.read_bytes(), capsys.readouterr().out))
        assert outs[0] == outs[1]
        assert (tmp_path / "e0.confusion.png").exists()

    def test_embed_recomputes_s(self, trained, tmp_path):
        _, data, model = trained
        csv_path = tmp_path / "emb.csv"
        kv = tmp_path / "eval.txt"
        assert main(["embed", "--data", str(data), "--model", str(model), "--out", str(csv_path)]) == 0
        assert main(["eval", "--data", str(data), "--model", str(model), "--out", str(kv)]) == 0
        assert (tmp_path / "emb.svg").exists()
        with open(csv_path) as fh:
            rows = list(csv.reader(fh))
        assert rows[0][:3] == ["example_id", "pitch_label", "timbre_label"]
        priors = [r for r in rows[1:] if r[0].startswith("prior")]
        means = np.array([[float(c) for c in r[3:]] for r in priors])
        ds = D.load_dataset(data)
        curv = L.Curvature.from_radius(5.0)
        sep = hierarchical_separability(means, ds.families(), lambda a, b: L.distance(a, b, curv))
        reported = dict(line.split(" = ", 1) for line in kv.read_text().splitlines())
        assert sep.s == float(reported["S"])
        assert len(rows) - 1 - len(priors) == int((ds.split == D.SPLIT_CODES["test"]).sum())

    def test_sample(self, trained, tmp_path):
        _, data, model = trained
        out = tmp_path / "s.csv"
        assert main(["sample", "--model", str(model), "--data", str(data), "--timbre-label", "1", "--pitch-label", "2", "--out", str(out)]) == 0
        mel = np.loadtxt(out, delimiter=",")
        assert mel.shape == (6, 5) and np.isfinite(mel).all()
        assert main(["sample", "--model", str(model), "--timbre-label", "9", "--out", str(out)]) == 1

    def test_train_log_deterministic(self, trained, tmp_path):
        root, data, _ = trained
        out = tmp_path / "again.hlt"
        argv = ["train", "--data", str(data), "--config", str(root / "run.cfg"), "--max-steps", "12", "--dt", "2", "--dp", "3", "--radius", "5", "--out", str(out)]
        assert main(argv) == 0
        assert (tmp_path / "again.log.tsv").read_bytes() == (root / "m.log.tsv").read_bytes()
        assert out.read_bytes() == (root / "m.hlt").read_bytes()

    def test_sweep(self, trained, tmp_path):
        root, data, _ = trained
        cfg = tmp_path / "sweep.cfg"
        cfg.write_text("batch_size = 8\nhidden = 8\nmax_steps = 3\n")
        out = tmp_path / "sweep"
        assert main(["sweep", "--data", str(data), "--config", str(cfg), "--dp", "2", "--out", str(out)]) == 0
        text = (out / "summary.txt").read_text()
        assert "hyperbolic R=10" in text and "D_t=4" in text
        assert len((out / "summary.tsv").read_text().splitlines()) == 1 + 8
        for name in ("accuracy.png", "separability.png", "euclidean-dt2.log.tsv", "hyperbolic-R1-dt4.eval.txt"):
            assert (out / name).exists()


@pytest.mark.slow
def test_gradcheck_command(capsys):
    assert main(["gradcheck"]) == 0
    assert "gradient checks passed" in capsys.readouterr().out
