import math

import numpy as np
import pytest
import torch

from hypertimbre import tensor as T
from hypertimbre.errors import ContractError, DimensionError, FormatError
from hypertimbre.gradsuite import primitive_cases


def test_matmul_identity():
    a = T.tensor([[1.0, 2.0], [3.0, 4.0]])
    assert torch.equal(T.matmul(a, torch.eye(2, dtype=torch.float64)), a)


def test_shape_errors():
    with pytest.raises(DimensionError):
        T.matmul(T.zeros(2, 3), T.zeros(2, 3))
    with pytest.raises(DimensionError):
        T.add(T.zeros(2, 3), T.zeros(4))
    with pytest.raises(DimensionError):
        T.concat([T.zeros(2, 3), T.zeros(3, 3)])


def test_layer_norm_constant_is_zero():
    out = T.layer_norm(torch.full((2, 5), 3.7, dtype=torch.float64))
    assert torch.equal(out, torch.zeros(2, 5, dtype=torch.float64))


def test_acosh_clamped_below_one():
    x = T.tensor([0.5, 1.0 - 1e-15, 1.0], requires_grad=True)
    y = T.acosh_clamped(x)
    assert torch.equal(y.detach(), torch.zeros(3, dtype=torch.float64))


def test_primitive_registry_complete():
    expected = {
        "matmul", "add", "mul", "div", "concat", "gather_rows", "relu", "softplus", "tanh", "exp", "log", "sqrt",
        "cosh", "sinh", "acosh_clamped", "sum", "mean", "layer_norm", "log_softmax",
    }
    assert expected <= set(T.PRIMITIVES)


def test_every_primitive_gradient():
    cases = primitive_cases(seed=3)
    assert {c.name for c in cases} >= set(T.PRIMITIVES)
    for c in cases:
        assert c.error < 1e-6, (c.name, c.error)


class TestBackward:
    def test_sum_gives_ones(self):
        p = T.tensor(np.arange(6.0).reshape(2, 3), requires_grad=True)
        T.backward(T.sum(p))
        assert torch.equal(p.grad, torch.ones(2, 3, dtype=torch.float64))

    def test_half_square_gives_p(self):
        p = T.tensor([1.5, -2.0, 0.25], requires_grad=True)
        T.backward(T.sum(T.mul(p, p)) / 2)
        assert torch.equal(p.grad, p.detach())

    def test_accumulates(self):
        p = T.tensor([1.0, 2.0], requires_grad=True)
        T.backward(T.sum(p))
        T.backward(T.sum(p))
        assert torch.equal(p.grad, torch.full((2,), 2.0, dtype=torch.float64))

    def test_non_scalar(self):
        p = T.tensor([1.0, 2.0], requires_grad=True)
        with pytest.raises(ContractError):
            T.backward(p * 2)

    def test_replay_determinism(self):
        def run():
            rng = np.random.default_rng(4)
            w = T.tensor(rng.normal(size=(5, 3)), requires_grad=True)
            x = T.tensor(rng.normal(size=(7, 5)))
            loss = T.sum(T.log_softmax(T.layer_norm(T.matmul(x, w))))
            T.backward(loss)
            return loss.detach(), w.grad
        (l1, g1), (l2, g2) = run(), run()
        assert torch.equal(l1, l2) and torch.equal(g1, g2)


class TestXavier:
    def test_bound(self):
        w = T.xavier_init((4, 4), np.random.default_rng(0))
        assert float(w.abs().max()) <= math.sqrt(6 / 8)

    def test_reproducible(self):
        assert torch.equal(T.xavier_init((3, 5), np.random.default_rng(1)), T.xavier_init((3, 5), np.random.default_rng(1)))

    def test_variance(self):
        w = T.xavier_init((200, 500), np.random.default_rng(2))
        assert float(w.var()) == pytest.approx(2 / 700, rel=0.05)

    def test_needs_2d(self):
        with pytest.raises(DimensionError):
            T.xavier_init((3,), np.random.default_rng(0))


class TestAdam:
    def store(self, value):
        s = T.ParamStore()
        s.add("p", value)
        return s

    def test_zero_gradient_no_change(self):
        s = self.store(np.array([1.0, -2.0]))
        s["p"].grad = torch.zeros(2, dtype=torch.float64)
        T.adam_step(s)
        assert torch.equal(s["p"].detach(), torch.tensor([1.0, -2.0], dtype=torch.float64))

    def test_first_step_is_signed_lr(self):
        s = self.store(np.zeros(3))
        s["p"].grad = torch.tensor([3.0, -0.01, 50.0], dtype=torch.float64)
        T.adam_step(s, lr=1e-3)
        assert torch.allclose(s["p"].detach(), torch.tensor([-1e-3, 1e-3, -1e-3], dtype=torch.float64), rtol=1e-5)

    def test_missing_gradient(self):
        s = self.store(np.zeros(2))
        with pytest.raises(ContractError):
            T.adam_step(s)

    def test_quadratic_bowl(self):
        target = torch.tensor([3.0, -1.0, 0.5], dtype=torch.float64)
        s = self.store(np.zeros(3))
        for _ in range(5000):
            s.zero_grad()
            T.backward(T.sum((s["p"] - target) ** 2))
            T.adam_step(s, lr=1e-2)
        assert float((s["p"].detach() - target).abs().max()) < 1e-3


class TestParamStore:
    def test_duplicate(self):
        s = T.ParamStore()
        s.add("a", np.zeros(2))
        with pytest.raises(ContractError):
            s.add("a", np.zeros(2))

    def test_state_roundtrip(self):
        s = T.ParamStore()
        s.add("a", np.arange(4.0).reshape(2, 2))
        state = s.state_dict()
        with torch.no_grad():
            s["a"].mul_(0)
        s.load_state_dict(state)
        assert torch.equal(s["a"].detach(), torch.arange(4.0, dtype=torch.float64).reshape(2, 2))

    def test_load_mismatch(self):
        s = T.ParamStore()
        s.add("a", np.zeros(2))
        with pytest.raises(ContractError):
            s.load_state_dict({"b": np.zeros(2)})
        with pytest.raises(DimensionError):
            s.load_state_dict({"a": np.zeros(3)})


class TestSerialization:
    def test_golden_bytes(self):
        blob = T.dumps_params([("w", np.array([[1.5, -2.0]]))])
        expected = (
            b"HLT1"
            + (1).to_bytes(4, "little")
            + (1).to_bytes(4, "little")
            + (1).to_bytes(2, "little")
            + b"w"
            + bytes([2])
            + (1).to_bytes(4, "little")
            + (2).to_bytes(4, "little")
            + bytes.fromhex("000000000000f83f")
            + bytes.fromhex("00000000000000c0")
        )
        assert blob == expected

    def test_roundtrip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        s = T.ParamStore()
        s.add("enc.0.W", rng.normal(size=(5, 3)))
        s.add("scalar", np.array(np.pi))
        s.add("ünï", np.array([np.nextafter(1.0, 2.0), -0.0, 1e-310]))
        path = tmp_path / "m.hlt"
        T.save_params(s, path)
        back = T.load_params(path)
        assert list(back) == list(s)
        for k, v in s.state_dict().items():
            assert back[k].tobytes() == v.tobytes()
        assert T.dumps_params(back.items()) == path.read_bytes()

    def test_bad_magic(self):
        with pytest.raises(FormatError, match="offset 0"):
            T.loads_params(b"XXXX" + bytes(8))

    def test_truncated_reports_offset(self):
        blob = T.dumps_params([("w", np.ones((2, 2)))])
        with pytest.raises(FormatError, match=r"offset \d+"):
            T.loads_params(blob[:-3])

    def test_trailing_bytes(self):
        blob = T.dumps_params([("w", np.ones(2))])
        with pytest.raises(FormatError):
            T.loads_params(blob + b"\x00")
