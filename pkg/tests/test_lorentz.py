import math

import numpy as np
import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st

from hypertimbre import lorentz as L
from hypertimbre.errors import DimensionError, GeometryError

from conftest import random_point, random_tangent

T = lambda *v: torch.tensor(v, dtype=torch.float64)  # noqa: E731


class TestCurvature:
    def test_rejects_nonnegative(self):
        with pytest.raises(GeometryError):
            L.Curvature(0.0)
        with pytest.raises(GeometryError):
            L.Curvature(0.5)

    @pytest.mark.parametrize("r", [1.0, 2.0, 10.0, 100.0, 1e3])
    def test_radius_roundtrip(self, r):
        c = L.Curvature.from_radius(r)
        assert c.k == pytest.approx(-1.0 / r**2, rel=1e-15)
        assert c.radius == pytest.approx(r, rel=1e-15)


class TestInner:
    def test_examples(self):
        assert float(L.lorentz_inner(T(1, 0, 0), T(1, 0, 0))) == -1.0
        assert float(L.lorentz_inner(T(0, 1, 0), T(0, 1, 0))) == 1.0
        assert float(L.lorentz_inner(T(2, 1, 1), T(1, 2, 0))) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            L.lorentz_inner(T(1, 0, 0), T(1, 0))
        with pytest.raises(DimensionError):
            L.lorentz_inner(T(1), T(1))

    def test_lift_norm(self):
        assert float(L.lorentz_norm(L.lift_to_tangent(T(3, 4)))) == 5.0
        v = L.lift_to_tangent(T(0.3, -2.0, 7.0))
        assert float(L.lorentz_inner(v, L.origin(-1.0, 3))) == 0.0
        assert torch.equal(L.lift_to_tangent(T(0, 0)), T(0, 0, 0))


class TestOrigin:
    def test_examples(self):
        assert torch.equal(L.origin(-1.0, 2), T(1, 0, 0))
        assert torch.equal(L.origin(-0.25, 2), T(2, 0, 0))
        assert torch.equal(L.origin(L.Curvature.from_radius(100.0), 4), T(100, 0, 0, 0, 0))

    def test_bad_dim(self):
        with pytest.raises(DimensionError):
            L.origin(-1.0, 0)


class TestMaps:
    def test_distance_examples(self):
        o = L.origin(-1.0, 2)
        assert float(L.distance(o, o, -1.0)) == 0.0
        p = T(math.cosh(2), math.sinh(2), 0)
        assert float(L.distance(o, p, -1.0)) == pytest.approx(2.0, abs=1e-12)

    def test_exp_examples(self):
        z = L.exp_map(T(1, 0, 0), T(0, 1, 0), -1.0)
        assert torch.allclose(z, T(math.cosh(1), math.sinh(1), 0), atol=1e-14)
        z = L.exp_map(T(2, 0, 0), T(0, 2, 0), -0.25)
        assert torch.allclose(z, T(2 * math.cosh(1), 2 * math.sinh(1), 0), atol=1e-14)
        assert torch.equal(L.exp_map(T(2, 0, 0), T(0, 0, 0), -0.25), T(2, 0, 0))

    def test_log_examples(self):
        o = T(1, 0, 0)
        assert torch.allclose(L.log_map(o, T(math.cosh(1), math.sinh(1), 0), -1.0), T(0, 1, 0), atol=1e-14)
        assert torch.equal(L.log_map(o, o, -1.0), T(0, 0, 0))

    def test_exp_rejects_non_tangent(self):
        with pytest.raises(GeometryError):
            L.exp_map(T(1, 0, 0), T(1, 1, 0), -1.0)

    def test_small_norm_branch_is_smooth(self):
        o = L.origin(-1.0, 2)
        for eps in (1e-9, 1e-7, 1e-5):
            z = L.exp_map(o, T(0, eps, 0), -1.0)
            assert float(z[1]) == pytest.approx(math.sinh(eps), rel=1e-12)
            assert torch.allclose(L.log_map(o, z, -1.0), T(0, eps, 0), rtol=1e-10, atol=0)

    def test_exp_gradient_finite_at_zero(self):
        v = torch.zeros(3, dtype=torch.float64)
        v[1:] = 0.0
        w = torch.zeros(2, dtype=torch.float64, requires_grad=True)
        z = L.expmap0(w, -1.0)
        z.sum().backward()
        assert torch.isfinite(w.grad).all()

    def test_proj_cases(self, rng):
        curv = L.Curvature(-0.25)
        o = L.origin(curv, 3)
        w = torch.from_numpy(rng.normal(size=3))
        assert torch.allclose(L.proj(o, L.lift_to_tangent(w), curv), L.exp_map(o, L.lift_to_tangent(w), curv), atol=1e-14)
        base = random_point(rng, curv, 3)
        assert torch.allclose(L.proj(base, L.lift_to_tangent(torch.zeros(3)), curv), base, atol=1e-14)
        z = L.proj(base, L.lift_to_tangent(w), curv)
        L.check_point(z, curv)

    def test_transport_identity(self, rng):
        curv = L.Curvature(-1.0)
        a = random_point(rng, curv, 4)
        v = random_tangent(rng, a, curv)
        assert torch.allclose(L.parallel_transport(a, a, v, curv), v, atol=1e-14)


class TestProjectToManifold:
    def test_examples(self):
        assert torch.equal(L.project_to_manifold(T(0.9, 0, 0), -1.0), T(1, 0, 0))

    def test_valid_point_unchanged(self, rng):
        curv = L.Curvature(-0.25)
        x = random_point(rng, curv, 4)
        assert torch.allclose(L.project_to_manifold(x, curv), x, rtol=1e-12, atol=0)

    def test_repairs_chained_drift(self, rng):
        curv = L.Curvature(-1.0)
        x = random_point(rng, curv, 3)
        # unchecked chained maps accumulate rounding drift off the sheet
        for _ in range(10_000):
            v = L.log_map(x, L.expmap0(torch.from_numpy(rng.normal(size=3)), curv), curv)
            x = L.exp_map(x, 0.5 * v, curv, check=False)
        fixed = L.project_to_manifold(x, curv)
        L.check_point(fixed, curv, tol=1e-12)


class TestTypes:
    def test_manifold_point_validates(self):
        with pytest.raises(GeometryError):
            L.ManifoldPoint(T(0.5, 0, 0), L.Curvature(-1.0))
        with pytest.raises(GeometryError):
            L.ManifoldPoint(T(-1, 0, 0), L.Curvature(-1.0))

    def test_tangent_validates(self):
        p = L.ManifoldPoint(T(1, 0, 0), L.Curvature(-1.0))
        with pytest.raises(GeometryError):
            L.TangentVector(p, T(0.5, 1, 0))
        v = L.TangentVector(p, T(0, 1, 0))
        assert v.norm() == 1.0

    def test_curvature_mismatch(self):
        a = L.ManifoldPoint(T(1, 0, 0), L.Curvature(-1.0))
        b = L.ManifoldPoint(T(2, 0, 0), L.Curvature(-0.25))
        with pytest.raises(GeometryError):
            a.distance(b)

    def test_point_api_roundtrip(self):
        curv = L.Curvature(-1.0)
        a = L.ManifoldPoint(T(1, 0, 0), curv)
        b = L.ManifoldPoint(T(math.cosh(1.5), 0, math.sinh(1.5)), curv)
        u = a.log(b)
        assert u.norm() == pytest.approx(a.distance(b), abs=1e-12)
        assert torch.allclose(a.exp(u).coords, b.coords, atol=1e-12)
        moved = u.transport(b)
        assert moved.norm() == pytest.approx(u.norm(), abs=1e-12)


# -- properties ---------------------------------------------------------------

curvatures = st.sampled_from([-1.0, -0.25, -0.01])
dims = st.sampled_from([2, 4, 16])
seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=60, deadline=None)
@given(k=curvatures, d=dims, seed=seeds)
def test_exp_on_manifold(k, d, seed):
    rng = np.random.default_rng(seed)
    curv = L.Curvature(k)
    a = random_point(rng, curv, d)
    v = random_tangent(rng, a, curv, scale=rng.uniform(0.01, 3.0) / math.sqrt(d))
    z = L.exp_map(a, v, curv)
    L.check_point(z, curv)
    assert float(z[0]) > 0


@settings(max_examples=60, deadline=None)
@given(k=curvatures, d=dims, seed=seeds)
def test_log_exp_roundtrip(k, d, seed):
    rng = np.random.default_rng(seed)
    curv = L.Curvature(k)
    a = random_point(rng, curv, d)
    v = random_tangent(rng, a, curv, scale=rng.uniform(0.01, 3.0) / math.sqrt(d))
    back = L.log_map(a, L.exp_map(a, v, curv), curv)
    assert float((back - v).norm() / v.norm()) < 1e-8


@settings(max_examples=60, deadline=None)
@given(k=curvatures, d=dims, seed=seeds)
def test_transport_preserves_inner_products(k, d, seed):
    rng = np.random.default_rng(seed)
    curv = L.Curvature(k)
    a, b = random_point(rng, curv, d), random_point(rng, curv, d)
    v, w = random_tangent(rng, a, curv), random_tangent(rng, a, curv)
    pv, pw = L.parallel_transport(a, b, v, curv), L.parallel_transport(a, b, w, curv)
    assert abs(float(L.lorentz_inner(pv, pw) - L.lorentz_inner(v, w))) < 1e-9
    back = L.parallel_transport(b, a, pv, curv)
    assert float((back - v).norm()) < 1e-9 * max(1.0, float(a.norm()))


@settings(max_examples=60, deadline=None)
@given(k=curvatures, d=dims, seed=seeds)
def test_metric_axioms(k, d, seed):
    rng = np.random.default_rng(seed)
    curv = L.Curvature(k)
    a, b, c = (random_point(rng, curv, d) for _ in range(3))
    dab, dba = float(L.distance(a, b, curv)), float(L.distance(b, a, curv))
    assert dab == pytest.approx(dba, abs=1e-9)
    assert dab <= float(L.distance(a, c, curv)) + float(L.distance(c, b, curv)) + 1e-9
    assert abs(float(L.lorentz_norm(L.log_map(a, b, curv))) - dab) < 1e-9


def test_euclidean_limit(rng):
    curv = L.Curvature.from_radius(1e3)
    for _ in range(200):
        u = torch.from_numpy(rng.normal(size=3))
        v = torch.from_numpy(rng.normal(size=3))
        u, v = u / max(1.0, float(u.norm())), v / max(1.0, float(v.norm()))
        dh = float(L.distance(L.expmap0(u, curv), L.expmap0(v, curv), curv))
        assert abs(dh - float((u - v).norm())) <= 1e-4


def test_expmap0_logmap0_inverse(rng):
    curv = L.Curvature.from_radius(10.0)
    xi = torch.from_numpy(rng.normal(size=(50, 4)))
    assert torch.allclose(L.logmap0(L.expmap0(xi, curv), curv), xi, rtol=1e-10, atol=1e-12)
