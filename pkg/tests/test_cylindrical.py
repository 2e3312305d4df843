import numpy as np
import pytest

from hgeom import core, surface
from hgeom.core import Point
from hgeom.cylindrical import (CylindricalSurface, EllipsoidalProfile, GaugeProfile,
                               PolynomialProfile, profile_from_id, profile_jet, profile_kl)
from hgeom.errors import AxisError, SpecError


def test_gauge_profile_matches_gauge_ball(rng):
    for n in (1, 2):
        gb = surface.GaugeBall(1.3, 0.4, n)
        cyl = CylindricalSurface(GaugeProfile(1.3, 0.4), n)
        for _ in range(200):
            p = Point.from_array(rng.normal(size=2 * n + 1))
            a, b = surface.evaluate_jet(gb, p), surface.evaluate_jet(cyl, p)
            assert np.allclose(a.frame_grad, b.frame_grad, atol=1e-12, rtol=1e-12)
            assert np.allclose(a.frame_hess, b.frame_hess, atol=1e-12, rtol=1e-12)


def test_horizontal_normal_length_formula():
    pr = EllipsoidalProfile(2.0, 1.0)
    spec = CylindricalSurface(pr, 2)
    for p in surface.sample_points(spec, 30, seed=2):
        u = float(np.sum(core.horizontal_position(p) ** 2))
        _, v1, v2, *_ = pr.evaluate(u, p.t)
        expect = np.sqrt(4 * u * (v1 ** 2 + v2 ** 2) / (4 * u * (v1 ** 2 + v2 ** 2) + v2 ** 2))
        assert surface.surface_frame(profile_jet(pr, p)).p_h_norm == pytest.approx(expect, rel=1e-12)


def test_axis_is_characteristic():
    pr = EllipsoidalProfile(2.0, 1.0)
    jet = profile_jet(pr, Point([0.0, 0.0], [0.0, 0.0], 1.0))
    assert surface.classify_point(jet) is surface.PointClass.CHARACTERISTIC
    with pytest.raises(AxisError):
        profile_kl(pr, Point([0.0, 0.0], [0.0, 0.0], 1.0))


def test_gauge_profile_kl():
    pr = GaugeProfile(1.0, 0.0)
    for p in surface.sample_points(CylindricalSurface(pr, 2), 20, seed=1):
        r = np.linalg.norm(core.horizontal_position(p))
        k, l = profile_kl(pr, p)
        assert k == pytest.approx(r, rel=1e-12)
        assert l == pytest.approx(3 * r, rel=1e-12)


@pytest.mark.parametrize("profile", [EllipsoidalProfile(2.0, 1.0), GaugeProfile(0.7, 0.2),
                                     PolynomialProfile({(2, 0): 1.0, (0, 2): 2.0, (1, 1): 0.4,
                                                        (0, 3): 0.3, (0, 0): -1.0})])
@pytest.mark.parametrize("n", [2, 3])
def test_profile_kl_equals_fit(profile, n):
    spec = CylindricalSurface(profile, n)
    for p in surface.sample_points(spec, 25, seed=n):
        fit = surface.umbilic_fit(surface.shape_operator(spec, p))
        k, l = profile_kl(profile, p)
        assert fit.residual < 1e-8
        assert k == pytest.approx(fit.k, abs=1e-8)
        assert l == pytest.approx(fit.l, abs=1e-8)


def test_catalog_ids():
    assert isinstance(profile_from_id("ellipsoid", {"a": 2, "b": 1}), EllipsoidalProfile)
    pr = profile_from_id("poly", {"terms": [[2, 0, 1.0], [0, 2, 1.0], [0, 0, -1.0]]})
    assert pr.evaluate(0.5, 0.5)[0] == pytest.approx(-0.5)
    with pytest.raises(SpecError):
        profile_from_id("torus", {})
    with pytest.raises(SpecError):
        profile_from_id("ellipsoid", {"a": 2, "c": 1})
    with pytest.raises(SpecError):
        PolynomialProfile({(7, 0): 1.0})
    with pytest.raises(SpecError):
        EllipsoidalProfile(-1.0, 1.0)


def test_poly_profile_derivatives(rng):
    pr = PolynomialProfile({(3, 1): 0.5, (1, 2): -1.0, (0, 4): 2.0, (2, 0): 1.0})
    u, t = 0.7, -0.3
    h = 1e-5
    v, v1, v2, v11, v12, v22 = pr.evaluate(u, t)
    d = lambda du, dt, idx: (pr.evaluate(u + du, t + dt)[idx] - pr.evaluate(u - du, t - dt)[idx]) / (2 * h)
    assert v1 == pytest.approx(d(h, 0, 0), rel=1e-8)
    assert v2 == pytest.approx(d(0, h, 0), rel=1e-8)
    assert v11 == pytest.approx(d(h, 0, 1), rel=1e-8)
    assert v12 == pytest.approx(d(0, h, 1), rel=1e-8)
    assert v22 == pytest.approx(d(0, h, 2), rel=1e-8)
