"""Placement and angle oracles for the deployment geometry."""

import math

import numpy as np
import pytest
from numpy.random import default_rng

from ntnsim.constants import EARTH_RADIUS_M
from ntnsim.geometry import (
    Deployment,
    PlatformKind,
    Point3,
    distance,
    distances_to,
    elevation_angle_deg,
    pairwise_distances,
    sample_bpp_disc,
    sample_bpp_sphere,
    sample_ppp_disc,
    satellite_elevation_angle_deg,
    satellite_elevation_angles_deg,
    visible_satellite_indices,
)

ORIGIN = Point3(0.0, 0.0, 0.0)


class TestPoint3:
    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            Point3(0.0, math.nan, 0.0)
        with pytest.raises(ValueError):
            Point3(math.inf, 0.0, 0.0)

    def test_as_array(self):
        assert np.array_equal(Point3(1.0, 2.0, 3.0).as_array(), [1.0, 2.0, 3.0])


class TestDiscSampling:
    def test_area_uniform_moments(self):
        # uniform on a disc: E[r] = 2R/3, E[r^2] = R^2/2
        dep = sample_bpp_disc(200_000, 1000.0, 0.0, default_rng(0))
        r = np.hypot(dep.positions[:, 0], dep.positions[:, 1])
        assert np.mean(r) == pytest.approx(2000 / 3, rel=0.01)
        assert np.mean(r**2) == pytest.approx(500_000, rel=0.01)
        assert np.max(r) <= 1000.0

    def test_altitude_and_kind(self):
        dep = sample_bpp_disc(10, 500.0, 50.0, default_rng(1), PlatformKind.UAV)
        assert np.all(dep.positions[:, 2] == 50.0)
        assert dep.kind is PlatformKind.UAV
        assert dep.count == 10

    def test_ppp_count_distribution(self):
        rng = default_rng(2)
        counts = [sample_ppp_disc(2.0, 10_000.0, 0.0, rng).count for _ in range(2000)]
        lam = 2.0 * math.pi * 100.0
        assert np.mean(counts) == pytest.approx(lam, rel=0.02)
        assert np.var(counts) == pytest.approx(lam, rel=0.1)

    def test_zero_points_allowed(self):
        assert sample_bpp_disc(0, 100.0, 0.0, default_rng(0)).count == 0

    def test_invalid_args(self):
        with pytest.raises(ValueError):
            sample_bpp_disc(-1, 100.0, 0.0)
        with pytest.raises(ValueError):
            sample_ppp_disc(1.0, 0.0, 0.0)


class TestSphereSampling:
    def test_shell_radius(self):
        dep = sample_bpp_sphere(5000, 550e3, default_rng(3))
        ec = dep.positions.copy()
        ec[:, 2] += EARTH_RADIUS_M
        assert np.linalg.norm(ec, axis=1) == pytest.approx(EARTH_RADIUS_M + 550e3, rel=1e-12)

    def test_visible_fraction_above_mask(self):
        # spherical cap arithmetic for a 550 km shell and a 10 degree mask
        dep = sample_bpp_sphere(400_000, 550e3, default_rng(4))
        frac = visible_satellite_indices(ORIGIN, dep, 10.0).size / dep.count
        assert frac == pytest.approx(0.016964, rel=0.05)

    def test_zenith_satellite_visible(self):
        dep = Deployment(
            np.array([[0.0, 0.0, 550e3]]), PlatformKind.SATELLITE, None
        )
        assert list(visible_satellite_indices(ORIGIN, dep, 10.0)) == [0]


class TestAngles:
    def test_flat_elevation(self):
        assert elevation_angle_deg(ORIGIN, Point3(1000.0, 0.0, 1000.0)) == pytest.approx(45.0)
        assert elevation_angle_deg(ORIGIN, Point3(0.0, 0.0, 500.0)) == 90.0
        with pytest.raises(ValueError):
            elevation_angle_deg(ORIGIN, Point3(1000.0, 0.0, -5.0))

    def test_curved_elevation_zenith(self):
        assert satellite_elevation_angle_deg(ORIGIN, Point3(0.0, 0.0, 550e3)) == pytest.approx(90.0)

    def test_curved_elevation_oracle(self):
        # satellite 10 degrees of Earth arc away on a 550 km shell; the
        # tangent-frame coordinates and resulting elevation were computed
        # from the law-of-cosines triangle by hand
        sat = Point3(1201.819e3, 0.0, 444.854e3)
        assert satellite_elevation_angle_deg(ORIGIN, sat) == pytest.approx(20.3121, abs=0.01)

    def test_models_agree_at_the_frame_origin(self):
        # the tangent frame is anchored at the origin, so the two verticals
        # coincide there and only displaced observers see a difference
        sat = Point3(2000e3, 0.0, 550e3)
        flat = elevation_angle_deg(ORIGIN, sat)
        curved = satellite_elevation_angle_deg(ORIGIN, sat)
        assert curved == pytest.approx(flat)

    def test_displaced_observer_sees_lower_elevation(self):
        # a far observer's local vertical tilts with the Earth, dropping the
        # apparent elevation below the flat-frame value
        observer = Point3(1000e3, 0.0, 0.0)
        sat = Point3(0.0, 0.0, 550e3)
        flat = elevation_angle_deg(observer, sat)
        curved = satellite_elevation_angle_deg(observer, sat)
        assert curved < flat - 5.0

    def test_elevation_from_altitude_ground(self):
        # observer may sit above the surface (a HAPS looking at satellites)
        haps = Point3(0.0, 0.0, 20e3)
        elev = satellite_elevation_angles_deg(haps, np.array([[0.0, 0.0, 550e3]]))
        assert elev[0] == pytest.approx(90.0)


class TestDistances:
    def test_scalar_distance(self):
        assert distance(ORIGIN, Point3(3.0, 4.0, 0.0)) == 5.0

    def test_vectorized_match(self):
        pts = default_rng(5).normal(size=(50, 3)) * 100
        d = distances_to(ORIGIN, pts)
        assert d[7] == pytest.approx(distance(ORIGIN, Point3(*pts[7])))

    def test_pairwise_shape_and_symmetry(self):
        a = default_rng(6).normal(size=(4, 3))
        m = pairwise_distances(a, a)
        assert m.shape == (4, 4)
        assert np.allclose(m, m.T)
        assert np.allclose(np.diag(m), 0.0)


class TestReproducibility:
    def test_same_seed_same_positions(self):
        a = sample_bpp_sphere(100, 550e3, 42)
        b = sample_bpp_sphere(100, 550e3, 42)
        assert np.array_equal(a.positions, b.positions)
