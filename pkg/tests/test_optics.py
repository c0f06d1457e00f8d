"""Lens files, refraction, surface intersection, lens tracing and projections."""

from __future__ import annotations

import numpy as np
import pytest

from autocam_sim.errors import LensFormatError
from autocam_sim.models import CameraConfig
from autocam_sim.optics import (
    LensSurface,
    SurfaceKind,
    fisheye_project,
    hurb_perturb,
    hurb_sigma,
    intersect_surface,
    load_lens,
    paraxial_matrix_focal_length,
    paraxial_trace_focus,
    parse_lens,
    pinhole_project,
    refract,
    rear_focal_distance,
    rms_spot_radius,
    trace_through_lens,
)
from autocam_sim.spectral import DEFAULT_GRID, Spectrum

STOP_ONLY = """
name pinhole test
film_distance 4.0
stop 0 0 0 0 0 0 0.1 air
"""

THIN_BICONVEX = """
name thin
film_distance auto
spherical   0.01   0 0 0 0  0.01 5.0  n=1.5
spherical   -0.01  0 0 0 0  0.0  5.0  air
stop        0      0 0 0 0  0    4.0  air
"""


@pytest.fixture
def lens_dir(config_dir):
    return config_dir / "lenses"


class TestParseLens:
    def test_single_stop(self):
        lens = parse_lens(STOP_ONLY)
        assert len(lens.surfaces) == 1
        assert lens.stop.is_stop
        assert lens.film_distance == 4.0

    def test_two_stops_name_both_lines(self):
        text = STOP_ONLY + "stop 0 0 0 0 0 0 0.2 air\n"
        with pytest.raises(LensFormatError, match="multiple aperture stops") as exc_info:
            parse_lens(text)
        assert exc_info.value.lines == (4, 5)

    def test_no_stop(self):
        with pytest.raises(LensFormatError, match="no aperture stop"):
            parse_lens("film_distance 5\nspherical 0.01 0 0 0 0 1 5 n=1.5\n")

    def test_thin_biconvex_surfaces_are_spherical(self):
        lens = parse_lens(THIN_BICONVEX)
        kinds = [s.kind for s in lens.surfaces]
        assert kinds == [SurfaceKind.SPHERICAL, SurfaceKind.SPHERICAL, SurfaceKind.APERTURE_STOP]
        assert lens.film_distance == pytest.approx(100.0, rel=1e-3)

    def test_non_real_sag(self):
        text = "film_distance 5\nspherical 0.5 0 0 0 0 1 3 n=1.5\nstop 0 0 0 0 0 0 1 air\n"
        with pytest.raises(LensFormatError, match="sag") as exc_info:
            parse_lens(text)
        assert exc_info.value.lines == (2,)

    @pytest.mark.parametrize(
        "line",
        [
            "spherical 0.01 0 0 0 0 1 5",  # missing medium
            "spherical abc 0 0 0 0 1 5 air",
            "toroidal 0.01 0 0 0 0 1 5 air",
            "spherical 0.01 0 0 0 0 1 5 n=0.8",
            "spherical 0.01,0.02 0 0 0 0 1 5 air",
        ],
    )
    def test_malformed_line_reports_number(self, line):
        with pytest.raises(LensFormatError) as exc_info:
            parse_lens(f"film_distance 5\n# comment\n{line}\nstop 0 0 0 0 0 0 1 air\n")
        assert exc_info.value.lines == (3,)

    def test_cauchy_index(self):
        lens = parse_lens("film_distance 5\nspherical 0.1 0 0 0 0 1 2 cauchy(1.5,0.01)\nstop 0 0 0 0 0 0 1 air\n")
        n = lens.surfaces[0].index
        assert n.at(500.0) == pytest.approx(1.5 + 0.01 / 0.25, rel=1e-3)
        assert n.at(450.0) > n.at(650.0)

    def test_biconic_pairs(self):
        lens = parse_lens("film_distance 5\nbiconic 0.01,0.02 0,-1 0 0 0 1 2 n=1.5\nstop 0 0 0 0 0 0 1 air\n")
        s = lens.surfaces[0]
        assert (s.curvature_x, s.curvature_y) == (0.01, 0.02)
        assert (s.conic_x, s.conic_y) == (0.0, -1.0)

    def test_bundled_lenses_load(self, lens_dir):
        for path in sorted(lens_dir.glob("*.lens")):
            lens = load_lens(path)
            assert lens.film_distance > 0
            assert sum(s.is_stop for s in lens.surfaces) == 1


class TestRefract:
    def test_normal_incidence_unchanged(self):
        out = refract([0.0, 0.0, 1.0], [0.0, 0.0, 1.0], 1.0, 1.7)
        np.testing.assert_allclose(out, [0.0, 0.0, 1.0], atol=1e-15)

    def test_snell_30_degrees(self):
        theta = np.radians(30.0)
        d = np.array([np.sin(theta), 0.0, np.cos(theta)])
        out = refract(d, [0.0, 0.0, 1.0], 1.0, 1.5)
        assert out[0] == pytest.approx(np.sin(theta) / 1.5, abs=1e-9)
        assert np.degrees(np.arcsin(out[0])) == pytest.approx(19.471, abs=1e-3)
        assert np.linalg.norm(out) == pytest.approx(1.0, abs=1e-12)

    def test_total_internal_reflection(self):
        theta = np.radians(60.0)
        d = np.array([np.sin(theta), 0.0, np.cos(theta)])
        assert refract(d, [0.0, 0.0, 1.0], 1.5, 1.0) is None

    def test_reversible(self):
        rng = np.random.default_rng(11)
        n = np.array([0.0, 0.0, 1.0])
        for _ in range(50):
            d = rng.normal(size=3)
            d[2] = abs(d[2]) + 0.5
            d /= np.linalg.norm(d)
            forward = refract(d, n, 1.0, 1.6)
            back = refract(forward, -n, 1.6, 1.0)
            np.testing.assert_allclose(back, d, atol=1e-9)


class TestIntersectSurface:
    index = Spectrum.constant(DEFAULT_GRID, 1.5)

    def test_axial_ray_hits_vertex(self):
        s = LensSurface.rotational(SurfaceKind.SPHERICAL, 0.05, 1.0, 5.0, self.index)
        hit = intersect_surface(np.array([[0.0, 0.0, -5.0]]), np.array([[0.0, 0.0, 1.0]]), s)
        assert hit.hit[0]
        np.testing.assert_allclose(hit.points[0], [0.0, 0.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(hit.normals[0], [0.0, 0.0, 1.0], atol=1e-12)

    def test_flat_surface(self):
        s = LensSurface.rotational(SurfaceKind.SPHERICAL, 0.0, 1.0, 5.0, self.index)
        d = np.array([0.1, 0.0, 1.0]) / np.linalg.norm([0.1, 0.0, 1.0])
        hit = intersect_surface(np.array([[1.0, 2.0, -3.0]]), d[None], s)
        np.testing.assert_allclose(hit.points[0], [1.3, 2.0, 0.0], atol=1e-12)

    def test_beyond_semi_aperture_is_vignetted(self):
        s = LensSurface.rotational(SurfaceKind.SPHERICAL, 0.0, 1.0, 1.0, self.index)
        hit = intersect_surface(np.array([[2.0, 0.0, -1.0]]), np.array([[0.0, 0.0, 1.0]]), s)
        assert hit.vignetted[0]

    def test_aspheric_matches_bisection(self):
        s = LensSurface.rotational(SurfaceKind.ASPHERIC, 0.05, 1.0, 5.0, self.index, conic=-0.5, a4=1e-4)
        o = np.array([1.0, 0.5, -2.0])
        d = np.array([0.2, 0.1, 1.0])
        d /= np.linalg.norm(d)

        def f(t: float) -> float:
            p = o + t * d
            return float(s.sag(p[0], p[1]) - p[2])

        lo, hi = 0.0, 6.0
        assert f(lo) > 0 > f(hi)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if f(mid) > 0:
                lo = mid
            else:
                hi = mid
        oracle = o + 0.5 * (lo + hi) * d

        hit = intersect_surface(o[None], d[None], s)
        assert hit.hit[0]
        np.testing.assert_allclose(hit.points[0], oracle, atol=1e-6)


class TestTraceThroughLens:
    def test_stop_only_ray_is_straight(self):
        lens = parse_lens(STOP_ONLY)
        film = np.array([[0.4, -0.2]])
        rear = np.array([[0.02, 0.01]])
        result = trace_through_lens(film, rear, 550.0, lens, diffraction=False)
        assert result.weights[0] == 1.0
        expected = np.array([0.02 - 0.4, 0.01 + 0.2, 4.0])
        np.testing.assert_allclose(result.directions[0], expected / np.linalg.norm(expected), atol=1e-12)

    def test_vignetted_outside_stop(self):
        lens = parse_lens(STOP_ONLY)
        result = trace_through_lens(np.array([[0.0, 0.0]]), np.array([[0.5, 0.0]]), 550.0, lens, diffraction=False)
        assert result.weights[0] == 0.0
        assert result.vignetted == 1

    def test_biconvex_focus_near_100mm(self, lens_dir):
        bundled = load_lens(lens_dir / "biconvex_f100.lens")
        assert paraxial_matrix_focal_length(bundled, 550.0) == pytest.approx(100.0, rel=0.01)
        focus = paraxial_trace_focus(parse_lens(THIN_BICONVEX), 550.0)
        assert focus.focus_distance == pytest.approx(100.0, abs=1.0)

    def test_blue_focuses_nearer_than_red(self, lens_dir):
        lens = load_lens(lens_dir / "wide_angle_6mm.lens")
        assert lens.surfaces[0].index.at(450.0) > lens.surfaces[0].index.at(650.0)
        assert rear_focal_distance(lens, 450.0) < rear_focal_distance(lens, 650.0)
        assert paraxial_trace_focus(lens, 450.0).focus_distance < paraxial_trace_focus(lens, 650.0).focus_distance

    @pytest.mark.parametrize("name", ["biconvex_f100.lens", "wide_angle_6mm.lens"])
    def test_traced_focal_length_matches_matrix(self, lens_dir, name):
        lens = load_lens(lens_dir / name)
        traced = paraxial_trace_focus(lens, 550.0).effective_focal_length
        assert traced == pytest.approx(paraxial_matrix_focal_length(lens, 550.0), rel=0.005)

    def test_weights_are_binary(self, lens_dir):
        lens = load_lens(lens_dir / "wide_angle_6mm.lens")
        rng = np.random.default_rng(5)
        film = rng.uniform(-2.0, 2.0, size=(500, 2))
        rear = rng.uniform(-1.4, 1.4, size=(500, 2))
        result = trace_through_lens(film, rear, 550.0, lens, rng)
        assert set(np.unique(result.weights)) <= {0.0, 1.0}
        live = result.weights > 0
        np.testing.assert_allclose(np.linalg.norm(result.directions[live], axis=1), 1.0, atol=1e-9)

    def test_edge_spot_larger_than_center(self, lens_dir):
        lens = load_lens(lens_dir / "wide_angle_6mm.lens")
        center = rms_spot_radius(lens, (0.0, 0.0), 550.0, 4000, np.random.default_rng(1))
        edge = rms_spot_radius(lens, (1.5, 0.0), 550.0, 4000, np.random.default_rng(1))
        assert edge > center


class TestDiffraction:
    def test_sigma_formula(self):
        assert hurb_sigma(550.0, 1.0) == pytest.approx(8.754e-5, rel=1e-3)

    def test_edge_distance_clamped(self):
        assert hurb_sigma(550.0, 0.0) == hurb_sigma(550.0, 1e-6)

    def test_vanishing_wavelength_leaves_direction(self):
        d = np.array([0.0, 0.6, 0.8])
        out = hurb_perturb(d, 1.0, 1e-12, rng=np.random.default_rng(0))
        np.testing.assert_allclose(out, d, atol=1e-12)

    def test_sample_spread_matches_sigma(self):
        n = 100_000
        rng = np.random.default_rng(2024)
        d = np.tile([0.0, 0.0, 1.0], (n, 1))
        out = hurb_perturb(d, 1.0, 550.0, rng=rng)
        sigma = hurb_sigma(550.0, 1.0)
        for axis in (0, 1):
            angles = np.arctan2(out[:, axis], out[:, 2])
            assert angles.std() == pytest.approx(sigma, rel=0.02)
            assert abs(angles.mean()) < 5 * sigma / np.sqrt(n)
        np.testing.assert_allclose(np.linalg.norm(out, axis=1), 1.0, atol=1e-12)

    def test_stop_center_distance_is_radius(self):
        lens = parse_lens(STOP_ONLY)
        rng = np.random.default_rng(3)
        draws = rng.standard_normal((1, 2))
        result = trace_through_lens(np.array([[0.0, 0.0]]), np.array([[0.0, 0.0]]), 550.0, lens, normals=draws)
        sigma = hurb_sigma(550.0, lens.stop.semi_aperture)
        expected = hurb_perturb(np.array([0.0, 0.0, 1.0]), lens.stop.semi_aperture, 550.0, normals=draws)
        np.testing.assert_allclose(result.directions[0], expected, atol=1e-12)
        assert sigma == pytest.approx(550e-6 / (2 * np.pi * 0.1))


class TestProjection:
    def test_on_axis_is_center(self):
        pin = CameraConfig()
        fish = CameraConfig(model="fisheye", fov_deg=200.0, focal_length_mm=1.8)
        point = (25.0, 0.0, 1.4)
        assert pinhole_project(point, pin) == pytest.approx((0.0, 0.0), abs=1e-12)
        assert fisheye_project(point, fish) == pytest.approx((0.0, 0.0), abs=1e-12)

    def test_pinhole_half_fov_reaches_film_edge(self):
        camera = CameraConfig(fov_deg=112.0, film_width_mm=4.512)
        a = np.radians(56.0)
        # right of the camera looking down +x with z up is -y
        point = (10.0 * np.cos(a), -10.0 * np.sin(a), 1.4)
        x, y = pinhole_project(point, camera)
        assert x == pytest.approx(4.512 / 2, abs=1e-9)
        assert y == pytest.approx(0.0, abs=1e-12)

    def test_pinhole_behind_camera(self):
        assert pinhole_project((-5.0, 0.0, 1.4), CameraConfig()) is None

    def test_fisheye_ninety_degrees(self):
        camera = CameraConfig(model="fisheye", fov_deg=200.0, focal_length_mm=1.8)
        x, y = fisheye_project((0.0, -10.0, 1.4), camera)
        assert np.hypot(x, y) == pytest.approx(1.8 * np.pi / 2, rel=1e-12)
