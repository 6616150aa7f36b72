import math

import numpy as np
import pytest
from scipy import ndimage

from angiokit import phantom, profile, skeleton
from angiokit.errors import InvalidCenterError, TooShortError
from angiokit.raster import Mask, Point
from angiokit.skeleton import Centerline


def path(points):
    return Centerline(tuple(Point(x, y) for x, y in points))


def centerline_of(mask):
    return skeleton.order_centerline(skeleton.to_single_path(skeleton.prune(skeleton.thin(mask))))


class TestSmoothTangents:
    def test_horizontal_line(self):
        c = path([(x, 5) for x in range(20)])
        t = profile.smooth_tangents(c)
        assert np.allclose(t, [[1.0, 0.0]] * 20)

    def test_vertical_line_consistent_sign(self):
        c = path([(5, y) for y in range(20)])
        t = profile.smooth_tangents(c)
        assert np.allclose(t, [[0.0, 1.0]] * 20)

    def test_quarter_arc_within_6_degrees(self):
        radius, cx, cy = 30.0, 40.0, 40.0
        pts = []
        for theta in np.linspace(0.0, math.pi / 2, 400):
            p = (round(cx + radius * math.cos(theta)), round(cy + radius * math.sin(theta)))
            if not pts or p != pts[-1]:
                pts.append(p)
        c = path(pts)
        tangents = profile.smooth_tangents(c)
        worst = 0.0
        for (x, y), (tx, ty) in zip(pts, tangents):
            theta = math.atan2(y - cy, x - cx)
            ax, ay = -math.sin(theta), math.cos(theta)  # analytic tangent, forward
            dot = min(1.0, abs(ax * tx + ay * ty))
            worst = max(worst, math.degrees(math.acos(dot)))
        assert worst < 6.0

    def test_too_short_raises(self):
        with pytest.raises(TooShortError):
            profile.smooth_tangents(path([(0, 0), (1, 1)]), window=5)


class TestWidthAt:
    def test_vertical_bar_height_11(self):
        m = np.zeros((15, 9), dtype=bool)
        m[2:13, :] = True  # 11 rows of foreground
        w = profile.width_at(Mask(m), Point(4, 7), (0.0, 1.0))
        assert 10.0 <= w <= 12.0

    def test_rotated_bar_against_distance_transform(self):
        # 45-degree bar of nominal width 11, measured at its center
        size = 61
        yy, xx = np.mgrid[:size, :size]
        c = (size - 1) / 2
        u = (xx - c + yy - c) / math.sqrt(2)  # along the bar
        v = (xx - c - (yy - c)) / math.sqrt(2)  # across the bar
        m = (np.abs(v) <= 5.5) & (np.abs(u) <= 25)
        mask = Mask(m)
        n = (1 / math.sqrt(2), -1 / math.sqrt(2))
        w = profile.width_at(mask, Point(int(c), int(c)), n)
        edt_width = 2.0 * ndimage.distance_transform_edt(m)[int(c), int(c)]
        assert 9.5 <= w <= 12.5
        assert abs(w - edt_width) <= 1.5

    def test_single_pixel_line(self):
        m = np.zeros((7, 9), dtype=bool)
        m[3, :] = True
        w = profile.width_at(Mask(m), Point(4, 3), (0.0, 1.0))
        assert 0.0 < w <= 2.0

    def test_background_center_raises(self):
        m = Mask(np.zeros((5, 5), dtype=bool) | np.eye(5, dtype=bool))
        with pytest.raises(InvalidCenterError):
            profile.width_at(m, Point(0, 1), (0.0, 1.0))

    def test_march_terminates_at_image_edge(self):
        m = Mask(np.ones((9, 9), dtype=bool))
        w = profile.width_at(m, Point(4, 4), (0.0, 1.0))
        assert w <= 9.5  # bounded by the grid, not runaway


class TestWidthProfile:
    def test_uniform_tube_width_15(self):
        spec = phantom.TubeSpec(
            control_points=phantom.shape_control_points("straight", (256, 256)),
            base_width=15.0,
            stenosis_depth=0.0,
            seed=2,
        )
        mask, _ = phantom.render_mask(spec, (256, 256))
        prof = profile.width_profile(mask, centerline_of(mask))
        assert len(prof) > 150
        assert np.all(np.abs(prof.widths() - 15.0) <= 1.5)

    def test_narrowing_located_near_center(self):
        spec = phantom.TubeSpec(
            control_points=phantom.shape_control_points("straight", (256, 256)),
            base_width=20.0,
            stenosis_depth=0.5,
            stenosis_extent=0.2,
            seed=2,
        )
        mask, field = phantom.render_mask(spec, (256, 256))
        c = centerline_of(mask)
        prof = profile.width_profile(mask, c)
        sx, sy = field.stenosis_point(spec)
        target = min(range(len(c)), key=lambda i: (c.points[i].x - sx) ** 2 + (c.points[i].y - sy) ** 2)
        widths = prof.widths()
        argmin_entry = prof.entries[int(np.argmin(widths))]
        assert abs(argmin_entry.index - target) <= 5

    def test_too_short_centerline(self):
        c = path([(x, 3) for x in range(25)])
        m = Mask(np.ones((7, 30), dtype=bool))
        with pytest.raises(TooShortError):
            profile.width_profile(m, c, window=5, trim=10)

    def test_entries_carry_original_indices(self, straight_tube):
        _, mask, _ = straight_tube
        c = centerline_of(mask)
        prof = profile.width_profile(mask, c, trim=10)
        assert prof.entries[0].index == 10
        assert prof.entries[-1].index == len(c) - 11
        assert len(prof) == len(c) - 20

    def test_csv_format(self, straight_tube):
        _, mask, _ = straight_tube
        prof = profile.width_profile(mask, centerline_of(mask))
        lines = prof.to_csv().strip().splitlines()
        assert lines[0] == "index,x,y,width"
        first = lines[1].split(",")
        assert len(first) == 4 and "." in first[3] and len(first[3].split(".")[1]) == 3

    def test_csv_round_trip(self, straight_tube):
        _, mask, _ = straight_tube
        prof = profile.width_profile(mask, centerline_of(mask))
        again = profile.WidthProfile.from_csv(prof.to_csv())
        assert len(again) == len(prof)
        assert np.allclose(again.widths(), np.round(prof.widths(), 3))


class TestProfileInvariants:
    def test_analytic_width_field_agreement(self):
        # >= 90% of non-trimmed points within max(1.5 px, 10%) of w(t)
        spec = phantom.TubeSpec(
            control_points=phantom.shape_control_points("s", (256, 256)),
            base_width=16.0,
            stenosis_depth=0.4,
            stenosis_extent=0.15,
            seed=5,
        )
        mask, field = phantom.render_mask(spec, (256, 256))
        prof = profile.width_profile(mask, centerline_of(mask))
        true_w = field.widths_near([e.point for e in prof.entries])
        tol = np.maximum(1.5, 0.1 * true_w)
        frac = np.mean(np.abs(prof.widths() - true_w) <= tol)
        assert frac >= 0.9

    def test_widths_bounded(self, straight_tube):
        _, mask, _ = straight_tube
        prof = profile.width_profile(mask, centerline_of(mask))
        diag = math.hypot(mask.width, mask.height)
        assert np.all(prof.widths() >= 1.0)
        assert np.all(prof.widths() <= diag)

    def test_rotating_mask_and_centerline_preserves_widths(self, straight_tube):
        _, mask, _ = straight_tube
        c = centerline_of(mask)
        prof = profile.width_profile(mask, c)

        rot_pixels = np.rot90(mask.pixels).copy()  # (x, y) -> (y, W-1-x)
        rot_mask = Mask(rot_pixels)
        rot_points = tuple(Point(p.y, mask.width - 1 - p.x) for p in c.points)
        rot_prof = profile.width_profile(rot_mask, Centerline(rot_points))
        a = np.sort(prof.widths())
        b = np.sort(rot_prof.widths())
        assert a.shape == b.shape
        assert np.all(np.abs(a - b) <= 1.0)
