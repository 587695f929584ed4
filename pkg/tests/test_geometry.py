import math

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from rayblock.errors import DegenerateGeometryError, GeometryError
from rayblock.geometry import (
    RectScreen,
    Segment,
    Sphere,
    distance_point_segment,
    orthogonalize_screen,
    segment_rect_intersection,
    segment_sphere_intersection,
)


def test_segment_rejects_zero_length():
    with pytest.raises(GeometryError):
        Segment((1.0, 2.0, 3.0), (1.0, 2.0, 3.0))


def test_segment_rejects_non_finite():
    with pytest.raises(GeometryError):
        Segment((0.0, 0.0, np.nan), (1.0, 0.0, 0.0))


def test_screen_rejects_bad_extents():
    with pytest.raises(GeometryError):
        RectScreen(center=(0, 0, 0), width=-1.0, height=1.0)
    with pytest.raises(GeometryError):
        RectScreen(center=(0, 0, 0), width=1.0, height=0.0)


def test_screen_corners_coplanar(rng):
    for _ in range(50):
        screen = RectScreen(center=rng.normal(size=3), width=rng.uniform(0.1, 5),
                            height=rng.uniform(0.1, 5),
                            azimuth=rng.uniform(-np.pi, np.pi),
                            elevation=rng.uniform(-1.5, 1.5))
        corners = screen.corners
        n = screen.normal
        offsets = (corners - screen.center) @ n
        assert np.abs(offsets).max() < 1e-9


def test_distance_point_segment_endpoint_foot():
    d, t = distance_point_segment((0, 0, 0), Segment((1, 0, 0), (1, 1, 0)))
    assert d == pytest.approx(1.0, abs=1e-12)
    assert t == 0.0


def test_distance_point_on_segment():
    d, t = distance_point_segment((0.5, 0, 0), Segment((0, 0, 0), (1, 0, 0)))
    assert d == pytest.approx(0.0, abs=1e-12)
    assert t == pytest.approx(0.5)


def test_distance_point_segment_midpoint_vs_dense_sampling():
    seg = Segment((-1, 0, 0), (1, 0, 0))
    d, t = distance_point_segment((0, 2, 0), seg)
    # brute-force oracle: dense sampling of the segment
    ts = np.linspace(0, 1, 200001)
    points = seg.start + ts[:, None] * seg.direction
    brute = np.min(np.linalg.norm(points - np.array([0, 2, 0]), axis=1))
    assert d == pytest.approx(2.0, abs=1e-12)
    assert t == pytest.approx(0.5, abs=1e-12)
    assert d == pytest.approx(brute, abs=1e-9)


def test_distance_invariant_under_rigid_motion(rng):
    for _ in range(100):
        p = rng.normal(size=3)
        a, b = rng.normal(size=3), rng.normal(size=3)
        if np.linalg.norm(b - a) < 1e-6:
            continue
        d0, _ = distance_point_segment(p, Segment(a, b))
        rot = Rotation.random(random_state=int(rng.integers(1 << 30))).as_matrix()
        shift = rng.normal(size=3)
        d1, _ = distance_point_segment(rot @ p + shift, Segment(rot @ a + shift, rot @ b + shift))
        assert d1 == pytest.approx(d0, abs=1e-9)


def test_rect_intersection_symmetric_crossing():
    seg = Segment((0, 0, 1), (2, 0, 1))
    screen = RectScreen(center=(1, 0, 1), width=1.0, height=1.0)
    hit = segment_rect_intersection(seg, screen)
    assert hit is not None
    np.testing.assert_allclose(hit, [1, 0, 1], atol=1e-12)


def test_rect_intersection_disjoint():
    seg = Segment((0, 0, 1), (2, 0, 1))
    screen = RectScreen(center=(1, 5, 1), width=1.0, height=1.0)
    assert segment_rect_intersection(seg, screen) is None


def _point_in_rect_brute(point, screen, grid=2001):
    """Brute-force membership: nearest cell of a fine grid over the rectangle."""
    us = np.linspace(-0.5 * screen.width, 0.5 * screen.width, grid)
    vs = np.linspace(-0.5 * screen.height, 0.5 * screen.height, grid)
    rel = point - screen.center
    u = float(rel @ screen.width_axis)
    v = float(rel @ screen.height_axis)
    du = us[1] - us[0]
    dv = vs[1] - vs[0]
    return (us[0] - du <= u <= us[-1] + du) and (vs[0] - dv <= v <= vs[-1] + dv)


def test_rect_intersection_grazing_edge_inclusive():
    # segment passes exactly through the vertical edge at u = +w/2
    screen = RectScreen(center=(1, 0, 1), width=1.0, height=1.0)
    seg = Segment((0, 0.5, 1), (2, 0.5, 1))
    hit = segment_rect_intersection(seg, screen)
    assert hit is not None
    assert _point_in_rect_brute(hit, screen)
    np.testing.assert_allclose(hit, [1, 0.5, 1], atol=1e-9)


def test_rect_intersection_coplanar_raises():
    screen = RectScreen(center=(1, 0, 1), width=1.0, height=1.0)
    seg = Segment((1, -2, 1), (1, 2, 1))  # lies inside the screen plane x=1
    with pytest.raises(DegenerateGeometryError):
        segment_rect_intersection(seg, screen)


def test_rect_intersection_reversal_symmetry(rng):
    for _ in range(200):
        screen = RectScreen(center=rng.normal(size=3) * 2, width=rng.uniform(0.2, 3),
                            height=rng.uniform(0.2, 3),
                            azimuth=rng.uniform(-np.pi, np.pi),
                            elevation=rng.uniform(-1.2, 1.2))
        seg = Segment(rng.normal(size=3) * 4, rng.normal(size=3) * 4)
        try:
            fwd = segment_rect_intersection(seg, screen)
            bwd = segment_rect_intersection(seg.reversed(), screen)
        except DegenerateGeometryError:
            continue
        assert (fwd is None) == (bwd is None)
        if fwd is not None:
            np.testing.assert_allclose(fwd, bwd, atol=1e-9)


def test_sphere_intersection_through_center():
    seg = Segment((-2, 0, 0), (2, 0, 0))
    assert segment_sphere_intersection(seg, Sphere(center=(0, 0, 0), radius=0.5))


def test_sphere_tangency_counts_as_blocked():
    seg = Segment((-1, 0, 0), (1, 0, 0))
    assert segment_sphere_intersection(seg, Sphere(center=(0, 1, 0), radius=1.0))


def test_sphere_miss_at_twice_radius():
    seg = Segment((-1, 0, 0), (1, 0, 0))
    assert not segment_sphere_intersection(seg, Sphere(center=(0, 1, 0), radius=0.5))


def test_orthogonalize_fixed_point():
    seg = Segment((0, 0, 1), (4, 0, 1))
    screen = RectScreen(center=(2, 0, 1), width=1.0, height=2.0, azimuth=0.0)
    out = orthogonalize_screen(screen, seg)
    # corner sets coincide (the normal may flip, swapping corner labels)
    got = sorted(map(tuple, np.round(out.corners, 12)))
    want = sorted(map(tuple, np.round(screen.corners, 12)))
    np.testing.assert_allclose(got, want, atol=1e-9)


def test_orthogonalize_rotated_screen():
    seg = Segment((0, 0, 1), (4, 0, 1))
    screen = RectScreen(center=(2, 0, 1), width=1.0, height=2.0, azimuth=np.pi / 4)
    out = orthogonalize_screen(screen, seg)
    d = seg.direction / seg.length
    assert abs(abs(float(out.normal @ d)) - 1.0) < 1e-12
    np.testing.assert_allclose(out.center, screen.center, atol=1e-12)
    assert out.width == screen.width
    assert out.height == screen.height


def test_orthogonalize_vertical_segment_raises():
    seg = Segment((1, 1, 0), (1, 1, 3))
    screen = RectScreen(center=(1, 1, 1), width=1.0, height=1.0)
    with pytest.raises(DegenerateGeometryError):
        orthogonalize_screen(screen, seg)


def test_orthogonalize_idempotent(rng):
    for _ in range(50):
        seg = Segment(rng.normal(size=3), rng.normal(size=3) + np.array([3, 0, 0]))
        screen = RectScreen(center=rng.normal(size=3), width=rng.uniform(0.2, 2),
                            height=rng.uniform(0.2, 2),
                            azimuth=rng.uniform(-np.pi, np.pi),
                            elevation=rng.uniform(-1.0, 1.0))
        once = orthogonalize_screen(screen, seg)
        twice = orthogonalize_screen(once, seg)
        np.testing.assert_allclose(twice.corners, once.corners, atol=1e-9)


def test_orthogonalized_normal_parallel_to_horizontal_projection(rng):
    for _ in range(100):
        a = rng.normal(size=3)
        b = a + rng.normal(size=3)
        if math.hypot(b[0] - a[0], b[1] - a[1]) < 1e-3:
            continue
        seg = Segment(a, b)
        screen = RectScreen(center=rng.normal(size=3), width=1.0, height=1.0,
                            azimuth=rng.uniform(-np.pi, np.pi))
        out = orthogonalize_screen(screen, seg)
        d = seg.direction
        horiz = np.array([d[0], d[1], 0.0])
        horiz /= np.linalg.norm(horiz)
        cross = np.cross(out.normal, horiz)
        assert np.linalg.norm(cross) < 1e-9
