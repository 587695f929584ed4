"""Obstacles: shape + mobility + loss model, and their per-ray interaction.

An obstacle couples a shape (fixed-orientation rectangular screen, per-ray
orthogonalized screen, or sphere), a deterministic mobility model giving its
center at any time, and the loss model applied to rays passing nearby.

Interaction walks every segment of a ray's vertex path. Segments whose
distance from the obstacle exceeds the diffraction distance threshold
contribute nothing; the default threshold is ten first-Fresnel radii of the
segment, where every diffraction model has decayed to a negligible level.
Losses add in dB across segments (and across obstacles, handled by the
environment); spheres only ever obstruct.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from . import _kernels, diffraction
from .diffraction import (
    DEFAULT_CONFIG,
    Dked,
    DkedPc,
    DiffractionConfig,
    EdgeGeometry,
    ItuSe,
    LossModel,
    Metis,
    Obstruction,
    ScreenDiffractionGeometry,
    diffraction_parameter,
)
from .errors import ConfigError, DegenerateGeometryError
from .geometry import RectScreen, Segment

log = logging.getLogger(__name__)

_BOUNDARY_TOL = 1e-9


@dataclass(frozen=True)
class ScreenShape:
    """Rectangular screen with a fixed orientation (may be tilted)."""

    width: float
    height: float
    azimuth: float = 0.0
    elevation: float = 0.0

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ConfigError("screen extents must be positive")

    @property
    def tilted(self) -> bool:
        return self.azimuth != 0.0 or self.elevation != 0.0


@dataclass(frozen=True)
class OrthoScreenShape:
    """Idealized screen re-oriented broadside to every tested segment."""

    width: float
    height: float

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ConfigError("screen extents must be positive")


@dataclass(frozen=True)
class SphereShape:
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ConfigError("sphere radius must be positive")


Shape = Union[ScreenShape, OrthoScreenShape, SphereShape]


@dataclass(frozen=True)
class Static:
    position: tuple[float, float, float]

    def position_at(self, t: float) -> np.ndarray:
        return np.array(self.position, dtype=np.float64)


@dataclass(frozen=True)
class LinearMobility:
    """Constant-velocity motion from a start point."""

    start: tuple[float, float, float]
    velocity: tuple[float, float, float]  # m/s

    def position_at(self, t: float) -> np.ndarray:
        return np.array(self.start, dtype=np.float64) + t * np.array(self.velocity, dtype=np.float64)


@dataclass(frozen=True)
class WaypointMobility:
    """Piecewise-linear interpolation through timed waypoints.

    Queries outside the waypoint span clamp to the nearest endpoint.
    """

    times: tuple[float, ...]
    points: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        if len(self.times) != len(self.points) or len(self.times) < 1:
            raise ConfigError("waypoints need matching, non-empty times and points")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ConfigError("waypoint times must be strictly increasing")

    def position_at(self, t: float) -> np.ndarray:
        times = self.times
        pts = self.points
        if t <= times[0]:
            return np.array(pts[0], dtype=np.float64)
        if t >= times[-1]:
            return np.array(pts[-1], dtype=np.float64)
        idx = int(np.searchsorted(times, t, side="right")) - 1
        t0, t1 = times[idx], times[idx + 1]
        frac = (t - t0) / (t1 - t0)
        p0 = np.array(pts[idx], dtype=np.float64)
        p1 = np.array(pts[idx + 1], dtype=np.float64)
        return p0 + frac * (p1 - p0)


MobilityModel = Union[Static, LinearMobility, WaypointMobility]


def position_at(mobility: MobilityModel, t: float) -> np.ndarray:
    """Deterministic obstacle center at time t."""
    if t < 0:
        raise ConfigError("time must be >= 0")
    return mobility.position_at(t)


class LossOutcome(NamedTuple):
    loss_db: float
    blocked: bool


@dataclass
class InteractionCounters:
    """Bookkeeping for tests and run summaries; one instance per worker."""

    diffraction_evals: int = 0
    obstruction_evals: int = 0
    far_skips: int = 0
    degenerate_skips: int = 0

    def merge(self, other: "InteractionCounters") -> None:
        self.diffraction_evals += other.diffraction_evals
        self.obstruction_evals += other.obstruction_evals
        self.far_skips += other.far_skips
        self.degenerate_skips += other.degenerate_skips

    def as_dict(self) -> dict:
        return {
            "diffraction_evals": self.diffraction_evals,
            "obstruction_evals": self.obstruction_evals,
            "far_skips": self.far_skips,
            "degenerate_skips": self.degenerate_skips,
        }


@dataclass(frozen=True)
class Obstacle:
    shape: Shape
    mobility: MobilityModel
    model: LossModel
    distance_threshold: float | None = None      # meters; None = 10 Fresnel radii per segment
    obstruction_fallback_for_secondary: bool = False
    fallback_loss_db: float = 10.0

    def __post_init__(self):
        if self.distance_threshold is not None and self.distance_threshold <= 0:
            raise ConfigError("distance threshold must be positive")
        if isinstance(self.shape, SphereShape) and not isinstance(self.model, Obstruction):
            raise ConfigError("spheres support only the constant obstruction model")
        if (isinstance(self.shape, ScreenShape) and self.shape.tilted
                and isinstance(self.model, Metis)):
            raise ConfigError(
                "the four-edge arctan model assumes a broadside screen; "
                "tilted screens must use dked, dked_pc or itu_se")
        if self.fallback_loss_db < 0:
            raise ConfigError("fallback obstruction loss must be >= 0 dB")

    @property
    def bounding_radius(self) -> float:
        if isinstance(self.shape, SphereShape):
            return self.shape.radius
        return 0.5 * math.hypot(self.shape.width, self.shape.height)


def default_threshold(segment_length: float, wavelength: float) -> float:
    """Ten times the widest first-Fresnel radius of the segment."""
    return 10.0 * 0.5 * math.sqrt(wavelength * segment_length)


def screen_vertical_axis(shape: Shape) -> np.ndarray | None:
    """Unit height axis of a screen shape, pose-independent; None for spheres."""
    if isinstance(shape, OrthoScreenShape):
        return np.array([0.0, 0.0, 1.0])
    if isinstance(shape, ScreenShape):
        return RectScreen(center=(0.0, 0.0, 0.0), width=shape.width, height=shape.height,
                          azimuth=shape.azimuth, elevation=shape.elevation).height_axis
    return None


def screen_beyond_threshold(center, v_axis, half_w: float, half_h: float,
                            seg_start, seg_end, threshold: float) -> bool:
    """Provably-far test against the screen's vertical center line.

    Every screen point lies within half_w of that line, so the line-segment
    distance minus half_w bounds the true screen distance from below. The
    0.1 mm slack absorbs the distance routine's worst-case suboptimality in
    its near-parallel branch, so a screen actually inside the threshold is
    never rejected.
    """
    a = center - half_h * v_axis
    b = center + half_h * v_axis
    dist = _kernels.segment_segment_distance(
        seg_start[0], seg_start[1], seg_start[2],
        seg_end[0], seg_end[1], seg_end[2],
        a[0], a[1], a[2], b[0], b[1], b[2],
    )
    return dist - half_w > threshold + 1e-4


def _screen_axes(shape: Shape, center: np.ndarray, seg_start: np.ndarray,
                 seg_end: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unit width/height axes of the screen plane at this pose."""
    if isinstance(shape, OrthoScreenShape):
        d = seg_end - seg_start
        horiz = math.hypot(d[0], d[1])
        if horiz < 1e-12 * max(float(np.linalg.norm(d)), 1e-30):
            raise DegenerateGeometryError("vertical segment cannot orient an orthogonal screen")
        az = math.atan2(d[1], d[0])
        u = np.array([-math.sin(az), math.cos(az), 0.0])
        v = np.array([0.0, 0.0, 1.0])
        return u, v
    screen = RectScreen(center=center, width=shape.width, height=shape.height,
                        azimuth=shape.azimuth, elevation=shape.elevation)
    return screen.width_axis, screen.height_axis


def _screen_cross_section(center, u, v, half_w, half_h, seg_start, seg_end):
    """Plane crossing of the segment and per-edge signed depths.

    Returns (t, depths) with depths ordered (w1 left, w2 right, h1 bottom,
    h2 top); positive depth means that edge's half-plane covers the
    crossing point. Raises DegenerateGeometryError when the segment is
    parallel to the screen plane.
    """
    # scalar arithmetic: this sits inside the per-segment hot loop
    dx = seg_end[0] - seg_start[0]
    dy = seg_end[1] - seg_start[1]
    dz = seg_end[2] - seg_start[2]
    nx = u[1] * v[2] - u[2] * v[1]
    ny = u[2] * v[0] - u[0] * v[2]
    nz = u[0] * v[1] - u[1] * v[0]
    denom = dx * nx + dy * ny + dz * nz
    seg_len = math.sqrt(dx * dx + dy * dy + dz * dz)
    if abs(denom) < 1e-12 * seg_len:
        raise DegenerateGeometryError("segment parallel to screen plane")
    t = ((center[0] - seg_start[0]) * nx + (center[1] - seg_start[1]) * ny
         + (center[2] - seg_start[2]) * nz) / denom
    rx = seg_start[0] + t * dx - center[0]
    ry = seg_start[1] + t * dy - center[1]
    rz = seg_start[2] + t * dz - center[2]
    xu = rx * u[0] + ry * u[1] + rz * u[2]
    xv = rx * v[0] + ry * v[1] + rz * v[2]
    depths = (xu + half_w, half_w - xu, xv + half_h, half_h - xv)
    return float(t), depths


def _screen_geometry(center, u, v, half_w, half_h, seg_start, seg_end,
                     wavelength: float, config: DiffractionConfig) -> ScreenDiffractionGeometry:
    t, depths = _screen_cross_section(center, u, v, half_w, half_h, seg_start, seg_end)
    tx0, tx1, tx2 = float(seg_start[0]), float(seg_start[1]), float(seg_start[2])
    rx0, rx1, rx2 = float(seg_end[0]), float(seg_end[1]), float(seg_end[2])
    d0, d1, d2 = rx0 - tx0, rx1 - tx1, rx2 - tx2
    seg_len = math.sqrt(d0 * d0 + d1 * d1 + d2 * d2)
    t_tol = _BOUNDARY_TOL / seg_len
    in_span = -t_tol <= t <= 1.0 + t_tol
    blocked = in_span and all(h >= -_BOUNDARY_TOL for h in depths)

    bl = (center[0] - half_w * u[0] - half_h * v[0],
          center[1] - half_w * u[1] - half_h * v[1],
          center[2] - half_w * u[2] - half_h * v[2])
    br = (center[0] + half_w * u[0] - half_h * v[0],
          center[1] + half_w * u[1] - half_h * v[1],
          center[2] + half_w * u[2] - half_h * v[2])
    tl = (center[0] - half_w * u[0] + half_h * v[0],
          center[1] - half_w * u[1] + half_h * v[1],
          center[2] - half_w * u[2] + half_h * v[2])
    tr = (center[0] + half_w * u[0] + half_h * v[0],
          center[1] + half_w * u[1] + half_h * v[1],
          center[2] + half_w * u[2] + half_h * v[2])
    edge_points = {"w1": (bl, tl), "w2": (br, tr), "h1": (bl, br), "h2": (tl, tr)}
    records = {}
    for name, depth in zip(("w1", "w2", "h1", "h2"), depths):
        a, b = edge_points[name]
        d_tx, d_rx = _kernels.fermat_on_segment(
            a[0], a[1], a[2], b[0], b[1], b[2],
            tx0, tx1, tx2, rx0, rx1, rx2,
            config.golden_section_tol,
        )
        los_dist = _kernels.line_segment_distance(
            tx0, tx1, tx2, d0, d1, d2,
            a[0], a[1], a[2], b[0], b[1], b[2],
        )
        records[name] = EdgeGeometry(
            d_tx=d_tx, d_rx=d_rx, distance=seg_len, depth=depth,
            wavelength=wavelength, los_distance=los_dist,
        )
    return ScreenDiffractionGeometry(
        w1=records["w1"], w2=records["w2"], h1=records["h1"], h2=records["h2"],
        los_blocked=blocked,
    )


def screen_edge_geometries(screen: RectScreen, segment: Segment, wavelength: float,
                           config: DiffractionConfig = DEFAULT_CONFIG) -> ScreenDiffractionGeometry:
    """Edge records of a concrete screen against one segment (public wiring)."""
    return _screen_geometry(
        screen.center, screen.width_axis, screen.height_axis,
        0.5 * screen.width, 0.5 * screen.height,
        segment.start, segment.end, wavelength, config,
    )


def _screen_model_loss(model: LossModel, geom: ScreenDiffractionGeometry,
                       wavelength: float, config: DiffractionConfig) -> float:
    if isinstance(model, Metis):
        return diffraction.metis_loss(geom, config)
    nu1 = diffraction_parameter(geom.w1)
    nu2 = diffraction_parameter(geom.w2)
    if isinstance(model, Dked):
        return diffraction.dked_loss(nu1, nu2, config)
    if isinstance(model, DkedPc):
        return diffraction.dked_pc_loss(
            nu1, nu2, geom.w1.excess_path, geom.w2.excess_path, wavelength, config)
    if isinstance(model, ItuSe):
        return diffraction.itu_se_loss(geom, config)
    raise ConfigError(f"unsupported loss model {model!r}")


def _segment_outcome(obstacle: Obstacle, model: LossModel, center: np.ndarray,
                     seg_start: np.ndarray, seg_end: np.ndarray, wavelength: float,
                     config: DiffractionConfig, counters: InteractionCounters) -> LossOutcome:
    """Loss of one segment against one resolved obstacle pose."""
    if isinstance(obstacle.shape, SphereShape):
        dist, _ = _kernels.point_segment_distance(
            center[0], center[1], center[2],
            seg_start[0], seg_start[1], seg_start[2],
            seg_end[0], seg_end[1], seg_end[2],
        )
        blocked = dist <= obstacle.shape.radius + _BOUNDARY_TOL
        counters.obstruction_evals += 1
        assert isinstance(model, Obstruction)
        return LossOutcome(diffraction.obstruction_loss(blocked, model.loss_db), blocked)

    half_w = 0.5 * obstacle.shape.width
    half_h = 0.5 * obstacle.shape.height
    try:
        u, v = _screen_axes(obstacle.shape, center, seg_start, seg_end)
        if isinstance(model, Obstruction):
            t, depths = _screen_cross_section(center, u, v, half_w, half_h, seg_start, seg_end)
            seg_len = float(np.linalg.norm(seg_end - seg_start))
            t_tol = _BOUNDARY_TOL / seg_len
            blocked = (-t_tol <= t <= 1.0 + t_tol
                       and all(h >= -_BOUNDARY_TOL for h in depths))
            counters.obstruction_evals += 1
            return LossOutcome(diffraction.obstruction_loss(blocked, model.loss_db), blocked)
        geom = _screen_geometry(center, u, v, half_w, half_h, seg_start, seg_end,
                                wavelength, config)
    except DegenerateGeometryError as exc:
        counters.degenerate_skips += 1
        log.warning("skipping degenerate segment/screen configuration: %s", exc)
        return LossOutcome(0.0, False)
    counters.diffraction_evals += 1
    return LossOutcome(_screen_model_loss(model, geom, wavelength, config), geom.los_blocked)


def _effective_model(obstacle: Obstacle, is_primary_ray: bool) -> LossModel:
    if (obstacle.obstruction_fallback_for_secondary and not is_primary_ray
            and not isinstance(obstacle.model, Obstruction)):
        return Obstruction(obstacle.fallback_loss_db)
    return obstacle.model


def interact(obstacle: Obstacle, ray, t: float, wavelength: float,
             is_primary_ray: bool = True,
             config: DiffractionConfig = DEFAULT_CONFIG,
             counters: InteractionCounters | None = None) -> LossOutcome:
    """Total loss an obstacle imposes on one ray at time t.

    Segment losses add in dB; the ray is blocked when any segment is
    geometrically obstructed. Segments farther from the obstacle than the
    distance threshold are skipped outright.
    """
    if counters is None:
        counters = InteractionCounters()
    center = position_at(obstacle.mobility, t)
    model = _effective_model(obstacle, is_primary_ray)
    bound = obstacle.bounding_radius
    v_axis = screen_vertical_axis(obstacle.shape)
    total = 0.0
    blocked = False
    verts = ray.vertices
    for i in range(verts.shape[0] - 1):
        seg_start = verts[i]
        seg_end = verts[i + 1]
        seg_len = float(np.linalg.norm(seg_end - seg_start))
        threshold = obstacle.distance_threshold
        if threshold is None:
            threshold = default_threshold(seg_len, wavelength)
        dist, _ = _kernels.point_segment_distance(
            center[0], center[1], center[2],
            seg_start[0], seg_start[1], seg_start[2],
            seg_end[0], seg_end[1], seg_end[2],
        )
        if dist > threshold + bound:
            counters.far_skips += 1
            continue
        if v_axis is not None and screen_beyond_threshold(
                center, v_axis, 0.5 * obstacle.shape.width, 0.5 * obstacle.shape.height,
                seg_start, seg_end, threshold):
            counters.far_skips += 1
            continue
        outcome = _segment_outcome(obstacle, model, center, seg_start, seg_end,
                                   wavelength, config, counters)
        total += outcome.loss_db
        blocked = blocked or outcome.blocked
    return LossOutcome(total, blocked)
