"""Simulation core: apply every obstacle to every ray at every timestep.

Work decomposes into independent (pair, timestep) items: obstacle poses are
sampled at trace timestamps, each ray's path gain is reduced by the summed
interaction losses (applied obstacle by obstacle, in configuration order,
so that running two obstacle sets sequentially equals one combined run
bit-for-bit), and rays attenuated below the removal floor are dropped.
Delays, phases and vertex paths are never modified.

Items may run in parallel worker processes; results land in pre-sized
slots, so the single-threaded mode produces identical output.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels, diffraction
from .diffraction import DEFAULT_CONFIG, DiffractionConfig
from .errors import ConfigError
from .obstacles import (
    InteractionCounters,
    Obstacle,
    _effective_model,
    _segment_outcome,
    position_at,
    screen_beyond_threshold,
    screen_vertical_axis,
)
from .trace import SPEED_OF_LIGHT, ChannelTrace, Ray

WORKERS_ENV_VAR = "RAYBLOCK_WORKERS"


@dataclass(frozen=True)
class SimulationConfig:
    obstacles: tuple[Obstacle, ...]
    time_step: float | None = None          # defaults to the trace's step
    removal_floor_db: float = -500.0
    rng_seed: int = 0                       # reserved for stochastic mobility models
    carrier_frequency_hz: float = 60e9
    diffraction: DiffractionConfig = DEFAULT_CONFIG

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        if self.time_step is not None and self.time_step <= 0:
            raise ConfigError("time step must be positive")
        if not math.isfinite(self.removal_floor_db):
            raise ConfigError("removal floor must be finite")
        if self.carrier_frequency_hz <= 0:
            raise ConfigError("carrier frequency must be positive")


@dataclass
class RunStats:
    """Optional out-parameter of run(); aggregated across workers."""

    rays_in: int = 0
    rays_dropped: int = 0
    counters: InteractionCounters = field(default_factory=InteractionCounters)
    metis_clamps: int = 0
    cap_hits: int = 0

    @property
    def clamp_events(self) -> int:
        return self.metis_clamps + self.cap_hits


def resolve_workers(workers: int | None) -> int:
    if workers is not None:
        return max(int(workers), 1)
    env = os.environ.get(WORKERS_ENV_VAR, "").strip()
    if env:
        return max(int(env), 1)
    return os.cpu_count() or 1


def _pose_stride(trace: ChannelTrace, cfg: SimulationConfig) -> tuple[int, float]:
    """Validate the time bases; returns (stride, pose time step)."""
    if cfg.time_step is None:
        return 1, trace.time_step
    ratio = cfg.time_step / trace.time_step
    stride = round(ratio)
    if stride < 1 or abs(ratio - stride) > 1e-9 * max(ratio, 1.0):
        raise ConfigError(
            f"config time step {cfg.time_step} is not the trace step "
            f"{trace.time_step} or an integer multiple of it")
    return stride, cfg.time_step


def primary_ray_index(rays: list[Ray]) -> int | None:
    """The direct ray when present, else the strongest ray."""
    if not rays:
        return None
    direct = [i for i, r in enumerate(rays) if r.reflection_order == 0]
    candidates = direct if direct else range(len(rays))
    return max(candidates, key=lambda i: (rays[i].path_gain_db, -i))


def _step_gains(rays: list[Ray], obstacles: tuple[Obstacle, ...], t_pose: float,
                wavelength: float, config: DiffractionConfig,
                counters: InteractionCounters) -> np.ndarray:
    """Final gains after all obstacles, applied in order, for one timestep."""
    gains = np.array([r.path_gain_db for r in rays], dtype=np.float64)
    if not rays or not obstacles:
        return gains
    primary = primary_ray_index(rays)

    starts = []
    ends = []
    seg_ray = []
    for ri, ray in enumerate(rays):
        v = ray.vertices
        for i in range(v.shape[0] - 1):
            starts.append(v[i])
            ends.append(v[i + 1])
            seg_ray.append(ri)
    starts = np.ascontiguousarray(starts, dtype=np.float64)
    ends = np.ascontiguousarray(ends, dtype=np.float64)
    seg_ray = np.asarray(seg_ray)
    seg_len = np.linalg.norm(ends - starts, axis=1)
    thr_default = 5.0 * np.sqrt(wavelength * seg_len)  # 10 half-sqrt Fresnel radii

    for obstacle in obstacles:
        center = position_at(obstacle.mobility, t_pose)
        v_axis = screen_vertical_axis(obstacle.shape)
        if obstacle.distance_threshold is not None:
            thr = np.full_like(seg_len, obstacle.distance_threshold)
        else:
            thr = thr_default
        dists = _kernels.point_segment_distance_batch(center, starts, ends)
        candidates = np.nonzero(dists <= thr + obstacle.bounding_radius)[0]
        counters.far_skips += starts.shape[0] - candidates.shape[0]
        losses = np.zeros(len(rays))
        for si in candidates:
            if v_axis is not None and screen_beyond_threshold(
                    center, v_axis, 0.5 * obstacle.shape.width,
                    0.5 * obstacle.shape.height, starts[si], ends[si], float(thr[si])):
                counters.far_skips += 1
                continue
            ri = int(seg_ray[si])
            model = _effective_model(obstacle, ri == primary)
            outcome = _segment_outcome(obstacle, model, center, starts[si], ends[si],
                                       wavelength, config, counters)
            losses[ri] += outcome.loss_db
        gains -= losses
    return gains


def _run_chunk(args) -> tuple:
    (pair, k_lo, step_rays, obstacles, stride, pose_step, wavelength, config) = args
    counters = InteractionCounters()
    diag_before = diffraction.diagnostics.snapshot()
    out = []
    for offset, rays in enumerate(step_rays):
        k = k_lo + offset
        t_pose = (k // stride) * pose_step
        out.append(_step_gains(rays, obstacles, t_pose, wavelength, config, counters))
    diag_after = diffraction.diagnostics.snapshot()
    diag_delta = {key: diag_after[key] - diag_before[key] for key in diag_after}
    return pair, k_lo, out, counters, diag_delta


def run(trace: ChannelTrace, cfg: SimulationConfig, workers: int | None = None,
        stats: RunStats | None = None) -> ChannelTrace:
    """New trace of identical shape with obstacle losses applied.

    With zero obstacles the output equals the input field for field. The
    incompatible-time-base check runs before any computation.
    """
    stride, pose_step = _pose_stride(trace, cfg)
    if stats is None:
        stats = RunStats()
    stats.rays_in = sum(len(rays) for steps in trace.pairs.values() for rays in steps)

    if not cfg.obstacles:
        pairs = {pair: [list(rays) for rays in steps] for pair, steps in trace.pairs.items()}
        return ChannelTrace(node_positions=dict(trace.node_positions), pairs=pairs,
                            time_step=trace.time_step, num_steps=trace.num_steps)

    wavelength = SPEED_OF_LIGHT / cfg.carrier_frequency_hz
    n_workers = resolve_workers(workers)

    chunks = []
    for pair in sorted(trace.pairs):
        steps = trace.pairs[pair]
        chunk_len = max(1, math.ceil(trace.num_steps / max(n_workers * 4, 1)))
        for k_lo in range(0, trace.num_steps, chunk_len):
            step_rays = steps[k_lo:k_lo + chunk_len]
            chunks.append((pair, k_lo, step_rays, cfg.obstacles, stride, pose_step,
                           wavelength, cfg.diffraction))

    gains_by_pair: dict[tuple[int, int], list[np.ndarray | None]] = {
        pair: [None] * trace.num_steps for pair in trace.pairs
    }
    if n_workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(_run_chunk, chunks))
    else:
        results = [_run_chunk(c) for c in chunks]

    for pair, k_lo, step_gains, counters, diag_delta in results:
        for offset, gains in enumerate(step_gains):
            gains_by_pair[pair][k_lo + offset] = gains
        stats.counters.merge(counters)
        stats.metis_clamps += diag_delta["metis_clamps"]
        stats.cap_hits += diag_delta["cap_hits"]

    new_pairs: dict[tuple[int, int], list[list[Ray]]] = {}
    for pair, steps in trace.pairs.items():
        new_steps = []
        for k, rays in enumerate(steps):
            gains = gains_by_pair[pair][k]
            kept = []
            for ray, gain in zip(rays, gains):
                if gain < cfg.removal_floor_db:
                    stats.rays_dropped += 1
                    continue
                if gain == ray.path_gain_db:
                    kept.append(ray)
                else:
                    kept.append(replace(ray, path_gain_db=float(gain)))
            new_steps.append(kept)
        new_pairs[pair] = new_steps

    return ChannelTrace(node_positions=dict(trace.node_positions), pairs=new_pairs,
                        time_step=trace.time_step, num_steps=trace.num_steps)
