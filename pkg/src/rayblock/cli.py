"""Configuration-driven command line entry point.

Verbs:
    run <spec.json>      load a trace, apply the declared obstacles, export
                         the modified trace plus SNR/loss time series CSVs
    sweep crossing       analytic loss curves for a screen crossing the path
    sweep position       loss vs obstacle position along the path
    sweep frequency      crossing curves at several carriers
    validate <spec>      schema-check a run spec
    inspect <dir>        summarize a scenario directory

Exit codes: 0 ok, 2 config error, 3 trace format error, 4 numeric failure
(clamp/cap budget exceeded). Worker count comes from --workers or the
RAYBLOCK_WORKERS environment variable, defaulting to the available cores.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .diffraction import MODEL_REGISTRY, LossModel, Metis, Obstruction, model_name
from .environment import RunStats, SimulationConfig, run as run_environment
from .errors import ConfigError, NumericBudgetError, RayBlockError, TraceFormatError
from .linkeval import ArrayConfig, LinkBudget, snr_timeline
from .obstacles import (
    LinearMobility,
    Obstacle,
    OrthoScreenShape,
    ScreenShape,
    SphereShape,
    Static,
    WaypointMobility,
    interact,
)
from .trace import SPEED_OF_LIGHT, Ray, export_scenario, import_scenario

MODEL_NAMES = tuple(MODEL_REGISTRY)


def _version() -> str:
    from . import __version__

    return __version__


# ---------------------------------------------------------------------------
# Run specification (JSON schema; unknown keys rejected at every level)

@dataclass(frozen=True)
class SamplingSpec:
    time_step: float
    num_steps: int | None = None


@dataclass(frozen=True)
class RunSpec:
    scenario_dir: str
    output_dir: str
    obstacles: tuple[Obstacle, ...] = ()
    models_to_compare: tuple[str, ...] = ()
    link_budget: LinkBudget = LinkBudget()
    sampling: SamplingSpec | None = None
    removal_floor_db: float = -500.0
    max_clamp_events: int | None = None


def _check_keys(data: dict, allowed: tuple[str, ...], context: str) -> None:
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"{context}: unknown keys {unknown}")


def _require(data: dict, key: str, context: str):
    if key not in data:
        raise ConfigError(f"{context}: missing required key {key!r}")
    return data[key]


def _vec3(value, context: str) -> tuple[float, float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ConfigError(f"{context}: expected [x, y, z]")
    return tuple(float(v) for v in value)


def _parse_shape(data: dict, context: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{context}: shape must be an object")
    kind = _require(data, "kind", context)
    if kind == "ortho_screen":
        _check_keys(data, ("kind", "width", "height"), context)
        return OrthoScreenShape(width=float(_require(data, "width", context)),
                                height=float(_require(data, "height", context)))
    if kind == "screen":
        _check_keys(data, ("kind", "width", "height", "azimuth", "elevation"), context)
        return ScreenShape(width=float(_require(data, "width", context)),
                           height=float(_require(data, "height", context)),
                           azimuth=float(data.get("azimuth", 0.0)),
                           elevation=float(data.get("elevation", 0.0)))
    if kind == "sphere":
        _check_keys(data, ("kind", "radius"), context)
        return SphereShape(radius=float(_require(data, "radius", context)))
    raise ConfigError(f"{context}: unknown shape kind {kind!r}")


def _parse_mobility(data: dict, context: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{context}: mobility must be an object")
    kind = _require(data, "kind", context)
    if kind == "static":
        _check_keys(data, ("kind", "position"), context)
        return Static(position=_vec3(_require(data, "position", context), context))
    if kind == "linear":
        _check_keys(data, ("kind", "start", "velocity"), context)
        return LinearMobility(start=_vec3(_require(data, "start", context), context),
                              velocity=_vec3(_require(data, "velocity", context), context))
    if kind == "waypoints":
        _check_keys(data, ("kind", "waypoints"), context)
        points = _require(data, "waypoints", context)
        if not isinstance(points, list) or not points:
            raise ConfigError(f"{context}: waypoints must be a non-empty list")
        times = []
        coords = []
        for item in points:
            if not isinstance(item, (list, tuple)) or len(item) != 2:
                raise ConfigError(f"{context}: each waypoint is [time, [x, y, z]]")
            times.append(float(item[0]))
            coords.append(_vec3(item[1], context))
        return WaypointMobility(times=tuple(times), points=tuple(coords))
    raise ConfigError(f"{context}: unknown mobility kind {kind!r}")


def _parse_model(data: dict, context: str) -> LossModel:
    if not isinstance(data, dict):
        raise ConfigError(f"{context}: model must be an object")
    kind = _require(data, "kind", context)
    if kind not in MODEL_REGISTRY:
        raise ConfigError(f"{context}: unknown model kind {kind!r}, "
                          f"expected one of {sorted(MODEL_REGISTRY)}")
    if kind == "obstruction":
        _check_keys(data, ("kind", "loss_db"), context)
        return Obstruction(loss_db=float(data.get("loss_db", 10.0)))
    _check_keys(data, ("kind",), context)
    return MODEL_REGISTRY[kind]()


def _parse_obstacle(data: dict, index: int) -> Obstacle:
    context = f"obstacles[{index}]"
    if not isinstance(data, dict):
        raise ConfigError(f"{context}: must be an object")
    _check_keys(data, ("shape", "mobility", "model", "threshold", "fallback",
                       "fallback_loss_db"), context)
    threshold = data.get("threshold")
    return Obstacle(
        shape=_parse_shape(_require(data, "shape", context), f"{context}.shape"),
        mobility=_parse_mobility(_require(data, "mobility", context), f"{context}.mobility"),
        model=_parse_model(_require(data, "model", context), f"{context}.model"),
        distance_threshold=None if threshold is None else float(threshold),
        obstruction_fallback_for_secondary=bool(data.get("fallback", False)),
        fallback_loss_db=float(data.get("fallback_loss_db", 10.0)),
    )


def _parse_array(data: dict, context: str) -> ArrayConfig:
    _check_keys(data, ("rows", "cols", "spacing"), context)
    return ArrayConfig(rows=int(_require(data, "rows", context)),
                       cols=int(_require(data, "cols", context)),
                       spacing=float(data.get("spacing", 0.5)))


def _parse_link_budget(data: dict, context: str) -> LinkBudget:
    _check_keys(data, ("carrier_frequency_hz", "bandwidth_hz", "tx_power_dbm",
                       "noise_figure_db", "tx_array", "rx_array"), context)
    defaults = LinkBudget()
    return LinkBudget(
        carrier_frequency_hz=float(data.get("carrier_frequency_hz",
                                            defaults.carrier_frequency_hz)),
        bandwidth_hz=float(data.get("bandwidth_hz", defaults.bandwidth_hz)),
        tx_power_dbm=float(data.get("tx_power_dbm", defaults.tx_power_dbm)),
        noise_figure_db=float(data.get("noise_figure_db", defaults.noise_figure_db)),
        tx_array=_parse_array(data["tx_array"], f"{context}.tx_array")
        if "tx_array" in data else defaults.tx_array,
        rx_array=_parse_array(data["rx_array"], f"{context}.rx_array")
        if "rx_array" in data else defaults.rx_array,
    )


def parse_run_spec(data: dict) -> RunSpec:
    if not isinstance(data, dict):
        raise ConfigError("run spec must be a JSON object")
    _check_keys(data, ("scenario_dir", "output_dir", "obstacles", "models_to_compare",
                       "link_budget", "sampling", "removal_floor_db",
                       "max_clamp_events"), "spec")
    obstacles = data.get("obstacles", [])
    if not isinstance(obstacles, list):
        raise ConfigError("spec: obstacles must be a list")
    models = data.get("models_to_compare", [])
    if not isinstance(models, list):
        raise ConfigError("spec: models_to_compare must be a list")
    for m in models:
        if m not in MODEL_REGISTRY:
            raise ConfigError(f"spec: models_to_compare contains unknown model {m!r}")
    sampling = None
    if data.get("sampling") is not None:
        sdata = data["sampling"]
        _check_keys(sdata, ("time_step", "num_steps"), "spec.sampling")
        sampling = SamplingSpec(
            time_step=float(_require(sdata, "time_step", "spec.sampling")),
            num_steps=None if sdata.get("num_steps") is None else int(sdata["num_steps"]),
        )
        if sampling.time_step <= 0:
            raise ConfigError("spec.sampling: time_step must be positive")
    max_clamp = data.get("max_clamp_events")
    try:
        return RunSpec(
            scenario_dir=str(_require(data, "scenario_dir", "spec")),
            output_dir=str(_require(data, "output_dir", "spec")),
            obstacles=tuple(_parse_obstacle(o, i) for i, o in enumerate(obstacles)),
            models_to_compare=tuple(str(m) for m in models),
            link_budget=_parse_link_budget(data.get("link_budget", {}), "spec.link_budget"),
            sampling=sampling,
            removal_floor_db=float(data.get("removal_floor_db", -500.0)),
            max_clamp_events=None if max_clamp is None else int(max_clamp),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"spec: {exc}") from None


def _shape_to_dict(shape) -> dict:
    if isinstance(shape, OrthoScreenShape):
        return {"kind": "ortho_screen", "width": shape.width, "height": shape.height}
    if isinstance(shape, ScreenShape):
        return {"kind": "screen", "width": shape.width, "height": shape.height,
                "azimuth": shape.azimuth, "elevation": shape.elevation}
    return {"kind": "sphere", "radius": shape.radius}


def _mobility_to_dict(mobility) -> dict:
    if isinstance(mobility, Static):
        return {"kind": "static", "position": list(mobility.position)}
    if isinstance(mobility, LinearMobility):
        return {"kind": "linear", "start": list(mobility.start),
                "velocity": list(mobility.velocity)}
    return {"kind": "waypoints",
            "waypoints": [[t, list(p)] for t, p in zip(mobility.times, mobility.points)]}


def _model_to_dict(model: LossModel) -> dict:
    name = model_name(model)
    if isinstance(model, Obstruction):
        return {"kind": name, "loss_db": model.loss_db}
    return {"kind": name}


def run_spec_to_dict(spec: RunSpec) -> dict:
    return {
        "scenario_dir": spec.scenario_dir,
        "output_dir": spec.output_dir,
        "obstacles": [
            {
                "shape": _shape_to_dict(o.shape),
                "mobility": _mobility_to_dict(o.mobility),
                "model": _model_to_dict(o.model),
                "threshold": o.distance_threshold,
                "fallback": o.obstruction_fallback_for_secondary,
                "fallback_loss_db": o.fallback_loss_db,
            }
            for o in spec.obstacles
        ],
        "models_to_compare": list(spec.models_to_compare),
        "link_budget": {
            "carrier_frequency_hz": spec.link_budget.carrier_frequency_hz,
            "bandwidth_hz": spec.link_budget.bandwidth_hz,
            "tx_power_dbm": spec.link_budget.tx_power_dbm,
            "noise_figure_db": spec.link_budget.noise_figure_db,
            "tx_array": dataclasses.asdict(spec.link_budget.tx_array),
            "rx_array": dataclasses.asdict(spec.link_budget.rx_array),
        },
        "sampling": None if spec.sampling is None else {
            "time_step": spec.sampling.time_step,
            "num_steps": spec.sampling.num_steps,
        },
        "removal_floor_db": spec.removal_floor_db,
        "max_clamp_events": spec.max_clamp_events,
    }


def load_run_spec(path) -> RunSpec:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read spec {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    return parse_run_spec(data)


# ---------------------------------------------------------------------------
# Analytic sweeps (single direct ray, loss normalized out of the received power)

DEFAULT_SWEEP_MODELS = ("obstruction", "metis", "dked", "dked_pc", "itu_se")


@dataclass(frozen=True)
class SweepGeometry:
    frequency_hz: float = 60e9
    distance_m: float = 8.0
    node_height_m: float = 1.6
    screen_width_m: float = 0.2
    screen_height_m: float = 1.7
    obstruction_db: float = 10.0


def _direct_ray(geom: SweepGeometry) -> Ray:
    tx = (0.0, 0.0, geom.node_height_m)
    rx = (geom.distance_m, 0.0, geom.node_height_m)
    return Ray(delay=geom.distance_m / SPEED_OF_LIGHT, path_gain_db=0.0, phase_rad=0.0,
               vertices=np.array([tx, rx]))


def _sweep_obstacle(geom: SweepGeometry, center, model: LossModel) -> Obstacle:
    return Obstacle(
        shape=OrthoScreenShape(width=geom.screen_width_m, height=geom.screen_height_m),
        mobility=Static(position=tuple(float(c) for c in center)),
        model=model,
        distance_threshold=1e9,  # sweeps plot the raw model, no range gating
    )


def _sweep_model(name: str, geom: SweepGeometry) -> LossModel:
    if name == "obstruction":
        return Obstruction(geom.obstruction_db)
    return MODEL_REGISTRY[name]()


def run_crossing_sweep(geom: SweepGeometry = SweepGeometry(),
                       offsets: np.ndarray | None = None,
                       models: tuple[str, ...] = DEFAULT_SWEEP_MODELS) -> dict:
    """Loss curves while the screen crosses the path laterally at midspan."""
    if offsets is None:
        offsets = -1.5 + 0.004 * np.arange(751)
    ray = _direct_ray(geom)
    wavelength = SPEED_OF_LIGHT / geom.frequency_hz
    columns: dict = {"offset_m": np.asarray(offsets, dtype=np.float64)}
    blocked_col = np.zeros(len(offsets), dtype=np.int64)
    for name in models:
        model = _sweep_model(name, geom)
        losses = np.empty(len(offsets))
        for i, offset in enumerate(offsets):
            center = (0.5 * geom.distance_m, float(offset), 0.5 * geom.screen_height_m)
            outcome = interact(_sweep_obstacle(geom, center, model), ray, 0.0, wavelength)
            losses[i] = outcome.loss_db
            blocked_col[i] = int(outcome.blocked)
        columns[f"loss_db_{name}"] = losses
    columns["blocked"] = blocked_col
    return columns


def run_position_sweep(geom: SweepGeometry = SweepGeometry(), samples: int = 101,
                       margin_m: float = 0.25,
                       models: tuple[str, ...] = DEFAULT_SWEEP_MODELS) -> dict:
    """Loss curves while the screen slides along the path, always blocking it."""
    if samples < 3 or samples % 2 == 0:
        raise ConfigError("position sweep needs an odd sample count >= 3 "
                          "so the midpoint is sampled exactly")
    if not 0 < margin_m < 0.5 * geom.distance_m:
        raise ConfigError("margin must lie inside the path")
    positions = np.linspace(margin_m, geom.distance_m - margin_m, samples)
    ray = _direct_ray(geom)
    wavelength = SPEED_OF_LIGHT / geom.frequency_hz
    columns: dict = {"position_m": positions}
    for name in models:
        model = _sweep_model(name, geom)
        losses = np.empty(samples)
        for i, x in enumerate(positions):
            center = (float(x), 0.0, 0.5 * geom.screen_height_m)
            losses[i] = interact(_sweep_obstacle(geom, center, model), ray, 0.0,
                                 wavelength).loss_db
        columns[f"loss_db_{name}"] = losses
    return columns


def run_frequency_sweep(geom: SweepGeometry = SweepGeometry(),
                        frequencies_hz: tuple[float, ...] = (10e9, 30e9, 60e9, 100e9),
                        offsets: np.ndarray | None = None,
                        models: tuple[str, ...] = DEFAULT_SWEEP_MODELS) -> dict:
    """Crossing curves per carrier; rows are (frequency, offset) pairs."""
    if offsets is None:
        offsets = -1.5 + 0.004 * np.arange(751)
    tables = []
    for f in frequencies_hz:
        if f <= 0:
            raise ConfigError("frequencies must be positive")
        table = run_crossing_sweep(dataclasses.replace(geom, frequency_hz=float(f)),
                                   offsets=offsets, models=models)
        table["frequency_ghz"] = np.full(len(offsets), f / 1e9)
        tables.append(table)
    merged: dict = {}
    keys = ["frequency_ghz", "offset_m"] + [f"loss_db_{m}" for m in models] + ["blocked"]
    for key in keys:
        merged[key] = np.concatenate([t[key] for t in tables])
    return merged


def _write_csv(path: Path, columns: dict, order: list[str]) -> None:
    n = len(next(iter(columns.values())))
    lines = [",".join(order)]
    for i in range(n):
        cells = []
        for key in order:
            value = columns[key][i]
            if key == "blocked":
                cells.append(str(int(value)))
            else:
                cells.append(f"{value:.6f}")
        lines.append(",".join(cells))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# run command

def _sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def _sha256_tree(root: Path) -> str:
    h = hashlib.sha256()
    for path in sorted(p for p in root.rglob("*") if p.is_file()):
        h.update(str(path.relative_to(root)).encode())
        h.update(b"\0")
        h.update(path.read_bytes())
    return h.hexdigest()


def _override_model(obstacle: Obstacle, name: str) -> Obstacle:
    if isinstance(obstacle.shape, SphereShape):
        return obstacle  # spheres only ever obstruct
    if name == "obstruction":
        model = obstacle.model if isinstance(obstacle.model, Obstruction) else Obstruction(10.0)
    else:
        model = MODEL_REGISTRY[name]()
    if (isinstance(obstacle.shape, ScreenShape) and obstacle.shape.tilted
            and isinstance(model, Metis)):
        raise ConfigError("models_to_compare includes metis but the scenario has a "
                          "tilted screen, which metis cannot describe")
    return dataclasses.replace(obstacle, model=model)


def _format_time(value: float) -> str:
    return f"{value:.9g}"


def cmd_run(spec: RunSpec, spec_path: Path, workers: int | None) -> int:
    scenario_dir = Path(spec.scenario_dir)
    output_dir = Path(spec.output_dir)
    trace = import_scenario(scenario_dir)
    if spec.sampling is not None:
        if (spec.sampling.num_steps is not None
                and spec.sampling.num_steps != trace.num_steps):
            raise ConfigError(
                f"spec.sampling declares {spec.sampling.num_steps} steps but the "
                f"trace has {trace.num_steps}")
    cfg = SimulationConfig(
        obstacles=spec.obstacles,
        time_step=None if spec.sampling is None else spec.sampling.time_step,
        removal_floor_db=spec.removal_floor_db,
        carrier_frequency_hz=spec.link_budget.carrier_frequency_hz,
    )

    stats = RunStats()
    pairs = sorted(trace.pairs)
    baseline_snr = {pair: snr_timeline(trace, pair, spec.link_budget) for pair in pairs}

    configured = run_environment(trace, cfg, workers=workers, stats=stats)
    configured_snr = {pair: snr_timeline(configured, pair, spec.link_budget)
                      for pair in pairs}

    model_snr: dict[str, dict] = {}
    for name in spec.models_to_compare:
        model_cfg = dataclasses.replace(
            cfg, obstacles=tuple(_override_model(o, name) for o in spec.obstacles))
        model_trace = run_environment(trace, model_cfg, workers=workers, stats=stats)
        model_snr[name] = {pair: snr_timeline(model_trace, pair, spec.link_budget)
                           for pair in pairs}

    output_dir.mkdir(parents=True, exist_ok=True)
    trace_dir = output_dir / "trace"
    export_scenario(configured, trace_dir, drop_below_db=spec.removal_floor_db)

    snr_path = output_dir / "snr_timeline.csv"
    header = ["tx_id", "rx_id", "t_seconds", "snr_db_baseline", "snr_db"]
    header += [f"snr_db_{name}" for name in spec.models_to_compare]
    lines = [",".join(header)]
    for pair in pairs:
        for k in range(trace.num_steps):
            row = [str(pair[0]), str(pair[1]),
                   _format_time(baseline_snr[pair][k, 0]),
                   f"{baseline_snr[pair][k, 1]:.6f}",
                   f"{configured_snr[pair][k, 1]:.6f}"]
            row += [f"{model_snr[name][pair][k, 1]:.6f}" for name in spec.models_to_compare]
            lines.append(",".join(row))
    snr_path.write_text("\n".join(lines) + "\n")

    loss_files = []
    for name in spec.models_to_compare:
        path = output_dir / f"loss_timeline_{name}.csv"
        lines = ["tx_id,rx_id,t_seconds,loss_db"]
        for pair in pairs:
            base = baseline_snr[pair]
            model = model_snr[name][pair]
            for k in range(trace.num_steps):
                loss = base[k, 1] - model[k, 1]
                lines.append(f"{pair[0]},{pair[1]},{_format_time(base[k, 0])},{loss:.6f}")
        path.write_text("\n".join(lines) + "\n")
        loss_files.append(path.name)

    manifest = {
        "tool_version": _version(),
        "spec_sha256": _sha256_file(spec_path),
        "trace_sha256": _sha256_tree(scenario_dir),
        "outputs": sorted(["snr_timeline.csv", "trace"] + loss_files),
    }
    (output_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n")

    print(f"pairs: {len(pairs)}")
    print(f"steps: {trace.num_steps}")
    print(f"rays: {stats.rays_in} in, {stats.rays_dropped} dropped")
    print(f"clamp events: {stats.clamp_events} "
          f"(metis {stats.metis_clamps}, cap {stats.cap_hits})")
    c = stats.counters
    print(f"interactions: {c.diffraction_evals} diffraction, "
          f"{c.obstruction_evals} obstruction, {c.far_skips} skipped far, "
          f"{c.degenerate_skips} degenerate")
    print(f"outputs: {output_dir}")

    if spec.max_clamp_events is not None and stats.clamp_events > spec.max_clamp_events:
        raise NumericBudgetError(
            f"{stats.clamp_events} clamp events exceed the budget of "
            f"{spec.max_clamp_events}")
    return 0


def cmd_inspect(scenario_dir: Path) -> int:
    trace = import_scenario(scenario_dir)
    print(f"scenario: {scenario_dir}")
    print(f"nodes: {len(trace.node_positions)}")
    print(f"pairs: {len(trace.pairs)}")
    print(f"steps: {trace.num_steps} at {trace.time_step:.9g} s")
    for pair in sorted(trace.pairs):
        counts = [len(rays) for rays in trace.pairs[pair]]
        print(f"  Tx{pair[0]}Rx{pair[1]}: rays per step "
              f"min {min(counts)}, max {max(counts)}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rayblock",
        description="Post-process ray-traced channel traces with mobile obstacles "
                    "and diffraction loss models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario described by a JSON spec")
    p_run.add_argument("spec", type=Path)
    p_run.add_argument("--scenario-dir", type=Path, help="override spec scenario_dir")
    p_run.add_argument("--output-dir", type=Path, help="override spec output_dir")
    p_run.add_argument("--workers", type=int, help="worker process count")

    p_sweep = sub.add_parser("sweep", help="analytic single-ray model comparisons")
    p_sweep.add_argument("kind", choices=("crossing", "position", "frequency"))
    p_sweep.add_argument("-o", "--output", type=Path, required=True, help="CSV destination")
    p_sweep.add_argument("--frequency-ghz", type=float, default=60.0)
    p_sweep.add_argument("--frequencies-ghz", type=str, default="10,30,60,100",
                         help="comma list, frequency sweep only")
    p_sweep.add_argument("--distance", type=float, default=8.0, help="node separation, m")
    p_sweep.add_argument("--height", type=float, default=1.6, help="node height, m")
    p_sweep.add_argument("--screen-width", type=float, default=0.2)
    p_sweep.add_argument("--screen-height", type=float, default=1.7)
    p_sweep.add_argument("--obstruction-db", type=float, default=10.0)
    p_sweep.add_argument("--span", type=float, default=1.5, help="lateral half-span, m")
    p_sweep.add_argument("--step", type=float, default=0.004, help="lateral step, m")
    p_sweep.add_argument("--samples", type=int, default=101, help="position sweep samples")
    p_sweep.add_argument("--margin", type=float, default=0.25,
                         help="position sweep distance from the nodes, m")
    p_sweep.add_argument("--models", type=str, default=",".join(DEFAULT_SWEEP_MODELS))

    p_val = sub.add_parser("validate", help="schema-check a run spec")
    p_val.add_argument("spec", type=Path)

    p_ins = sub.add_parser("inspect", help="summarize a scenario directory")
    p_ins.add_argument("scenario_dir", type=Path)

    return parser


def _sweep_offsets(span: float, step: float) -> np.ndarray:
    if span <= 0 or step <= 0:
        raise ConfigError("span and step must be positive")
    n = int(round(2.0 * span / step)) + 1
    return -span + step * np.arange(n)


def _dispatch(args) -> int:
    if args.command == "run":
        spec = load_run_spec(args.spec)
        if args.scenario_dir is not None:
            spec = dataclasses.replace(spec, scenario_dir=str(args.scenario_dir))
        if args.output_dir is not None:
            spec = dataclasses.replace(spec, output_dir=str(args.output_dir))
        return cmd_run(spec, args.spec, args.workers)

    if args.command == "sweep":
        models = tuple(m.strip() for m in args.models.split(",") if m.strip())
        for m in models:
            if m not in MODEL_REGISTRY:
                raise ConfigError(f"unknown model {m!r} in --models")
        geom = SweepGeometry(
            frequency_hz=args.frequency_ghz * 1e9,
            distance_m=args.distance,
            node_height_m=args.height,
            screen_width_m=args.screen_width,
            screen_height_m=args.screen_height,
            obstruction_db=args.obstruction_db,
        )
        if args.kind == "crossing":
            columns = run_crossing_sweep(geom, _sweep_offsets(args.span, args.step), models)
            order = ["offset_m"] + [f"loss_db_{m}" for m in models] + ["blocked"]
        elif args.kind == "position":
            columns = run_position_sweep(geom, args.samples, args.margin, models)
            order = ["position_m"] + [f"loss_db_{m}" for m in models]
        else:
            freqs = tuple(float(f) * 1e9 for f in args.frequencies_ghz.split(","))
            columns = run_frequency_sweep(geom, freqs,
                                          _sweep_offsets(args.span, args.step), models)
            order = ["frequency_ghz", "offset_m"] + [f"loss_db_{m}" for m in models] + ["blocked"]
        _write_csv(args.output, columns, order)
        print(f"wrote {args.output}")
        return 0

    if args.command == "validate":
        load_run_spec(args.spec)
        print(f"{args.spec}: ok")
        return 0

    if args.command == "inspect":
        return cmd_inspect(args.scenario_dir)

    raise ConfigError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except ConfigError as exc:
        print(f"error: config-error: {exc}", file=sys.stderr)
        return 2
    except TraceFormatError as exc:
        print(f"error: trace-format-error: {exc}", file=sys.stderr)
        return 3
    except NumericBudgetError as exc:
        print(f"error: numeric-failure: {exc}", file=sys.stderr)
        return 4
    except RayBlockError as exc:
        print(f"error: config-error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
