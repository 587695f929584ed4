"""Benchmark the hot kernels under the compiled and pure-numpy paths.

Runs itself twice in subprocesses, once as-is and once with
RAYBLOCK_NO_NUMBA=1, then prints a side-by-side table. Invoke from the
repository root:

    python benchmarks/bench_kernels.py
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO_ROOT / "src"))


def _measure() -> dict:
    import numpy as np

    from rayblock import _kernels
    from rayblock.cli import SweepGeometry, run_crossing_sweep

    rng = np.random.default_rng(7)
    results = {"numba": _kernels.USING_NUMBA}

    nus = rng.uniform(-12, 12, 1_000_000)
    _kernels.fresnel_cs_batch(nus[:10])  # warm up / compile
    t0 = time.perf_counter()
    _kernels.fresnel_cs_batch(nus)
    results["fresnel_cs_batch_1e6"] = time.perf_counter() - t0

    starts = rng.uniform(0, 10, (200_000, 3))
    ends = starts + rng.uniform(-2, 2, (200_000, 3))
    point = np.array([5.0, 5.0, 1.0])
    _kernels.point_segment_distance_batch(point, starts[:10], ends[:10])
    t0 = time.perf_counter()
    _kernels.point_segment_distance_batch(point, starts, ends)
    results["segment_distances_2e5"] = time.perf_counter() - t0

    args = (0.0, 0.0, 0.0, 0.0, 0.0, 1.7, 4.0, -3.0, 1.6, 4.0, 3.0, 1.6)
    _kernels.fermat_on_segment(*args)
    t0 = time.perf_counter()
    for _ in range(20_000):
        _kernels.fermat_on_segment(*args)
    results["fermat_search_2e4"] = time.perf_counter() - t0

    offsets = -1.5 + 0.01 * np.arange(301)
    run_crossing_sweep(SweepGeometry(), offsets[:5])
    t0 = time.perf_counter()
    run_crossing_sweep(SweepGeometry(), offsets)
    results["crossing_sweep_301"] = time.perf_counter() - t0

    return results


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--mode", choices=("compare", "single"), default="compare")
    args = parser.parse_args()

    if args.mode == "single":
        print(json.dumps(_measure()))
        return 0

    rows = {}
    for label, extra_env in (("numba", {}), ("numpy", {"RAYBLOCK_NO_NUMBA": "1"})):
        env = dict(os.environ, **extra_env)
        out = subprocess.run(
            [sys.executable, __file__, "--mode", "single"],
            capture_output=True, text=True, env=env, check=True,
        )
        rows[label] = json.loads(out.stdout.strip().splitlines()[-1])

    if not rows["numba"]["numba"]:
        print("note: numba unavailable, both columns ran the numpy path")
    keys = [k for k in rows["numba"] if k != "numba"]
    width = max(len(k) for k in keys)
    print(f"{'kernel':<{width}}  {'numba [s]':>10}  {'numpy [s]':>10}  {'speedup':>8}")
    for key in keys:
        a, b = rows["numba"][key], rows["numpy"][key]
        print(f"{key:<{width}}  {a:10.4f}  {b:10.4f}  {b / a:7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
