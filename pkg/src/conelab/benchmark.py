"""Timing comparison of the compiled box-counting kernel against the numpy
fallback.  Run as ``python -m conelab.benchmark``.

Both paths produce identical counts and fields; the compiled extension
wins on workloads with many boxes because the fallback pays one full pass
over the points per box.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from .kernels import BACKEND, box_field, box_field_numpy
from .packets import ExtremizerConfig, build_extremizer


def _workload(delta: float, samples: int, seed: int = 0):
    ext = build_extremizer(ExtremizerConfig(kind="cone_l8_A2", dim=3,
                                            p=8.0, delta=delta))
    centers, axes, half_widths = ext.dilated.arrays()
    rng = np.random.default_rng(seed)
    lo, hi = ext.dilated.bounding_box()
    points = rng.uniform(lo, hi, size=(samples, 3))
    amps = np.ones(centers.shape[0], dtype=np.complex128)
    return points, centers, axes, half_widths, amps


def run_benchmark(delta: float = 2.0**-8, samples: int = 200_000,
                  repeats: int = 3) -> dict:
    args = _workload(delta, samples)
    out = {"backend": BACKEND, "boxes": args[1].shape[0], "points": samples}
    for name, fn in (("active", box_field), ("numpy", box_field_numpy)):
        best = float("inf")
        for _ in range(repeats):
            t0 = time.perf_counter()
            counts, field = fn(*args)
            best = min(best, time.perf_counter() - t0)
        out[f"{name}_seconds"] = best
        out[f"{name}_checksum"] = int(counts.sum())
    out["speedup"] = out["numpy_seconds"] / out["active_seconds"]
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--delta", type=float, default=2.0**-8)
    parser.add_argument("--samples", type=int, default=200_000)
    args = parser.parse_args(argv)
    res = run_benchmark(args.delta, args.samples)
    if res["active_checksum"] != res["numpy_checksum"]:
        print("MISMATCH between kernel paths")
        return 1
    print(f"backend={res['backend']} boxes={res['boxes']} "
          f"points={res['points']}")
    print(f"active kernel: {res['active_seconds'] * 1e3:.1f} ms")
    print(f"numpy fallback: {res['numpy_seconds'] * 1e3:.1f} ms")
    print(f"speedup: {res['speedup']:.2f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
