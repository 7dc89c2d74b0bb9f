"""Box-membership counting kernel with compiled and fallback paths.

``box_field(points, centers, axes, half_widths, amplitudes)`` returns, for
each point, the number of boxes containing it and the sum of amplitudes of
those boxes.  The compiled extension is used when available; otherwise a
chunked numpy implementation with identical semantics takes over.
``BACKEND`` records which one is active.
"""

from __future__ import annotations

import numpy as np

__all__ = ["box_field", "box_field_numpy", "BACKEND"]


def box_field_numpy(points, centers, axes, half_widths, amplitudes):
    points = np.ascontiguousarray(points, dtype=float)
    m, d = points.shape
    counts = np.zeros(m, dtype=np.int32)
    field = np.zeros(m, dtype=np.complex128)
    # one box at a time keeps peak memory at a few arrays of length m
    for b in range(centers.shape[0]):
        y = (points - centers[b]) @ axes[b].T
        inside = np.all(np.abs(y) <= half_widths[b], axis=1)
        counts += inside
        field[inside] += amplitudes[b]
    return counts, field


try:
    from ._boxcount import box_field as _box_field_compiled

    def box_field(points, centers, axes, half_widths, amplitudes):
        return _box_field_compiled(
            np.ascontiguousarray(points, dtype=float),
            np.ascontiguousarray(centers, dtype=float),
            np.ascontiguousarray(axes, dtype=float),
            np.ascontiguousarray(half_widths, dtype=float),
            np.ascontiguousarray(amplitudes, dtype=np.complex128),
        )

    BACKEND = "compiled"
except ImportError:  # extension not built; same results, slower
    box_field = box_field_numpy
    BACKEND = "numpy"
