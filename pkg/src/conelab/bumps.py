"""Smooth cutoffs: adapted bumps, cap cutoffs, annulus partitions.

A Multiplier is a frequency-side symbol, evaluated lazily on grids and
cached.  Profiles use the classical exp(-1/t) smoothstep by default; a
polynomial smoothstep of chosen order is available when only finitely many
derivatives matter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import comb

from .errors import BandwidthError, DomainError, ReplacementError
from .geometry import Cap, Plank
from .grid import Field, GridSpec

__all__ = [
    "BumpProfile",
    "Multiplier",
    "adapted_bump",
    "cap_cutoff",
    "annulus_partition",
    "decaying_indicator",
    "replace_cutoff",
]


def _smoothstep_exp(t: np.ndarray) -> np.ndarray:
    """C-infinity monotone step: 0 for t<=0, 1 for t>=1."""
    t = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


def _smoothstep_poly(t: np.ndarray, order: int) -> np.ndarray:
    t = np.clip(t, 0.0, 1.0)
    out = np.zeros_like(t)
    for i in range(order + 1):
        out += comb(order + i, i) * comb(2 * order + 1, order - i) * (-t) ** i
    return t ** (order + 1) * out


@dataclass(frozen=True)
class BumpProfile:
    """1-d profile equal to 1 on [0, 1], 0 outside [0, 2).

    The transition occupies [2 - 2*transition_fraction, 2]; the default
    fraction 1/2 starts it right at the inner box.  kind is "smooth"
    (exp smoothstep) or "poly" with the given order.
    """

    transition_fraction: float = 0.5
    kind: str = "smooth"
    order: int = 3

    def __post_init__(self):
        if not 0 < self.transition_fraction <= 0.5:
            raise DomainError("transition_fraction must lie in (0, 1/2]")
        if self.kind not in ("smooth", "poly"):
            raise DomainError(f"unknown profile kind {self.kind!r}")

    def __call__(self, u) -> np.ndarray:
        """Profile value at |normalized coordinate| u >= 0."""
        u = np.abs(np.asarray(u, dtype=float))
        w = 2.0 * self.transition_fraction
        t = (2.0 - u) / w
        if self.kind == "smooth":
            return _smoothstep_exp(t)
        return _smoothstep_poly(t, self.order)


class Multiplier:
    """Frequency symbol: callable on coordinate arrays, cached per grid."""

    def __init__(self, fn, label: str = "", max_freq: float | None = None):
        self._fn = fn
        self.label = label
        #: largest |xi_i| the symbol is nonzero at, if known (for bandwidth checks)
        self.max_freq = max_freq
        self._cache: dict[GridSpec, Field] = {}
        self._sparse_cache: dict = {}

    def __call__(self, *coords) -> np.ndarray:
        return self._fn(*coords)

    def sample(self, spec: GridSpec) -> Field:
        if spec not in self._cache:
            if self.max_freq is not None and self.max_freq > spec.nyquist:
                raise BandwidthError(
                    f"symbol {self.label!r} reaches |xi| = {self.max_freq}, "
                    f"beyond the grid Nyquist {spec.nyquist}")
            vals = np.asarray(self._fn(*spec.frequency_mesh()))
            vals = np.broadcast_to(vals, spec.shape).astype(np.complex128)
            self._cache[spec] = Field(spec, "frequency", vals, role=self.label)
        return self._cache[spec]

    def sample_sparse(self, spec: GridSpec):
        """(flat indices, values) of the nonzero samples, cached."""
        if spec not in self._sparse_cache:
            vals = self.sample(spec).values.ravel()
            idx = np.flatnonzero(vals)
            self._sparse_cache[spec] = (idx, vals[idx])
        return self._sparse_cache[spec]

    def __sub__(self, other: "Multiplier") -> "Multiplier":
        return Multiplier(lambda *c: self._fn(*c) - other._fn(*c),
                          label=f"{self.label}-{other.label}",
                          max_freq=_max_or_none(self.max_freq, other.max_freq))

    def __mul__(self, other: "Multiplier") -> "Multiplier":
        return Multiplier(lambda *c: self._fn(*c) * other._fn(*c),
                          label=f"{self.label}*{other.label}",
                          max_freq=_min_or_none(self.max_freq, other.max_freq))


def _max_or_none(a, b):
    if a is None or b is None:
        return None
    return max(a, b)


def _min_or_none(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def adapted_bump(plank: Plank, profile: BumpProfile | None = None) -> Multiplier:
    """Separable bump in the plank frame: 1 on the plank, 0 outside its
    2-dilation, with each factor a 1-d profile of the normalized coordinate."""
    profile = profile or BumpProfile()
    center = plank.center
    axes = plank.axes
    hw = plank.half_widths

    def fn(*coords):
        grids = np.broadcast_arrays(*coords)
        out = None
        for i in range(plank.dim):
            y = sum((grids[j] - center[j]) * axes[i, j] for j in range(plank.dim))
            f = profile(y / hw[i])
            out = f if out is None else out * f
        return out

    # support is the 2-dilated plank; per-axis reach from its corners
    reach = float(np.max(np.abs(center) + 2.0 * hw @ np.abs(axes)))
    return Multiplier(fn, label=f"bump[{plank.role}]", max_freq=reach)


def cap_cutoff(cap: Cap, delta: float | None = None,
               profile: BumpProfile | None = None) -> Multiplier:
    """Homogeneous angular cutoff: 1 on the half cap, 0 outside the cap,
    depending only on xi/|xi| (and set to 0 at xi = 0)."""
    profile = profile or BumpProfile()
    radius = delta if delta is not None else cap.radius
    if not 0 < radius <= math.pi:
        raise DomainError(f"cap radius must lie in (0, pi], got {radius}")
    center = cap.center

    def fn(*coords):
        grids = np.broadcast_arrays(*coords)
        r = np.sqrt(sum(g * g for g in grids))
        dot = sum(g * c for g, c in zip(grids, center))
        with np.errstate(invalid="ignore", divide="ignore"):
            ang = np.arccos(np.clip(np.where(r > 0, dot / np.where(r > 0, r, 1.0),
                                             1.0), -1.0, 1.0))
        vals = profile(2.0 * ang / radius)
        return np.where(r > 0, vals, 0.0)

    return Multiplier(fn, label="capcut")


def _phi_le(r: np.ndarray, profile: BumpProfile) -> np.ndarray:
    """Radial step: 1 for r <= 1, 0 for r >= 2."""
    return profile(np.asarray(r, dtype=float))


def annulus_partition(k_min: int, k_max: int,
                      profile: BumpProfile | None = None):
    """Dyadic radial partition rho_k(|xi|) with sum 1 on [2^k_min, 2^k_max].

    Each rho_k is supported in [2^(k-1), 2^(k+1)] (inside the [1/4, 4]
    window around 2^k) and the partial sums telescope exactly.
    Returns the list of multipliers for k = k_min .. k_max.
    """
    if k_max < k_min:
        raise DomainError("k_max must be >= k_min")
    profile = profile or BumpProfile()

    def make(k):
        def fn(*coords):
            grids = np.broadcast_arrays(*coords)
            r = np.sqrt(sum(g * g for g in grids))
            return (_phi_le(r / 2.0**k, profile)
                    - _phi_le(r / 2.0 ** (k - 1), profile))
        return Multiplier(fn, label=f"rho[{k}]", max_freq=2.0 ** (k + 1))

    return [make(k) for k in range(k_min, k_max + 1)]


def decaying_indicator(plank: Plank, spec: GridSpec, decay: float = 100.0,
                       periodic: bool = True) -> Field:
    """Physical-side weight equal to 1 on the box, decaying polynomially in
    box-normalized distance outside: (1 + max(|A^(-1)(x-c)|_inf - 1, 0))^(-M)
    with A mapping the unit cube onto the plank.

    Displacements wrap to the nearest periodic image by default so the
    weight is well defined on the torus.  The normalization keeps the mean
    of the weight over its own box equal to 1, so |R|^(-1) chi_R * g is a
    genuine local average.
    """
    if decay <= 0:
        raise DomainError("decay exponent must be positive")
    mesh = spec.physical_mesh()
    L = spec.side_length
    d = spec.dim
    grids = np.broadcast_arrays(*mesh)
    disp = []
    for j in range(d):
        dx = grids[j] - plank.center[j]
        if periodic:
            dx = dx - L * np.round(dx / L)
        disp.append(dx)
    sup = None
    for i in range(d):
        y = np.abs(sum(disp[j] * plank.axes[i, j] for j in range(d))) \
            / plank.half_widths[i]
        sup = y if sup is None else np.maximum(sup, y)
    vals = (1.0 + np.maximum(sup - 1.0, 0.0)) ** (-decay)
    return Field(spec, "physical", vals.astype(np.complex128), role="chi")


def replace_cutoff(source_plank: Plank, target_plank: Plank,
                   constraint, spec: GridSpec,
                   profile: BumpProfile | None = None,
                   tol: float = 1e-9) -> Multiplier:
    """Bump adapted to the target plank that matches the source bump on all
    grid frequencies satisfying the constraint.

    Both planks must share axes; only half-widths may differ.  ``constraint``
    is a callable on coordinate arrays returning a boolean mask.  Raises
    ReplacementError when the two bumps disagree anywhere in the constrained
    set, so a successful return certifies the replacement on this grid.
    """
    profile = profile or BumpProfile()
    if not np.allclose(source_plank.axes, target_plank.axes, atol=1e-12):
        raise DomainError("source and target planks must share axes")
    src = adapted_bump(source_plank, profile)
    tgt = adapted_bump(target_plank, profile)
    mesh = spec.frequency_mesh()
    mask = np.broadcast_to(np.asarray(constraint(*mesh), dtype=bool), spec.shape)
    diff = np.abs(np.broadcast_to(src(*mesh), spec.shape)
                  - np.broadcast_to(tgt(*mesh), spec.shape))
    worst = float(np.max(diff[mask])) if np.any(mask) else 0.0
    if worst > tol:
        raise ReplacementError(
            f"replacement bump deviates by {worst:.3e} inside the constraint")
    return tgt
