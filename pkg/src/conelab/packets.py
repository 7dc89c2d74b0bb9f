"""Wave packets, the sharp-cutoff dilation trick, and extremizer families.

A packet is the inverse transform of a modulated bump on a frequency plank;
its envelope concentrates on the translated dual box.  The extremizer
constructions place such tubes so the originals are disjoint while their
long dilations pile up on a focal ball, realizing the known lower-bound
growth rates; they are consumed either by the exact-geometry overlap
engine or synthesized on a grid for the FFT engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bumps import BumpProfile, Multiplier, adapted_bump
from .errors import DomainError
from .geometry import Cap, Plank, _fibonacci_sphere, dual_box
from .grid import Field, GridSpec, inverse_transform, lp_norm
from .overlap import (CountingResult, SamplerConfig, TubeFamily, counting_lp,
                      pairwise_disjoint)

__all__ = [
    "WavePacketSpec",
    "ExtremizerConfig",
    "Extremizer",
    "synthesize_packet",
    "packet_concentration",
    "dilation_trick",
    "build_extremizer",
    "overlap_ratio",
]


@dataclass(frozen=True)
class WavePacketSpec:
    """Frequency plank, spatial position, amplitude and cutoff style."""

    freq_plank: Plank
    position: np.ndarray
    amplitude: complex = 1.0 + 0.0j
    sharp: bool = False

    def __post_init__(self):
        object.__setattr__(self, "position",
                          np.asarray(self.position, dtype=float))
        if self.position.shape != (self.freq_plank.dim,):
            raise DomainError("position dimension must match the plank")


def synthesize_packet(pkt: WavePacketSpec, spec: GridSpec,
                      profile: BumpProfile | None = None) -> Field:
    """Inverse transform of amp * bump(xi) * exp(-2 pi i x0 . xi).

    Normalized so the packet value at x0 equals the amplitude; the envelope
    then sits at height ~1 on x0 + (dual box of the plank).
    """
    if pkt.freq_plank.dim != spec.dim:
        raise DomainError("packet dimension must match the grid")
    mesh = spec.frequency_mesh()
    if pkt.sharp:
        grids = np.broadcast_arrays(*mesh)
        pts = np.stack([g.ravel() for g in grids], axis=1)
        sym = pkt.freq_plank.contains(pts).reshape(spec.shape).astype(float)
    else:
        bump = adapted_bump(pkt.freq_plank, profile)
        sym = np.broadcast_to(bump(*mesh), spec.shape).astype(float)
    total = float(np.sum(sym))
    if total == 0:
        raise DomainError("plank holds no grid frequencies")
    grids = np.broadcast_arrays(*mesh)
    phase_arg = sum(g * x for g, x in zip(grids, pkt.position))
    vals = (pkt.amplitude / (total * spec.weight("frequency"))
            * sym * np.exp(-2j * np.pi * phase_arg))
    hat = Field(spec, "frequency", vals, role="packet")
    return inverse_transform(hat)


def packet_concentration(packet: Field, pkt: WavePacketSpec,
                         dilation: float = 2.0) -> float:
    """Fraction of L2 mass inside the dilated translated dual box."""
    spec = packet.spec
    box = dual_box(pkt.freq_plank).dilated(dilation).translated(pkt.position)
    mesh = spec.physical_mesh()
    grids = np.broadcast_arrays(*mesh)
    pts = np.stack([g.ravel() for g in grids], axis=1)
    # compare against the nearest periodic image of the box center
    L = spec.side_length
    disp = pts - box.center
    disp -= L * np.round(disp / L)
    y = np.abs(disp @ box.axes.T)
    inside = np.all(y <= box.half_widths, axis=1).reshape(spec.shape)
    mass = np.abs(packet.values) ** 2
    total = float(np.sum(mass))
    if total == 0:
        raise DomainError("zero packet")
    return float(np.sum(mass[inside])) / total


def dilation_trick(plank: Plank, axis: int):
    """Halve a plank along one axis (keeping the upper half).

    Returns the half plank and a record showing that its dual box is the
    parent's dual dilated by 2 along the same axis, which is why a sharp
    cutoff at the halfway hyperplane doubles the packet envelope.
    """
    d = plank.dim
    if not 0 <= axis < d:
        raise DomainError(f"axis {axis} out of range for dim {d}")
    hw = plank.half_widths.copy()
    shift = 0.5 * hw[axis] * plank.axes[axis]
    hw[axis] *= 0.5
    half = Plank(plank.center + shift, plank.axes, hw, role=plank.role + "_half")
    parent_dual = dual_box(plank)
    half_dual = dual_box(half)
    factor = half_dual.half_widths[axis] / parent_dual.half_widths[axis]
    return half, {
        "parent_dual": parent_dual,
        "half_dual": half_dual,
        "doubling_axis": axis,
        "dual_factor": float(factor),
    }


@dataclass(frozen=True)
class ExtremizerConfig:
    """Parameters of a focusing tube construction.

    kind: "bochner_riesz", "sharp_cutoff_A1" or "cone_l8_A2".
    spacing_factor scales the angular gap between tube directions,
    dilation is the long-dilation factor relating the disjoint family to
    the focusing one, thinning keeps every n-th direction.
    """

    kind: str
    dim: int
    p: float
    delta: float
    spacing_factor: float | None = None
    dilation: float = 100.0
    thinning: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("bochner_riesz", "sharp_cutoff_A1", "cone_l8_A2"):
            raise DomainError(f"unknown extremizer kind {self.kind!r}")
        if self.kind == "cone_l8_A2" and self.dim != 3:
            raise DomainError("the cone construction lives in dimension 3")
        if self.dim not in (2, 3):
            raise DomainError("dim must be 2 or 3")
        if not 0 < self.delta <= 0.25:
            raise DomainError("delta must lie in (0, 1/4]")
        if self.thinning < 1:
            raise DomainError("thinning must be >= 1")

    @property
    def spacing(self) -> float:
        if self.spacing_factor is not None:
            return self.spacing_factor
        return {"bochner_riesz": 4.0, "sharp_cutoff_A1": 4.0,
                "cone_l8_A2": 6.0}[self.kind]


@dataclass
class Extremizer:
    config: ExtremizerConfig
    family: TubeFamily          # disjoint tubes, the input side
    dilated: TubeFamily         # long dilations, the output side
    focal_lo: np.ndarray
    focal_hi: np.ndarray
    expected_exponent: float
    numerator_mode: str         # "coherent" (amplitudes add) or "square"


def _radial_tube_family(directions: np.ndarray, R: float, dilation: float,
                        dim: int) -> tuple[list[Plank], list[Plank]]:
    """Radial tubes of width sqrt(R), length R/dilation, centered at 0.4R,
    plus their long dilations (length R, still covering the origin)."""
    tubes, dil = [], []
    width_half = math.sqrt(R) / 2.0
    for d_hat in directions:
        frame = _complete_frame(d_hat)
        hw = np.full(dim, width_half)
        hw[0] = R / (2.0 * dilation)
        center = 0.4 * R * d_hat
        tubes.append(Plank(center, frame, hw, role="T"))
        hw2 = hw.copy()
        hw2[0] = R / 2.0
        dil.append(Plank(center, frame, hw2, role="T_dil"))
    return tubes, dil


def _complete_frame(d_hat: np.ndarray) -> np.ndarray:
    """Orthonormal frame with the given unit vector as the first row."""
    d_hat = np.asarray(d_hat, dtype=float)
    d_hat = d_hat / np.linalg.norm(d_hat)
    n = d_hat.shape[0]
    if n == 2:
        return np.stack([d_hat, np.array([-d_hat[1], d_hat[0]])])
    helper = np.array([0.0, 0.0, 1.0])
    if abs(d_hat[2]) > 0.9:
        helper = np.array([1.0, 0.0, 0.0])
    u = np.cross(d_hat, helper)
    u /= np.linalg.norm(u)
    v = np.cross(d_hat, u)
    return np.stack([d_hat, u, v])


def _directions(dim: int, gap: float, thinning: int) -> np.ndarray:
    if dim == 2:
        count = max(2, int(2 * math.pi / gap))
        ang = 2 * math.pi * np.arange(count) / count
        dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    else:
        # spiral lattice at every scale: a gap-separated set whose density
        # scales exactly like gap^-2, keeping log-log sweeps on one line
        count = max(4, int(2.6 * math.pi / gap**2))
        dirs = _fibonacci_sphere(count)
    return dirs[::thinning]


def build_extremizer(cfg: ExtremizerConfig) -> Extremizer:
    delta, dim, p = cfg.delta, cfg.dim, cfg.p
    if cfg.kind == "bochner_riesz":
        R = 1.0 / delta
        dirs = _directions(dim, cfg.spacing * math.sqrt(delta), cfg.thinning)
        tubes, dil = _radial_tube_family(dirs, R, cfg.dilation, dim)
        half = 0.7
        lo, hi = np.full(dim, -half), np.full(dim, half)
        alpha = (dim - 1) / 2.0 - dim / p
        mode = "coherent"
    elif cfg.kind == "sharp_cutoff_A1":
        R = 1.0 / delta**2
        dirs = _directions(dim, cfg.spacing * delta, cfg.thinning)
        tubes, dil = _radial_tube_family(dirs, R, cfg.dilation, dim)
        half = 0.4 * math.sqrt(R) / math.sqrt(dim)
        lo, hi = np.full(dim, -half), np.full(dim, half)
        alpha = (dim - 1) / 2.0 - dim / p
        mode = "square"
    else:  # cone_l8_A2: planks along rulings of a hyperboloid
        rho_c = 0.4 / math.sqrt(delta)
        gap = cfg.spacing * math.sqrt(delta)
        count = max(2, int(2 * math.pi / gap))
        tubes, dil = [], []
        for j in range(0, count, cfg.thinning):
            phi = 2 * math.pi * j / count
            r_hat = np.array([math.cos(phi), math.sin(phi), 0.0])
            t_hat = np.array([-math.sin(phi), math.cos(phi), 0.0])
            ruling = (t_hat - np.array([0.0, 0.0, 1.0])) / math.sqrt(2.0)
            third = np.cross(ruling, r_hat)
            frame = np.stack([ruling, r_hat, third])
            hw = np.array([0.5 / delta, 0.5 / (math.sqrt(delta) * cfg.dilation),
                           0.35])
            center = rho_c * r_hat
            tubes.append(Plank(center, frame, hw, role="P"))
            hw2 = hw.copy()
            hw2[1] *= cfg.dilation
            dil.append(Plank(center, frame, hw2, role="P_dil"))
        half = 0.15
        lo, hi = np.full(3, -half), np.full(3, half)
        alpha = 0.25 - 2.0 / p
        mode = "square"
    family = TubeFamily(tubes)
    dilated = TubeFamily(dil, focal_center=np.zeros(dim),
                         focal_radius=float(hi[0]))
    return Extremizer(cfg, family, dilated, lo, hi, alpha, mode)


def overlap_ratio(ext: Extremizer, sampler: SamplerConfig,
                  disjoint: bool | None = None) -> CountingResult:
    """Growth ratio of an extremizer measured by exact-geometry counting.

    Denominator: L^p mass of the disjoint family over its bounding box;
    when the family is confirmed pairwise disjoint this is the exact value
    (sum of volumes)^(1/p), otherwise a Monte-Carlo estimate.
    Numerator: the focusing field over the focal box, coherently (|sum|)
    for amplitude constructions, or as a square function (count^(1/2))
    otherwise.
    """
    p = ext.config.p
    if disjoint is None:
        disjoint = pairwise_disjoint(ext.family)
    if disjoint:
        den = CountingResult(ext.family.total_volume() ** (1.0 / p), 0.0, 0)
    else:
        den = counting_lp(ext.family, p, sampler)
    dom = (ext.focal_lo, ext.focal_hi)
    if ext.numerator_mode == "coherent":
        num = counting_lp(ext.dilated, p, sampler, domain=dom)
        value = num.value / den.value
        rel = math.hypot(num.stderr / num.value if num.value else 0.0,
                         den.stderr / den.value if den.value else 0.0)
    else:
        if p < 2:
            raise DomainError("square-mode ratio needs p >= 2")
        num = counting_lp(ext.dilated, p / 2.0, sampler, domain=dom)
        value = math.sqrt(num.value) / den.value
        rel = math.hypot(0.5 * (num.stderr / num.value if num.value else 0.0),
                         den.stderr / den.value if den.value else 0.0)
    return CountingResult(value, value * rel, num.samples + den.samples)
