"""Fourier projection families, maximal operators and comparison checks.

A ProjectionFamily pairs geometric pieces (caps, polyhedra, planks, dyadic
annuli) with their frequency symbols.  The comparison checks return the two
sides of the corresponding weighted inequality together with their ratio;
nothing is asserted here, thresholds live with the callers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from .bumps import (BumpProfile, Multiplier, adapted_bump, annulus_partition,
                    cap_cutoff, decaying_indicator)
from .errors import ContractError, DomainError
from .geometry import Cap, Plank, Polyhedron, dual_box
from .grid import Field, GridSpec, forward_transform, inverse_transform, lp_norm

__all__ = [
    "ProjectionFamily",
    "MaximalConfig",
    "CheckResult",
    "conical_cap_family",
    "sharp_polyhedron_family",
    "plank_family",
    "apply_projection",
    "littlewood_paley_split",
    "directional_maximal",
    "directional_s_maximal",
    "strong_maximal",
    "weighted_l2_check",
    "plank_lp_check",
    "cordoba_fefferman_check",
]


@dataclass
class ProjectionFamily:
    """Pieces of a frequency decomposition: (geometry, symbol) pairs."""

    kind: str
    pieces: list  # list of (geometry object, Multiplier)
    label: str = ""

    def __len__(self):
        return len(self.pieces)

    def multipliers(self):
        return [m for _, m in self.pieces]


def conical_cap_family(caps: list[Cap], profile: BumpProfile | None = None,
                       radial: Multiplier | None = None) -> ProjectionFamily:
    """Smooth angular cutoffs, one per cap, optionally times a radial factor."""
    pieces = []
    for cap in caps:
        m = cap_cutoff(cap, profile=profile)
        if radial is not None:
            m = m * radial
        pieces.append((cap, m))
    return ProjectionFamily("smooth_cap", pieces)


def sharp_polyhedron_family(polys: list[Polyhedron],
                            radial: Multiplier | None = None,
                            partition: bool = True) -> ProjectionFamily:
    """Sharp conical indicators of polyhedral caps.

    With ``partition=True`` boundary frequencies are assigned to the piece of
    smallest index, so the symbols sum to an indicator with no double
    counting even where faces coincide.
    """
    pieces = []
    for i, poly in enumerate(polys):
        earlier = polys[:i] if partition else []

        def fn(*coords, _poly=poly, _earlier=earlier):
            grids = np.broadcast_arrays(*coords)
            pts = np.stack(grids, axis=-1)
            mask = _poly.contains_direction(pts)
            for q in _earlier:
                mask &= ~q.contains_direction(pts)
            return mask.astype(float)

        m = Multiplier(fn, label=f"sharp[{i}]")
        if radial is not None:
            m = m * radial
        pieces.append((poly, m))
    return ProjectionFamily("sharp_poly", pieces)


def plank_family(planks: list[Plank],
                 profile: BumpProfile | None = None) -> ProjectionFamily:
    pieces = [(p, adapted_bump(p, profile)) for p in planks]
    return ProjectionFamily("plank", pieces)


def apply_projection(fam: ProjectionFamily, f: Field) -> list[Field]:
    """Apply every piece: (symbol * fhat) back-transformed, physical output."""
    fhat = forward_transform(f) if f.side == "physical" else f
    spec = f.spec
    out = []
    for _, m in fam.pieces:
        sym = m.sample(spec)
        piece = fhat.with_values(fhat.values * sym.values)
        out.append(inverse_transform(piece))
    return out


def littlewood_paley_split(f: Field, class_offset: int = 0, classes: int = 1,
                           profile: BumpProfile | None = None) -> dict[int, Field]:
    """Dyadic frequency pieces P_k f for k in the chosen residue class.

    k ranges over the dyadic shells representable on the grid (the partition
    sums to 1 for radii between 2^k_min and 2^k_max).  Input spectra must
    vanish outside that window, including the zero frequency, for the class
    union to reconstruct f.
    """
    if classes < 1:
        raise DomainError("classes must be >= 1")
    spec = f.spec
    k_min = int(math.ceil(math.log2(4.0 * spec.freq_spacing)))
    k_max = int(math.floor(math.log2(spec.nyquist / 2.0)))
    if k_max < k_min:
        raise DomainError("grid too small for any dyadic shell")
    rhos = annulus_partition(k_min, k_max, profile)
    fhat = forward_transform(f) if f.side == "physical" else f
    out = {}
    for k, rho in zip(range(k_min, k_max + 1), rhos):
        if (k - class_offset) % classes != 0:
            continue
        sym = rho.sample(spec)
        out[k] = inverse_transform(fhat.with_values(fhat.values * sym.values))
    return out


@dataclass(frozen=True)
class MaximalConfig:
    """Dyadic directional averaging: exponent s and the radius window."""

    s: float = 2.0
    t_min: float | None = None
    t_max: float | None = None

    def __post_init__(self):
        if self.s < 1:
            raise DomainError("s must be >= 1")

    def j_range(self, spec: GridSpec):
        h = spec.spacing
        t_lo = self.t_min if self.t_min is not None else h
        t_hi = self.t_max if self.t_max is not None else spec.side_length / 4.0
        j_lo = max(0, int(math.ceil(math.log2(max(t_lo, h) / h))))
        j_hi = int(math.floor(math.log2(t_hi / h)))
        if j_hi < j_lo:
            raise DomainError("empty dyadic radius window")
        return j_lo, j_hi


def _rolled(values: np.ndarray, shift: np.ndarray) -> np.ndarray:
    return np.roll(values, tuple(-int(s) for s in shift),
                   axis=tuple(range(values.ndim)))


def directional_maximal(g: Field, direction, cfg: MaximalConfig) -> Field:
    """sup over dyadic t of the average of |g| on the segment x + [-t, t] n.

    Samples at the nearest grid points with trapezoid end-point weights.
    """
    if g.side != "physical":
        raise DomainError("directional_maximal expects a physical field")
    n_hat = np.asarray(direction, dtype=float)
    n_hat = n_hat / np.linalg.norm(n_hat)
    vals = np.abs(g.values).astype(np.float64)
    j_lo, j_hi = cfg.j_range(g.spec)
    best = None
    running = vals.copy()  # plain sum over |k| <= K, starts at K = 0
    k_done = 0
    for j in range(0, j_hi + 1):
        K = 2**j
        for k in range(k_done + 1, K + 1):
            shift = np.round(k * n_hat).astype(int)
            running = running + _rolled(vals, shift) + _rolled(vals, -shift)
        k_done = K
        if j < j_lo:
            continue
        end_shift = np.round(K * n_hat).astype(int)
        ends = _rolled(vals, end_shift) + _rolled(vals, -end_shift)
        avg = (running - 0.5 * ends) / (2.0 * K)
        best = avg if best is None else np.maximum(best, avg)
    return Field(g.spec, "physical", best.astype(np.complex128), role="maximal")


def directional_s_maximal(g: Field, direction, cfg: MaximalConfig) -> Field:
    """Iterated variant M(M(|g|^s)^(1/s)) along one direction."""
    inner = directional_maximal(
        g.with_values(np.abs(g.values) ** cfg.s), direction, cfg)
    outer = directional_maximal(
        inner.with_values(np.abs(inner.values) ** (1.0 / cfg.s)), direction, cfg)
    return outer


def strong_maximal(g: Field, directions, cfg: MaximalConfig) -> Field:
    """Pointwise sup of the s-variant over a finite set of directions."""
    best = None
    for n_hat in directions:
        m = directional_s_maximal(g, n_hat, cfg).values.real
        best = m if best is None else np.maximum(best, m)
    return Field(g.spec, "physical", best.astype(np.complex128), role="maximal")


@dataclass(frozen=True)
class CheckResult:
    lhs: float
    rhs: float

    @property
    def ratio(self) -> float:
        if self.rhs == 0:
            return math.inf if self.lhs > 0 else 0.0
        return self.lhs / self.rhs


def _congruent(planks: list[Plank]) -> None:
    ref = planks[0]
    for p in planks[1:]:
        if not (np.allclose(p.half_widths, ref.half_widths, rtol=1e-9)
                and np.allclose(np.abs(p.axes @ ref.axes.T), np.eye(p.dim),
                                atol=1e-9)):
            raise ContractError("planks must be congruent translates "
                                "(equal half-widths, matching axes)")


def weighted_l2_check(planks: list[Plank], f: Field, g: Field,
                      decay: float = 100.0,
                      profile: BumpProfile | None = None) -> CheckResult:
    """Weighted L2 comparison for a congruent plank family.

    lhs = sum_R int |T_R f|^2 g,  rhs = int |f|^2 (|R*|^{-1} chi_{R*} * g)
    with chi the decaying dual-box indicator and * periodic convolution.
    """
    _congruent(planks)
    spec = f.spec
    gv = np.abs(g.values).astype(float)
    fam = plank_family(planks, profile)
    lhs = 0.0
    w = spec.weight("physical")
    for piece in apply_projection(fam, f):
        lhs += float(np.sum(np.abs(piece.values) ** 2 * gv) * w)
    dual = dual_box(planks[0])
    chi = decaying_indicator(dual, spec, decay=decay).values.real
    conv = scipy.fft.ifftn(scipy.fft.fftn(gv) * scipy.fft.fftn(chi)).real * w
    weight = conv / dual.volume
    rhs = float(np.sum(np.abs(f.values) ** 2 * weight) * w)
    return CheckResult(lhs, rhs)


def plank_lp_check(planks: list[Plank], f: Field, p: float,
                   container: Plank | None = None, decay: float = 100.0,
                   profile: BumpProfile | None = None) -> CheckResult:
    """L^p comparison sum_R ||T_R f||_p^p vs ||f||_p^p, optionally localized.

    With a container box U, both sides carry the decaying indicator of U and
    every dual box must fit inside a translate of U.
    """
    if p < 2:
        raise DomainError("plank comparison is stated for p >= 2")
    _congruent(planks)
    spec = f.spec
    if container is not None:
        dual = dual_box(planks[0])
        reach = dual.half_widths @ np.abs(dual.axes @ container.axes.T)
        if np.any(reach > container.half_widths + 1e-9):
            raise ContractError("container must hold a translate of each dual box")
        wv = decaying_indicator(container, spec, decay=decay).values.real
    else:
        wv = np.ones(spec.shape)
    fam = plank_family(planks, profile)
    w = spec.weight("physical")
    lhs = 0.0
    for piece in apply_projection(fam, f):
        lhs += float(np.sum(np.abs(piece.values) ** p * wv) * w)
    rhs = float(np.sum(np.abs(f.values) ** p * wv) * w)
    return CheckResult(lhs, rhs)


def cordoba_fefferman_check(poly: Polyhedron, h: Field, g: Field,
                            cfg: MaximalConfig) -> CheckResult:
    """Sharp-projection weighted bound against iterated maximal averages.

    lhs = int |S h|^2 g with S the sharp conical projection onto the cap;
    rhs = int |h|^2 (M_{s,n_1} ... M_{s,n_m} |g|), one factor per face
    normal.
    """
    fam = sharp_polyhedron_family([poly], partition=False)
    piece = apply_projection(fam, h)[0]
    w = h.spec.weight("physical")
    gv = np.abs(g.values).astype(float)
    lhs = float(np.sum(np.abs(piece.values) ** 2 * gv) * w)
    weight = g.with_values(gv)
    for n_hat in poly.normals:
        weight = directional_s_maximal(weight, n_hat[:h.spec.dim], cfg)
    rhs = float(np.sum(np.abs(h.values) ** 2 * weight.values.real) * w)
    return CheckResult(lhs, rhs)
