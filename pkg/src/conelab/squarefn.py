"""Directional square functions and the high-low frequency machinery.

square_ratio streams the pieces one at a time (sparse symbol scatter, one
inverse FFT each) so families of hundreds of pieces fit in memory even on
large grids; pass complex64 fields for the big parameter sweeps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft

from .bumps import BumpProfile, Multiplier, adapted_bump
from .errors import ContractError, DomainError
from .geometry import Plank, Tiling, assign_by_angle, omega_s_cover, u_tiling
from .grid import Field, forward_transform, inverse_transform, lp_norm
from .operators import CheckResult, ProjectionFamily

__all__ = [
    "SquareFunction",
    "HighLowSplit",
    "square_ratio",
    "square_field",
    "high_low_split",
    "assemble_h",
    "local_square_norms",
    "kakeya_decomposition_check",
    "reverse_square_check",
]


def _piece_values(fhat: Field, fam: ProjectionFamily):
    """Yield physical-side piece arrays, one inverse FFT per piece."""
    spec = fhat.spec
    vals = fhat.values
    for _, m in fam.pieces:
        idx, mvals = m.sample_sparse(spec)
        buf = np.zeros(spec.shape, dtype=vals.dtype)
        flat = buf.ravel()
        flat[idx] = vals.ravel()[idx] * mvals.astype(vals.dtype)
        yield scipy.fft.ifftn(scipy.fft.ifftshift(buf)) / spec.spacing**spec.dim


def square_ratio_sparse(f: Field, sparse_pieces, p: float) -> float:
    """square_ratio for precomputed sparse symbols [(flat_idx, values), ...].

    Avoids re-evaluating symbols per piece; used by the big sweeps where the
    pieces are thin sectors sharing one membership pass.
    """
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    spec = f.spec
    phys = inverse_transform(f) if f.side == "frequency" else f
    den = lp_norm(phys, p)
    if den == 0:
        raise DomainError("square_ratio of the zero field")
    fhat = forward_transform(phys) if f.side == "physical" else f
    vals = fhat.values
    flat_in = vals.ravel()
    sq = np.zeros(spec.shape, dtype=np.float32 if vals.dtype == np.complex64
                  else np.float64)
    buf = np.zeros(spec.shape, dtype=vals.dtype)
    flat = buf.ravel()
    for idx, mvals in sparse_pieces:
        flat[:] = 0
        flat[idx] = flat_in[idx] * mvals.astype(vals.dtype, copy=False)
        piece = scipy.fft.ifftn(scipy.fft.ifftshift(buf)) / spec.spacing**spec.dim
        sq += (piece.real**2 + piece.imag**2)
    num = lp_norm(Field(spec, "physical", np.sqrt(sq).astype(np.complex128)), p)
    return num / den


def square_field(f: Field, fam: ProjectionFamily) -> Field:
    """sum_j |T_j f|^2 as a physical field (not the square root)."""
    fhat = forward_transform(f) if f.side == "physical" else f
    sq = None
    for piece in _piece_values(fhat, fam):
        mag = np.abs(piece) ** 2
        sq = mag if sq is None else sq + mag
    return Field(f.spec, "physical", sq.astype(np.complex128), role="square")


def square_ratio(f: Field, fam: ProjectionFamily, p: float) -> float:
    """|| (sum |T_j f|^2)^(1/2) ||_p  /  || f ||_p."""
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    phys = inverse_transform(f) if f.side == "frequency" else f
    den = lp_norm(phys, p)
    if den == 0:
        raise DomainError("square_ratio of the zero field")
    sq = square_field(f, fam)
    num = lp_norm(sq.with_values(np.sqrt(sq.values.real)), p)
    return num / den


@dataclass
class SquareFunction:
    """A projection family together with the exponent it is measured in."""

    family: ProjectionFamily
    p: float

    def ratio(self, f: Field) -> float:
        return square_ratio(f, self.family, self.p)


@dataclass
class HighLowSplit:
    low: Field
    high: Field
    theta: Plank
    theta_low: Plank


def _frequency_mass_outside(fhat: Field, plank: Plank, scale: float) -> float:
    mesh = fhat.spec.frequency_mesh()
    grids = np.broadcast_arrays(*mesh)
    pts = np.stack([g.ravel() for g in grids], axis=1)
    inside = plank.dilated(scale).contains(pts).reshape(fhat.spec.shape)
    total = float(np.sum(np.abs(fhat.values) ** 2))
    if total == 0:
        return 0.0
    return float(np.sum(np.abs(fhat.values[~inside]) ** 2)) / total


def high_low_split(g_tau: Field, theta: Plank, gamma: float, K: float = 8.0,
                   C: float = 2.0, profile: BumpProfile | None = None,
                   support_tol: float = 1e-8) -> HighLowSplit:
    """Split a plank-supported field at the C*gamma/K scale along the plank.

    The low piece carries a bump on the sub-plank whose long edge is cut to
    C*gamma/K; the high piece is the remainder under the full plank bump, so
    low + high reproduces g whenever supp(ghat) lies in the plank.
    """
    if K <= 1:
        raise DomainError("K must exceed 1")
    spec = g_tau.spec
    ghat = forward_transform(g_tau) if g_tau.side == "physical" else g_tau
    mass_out = _frequency_mass_outside(ghat, theta, 1.0)
    if mass_out > support_tol:
        raise ContractError(
            f"fraction {mass_out:.2e} of the spectrum lies outside the plank")
    axis = int(np.argmax(theta.half_widths))
    hw_low = theta.half_widths.copy()
    hw_low[axis] = min(hw_low[axis], C * gamma / (2.0 * K))
    theta_low = Plank(theta.center, theta.axes, hw_low, role="theta_low")
    bump_full = adapted_bump(theta, profile)
    bump_low = adapted_bump(theta_low, profile)
    full_sym = bump_full.sample(spec).values
    low_sym = bump_low.sample(spec).values
    low_hat = ghat.with_values(ghat.values * low_sym)
    high_hat = ghat.with_values(ghat.values * (full_sym - low_sym))
    return HighLowSplit(low=inverse_transform(low_hat),
                        high=inverse_transform(high_hat),
                        theta=theta, theta_low=theta_low)


def assemble_h(highs: list[Field], omega: Plank,
               support_tol: float = 1e-6) -> Field:
    """Sum the high pieces routed to one omega plank.

    Verifies that the summed spectrum sits inside the doubled plank or its
    reflection through the origin (smooth cutoff tails spill past the plank
    itself, hence the factor 2 and a loose mass tolerance).
    """
    if not highs:
        raise DomainError("no high pieces given")
    spec = highs[0].spec
    total = np.zeros(spec.shape, dtype=np.complex128)
    for piece in highs:
        if piece.spec != spec:
            raise DomainError("pieces live on different grids")
        total = total + (piece.values if piece.side == "physical"
                         else inverse_transform(piece).values)
    h = Field(spec, "physical", total, role="h")
    hhat = forward_transform(h)
    mesh = spec.frequency_mesh()
    grids = np.broadcast_arrays(*mesh)
    pts = np.stack([g.ravel() for g in grids], axis=1)
    ok = (omega.dilated(2.0).contains(pts)
          | omega.reflected().dilated(2.0).contains(pts)).reshape(spec.shape)
    mass = float(np.sum(np.abs(hhat.values) ** 2))
    if mass > 0:
        out = float(np.sum(np.abs(hhat.values[~ok]) ** 2)) / mass
        if out > support_tol:
            raise ContractError(
                f"fraction {out:.2e} of the assembled spectrum escapes "
                "the doubled plank and its reflection")
    return h


def local_square_norms(square_sum: Field, tiling: Tiling) -> dict:
    """Mass of a nonnegative field in every tile: {index tuple: integral}."""
    spec = square_sum.spec
    mesh = spec.physical_mesh()
    grids = np.broadcast_arrays(*mesh)
    pts = np.stack([g.ravel() for g in grids], axis=1)
    idx = tiling.tile_index(pts)
    # pack integer tile coordinates into one key per sample
    lo = idx.min(axis=0)
    span = idx.max(axis=0) - lo + 1
    flat = np.ravel_multi_index((idx - lo).T, span)
    w = spec.weight("physical")
    masses = np.bincount(flat, weights=square_sum.values.real.ravel()) * w
    out = {}
    for key in np.flatnonzero(masses):
        out[tuple(np.unravel_index(key, span) + lo)] = float(masses[key])
    return out


def _dyadic_down(x: float) -> float:
    """Largest power of two <= x."""
    return 2.0 ** math.floor(math.log2(x))


def kakeya_decomposition_check(h_fields: list[Field], omegas: list[Plank],
                               delta: float, gamma: float,
                               K: float = 4.0) -> CheckResult:
    """Fourth-moment bound by tile-localized square norms.

    lhs = int (sum_w |h_w|^2)^2; rhs accumulates, over dyadic angular scales
    s between R^(-1/2) and 1 (R = gamma^2/delta), the sums
    sum_{w_s} sum_U |U|^{-1} (int_U sum_{w in w_s} |h_w|^2)^2
    with U ranging over the dual-scaled tiling of each coarse slab.
    """
    if len(h_fields) != len(omegas):
        raise DomainError("one field per omega plank required")
    if not 0 < delta <= gamma**2:
        raise DomainError("need delta <= gamma^2")
    spec = h_fields[0].spec
    w = spec.weight("physical")
    sq_all = None
    sq_each = []
    for hf in h_fields:
        m = np.abs(hf.values) ** 2
        sq_each.append(m)
        sq_all = m.copy() if sq_all is None else sq_all + m
    lhs = float(np.sum(sq_all**2) * w)
    R = gamma**2 / delta
    rhs = 0.0
    s = 1.0
    s_min = 1.0 / math.sqrt(R)
    while s >= s_min - 1e-12:
        cover = omega_s_cover(s, gamma, K=K)
        owner = assign_by_angle(omegas, cover)
        for ci, slab in enumerate(cover):
            members = [i for i, o in enumerate(owner) if o == ci]
            if not members:
                continue
            sq = sum(sq_each[i] for i in members)
            tiling = u_tiling(slab, R, s, gamma)
            masses = local_square_norms(
                Field(spec, "physical", sq.astype(np.complex128)), tiling)
            vol = tiling.tile_volume
            rhs += sum(m**2 for m in masses.values()) / vol
        s /= 2.0
    return CheckResult(lhs, rhs)


def reverse_square_check(pieces: list[Field]) -> CheckResult:
    """|| sum f_tau ||_4 against || (sum |f_tau|^2)^(1/2) ||_4."""
    if not pieces:
        raise DomainError("no pieces given")
    spec = pieces[0].spec
    total = np.zeros(spec.shape, dtype=np.complex128)
    sq = np.zeros(spec.shape, dtype=np.float64)
    for f in pieces:
        v = f.values if f.side == "physical" else inverse_transform(f).values
        total += v
        sq += np.abs(v) ** 2
    lhs = lp_norm(Field(spec, "physical", total), 4)
    rhs = lp_norm(Field(spec, "physical", np.sqrt(sq).astype(np.complex128)), 4)
    return CheckResult(lhs, rhs)
