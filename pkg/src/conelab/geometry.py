"""Spherical caps, oriented planks, polyhedral caps and cone covers.

All boxes here are oriented parallelepipeds ("planks") given by a center,
an orthonormal frame and per-axis half-widths.  Frequency-side planks follow
the usual cone scaling delta x delta^(1/2) x 1; their duals are the
physical-side boxes with reciprocal dimensions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ContractError, DomainError

__all__ = [
    "Cap",
    "Plank",
    "Polyhedron",
    "Tiling",
    "ConicalTube",
    "separated_caps",
    "sector_polyhedra",
    "pyramid_polyhedra",
    "cone_planks",
    "refine_planks",
    "dual_box",
    "omega_cover",
    "omega_s_cover",
    "u_tiling",
    "assign_by_angle",
    "minkowski_disjointness",
    "check_one_dimensional",
    "planks_intersect",
    "dump_geometry",
    "load_geometry",
]


def _unit(v):
    v = np.asarray(v, dtype=float)
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise DomainError("zero vector cannot be normalized")
    return v / nrm


def angular_distance(u, v):
    """Angle in radians between two direction arrays (last axis = coords)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    dots = np.sum(u * v, axis=-1)
    norms = np.linalg.norm(u, axis=-1) * np.linalg.norm(v, axis=-1)
    return np.arccos(np.clip(dots / np.maximum(norms, 1e-300), -1.0, 1.0))


@dataclass(frozen=True)
class Cap:
    """Spherical cap: unit center direction and angular radius (radians)."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        if not 0 < self.radius <= math.pi:
            raise DomainError(f"cap radius must lie in (0, pi], got {self.radius}")
        object.__setattr__(self, "center", _unit(self.center))

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def contains(self, directions, scale: float = 1.0):
        """True where the direction of each row is within scale*radius."""
        return angular_distance(directions, self.center) <= scale * self.radius


@dataclass(frozen=True)
class Plank:
    """Oriented box: center, orthonormal axes (rows) and half-widths."""

    center: np.ndarray
    axes: np.ndarray
    half_widths: np.ndarray
    role: str = "generic"

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        a = np.asarray(self.axes, dtype=float)
        hw = np.asarray(self.half_widths, dtype=float)
        d = c.shape[0]
        if a.shape != (d, d):
            raise DomainError(f"axes shape {a.shape} does not match dim {d}")
        if hw.shape != (d,) or np.any(hw <= 0):
            raise DomainError("half_widths must be positive, one per axis")
        if not np.allclose(a @ a.T, np.eye(d), atol=1e-9):
            raise DomainError("axes must be orthonormal rows")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "axes", a)
        object.__setattr__(self, "half_widths", hw)

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    @property
    def volume(self) -> float:
        return float(np.prod(2.0 * self.half_widths))

    def coords(self, points):
        """Coordinates of points in the plank frame, relative to the center."""
        pts = np.asarray(points, dtype=float)
        return (pts - self.center) @ self.axes.T

    def contains(self, points):
        y = np.abs(self.coords(points))
        return np.all(y <= self.half_widths + 1e-12, axis=-1)

    def dilated(self, factor, axis: int | None = None) -> "Plank":
        """Scale half-widths about the center; one axis or all of them."""
        hw = self.half_widths.copy()
        if axis is None:
            hw = hw * factor
        else:
            hw[axis] = hw[axis] * factor
        return replace(self, half_widths=hw)

    def translated(self, shift) -> "Plank":
        return replace(self, center=self.center + np.asarray(shift, dtype=float))

    def reflected(self) -> "Plank":
        return replace(self, center=-self.center)

    def corners(self) -> np.ndarray:
        d = self.dim
        signs = np.array(np.meshgrid(*([[-1.0, 1.0]] * d), indexing="ij"))
        signs = signs.reshape(d, -1).T
        return self.center + (signs * self.half_widths) @ self.axes


def planks_intersect(a: Plank, b: Plank) -> bool:
    """Exact oriented-box intersection test (separating axis theorem)."""
    d = a.dim
    candidates = [a.axes[i] for i in range(d)] + [b.axes[i] for i in range(d)]
    if d == 3:
        for i in range(3):
            for j in range(3):
                cr = np.cross(a.axes[i], b.axes[j])
                n = np.linalg.norm(cr)
                if n > 1e-12:
                    candidates.append(cr / n)
    delta = b.center - a.center
    for u in candidates:
        ra = np.sum(a.half_widths * np.abs(a.axes @ u))
        rb = np.sum(b.half_widths * np.abs(b.axes @ u))
        if abs(delta @ u) > ra + rb + 1e-12:
            return False
    return True


@dataclass(frozen=True)
class Polyhedron:
    """Polyhedral cap cut out by great-sphere faces.

    A direction w belongs to the cap when w . n_i <= offset_i for every
    face normal n_i.  True great-sphere faces have offset zero; nonzero
    offsets are allowed for perturbed families.  ``delta`` records the scale
    the cap is regular at, ``inner_c`` and ``outer_C`` the sandwich constants
    (it should contain a cap of radius inner_c*delta around the anchor and
    fit inside one of radius outer_C*delta).
    """

    normals: np.ndarray
    offsets: np.ndarray
    anchor: np.ndarray
    delta: float
    inner_c: float = 0.25
    outer_C: float = 4.0

    def __post_init__(self):
        n = np.asarray(self.normals, dtype=float)
        if n.ndim != 2:
            raise DomainError("normals must be a 2-d array, one row per face")
        norms = np.linalg.norm(n, axis=1)
        if np.any(norms == 0):
            raise DomainError("face normals must be nonzero")
        n = n / norms[:, None]
        o = np.asarray(self.offsets, dtype=float)
        if o.shape != (n.shape[0],):
            raise DomainError("offsets must match the number of faces")
        if not self.delta > 0:
            raise DomainError("delta must be positive")
        object.__setattr__(self, "normals", n)
        object.__setattr__(self, "offsets", o)
        object.__setattr__(self, "anchor", _unit(self.anchor))

    @property
    def dim(self) -> int:
        return self.anchor.shape[0]

    def contains_direction(self, directions):
        """Membership of unit (or just nonzero) directions, vectorized."""
        dirs = np.asarray(directions, dtype=float)
        nrm = np.linalg.norm(dirs, axis=-1, keepdims=True)
        w = np.divide(dirs, nrm, out=np.zeros_like(dirs), where=nrm > 0)
        ok = np.all(w @ self.normals.T <= self.offsets + 1e-12, axis=-1)
        return ok & (nrm[..., 0] > 0)

    def is_regular(self, samples: int = 4096, seed: int = 0) -> bool:
        """Monte-Carlo check of the cap sandwich at scale delta."""
        rng = np.random.default_rng(seed)
        pts = rng.standard_normal((samples, self.dim))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        inside = self.contains_direction(pts)
        ang = angular_distance(pts, self.anchor)
        if np.any(inside & (ang > self.outer_C * self.delta)):
            return False
        near = ang <= self.inner_c * self.delta
        if np.any(near & ~inside):
            return False
        return True


@dataclass(frozen=True)
class Tiling:
    """Lattice of translates of an origin-centered base plank.

    The translates of ``base`` by integer combinations of its doubled
    half-width axes partition space; ``tile_index`` maps points to the
    integer coordinates of the tile they land in.
    """

    base: Plank

    def __post_init__(self):
        if np.linalg.norm(self.base.center) > 1e-9:
            raise ContractError("tiling base plank must be centered at the origin")

    def tile_index(self, points) -> np.ndarray:
        y = self.base.coords(points)
        a = self.base.half_widths
        return np.floor((y + a) / (2.0 * a)).astype(np.int64)

    def tile_center(self, index) -> np.ndarray:
        idx = np.asarray(index, dtype=float)
        return self.base.center + (idx * 2.0 * self.base.half_widths) @ self.base.axes

    @property
    def tile_volume(self) -> float:
        return self.base.volume


# --- separated caps ---------------------------------------------------------

def _fibonacci_sphere(count: int) -> np.ndarray:
    k = np.arange(count) + 0.5
    phi = math.pi * (1.0 + math.sqrt(5.0)) * k
    z = 1.0 - 2.0 * k / count
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def _greedy_separated(candidates: np.ndarray, delta: float) -> np.ndarray:
    chosen: list[np.ndarray] = []
    cos_d = math.cos(delta)
    for c in candidates:
        if not chosen:
            chosen.append(c)
            continue
        if np.max(np.array(chosen) @ c) < cos_d + 1e-12:
            chosen.append(c)
    return np.array(chosen)


def separated_caps(dim: int, delta: float, region: Cap | None = None) -> list[Cap]:
    """Maximal delta-separated caps on the unit sphere, greedy and deterministic.

    Centers are pairwise at angular distance >= delta and every point of the
    region (whole sphere by default) is within 2*delta of a center.  On S^2
    at fine scales (more than ~2000 expected caps) the greedy pass over a
    dense candidate list becomes too slow, so a quasi-uniform spiral lattice
    thinned to the same separation is used instead; it satisfies the same
    separation and covering properties.
    """
    if dim not in (2, 3):
        raise DomainError(f"dim must be 2 or 3, got {dim}")
    if not 0 < delta <= math.pi:
        raise DomainError(f"delta must lie in (0, pi], got {delta}")
    if dim == 2:
        m = max(256, int(math.ceil(2 * math.pi / delta)) * 64)
        ang = 2 * math.pi * np.arange(m) / m
        cand = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        if region is not None:
            cand = cand[region.contains(cand)]
        centers = _greedy_separated(cand, delta)
    else:
        expected = 4 * math.pi / delta**2
        if expected <= 2000:
            cand = _fibonacci_sphere(max(4000, int(expected * 64)))
            if region is not None:
                cand = cand[region.contains(cand)]
            centers = _greedy_separated(cand, delta)
        else:
            # spiral lattice: neighbor spacing ~ sqrt(4*pi/count), calibrated
            # so the minimum pairwise angle stays just above delta
            count = int(2.6 * math.pi / delta**2)
            cand = _fibonacci_sphere(count)
            if region is not None:
                cand = cand[region.contains(cand)]
            centers = cand
    if len(centers) == 0:
        raise DomainError("region holds no candidate directions")
    return [Cap(c, delta) for c in centers]


# --- polyhedral families ----------------------------------------------------

def sector_polyhedra(count: int, dim: int = 2) -> list[Polyhedron]:
    """Partition of the sphere into ``count`` equal angular sectors.

    dim=2 gives the classical plane sectors; dim=3 lifts them to lunes whose
    faces are great circles through the poles (all normals lie on the
    equator, so the family is one-dimensional with a single circle).
    """
    if count < 2:
        raise DomainError("need at least 2 sectors")
    if dim not in (2, 3):
        raise DomainError(f"dim must be 2 or 3, got {dim}")
    width = 2 * math.pi / count
    polys = []
    for j in range(count):
        a0, a1 = j * width, (j + 1) * width
        # sector = {angle in [a0, a1]} = {w . n_lo <= 0, w . n_hi <= 0}
        n_lo = np.array([math.sin(a0), -math.cos(a0)])
        n_hi = np.array([-math.sin(a1), math.cos(a1)])
        mid = np.array([math.cos((a0 + a1) / 2), math.sin((a0 + a1) / 2)])
        if dim == 3:
            n_lo = np.append(n_lo, 0.0)
            n_hi = np.append(n_hi, 0.0)
            mid = np.append(mid, 0.0)
        polys.append(Polyhedron(
            normals=np.stack([n_lo, n_hi]),
            offsets=np.zeros(2),
            anchor=mid,
            delta=width / 2,
            inner_c=0.25,
            outer_C=max(4.0, (math.pi / 2 + width) / (width / 2)) if dim == 3 else 4.0,
        ))
    return polys


def pyramid_polyhedra(subdivisions: int) -> list[Polyhedron]:
    """Radial projections of a square grid on the face {x3 = -1} of the cube.

    Each cell [b1, b1+1]/N x [b2, b2+1]/N x {-1} projects to a polyhedral cap
    whose four faces are planes through the origin; the face normals lie on
    the two great circles {(1,0,c)} and {(0,1,c)}, so the family is
    one-dimensional with two circles.
    """
    n = subdivisions
    if n < 1:
        raise DomainError("subdivisions must be >= 1")
    polys = []
    for b1 in range(-n, n):
        for b2 in range(-n, n):
            lo1, hi1 = b1 / n, (b1 + 1) / n
            lo2, hi2 = b2 / n, (b2 + 1) / n
            # cell on x3 = -1: x1 in [lo1, hi1], x2 in [lo2, hi2].  The cone
            # over it is  x1 >= -lo1*x3  etc. (x3 < 0), i.e. four half-spaces
            # through the origin.
            normals = np.array([
                [-1.0, 0.0, -lo1],
                [1.0, 0.0, hi1],
                [0.0, -1.0, -lo2],
                [0.0, 1.0, hi2],
            ])
            anchor = _unit([(lo1 + hi1) / 2, (lo2 + hi2) / 2, -1.0])
            polys.append(Polyhedron(
                normals=normals,
                offsets=np.zeros(4),
                anchor=anchor,
                delta=1.0 / n,
                inner_c=0.1,
                outer_C=8.0,
            ))
    return polys


# --- cone covers ------------------------------------------------------------

def _cone_frame(phi: float):
    """Normal, tangent and light-ray directions of the cone at angle phi."""
    c, s = math.cos(phi), math.sin(phi)
    n_hat = np.array([c, s, -1.0]) / math.sqrt(2.0)
    t_hat = np.array([-s, c, 0.0])
    c_hat = np.array([c, s, 1.0]) / math.sqrt(2.0)
    return n_hat, t_hat, c_hat


def cone_planks(delta: float, nappe: str = "upper") -> list[Plank]:
    """Planks of dimensions ~ delta x delta^(1/2) x 1 covering the
    delta-neighborhood of the truncated light cone 1/2 <= |xi_3| <= 1.

    ``nappe`` selects the upper sheet (default), the lower one, or "both".
    """
    if not 0 < delta <= 0.25:
        raise DomainError(f"delta must lie in (0, 1/4], got {delta}")
    if nappe not in ("upper", "lower", "both"):
        raise DomainError(f"unknown nappe {nappe!r}")
    count = int(math.ceil(2 * math.pi / math.sqrt(delta)))
    spacing = 2 * math.pi / count
    half = np.array([1.5 * delta, 0.8 * math.sqrt(delta),
                     max(0.5, math.sqrt(2.0) / 4 + 2 * delta)])
    out = []
    for k in range(count):
        n_hat, t_hat, c_hat = _cone_frame(k * spacing)
        center = 0.75 * math.sqrt(2.0) * c_hat
        p = Plank(center, np.stack([n_hat, t_hat, c_hat]), half, role="tau")
        if nappe in ("upper", "both"):
            out.append(p)
        if nappe in ("lower", "both"):
            out.append(Plank(-p.center, np.stack([n_hat, -t_hat, -c_hat]),
                             half, role="tau"))
    return out


def refine_planks(plank: Plank, gamma: float, delta: float | None = None) -> list[Plank]:
    """Partition a plank along its longest axis into 1/gamma equal pieces.

    gamma must be a dyadic fraction in (0, 1]; when the parent scale delta is
    supplied, gamma below sqrt(delta) is rejected (pieces would be shorter
    than the plank is wide).
    """
    if not 0 < gamma <= 1:
        raise DomainError(f"gamma must lie in (0, 1], got {gamma}")
    k = math.log2(1.0 / gamma)
    if abs(k - round(k)) > 1e-9:
        raise DomainError(f"gamma must be dyadic, got {gamma}")
    if delta is not None and gamma < math.sqrt(delta) - 1e-12:
        raise DomainError(f"gamma={gamma} below sqrt(delta)={math.sqrt(delta)}")
    pieces = int(round(1.0 / gamma))
    if pieces == 1:
        return [replace(plank, role="theta")]
    axis = int(np.argmax(plank.half_widths))
    a = plank.half_widths[axis]
    child_hw = plank.half_widths.copy()
    child_hw[axis] = a * gamma
    e = plank.axes[axis]
    out = []
    for i in range(pieces):
        offset = -a + (2 * i + 1) * a * gamma
        out.append(Plank(plank.center + offset * e, plank.axes, child_hw,
                         role="theta"))
    return out


def dual_box(plank: Plank) -> Plank:
    """Origin-centered box with reciprocal dimensions on the same axes.

    A full width w becomes 1/w, so the map is an involution and sends the
    unit cube (anywhere) to the unit cube at the origin.
    """
    return Plank(np.zeros(plank.dim), plank.axes,
                 1.0 / (4.0 * plank.half_widths), role=plank.role + "_dual")


def _cone_cover(spacing: float, normal_half: float, tangent_half: float,
                gamma: float, K: float, role: str) -> list[Plank]:
    count = int(math.ceil(2 * math.pi / spacing))
    spacing = 2 * math.pi / count
    lo, hi = math.sqrt(2.0) * gamma / K, math.sqrt(2.0) * gamma
    half = np.array([normal_half, tangent_half,
                     (hi - lo) / 2 + 2 * normal_half])
    out = []
    for k in range(count):
        n_hat, t_hat, c_hat = _cone_frame(k * spacing)
        center = 0.5 * (lo + hi) * c_hat
        out.append(Plank(center, np.stack([n_hat, t_hat, c_hat]), half, role=role))
    return out


def omega_cover(gamma: float, delta: float, K: float = 4.0) -> list[Plank]:
    """Planks of dimensions ~ (delta/gamma) x delta^(1/2) x gamma covering the
    (delta/gamma)-neighborhood of the upper cone gamma/K <= xi_3 <= gamma."""
    if not 0 < delta <= gamma**2 + 1e-12:
        raise DomainError("need delta <= gamma^2 for the omega scaling")
    if K <= 1:
        raise DomainError("K must exceed 1")
    return _cone_cover(spacing=math.sqrt(delta) / gamma,
                       normal_half=1.5 * delta / gamma,
                       tangent_half=math.sqrt(delta),
                       gamma=gamma, K=K, role="omega")


def omega_s_cover(s: float, gamma: float, K: float = 4.0) -> list[Plank]:
    """Coarse planks of dimensions ~ s^2*gamma x s*gamma x gamma over the
    same truncated upper cone, used to group the omega planks by angle."""
    if not 0 < s <= 1:
        raise DomainError(f"s must lie in (0, 1], got {s}")
    return _cone_cover(spacing=s, normal_half=0.75 * s**2 * gamma,
                       tangent_half=s * gamma, gamma=gamma, K=K,
                       role="omega_s")


def u_tiling(omega_s: Plank, R: float, s: float, gamma: float) -> Tiling:
    """Tiling by boxes dual-scaled to an omega_s plank.

    The base box has dimensions R/gamma x R*s/gamma x R*s^2/gamma; its
    longest edge pairs with the shortest edge (s^2*gamma) of omega_s and
    vice versa, so each tile sits like a dual box of the slab.
    """
    if R <= 0:
        raise DomainError("R must be positive")
    half = np.array([R / gamma, R * s / gamma, R * s**2 / gamma]) / 2.0
    base = Plank(np.zeros(3), omega_s.axes, half, role="U")
    return Tiling(base)


def assign_by_angle(items: list[Plank], cover: list[Plank]) -> list[int]:
    """Index of the cover plank whose axis angle is closest to each item's.

    Both lists must come from cone covers (light axis is row 2); matching is
    by the planar angle of the light direction.
    """
    def ang(p):
        c = p.axes[2]
        return math.atan2(c[1], c[0])

    cover_ang = np.array([ang(p) for p in cover])
    out = []
    for it in items:
        d = np.angle(np.exp(1j * (cover_ang - ang(it))))
        out.append(int(np.argmin(np.abs(d))))
    return out


# --- conical tubes and the Minkowski-sum criterion --------------------------

@dataclass(frozen=True)
class ConicalTube:
    """Dyadic conical tube: directions in a cap, radii |xi| ~ 2^k.

    The radial window [2^(k-2), 2^(k+2)] matches the support of a dyadic
    annulus cutoff at scale 2^k.
    """

    cap: Cap
    k: int

    @property
    def r_min(self) -> float:
        return 2.0 ** (self.k - 2)

    @property
    def r_max(self) -> float:
        return 2.0 ** (self.k + 2)

    def contains(self, points):
        pts = np.asarray(points, dtype=float)
        r = np.linalg.norm(pts, axis=-1)
        ok = (r >= self.r_min) & (r <= self.r_max)
        ang = angular_distance(pts, self.cap.center)
        return ok & (ang <= self.cap.radius)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        d = self.cap.dim
        if d == 2:
            base = math.atan2(self.cap.center[1], self.cap.center[0])
            ang = base + rng.uniform(-self.cap.radius, self.cap.radius, count)
            dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        else:
            # axis-symmetric sampling about the cap center
            cos_t = rng.uniform(math.cos(self.cap.radius), 1.0, count)
            sin_t = np.sqrt(1.0 - cos_t**2)
            phi = rng.uniform(0.0, 2 * math.pi, count)
            local = np.stack([sin_t * np.cos(phi), sin_t * np.sin(phi), cos_t],
                             axis=1)
            dirs = local @ _frame_for(self.cap.center).T
        r = rng.uniform(self.r_min, self.r_max, count)
        return dirs * r[:, None]


def _frame_for(axis: np.ndarray) -> np.ndarray:
    """Columns: two directions orthogonal to axis, then axis itself."""
    axis = _unit(axis)
    helper = np.array([1.0, 0.0, 0.0])
    if abs(axis[0]) > 0.9:
        helper = np.array([0.0, 1.0, 0.0])
    u = _unit(np.cross(axis, helper))
    v = np.cross(axis, u)
    return np.stack([u, v, axis], axis=1)


def minkowski_disjointness(cap_a: Cap, cap_b: Cap, k1: int, k3: int,
                           k2: int, k4: int, m: int = 8,
                           separation_factor: float = 8.0) -> bool:
    """Sufficient criterion for disjointness of two tube difference sets.

    The sets are T(cap_a, k1) - T(cap_a, k3) and T(cap_b, k2) - T(cap_b, k4)
    with T(cap, k) the dyadic conical tube above.  Subtracting a tube whose
    radii are at least m dyadic steps smaller perturbs directions by at most
    arcsin(2^(4-gap)), so a slightly dilated copy of the larger tube's cone
    still holds the difference set; if the two enlarged cones are disjoint
    in angle, so are the sets.  Returns False whenever the criterion is not
    triggered (same cap, equal dyadic indices, short gaps, or caps closer
    than separation_factor times the radius sum).
    """
    if cap_a.dim != cap_b.dim:
        raise DomainError("caps live in different dimensions")
    if k1 == k3 or k2 == k4:
        return False
    sep = float(angular_distance(cap_a.center, cap_b.center))
    if sep < separation_factor * (cap_a.radius + cap_b.radius) / 2.0:
        return False
    gap_a, gap_b = abs(k1 - k3), abs(k2 - k4)
    if gap_a < m or gap_b < m:
        return False
    enlarge_a = cap_a.radius + math.asin(min(1.0, 2.0 ** (4 - gap_a)))
    enlarge_b = cap_b.radius + math.asin(min(1.0, 2.0 ** (4 - gap_b)))
    return sep > enlarge_a + enlarge_b


# --- one-dimensional families ----------------------------------------------

def check_one_dimensional(polys: list[Polyhedron], tol: float = 1e-6,
                          max_circles: int = 3) -> bool:
    """Whether all face normals fit on at most max_circles great circles.

    On S^1 every family is trivially one-dimensional.  On S^2 a great circle
    is the set orthogonal to some axis u; candidate axes come from cross
    products of normal pairs and the cover is built greedily.
    """
    if not polys:
        raise DomainError("empty family")
    dim = polys[0].dim
    if dim == 2:
        return True
    normals = np.concatenate([p.normals for p in polys], axis=0)
    # deduplicate up to sign to keep the candidate pass small
    seen = []
    for v in normals:
        key = v if v[np.argmax(np.abs(v))] >= 0 else -v
        if not seen or np.min(np.linalg.norm(np.array(seen) - key, axis=1)) > 1e-9:
            seen.append(key)
    remaining = np.array(seen)
    for _ in range(max_circles):
        if remaining.shape[0] == 0:
            return True
        if remaining.shape[0] <= 2:
            return True
        head = remaining[:64]
        best_axis, best_count = None, -1
        for i in range(head.shape[0]):
            for j in range(i + 1, head.shape[0]):
                cr = np.cross(head[i], head[j])
                nrm = np.linalg.norm(cr)
                if nrm < 1e-9:
                    continue
                axis = cr / nrm
                count = int(np.sum(np.abs(remaining @ axis) <= tol))
                if count > best_count:
                    best_axis, best_count = axis, count
        if best_axis is None:
            # all remaining normals parallel: any orthogonal circle works
            return True
        remaining = remaining[np.abs(remaining @ best_axis) > tol]
    return remaining.shape[0] == 0


# --- text serialization -----------------------------------------------------

def _fmt(values) -> str:
    return " ".join(repr(float(v)) for v in np.asarray(values).ravel())


def dump_geometry(items, path) -> None:
    """One object per line: caps, planks and polyhedra round-trip exactly."""
    with open(path, "w") as fh:
        for item in items:
            if isinstance(item, Cap):
                fh.write(f"cap {item.dim} {_fmt(item.center)} {item.radius!r}\n")
            elif isinstance(item, Plank):
                fh.write(f"plank {item.dim} {item.role} {_fmt(item.center)} "
                         f"{_fmt(item.half_widths)} {_fmt(item.axes)}\n")
            elif isinstance(item, Polyhedron):
                m = item.normals.shape[0]
                fh.write(f"poly {item.dim} {m} {item.delta!r} {item.inner_c!r} "
                         f"{item.outer_C!r} {_fmt(item.anchor)} "
                         f"{_fmt(item.normals)} {_fmt(item.offsets)}\n")
            else:
                raise DomainError(f"cannot serialize {type(item).__name__}")


def load_geometry(path) -> list:
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            kind = parts[0]
            try:
                if kind == "cap":
                    d = int(parts[1])
                    vals = [float(x) for x in parts[2:]]
                    out.append(Cap(np.array(vals[:d]), vals[d]))
                elif kind == "plank":
                    d = int(parts[1])
                    role = parts[2]
                    vals = [float(x) for x in parts[3:]]
                    center = np.array(vals[:d])
                    hw = np.array(vals[d:2 * d])
                    axes = np.array(vals[2 * d:2 * d + d * d]).reshape(d, d)
                    out.append(Plank(center, axes, hw, role=role))
                elif kind == "poly":
                    d, m = int(parts[1]), int(parts[2])
                    delta, c, C = (float(parts[3]), float(parts[4]),
                                   float(parts[5]))
                    vals = [float(x) for x in parts[6:]]
                    anchor = np.array(vals[:d])
                    normals = np.array(vals[d:d + m * d]).reshape(m, d)
                    offsets = np.array(vals[d + m * d:d + m * d + m])
                    out.append(Polyhedron(normals, offsets, anchor, delta,
                                          inner_c=c, outer_C=C))
                else:
                    raise DomainError(f"unknown record {kind!r}")
            except (IndexError, ValueError) as exc:
                raise DomainError(f"bad geometry record on line {lineno}: {exc}")
    return out
