"""Periodic sampling grids, complex fields, Fourier transforms and norms.

Physical space is the torus [0, L)^n sampled at N points per axis.  The
frequency side holds the dual lattice (1/L) * {-N/2, ..., N/2 - 1}^n in
monotone (centered) order.  The transform pair is unitary with respect to
the Riemann-sum inner products: physical sums carry weight (L/N)^n and
frequency sums carry weight (1/L)^n, so Plancherel holds exactly in exact
arithmetic.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.fft

from .errors import DomainError, SizingError

__all__ = [
    "GridSpec",
    "Field",
    "forward_transform",
    "inverse_transform",
    "lp_norm",
    "inner_product",
    "save_field",
    "load_field",
]

#: Environment variable holding the per-array memory ceiling in bytes.
MEMORY_CEILING_ENV = "CONELAB_MAX_FIELD_BYTES"
_DEFAULT_CEILING = 2**31  # 2 GiB per field array


def _memory_ceiling() -> int:
    raw = os.environ.get(MEMORY_CEILING_ENV, "")
    return int(raw) if raw else _DEFAULT_CEILING


@dataclass(frozen=True)
class GridSpec:
    """Geometry of a periodic grid: dimension, period and resolution.

    Parameters
    ----------
    dim : int
        Ambient dimension, 2 or 3.
    side_length : float
        Period L of the torus, positive.
    points_per_axis : int
        Samples N per axis; must be a power of two.
    """

    dim: int
    side_length: float
    points_per_axis: int

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise DomainError(f"dim must be 2 or 3, got {self.dim}")
        if not self.side_length > 0:
            raise DomainError("side_length must be positive")
        n = self.points_per_axis
        if n < 2 or (n & (n - 1)) != 0:
            raise DomainError(f"points_per_axis must be a power of two, got {n}")
        nbytes = 16 * n**self.dim
        if nbytes > _memory_ceiling():
            raise SizingError(
                f"grid of {n}^{self.dim} complex samples needs {nbytes} bytes, "
                f"over the ceiling {_memory_ceiling()} "
                f"(raise ${MEMORY_CEILING_ENV} to allow it)"
            )

    @property
    def spacing(self) -> float:
        """Physical sample spacing h = L/N."""
        return self.side_length / self.points_per_axis

    @property
    def freq_spacing(self) -> float:
        """Frequency lattice spacing 1/L."""
        return 1.0 / self.side_length

    @property
    def nyquist(self) -> float:
        """Largest representable frequency magnitude N/(2L) per axis."""
        return self.points_per_axis / (2.0 * self.side_length)

    @property
    def shape(self) -> tuple:
        return (self.points_per_axis,) * self.dim

    def physical_axis(self) -> np.ndarray:
        return np.arange(self.points_per_axis) * self.spacing

    def frequency_axis(self) -> np.ndarray:
        n = self.points_per_axis
        return (np.arange(n) - n // 2) * self.freq_spacing

    def physical_mesh(self):
        """Sparse open meshgrid of physical coordinates, ij indexing."""
        ax = self.physical_axis()
        return np.meshgrid(*([ax] * self.dim), indexing="ij", sparse=True)

    def frequency_mesh(self):
        """Sparse open meshgrid of centered frequency coordinates."""
        ax = self.frequency_axis()
        return np.meshgrid(*([ax] * self.dim), indexing="ij", sparse=True)

    def weight(self, side: str) -> float:
        """Riemann quadrature weight of a single sample on the given side."""
        if side == "physical":
            return self.spacing**self.dim
        if side == "frequency":
            return self.freq_spacing**self.dim
        raise DomainError(f"unknown side {side!r}")


@dataclass(frozen=True)
class Field:
    """Complex samples living on one side of a grid.

    ``values`` has shape (N,)*dim.  ``side`` is 'physical' or 'frequency';
    frequency arrays are stored in centered (monotone) order.  ``role`` is a
    free-form tag carried through transforms and serialization.
    """

    spec: GridSpec
    side: str
    values: np.ndarray
    role: str = ""

    def __post_init__(self):
        if self.side not in ("physical", "frequency"):
            raise DomainError(f"side must be physical or frequency, got {self.side!r}")
        v = np.asarray(self.values)
        if v.shape != self.spec.shape:
            raise DomainError(f"values shape {v.shape} != grid shape {self.spec.shape}")
        if not np.iscomplexobj(v):
            v = v.astype(np.complex128)
        object.__setattr__(self, "values", v)

    def with_values(self, values: np.ndarray) -> "Field":
        return replace(self, values=values)


def forward_transform(f: Field) -> Field:
    """Physical -> frequency, unitary normalization, centered output."""
    if f.side != "physical":
        raise DomainError("forward_transform expects a physical-side field")
    h = f.spec.spacing
    vhat = scipy.fft.fftshift(scipy.fft.fftn(f.values)) * h**f.spec.dim
    return Field(f.spec, "frequency", vhat, role=f.role)


def inverse_transform(F: Field) -> Field:
    """Frequency -> physical, inverse of :func:`forward_transform`."""
    if F.side != "frequency":
        raise DomainError("inverse_transform expects a frequency-side field")
    h = F.spec.spacing
    v = scipy.fft.ifftn(scipy.fft.ifftshift(F.values)) / h**F.spec.dim
    return Field(F.spec, "physical", v, role=F.role)


def lp_norm(f: Field, p: float) -> float:
    """Riemann-sum L^p norm on the field's own side; p = inf gives the sup."""
    if p == np.inf:
        return float(np.max(np.abs(f.values)))
    if p < 1:
        raise DomainError(f"p must be >= 1 or inf, got {p}")
    w = f.spec.weight(f.side)
    # pairwise summation in np.sum keeps the accumulation error mild
    return float((np.sum(np.abs(f.values) ** p) * w) ** (1.0 / p))


def inner_product(f: Field, g: Field) -> complex:
    """Weighted inner product <f, g> = sum f conj(g) * weight, same side."""
    if f.spec != g.spec or f.side != g.side:
        raise DomainError("inner_product needs two fields on the same grid and side")
    return complex(np.sum(f.values * np.conj(g.values)) * f.spec.weight(f.side))


# --- binary container -------------------------------------------------------
#
# Layout (little endian):
#   magic   4 bytes  b"CLF1"
#   dim     u8
#   side    u8       0 = physical, 1 = frequency
#   dtype   u8       0 = complex128, 1 = complex64
#   N       u32
#   L       f64
#   rolelen u16, role utf-8 bytes
#   payload N**dim complex numbers, C order

_MAGIC = b"CLF1"


def save_field(f: Field, path) -> None:
    v = f.values
    dtag = 1 if v.dtype == np.complex64 else 0
    role = f.role.encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<BBBId", f.spec.dim, 0 if f.side == "physical" else 1,
                             dtag, f.spec.points_per_axis, f.spec.side_length))
        fh.write(struct.pack("<H", len(role)))
        fh.write(role)
        dt = np.dtype("<c8") if dtag else np.dtype("<c16")
        fh.write(np.ascontiguousarray(v).astype(dt, copy=False).tobytes())


def load_field(path) -> Field:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise DomainError(f"not a field container (bad magic {magic!r})")
        dim, side_tag, dtag, n, L = struct.unpack("<BBBId", fh.read(15))
        (rolelen,) = struct.unpack("<H", fh.read(2))
        role = fh.read(rolelen).decode("utf-8")
        dt = np.dtype("<c8") if dtag else np.dtype("<c16")
        payload = np.frombuffer(fh.read(), dtype=dt)
    spec = GridSpec(dim, L, n)
    if payload.size != n**dim:
        raise DomainError(f"payload holds {payload.size} samples, expected {n**dim}")
    values = payload.reshape(spec.shape)
    return Field(spec, "physical" if side_tag == 0 else "frequency", values, role=role)
