import math

import numpy as np
import pytest

from conelab.bumps import adapted_bump
from conelab.errors import ContractError, DomainError
from conelab.geometry import Plank, Tiling, omega_cover
from conelab.grid import Field, GridSpec, forward_transform, inverse_transform
from conelab.operators import ProjectionFamily, plank_family
from conelab.squarefn import (assemble_h, high_low_split,
                              kakeya_decomposition_check, local_square_norms,
                              reverse_square_check, square_field, square_ratio,
                              square_ratio_sparse)


@pytest.fixture
def spec():
    return GridSpec(2, 16.0, 128)


def rand_field(spec, seed=0):
    rng = np.random.default_rng(seed)
    vals = rng.standard_normal(spec.shape) + 1j * rng.standard_normal(spec.shape)
    return Field(spec, "physical", vals)


def full_plank(spec):
    return Plank(np.zeros(spec.dim), np.eye(spec.dim),
                 np.full(spec.dim, 0.49 * spec.nyquist))


def band_limited(spec, seed=0):
    f = rand_field(spec, seed)
    fhat = forward_transform(f)
    bump = adapted_bump(full_plank(spec).dilated(0.5))
    return inverse_transform(
        fhat.with_values(fhat.values * bump.sample(spec).values))


def test_square_ratio_single_full_piece_is_one(spec):
    f = band_limited(spec)
    fam = plank_family([full_plank(spec)])
    assert square_ratio(f, fam, 4.0) == pytest.approx(1.0, abs=1e-10)


def test_square_ratio_rejects_zero_field(spec):
    zero = Field(spec, "physical", np.zeros(spec.shape, dtype=complex))
    with pytest.raises(DomainError):
        square_ratio(zero, plank_family([full_plank(spec)]), 4.0)


def test_square_ratio_sparse_matches_dense(spec):
    f = band_limited(spec, seed=3)
    planks = [Plank(np.array([2.0, 0.0]), np.eye(2), np.array([1.0, 2.0])),
              Plank(np.array([-2.0, 0.0]), np.eye(2), np.array([1.0, 2.0]))]
    fam = plank_family(planks)
    sparse = [m.sample_sparse(spec) for m in fam.multipliers()]
    dense = square_ratio(f, fam, 4.0)
    fast = square_ratio_sparse(f, sparse, 4.0)
    assert fast == pytest.approx(dense, rel=1e-10)


def test_square_field_is_nonnegative_sum(spec):
    f = band_limited(spec, seed=1)
    planks = [Plank(np.array([1.5, 0.0]), np.eye(2), np.array([1.0, 1.0]))]
    sq = square_field(f, plank_family(planks))
    assert np.all(sq.values.real >= 0)
    assert np.max(np.abs(sq.values.imag)) == 0.0


def plank_supported(spec, theta, seed=0):
    rng = np.random.default_rng(seed)
    xi = np.broadcast_arrays(*spec.frequency_mesh())
    pts = np.stack([g.astype(float).ravel() for g in xi], axis=1)
    inside = theta.contains(pts).reshape(spec.shape)
    fh = np.where(inside, rng.standard_normal(spec.shape)
                  + 1j * rng.standard_normal(spec.shape), 0.0)
    return inverse_transform(Field(spec, "frequency", fh))


def test_high_low_reconstructs(spec):
    theta = Plank(np.array([1.5, 0.5]), np.eye(2), np.array([0.8, 0.3]))
    g = plank_supported(spec, theta)
    split = high_low_split(g, theta, gamma=0.25)
    recon = split.low.values + split.high.values
    assert np.max(np.abs(recon - g.values)) < 1e-12
    assert split.theta_low.half_widths.max() <= theta.half_widths.max()


def test_high_low_rejects_wrong_support(spec):
    theta = Plank(np.array([1.5, 0.5]), np.eye(2), np.array([0.8, 0.3]))
    f = band_limited(spec)  # spectrum fills a much larger box
    with pytest.raises(ContractError):
        high_low_split(f, theta, gamma=0.25)


def test_assemble_h_checks_support(spec):
    theta = Plank(np.array([1.5, 0.5]), np.eye(2), np.array([0.8, 0.3]))
    g = plank_supported(spec, theta)
    # correct destination: the plank itself (doubled internally)
    h = assemble_h([g], theta)
    assert np.max(np.abs(h.values - g.values)) < 1e-12
    elsewhere = Plank(np.array([-4.0, -2.0]), np.eye(2), np.array([0.3, 0.3]))
    with pytest.raises(ContractError):
        assemble_h([g], elsewhere)


def test_local_square_norms_total_mass(spec):
    f = rand_field(spec, seed=5)
    sq = Field(spec, "physical",
               (np.abs(f.values) ** 2).astype(complex))
    tiling = Tiling(Plank(np.zeros(2), np.eye(2), np.array([1.0, 1.0])))
    masses = local_square_norms(sq, tiling)
    total = sum(masses.values())
    expected = float(np.sum(sq.values.real)) * spec.weight("physical")
    assert total == pytest.approx(expected, rel=1e-12)


def test_kakeya_decomposition_ratio_bounded():
    spec = GridSpec(3, 16.0, 128)
    gamma, delta = 0.5, 2.0**-3
    rng = np.random.default_rng(0)
    omegas, highs = [], []
    for om in omega_cover(gamma, delta):
        idx, vals = adapted_bump(om).sample_sparse(spec)
        if idx.size == 0:
            continue
        fh = np.zeros(spec.shape, dtype=complex)
        fh.ravel()[idx] = (rng.standard_normal(idx.size)
                           + 1j * rng.standard_normal(idx.size)) * vals
        highs.append(inverse_transform(Field(spec, "frequency", fh)))
        omegas.append(om)
    res = kakeya_decomposition_check(highs, omegas, delta, gamma)
    assert 0 < res.ratio <= 10.0


def test_kakeya_scaling_precondition():
    spec = GridSpec(3, 8.0, 32)
    f = Field(spec, "physical", np.ones(spec.shape, dtype=complex))
    om = Plank(np.zeros(3), np.eye(3), np.ones(3))
    with pytest.raises(DomainError):
        kakeya_decomposition_check([f], [om], delta=0.5, gamma=0.5)


def test_reverse_square_single_piece_ratio_one(spec):
    f = band_limited(spec, seed=7)
    res = reverse_square_check([f])
    assert res.ratio == pytest.approx(1.0, rel=1e-12)


def test_reverse_square_orthogonal_pieces(spec):
    # disjoint frequency supports: lhs**4 mixes cross terms, both sides finite
    a = plank_supported(
        spec, Plank(np.array([2.0, 0.0]), np.eye(2), np.array([0.5, 0.5])), 1)
    b = plank_supported(
        spec, Plank(np.array([-2.0, 0.0]), np.eye(2), np.array([0.5, 0.5])), 2)
    res = reverse_square_check([a, b])
    assert 0.2 <= res.ratio <= 5.0
