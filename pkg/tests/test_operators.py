import math

import numpy as np
import pytest

from conelab.errors import ContractError, DomainError
from conelab.geometry import Plank, dual_box, sector_polyhedra
from conelab.grid import Field, GridSpec, forward_transform, inverse_transform
from conelab.operators import (CheckResult, MaximalConfig, apply_projection,
                               cordoba_fefferman_check, directional_maximal,
                               directional_s_maximal, littlewood_paley_split,
                               plank_family, plank_lp_check,
                               sharp_polyhedron_family, strong_maximal,
                               weighted_l2_check)


@pytest.fixture
def spec():
    return GridSpec(2, 16.0, 128)


def annulus_field(spec, seed=0, r_lo=None, r_hi=None):
    r_lo = r_lo if r_lo is not None else 0.25 * spec.nyquist
    r_hi = r_hi if r_hi is not None else 0.5 * spec.nyquist
    rng = np.random.default_rng(seed)
    xi = np.broadcast_arrays(*spec.frequency_mesh())
    r = np.sqrt(sum(g.astype(float) ** 2 for g in xi))
    mask = (r >= r_lo) & (r <= r_hi)
    fh = np.where(mask, rng.standard_normal(spec.shape)
                  + 1j * rng.standard_normal(spec.shape), 0.0)
    return inverse_transform(Field(spec, "frequency", fh))


def test_lp_split_reconstructs(spec):
    f = annulus_field(spec)
    pieces = littlewood_paley_split(f)
    recon = sum(p.values for p in pieces.values())
    assert np.max(np.abs(recon - f.values)) < 1e-12


def test_lp_split_classes_partition(spec):
    f = annulus_field(spec)
    all_ks = set(littlewood_paley_split(f))
    k0 = set(littlewood_paley_split(f, class_offset=0, classes=3))
    k1 = set(littlewood_paley_split(f, class_offset=1, classes=3))
    k2 = set(littlewood_paley_split(f, class_offset=2, classes=3))
    assert k0 | k1 | k2 == all_ks
    assert not (k0 & k1) and not (k1 & k2) and not (k0 & k2)


def test_sharp_family_partitions_sphere(spec):
    polys = sector_polyhedra(8, 2)
    fam = sharp_polyhedron_family(polys)
    xi = np.broadcast_arrays(*spec.frequency_mesh())
    total = sum(np.asarray(m(*xi), dtype=float) for _, m in fam.pieces)
    r = np.hypot(*(g.astype(float) for g in xi))
    assert np.all(total[r > 0] == 1.0)
    assert np.all(total[r == 0] == 0.0)


def test_apply_projection_single_full_symbol(spec):
    f = annulus_field(spec, seed=2)
    plank = Plank(np.zeros(2), np.eye(2),
                  np.full(2, 0.5 * spec.nyquist), role="all")
    piece = apply_projection(plank_family([plank]), f)[0]
    assert np.max(np.abs(piece.values - f.values)) < 1e-10


def test_directional_maximal_of_constant_is_one():
    spec = GridSpec(2, 8.0, 64)
    g = Field(spec, "physical", np.ones(spec.shape, dtype=complex))
    m = directional_maximal(g, [1.0, 0.0], MaximalConfig())
    assert np.allclose(m.values.real, 1.0)


def test_directional_maximal_dominated_by_sup():
    spec = GridSpec(2, 8.0, 64)
    rng = np.random.default_rng(1)
    g = Field(spec, "physical", rng.uniform(0, 1, spec.shape).astype(complex))
    m = directional_maximal(g, [0.0, 1.0], MaximalConfig())
    assert m.values.real.max() <= np.abs(g.values).max() + 1e-12


def test_power_mean_domination():
    # the inner stage M(|g|^s)^(1/s) dominates M(|g|) pointwise (Jensen)
    spec = GridSpec(2, 8.0, 64)
    rng = np.random.default_rng(2)
    g = Field(spec, "physical", rng.uniform(0, 1, spec.shape).astype(complex))
    cfg = MaximalConfig(s=2.0)
    plain = directional_maximal(g, [1.0, 0.0], cfg).values.real
    powered = directional_maximal(g.with_values(np.abs(g.values) ** 2),
                                  [1.0, 0.0], cfg).values.real ** 0.5
    assert np.all(powered >= plain - 1e-10)


def test_strong_maximal_is_max_over_directions():
    spec = GridSpec(2, 8.0, 64)
    rng = np.random.default_rng(3)
    g = Field(spec, "physical", rng.uniform(0, 1, spec.shape).astype(complex))
    cfg = MaximalConfig()
    dirs = [[1.0, 0.0], [0.0, 1.0]]
    m = strong_maximal(g, dirs, cfg).values.real
    each = [directional_s_maximal(g, d, cfg).values.real for d in dirs]
    assert np.allclose(m, np.maximum(*each))


def test_check_result_ratio_conventions():
    assert CheckResult(1.0, 2.0).ratio == 0.5
    assert CheckResult(0.0, 0.0).ratio == 0.0
    assert CheckResult(1.0, 0.0).ratio == math.inf


def congruent_planks(delta, n=3):
    hw = np.array([2 * delta, math.sqrt(delta)])
    th = 0.7
    A = np.array([[math.cos(th), math.sin(th)],
                  [-math.sin(th), math.cos(th)]])
    return [Plank((np.array([i * 8.0 * hw[0], 0.0])) @ A, A, hw)
            for i in range(n)]


def test_weighted_l2_ratio_bounded(spec):
    planks = congruent_planks(2.0**-4)
    f = annulus_field(spec, seed=4)
    rng = np.random.default_rng(5)
    g = Field(spec, "physical",
              rng.uniform(0.1, 1.0, spec.shape).astype(complex))
    assert weighted_l2_check(planks, f, g).ratio <= 10.0


def test_congruence_required(spec):
    planks = congruent_planks(2.0**-4)
    bad = Plank(planks[0].center, planks[0].axes,
                2.0 * planks[0].half_widths)
    f = annulus_field(spec)
    with pytest.raises(ContractError):
        plank_lp_check(planks + [bad], f, 4.0)


def test_plank_lp_requires_p_at_least_two(spec):
    with pytest.raises(DomainError):
        plank_lp_check(congruent_planks(2.0**-4), annulus_field(spec), 1.5)


def test_plank_lp_container_must_hold_dual(spec):
    planks = congruent_planks(2.0**-4)
    small = Plank(np.zeros(2), np.eye(2), np.array([0.1, 0.1]))
    with pytest.raises(ContractError):
        plank_lp_check(planks, annulus_field(spec), 4.0, container=small)


def test_plank_lp_ratio_bounded(spec):
    planks = congruent_planks(2.0**-4)
    f = annulus_field(spec, seed=6)
    d = dual_box(planks[0])
    reach = float(np.max(d.half_widths @ np.abs(d.axes))) + 1.0
    box = Plank(np.zeros(2), np.eye(2), np.full(2, reach))
    assert plank_lp_check(planks, f, 4.0, container=box).ratio <= 10.0


def test_cordoba_fefferman_ratio_bounded():
    spec = GridSpec(2, 32.0, 256)
    poly = sector_polyhedra(32, 2)[5]
    rng = np.random.default_rng(7)
    xi = np.broadcast_arrays(*spec.frequency_mesh())
    r = np.hypot(*(g.astype(float) for g in xi))
    fh = np.where((r >= 1.0) & (r <= 3.0),
                  rng.standard_normal(spec.shape)
                  + 1j * rng.standard_normal(spec.shape), 0.0)
    h = inverse_transform(Field(spec, "frequency", fh))
    g = Field(spec, "physical",
              rng.uniform(0.1, 1.0, spec.shape).astype(complex))
    res = cordoba_fefferman_check(poly, h, g, MaximalConfig())
    assert res.ratio <= 10.0
