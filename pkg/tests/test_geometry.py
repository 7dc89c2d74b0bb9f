import math

import numpy as np
import pytest

from conelab.errors import ContractError, DomainError
from conelab.geometry import (Cap, ConicalTube, Plank, Polyhedron, Tiling,
                              assign_by_angle, check_one_dimensional,
                              cone_planks, dual_box, dump_geometry,
                              load_geometry, minkowski_disjointness,
                              omega_cover, omega_s_cover, planks_intersect,
                              pyramid_polyhedra, refine_planks,
                              sector_polyhedra, separated_caps, u_tiling)


def rot2(t):
    return np.array([[math.cos(t), math.sin(t)],
                     [-math.sin(t), math.cos(t)]])


def test_plank_axes_must_be_orthonormal():
    with pytest.raises(DomainError):
        Plank(np.zeros(2), np.array([[1.0, 0.0], [1.0, 0.0]]), np.ones(2))


def test_plank_contains_and_volume():
    p = Plank(np.array([1.0, 0.0]), rot2(0.3), np.array([2.0, 0.5]))
    assert p.volume == pytest.approx(4.0 * 1.0)
    assert p.contains(p.center[None])[0]
    far = p.center + 3.0 * p.axes[0]
    assert not p.contains(far[None])[0]


def test_dilated_along_one_axis():
    p = Plank(np.zeros(2), np.eye(2), np.array([1.0, 2.0]))
    q = p.dilated(3.0, axis=1)
    assert q.half_widths[0] == 1.0 and q.half_widths[1] == 6.0


def test_sat_agrees_with_point_sampling():
    rng = np.random.default_rng(0)
    agree = 0
    for _ in range(50):
        a = Plank(rng.uniform(-1, 1, 2), rot2(rng.uniform(0, math.pi)),
                  rng.uniform(0.2, 1.0, 2))
        b = Plank(rng.uniform(-1, 1, 2), rot2(rng.uniform(0, math.pi)),
                  rng.uniform(0.2, 1.0, 2))
        sat = planks_intersect(a, b)
        pts = (a.center + (rng.uniform(-1, 1, (4000, 2)) * a.half_widths)
               @ a.axes)
        sampled = bool(np.any(b.contains(pts)))
        # sampling can miss a sliver but must never contradict a SAT "no"
        if sampled:
            assert sat
        if sat == sampled:
            agree += 1
    assert agree >= 45


def test_dual_box_is_involution():
    p = Plank(np.array([0.3, -0.2, 1.0]),
              np.linalg.qr(np.random.default_rng(1).standard_normal((3, 3)))[0],
              np.array([0.5, 2.0, 8.0]))
    dd = dual_box(dual_box(p))
    assert np.allclose(dd.half_widths, p.half_widths)
    assert np.allclose(np.abs(dd.axes @ p.axes.T), np.eye(3), atol=1e-12)


def test_dual_of_unit_cube_is_unit_cube():
    p = Plank(np.ones(2), np.eye(2), np.array([0.5, 0.5]))
    d = dual_box(p)
    assert np.allclose(d.center, 0.0)
    assert np.allclose(d.half_widths, 0.5)


def test_separated_caps_circle_exact_count():
    caps = separated_caps(2, 2 * math.pi / 16)
    assert len(caps) == 16


def test_separated_caps_are_separated():
    delta = 0.5
    caps = separated_caps(3, delta)
    centers = np.array([c.center for c in caps])
    dots = np.clip(centers @ centers.T, -1, 1)
    ang = np.arccos(dots)
    np.fill_diagonal(ang, np.pi)
    assert ang.min() >= delta - 1e-9


def test_separated_caps_lattice_scale_keeps_separation():
    delta = 0.05  # fine enough to take the spiral-lattice path
    caps = separated_caps(3, delta)
    centers = np.array([c.center for c in caps])
    best = np.pi
    for i in range(0, len(centers), 256):
        blk = centers[i:i + 256]
        ang = np.arccos(np.clip(blk @ centers.T, -1, 1))
        for r in range(blk.shape[0]):
            ang[r, i + r] = np.pi
        best = min(best, float(ang.min()))
    assert best >= delta


def test_cone_planks_cover_neighborhood():
    delta = 2.0**-6
    planks = cone_planks(delta)
    assert len(planks) == math.ceil(2 * math.pi / math.sqrt(delta))
    rng = np.random.default_rng(2)
    ang = rng.uniform(0, 2 * math.pi, 4000)
    r = rng.uniform(0.5, 1.0, 4000)
    off = rng.uniform(-delta, delta, 4000)
    pts = np.stack([r * np.cos(ang), r * np.sin(ang), r + off], axis=1)
    counts = np.zeros(4000, dtype=int)
    for p in planks:
        counts += p.contains(pts)
    assert counts.min() >= 1
    assert counts.max() <= 4


def test_refine_planks_dyadic_split():
    delta, gamma = 2.0**-6, 0.25
    parent = cone_planks(delta)[0]
    parts = refine_planks(parent, gamma)
    assert len(parts) == 4
    long_axis = int(np.argmax(parent.half_widths))
    for q in parts:
        assert q.role == "theta"
        assert q.half_widths[long_axis] == pytest.approx(
            parent.half_widths[long_axis] / 4)


def test_omega_cover_dimensions():
    gamma, delta = 0.25, 2.0**-6
    planks = omega_cover(gamma, delta)
    assert len(planks) == math.ceil(2 * math.pi / (math.sqrt(delta) / gamma))
    for om in planks:
        hw = om.half_widths
        assert hw[0] == pytest.approx(1.5 * delta / gamma)   # normal
        assert hw[1] == pytest.approx(math.sqrt(delta))      # tangential
        assert hw[2] > hw[1]                                 # radial, O(gamma)


def test_omega_cover_scaling_precondition():
    with pytest.raises(DomainError):
        omega_cover(0.25, 0.25)  # delta must not exceed gamma^2


def test_u_tiling_matches_slab():
    gamma, s = 0.25, 0.5
    slab = omega_s_cover(s, gamma)[0]
    R = 64.0
    tiling = u_tiling(slab, R, s, gamma)
    assert tiling.tile_volume > 0
    idx = tiling.tile_index(np.zeros((1, 3)))
    center = tiling.tile_center(idx[0])
    assert tiling.tile_index(center[None])[0].tolist() == idx[0].tolist()


def test_assign_by_angle_roundtrip():
    gamma, delta = 0.25, 2.0**-6
    omegas = omega_cover(gamma, delta)
    cover = omega_s_cover(1.0, gamma)
    owner = assign_by_angle(omegas, cover)
    assert len(owner) == len(omegas)
    assert all(0 <= o < len(cover) for o in owner)


def test_tiling_requires_centered_base():
    with pytest.raises(ContractError):
        Tiling(Plank(np.ones(2), np.eye(2), np.ones(2)))


def test_minkowski_negative_cases():
    a = Cap(np.array([1.0, 0.0]), 0.05)
    b = Cap(np.array([0.0, 1.0]), 0.05)
    # same dyadic index on one side
    assert not minkowski_disjointness(a, b, 5, 5, 20, 0)
    # gap below the m threshold
    assert not minkowski_disjointness(a, b, 5, 0, 20, 0, m=8)
    # caps far too close together
    close = Cap(np.array([math.cos(0.01), math.sin(0.01)]), 0.05)
    assert not minkowski_disjointness(a, close, 20, 0, 21, 1)


def test_minkowski_positive_case():
    a = Cap(np.array([1.0, 0.0]), 0.03)
    b = Cap(np.array([-1.0, 0.0]), 0.03)
    assert minkowski_disjointness(a, b, 20, 0, 21, 1)


def test_conical_tube_samples_inside():
    tube = ConicalTube(Cap(np.array([0.0, 0.0, 1.0]), 0.2), 4)
    pts = tube.sample(np.random.default_rng(0), 500)
    assert np.all(tube.contains(pts))


def test_one_dimensional_families():
    assert check_one_dimensional(sector_polyhedra(16, 2))
    assert check_one_dimensional(sector_polyhedra(16, 3))
    assert check_one_dimensional(pyramid_polyhedra(6))


def test_one_dimensional_rejects_dense_normals():
    rng = np.random.default_rng(4)
    polys = []
    for _ in range(30):
        d = rng.standard_normal(3)
        d /= np.linalg.norm(d)
        helper = np.array([1.0, 0.0, 0.0]) if abs(d[0]) < 0.9 else \
            np.array([0.0, 1.0, 0.0])
        u = np.cross(d, helper)
        u /= np.linalg.norm(u)
        v = np.cross(d, u)
        normals = np.stack([u, -u, v, -v])
        polys.append(Polyhedron(normals, np.full(4, math.sin(0.1)), d, 0.1))
    assert not check_one_dimensional(polys)


def test_one_dimensional_invariant_under_rotation():
    q = np.linalg.qr(np.random.default_rng(8).standard_normal((3, 3)))[0]
    polys = pyramid_polyhedra(6)
    rotated = [Polyhedron(p.normals @ q.T, p.offsets, p.anchor @ q.T, p.delta)
               for p in polys]
    assert check_one_dimensional(rotated)


def test_geometry_text_roundtrip(tmp_path):
    items = [
        Cap(np.array([0.6, 0.8]), 0.25),
        cone_planks(2.0**-4)[3],
        sector_polyhedra(8, 3)[2],
    ]
    path = tmp_path / "geo.txt"
    dump_geometry(items, path)
    back = load_geometry(path)
    assert isinstance(back[0], Cap)
    assert np.array_equal(back[0].center, items[0].center)
    assert back[0].radius == items[0].radius
    assert isinstance(back[1], Plank)
    assert np.array_equal(back[1].center, items[1].center)
    assert np.array_equal(back[1].axes, items[1].axes)
    assert np.array_equal(back[1].half_widths, items[1].half_widths)
    assert back[1].role == items[1].role
    assert isinstance(back[2], Polyhedron)
    assert np.array_equal(back[2].normals, items[2].normals)
    assert np.array_equal(back[2].offsets, items[2].offsets)


def test_polyhedron_regularity():
    for poly in sector_polyhedra(16, 2):
        assert poly.is_regular()
