import math

import numpy as np
import pytest

from conelab.errors import DomainError
from conelab.geometry import Plank, dual_box
from conelab.grid import GridSpec
from conelab.overlap import SamplerConfig, pairwise_disjoint
from conelab.packets import (ExtremizerConfig, WavePacketSpec,
                             build_extremizer, dilation_trick, overlap_ratio,
                             packet_concentration, synthesize_packet)


@pytest.fixture
def spec():
    return GridSpec(2, 32.0, 256)


def rotated_plank(theta=0.4, hw=(0.8, 0.4), center=(0.5, -0.3)):
    A = np.array([[math.cos(theta), math.sin(theta)],
                  [-math.sin(theta), math.cos(theta)]])
    return Plank(np.asarray(center, dtype=float), A,
                 np.asarray(hw, dtype=float), role="R")


def test_packet_value_at_position(spec):
    pkt = WavePacketSpec(rotated_plank(), position=np.array([2.0, 1.0]),
                         amplitude=3.0 - 1.0j)
    f = synthesize_packet(pkt, spec)
    i = np.argmin(np.abs(spec.physical_axis() - 2.0))
    j = np.argmin(np.abs(spec.physical_axis() - 1.0))
    assert f.values[i, j] == pytest.approx(pkt.amplitude, rel=1e-9)


def test_smooth_packet_concentrates(spec):
    pkt = WavePacketSpec(rotated_plank(), position=np.array([-3.0, 4.0]))
    f = synthesize_packet(pkt, spec)
    assert packet_concentration(f, pkt) >= 0.5


def test_sharp_packet_leaks_more(spec):
    plank = rotated_plank()
    pos = np.array([-3.0, 4.0])
    smooth = synthesize_packet(WavePacketSpec(plank, pos), spec)
    sharp_pkt = WavePacketSpec(plank, pos, sharp=True)
    sharp = synthesize_packet(sharp_pkt, spec)
    assert (packet_concentration(sharp, sharp_pkt)
            <= packet_concentration(smooth, WavePacketSpec(plank, pos)) + 1e-9)


def test_dilation_trick_doubles_dual(spec):
    plank = rotated_plank()
    half, info = dilation_trick(plank, axis=0)
    assert half.half_widths[0] == pytest.approx(plank.half_widths[0] / 2)
    assert info["dual_factor"] == pytest.approx(2.0)
    assert info["doubling_axis"] == 0
    parent, halfd = info["parent_dual"], info["half_dual"]
    assert halfd.half_widths[0] == pytest.approx(2 * parent.half_widths[0])


def test_extremizer_config_validation():
    with pytest.raises(DomainError):
        ExtremizerConfig(kind="unknown", dim=2, p=4.0, delta=0.1)
    with pytest.raises(DomainError):
        ExtremizerConfig(kind="cone_l8_A2", dim=2, p=8.0, delta=0.1)
    with pytest.raises(DomainError):
        ExtremizerConfig(kind="bochner_riesz", dim=2, p=4.0, delta=0.4)


def test_bochner_riesz_family_disjoint_and_focusing():
    cfg = ExtremizerConfig(kind="bochner_riesz", dim=2, p=6.0, delta=2.0**-5)
    ext = build_extremizer(cfg)
    assert pairwise_disjoint(ext.family)
    # the long dilations all cover the origin
    origin = np.zeros((1, 2))
    for tube in ext.dilated.boxes:
        assert tube.contains(origin)[0]


def test_overlap_ratio_positive_and_reproducible():
    cfg = ExtremizerConfig(kind="cone_l8_A2", dim=3, p=8.0, delta=2.0**-4)
    ext = build_extremizer(cfg)
    sampler = SamplerConfig(mode="monte_carlo", samples=50_000, seed=5)
    a = overlap_ratio(ext, sampler)
    b = overlap_ratio(ext, sampler)
    assert a.value > 0
    assert a.value == b.value


def test_expected_exponents():
    br = build_extremizer(
        ExtremizerConfig(kind="bochner_riesz", dim=2, p=6.0, delta=0.125))
    assert br.expected_exponent == pytest.approx(0.5 - 2.0 / 6.0)
    a1 = build_extremizer(
        ExtremizerConfig(kind="sharp_cutoff_A1", dim=3, p=4.0, delta=0.125))
    assert a1.expected_exponent == pytest.approx(1.0 - 3.0 / 4.0)
    cone = build_extremizer(
        ExtremizerConfig(kind="cone_l8_A2", dim=3, p=8.0, delta=0.125))
    assert cone.expected_exponent == pytest.approx(0.0)


def test_direction_density_scales():
    coarse = build_extremizer(
        ExtremizerConfig(kind="sharp_cutoff_A1", dim=3, p=4.0, delta=2.0**-4))
    fine = build_extremizer(
        ExtremizerConfig(kind="sharp_cutoff_A1", dim=3, p=4.0, delta=2.0**-5))
    ratio = len(fine.family.boxes) / len(coarse.family.boxes)
    assert ratio == pytest.approx(4.0, rel=0.05)
