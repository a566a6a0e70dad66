import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dowsim.collapse import collapse_threshold
from dowsim.deformation import (DeformationParams, Mode, apply_deformation, deform_sequence, deform_width,
                                width_trace)
from dowsim.errors import ConfigError, EnergyAtOrAboveThreshold, TargetUnreachable
from dowsim.events import InteractionEvent
from dowsim.wavefield import GridSpec, gaussian_packet, momentum_spread, position_spread

GRID = GridSpec.line(1024, -20, 20)


def test_single_event_law():
    p1, p2 = DeformationParams(1.0), DeformationParams(2.0)
    ec = collapse_threshold(2.0)
    assert deform_width(2.0, 0.0, p1) == 2.0
    assert deform_width(2.0, ec / 2, p1) == pytest.approx(1.0)
    assert deform_width(2.0, ec / 2, p2) == pytest.approx(1.5)
    with pytest.raises(EnergyAtOrAboveThreshold):
        deform_width(2.0, ec, p1)
    with pytest.raises(ConfigError):
        DeformationParams(0.5)


def test_sequence_hand_fold():
    # w=1, Ec=1/8; E=1/16 halves it; Ec(0.5)=1/2; 1/16 removes 1/8 of 0.5
    width, index = deform_sequence(1.0, [0.0625, 0.0625])
    assert width == pytest.approx(0.4375, abs=1e-15)
    assert index is None


def test_sequence_edges():
    assert deform_sequence(1.5, []) == (1.5, None)
    assert deform_sequence(1.0, [0.125]) == (1.0, 0)
    width, index = deform_sequence(1.0, [0.0625, 0.0625, 1.0, 0.01])
    assert index == 2
    assert width == pytest.approx(0.4375)


def test_additive_mode():
    p = DeformationParams(1.0, Mode.ADDITIVE)
    # default decrement is w0 * E / Ec(w0): 1/16 -> 0.5 per event, so the second exhausts the width
    assert width_trace(1.0, [0.0625], p) == [1.0, 0.5]
    assert deform_sequence(1.0, [0.0625, 0.0625], p) == (0.5, 1)
    custom = DeformationParams(1.0, Mode.ADDITIVE, additive_map=lambda e: 0.1 * e)
    w, idx = deform_sequence(1.0, [0.05, 0.05], custom)
    assert idx is None and w == pytest.approx(0.99)
    with pytest.raises(ConfigError):
        DeformationParams(additive_map=lambda e: e + 1)


def test_apply_deformation_hits_target():
    psi = gaussian_packet(GRID, 0.0, 1.0)
    out = apply_deformation(psi, InteractionEvent(0, 0.0, 0.5, 0.0625))
    assert position_spread(out) == pytest.approx(0.5, rel=0.01)
    assert position_spread(out) * momentum_spread(out) >= 0.5 * (1 - 1e-6)
    np.testing.assert_allclose(np.angle(out.amps[500:520]), np.angle(psi.amps[500:520]), atol=1e-12)


def test_zero_energy_is_identity():
    psi = gaussian_packet(GRID, 0.0, 1.0)
    assert apply_deformation(psi, InteractionEvent(0, 0.0, 0.5, 0.0)) is psi


def test_unreachable_target():
    psi = gaussian_packet(GRID, 0.0, 1.0)
    grow = DeformationParams(1.0, Mode.ADDITIVE, additive_map=lambda e: -e)
    with pytest.raises(TargetUnreachable):
        apply_deformation(psi, InteractionEvent(0, 0.0, 0.5, 0.01), grow)


def test_field_sequence_follows_scalar_fold():
    psi = gaussian_packet(GRID, 0.0, 1.0)
    energies = [0.03, 0.05, 0.1]
    predicted = width_trace(1.0, energies)
    for e, w in zip(energies, predicted[1:]):
        psi = apply_deformation(psi, InteractionEvent(0, 0.0, 0.5, e))
        assert position_spread(psi) == pytest.approx(w, rel=0.01)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-3, 1e3), st.floats(0.0, 0.999), st.floats(1.0, 5.0))
def test_closed_form(w0, frac, gamma):
    e = frac * collapse_threshold(w0)
    assert deform_width(w0, e, DeformationParams(gamma)) == pytest.approx(w0 * (1 - frac ** gamma), rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 0.2), max_size=8), st.sampled_from(list(Mode)), st.floats(1.0, 3.0))
def test_trace_nonincreasing(energies, mode, gamma):
    trace = width_trace(1.0, energies, DeformationParams(gamma, mode))
    assert all(b <= a for a, b in zip(trace, trace[1:]))
    assert all(w > 0 for w in trace)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 0.99))
def test_linear_gamma_is_identity(frac):
    assert 1 - deform_width(1.0, frac * 0.125) == pytest.approx(frac, abs=1e-12)
