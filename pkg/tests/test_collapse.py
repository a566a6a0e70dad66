import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dowsim.collapse import (BornSampler, CollapseOperator, CollapsePolicy, Criterion, Shape, apply_collapse,
                             born_sample, check_collapse, collapse_threshold, gradient_density,
                             indicator_integral)
from dowsim.errors import ConfigError, NonpositiveWidth, ZeroField
from dowsim.events import InteractionEvent, energy_density
from dowsim.wavefield import (SI_ELECTRON, GridSpec, Wavefield, gaussian_packet, norm, normalize,
                              position_spread)

LINE = GridSpec.line(256, -10, 10)


def test_two_cell_frequencies():
    g = GridSpec.line(8, 0, 8)
    amps = np.zeros(8)
    amps[2], amps[5] = np.sqrt(0.3), np.sqrt(0.7)
    idx = BornSampler(Wavefield(g, amps)).draw_indices(np.random.default_rng(0), 100_000)
    assert np.mean(idx == 2) == pytest.approx(0.3, abs=0.01)
    assert np.mean(idx == 5) == pytest.approx(0.7, abs=0.01)
    assert set(np.unique(idx)) == {2, 5}


def test_single_cell_is_certain():
    amps = np.zeros(LINE.shape)
    amps[77] = 1.0
    psi = normalize(Wavefield(LINE, amps))
    rng = np.random.default_rng(3)
    assert {born_sample(psi, rng) for _ in range(50)} == {LINE.point((77,))}


def test_gaussian_sample_spread():
    psi = gaussian_packet(LINE, 0.0, 1.0)
    s = BornSampler(psi)
    x = LINE.axes[0][s.draw_indices(np.random.default_rng(1), 100_000)]
    assert np.std(x) == pytest.approx(1.0, rel=0.02)


def test_sampling_is_deterministic_and_regional():
    psi = gaussian_packet(LINE, 0.0, 1.0)
    a = [born_sample(psi, np.random.default_rng(9)) for _ in range(3)]
    assert len(set(a)) == 1
    region = LINE.axes[0] > 1.0
    s = BornSampler(psi, region)
    xs = LINE.axes[0][s.draw_indices(np.random.default_rng(0), 1000)]
    assert xs.min() > 1.0
    with pytest.raises(ZeroField):
        BornSampler(psi, np.zeros(LINE.shape, bool))


def test_born_tv_bound():
    psi = gaussian_packet(LINE, 0.0, 1.0)
    n = 20_000
    idx = BornSampler(psi).draw_indices(np.random.default_rng(5), n)
    freq = np.bincount(idx, minlength=LINE.shape[0]) / n
    tv = 0.5 * np.abs(freq - psi.probabilities()).sum()
    assert tv <= 3 * np.sqrt(LINE.shape[0] / n)


def test_delta_collapse_on_uniform_field():
    psi = normalize(Wavefield(LINE, np.ones(LINE.shape)))
    out = apply_collapse(psi, LINE.point((40,)), CollapseOperator(shape=Shape.DELTA))
    expected = np.zeros(LINE.shape)
    expected[40] = 1.0
    np.testing.assert_allclose(np.abs(out.amps) ** 2 * LINE.dV, expected, atol=1e-15)


def test_gaussian_collapse_product_width():
    g = GridSpec.line(2048, -20, 20)
    psi = gaussian_packet(g, 0.0, 4.0)
    out = apply_collapse(psi, 0.0, CollapseOperator(width=0.1))
    oracle = (4.0 ** -2 + 0.1 ** -2) ** -0.5
    assert position_spread(out) == pytest.approx(oracle, rel=0.05)
    assert position_spread(out) == pytest.approx(0.1, rel=0.05)
    assert norm(out) == pytest.approx(1.0, abs=1e-12)


def test_default_operator_width_and_errors():
    psi = gaussian_packet(LINE, 0.0, 1.0)
    out = apply_collapse(psi, 0.3)
    assert position_spread(out) <= 1.05 * 2 * LINE.dx[0]
    with pytest.raises(ConfigError):
        apply_collapse(psi, 0.0, CollapseOperator(width=0.1 * LINE.dx[0]))
    amps = np.zeros(LINE.shape)
    amps[0] = 1.0
    with pytest.raises(ZeroField):
        apply_collapse(normalize(Wavefield(LINE, amps)), 5.0, CollapseOperator(shape=Shape.DELTA))


def test_threshold_values():
    assert collapse_threshold(1.0) == 0.125
    ev = 1.602176634e-19
    assert collapse_threshold(1e-9, SI_ELECTRON) / ev == pytest.approx(0.009524, rel=0.005)
    assert collapse_threshold(1e-11, SI_ELECTRON) / ev == pytest.approx(95.24, rel=0.005)
    with pytest.raises(NonpositiveWidth):
        collapse_threshold(0.0)
    widths = np.array([0.1, 1.0, 7.0])
    np.testing.assert_allclose([collapse_threshold(w) * w * w for w in widths], 0.125)


def test_check_collapse_threshold():
    g = GridSpec.line(512, -10, 10)
    psi = gaussian_packet(g, 0.0, 1.0)
    policy = CollapsePolicy()
    assert check_collapse(psi, InteractionEvent(0, 0.0, 0.5, 0.2), policy)
    assert not check_collapse(psi, InteractionEvent(0, 0.0, 0.5, 0.1), policy)


def test_indicator_integral():
    g = GridSpec.line(1024, -20, 20)
    psi = gaussian_packet(g, 0.0, 1.0)
    wide = InteractionEvent(0, 0.0, 100.0, 1.0)
    policy = CollapsePolicy(Criterion.INDICATOR, epsilon_c=1e-12, D=0.2)
    assert energy_density(wide, g).min() > policy.epsilon_c
    assert indicator_integral(psi, wide, policy) == pytest.approx(0.25, rel=0.02)
    assert check_collapse(psi, wide, policy)
    flat = normalize(Wavefield(g, np.ones(g.shape)))
    assert indicator_integral(flat, wide, policy) == pytest.approx(0.0, abs=1e-20)
    high = CollapsePolicy(Criterion.INDICATOR, epsilon_c=1e9, D=1e-9)
    assert indicator_integral(psi, wide, high) == 0.0
    assert not check_collapse(psi, wide, high)


def test_energy_density_integrates_to_energy():
    g = GridSpec.plane(128, (-8, 8), (-8, 8))
    ev = InteractionEvent(0, (1.0, -1.0), 0.7, 3.0)
    assert energy_density(ev, g).sum() * g.dV == pytest.approx(3.0, rel=1e-6)


def test_gradient_density_of_plane_wave():
    g = GridSpec.line(256, 0, 2 * np.pi)
    psi = Wavefield(g, np.exp(2j * g.axes[0]))
    # central differences see sin(2 dx)/dx instead of 2
    d = g.dx[0]
    np.testing.assert_allclose(gradient_density(psi), (np.sin(2 * d) / d) ** 2)


def test_indicator_policy_needs_parameters():
    with pytest.raises(ConfigError):
        CollapsePolicy(Criterion.INDICATOR)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_threshold_criterion_monotone(e1, e2):
    psi = gaussian_packet(LINE, 0.0, 1.0)
    lo, hi = sorted((e1, e2))
    policy = CollapsePolicy()
    if check_collapse(psi, InteractionEvent(0, 0.0, 0.5, lo), policy):
        assert check_collapse(psi, InteractionEvent(0, 0.0, 0.5, hi), policy)


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(0.16, 1.0), st.floats(1.0, 2.0))
def test_collapse_never_widens(x0, sigma_c, sigma):
    psi = gaussian_packet(LINE, 0.0, sigma)
    out = apply_collapse(psi, x0, CollapseOperator(width=sigma_c))
    assert norm(out) == pytest.approx(1.0, abs=1e-12)
    assert position_spread(out) <= position_spread(psi) + 1e-12
