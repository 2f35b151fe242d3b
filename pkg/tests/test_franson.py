import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twophoton.franson import (STANDARD_SETTINGS, FransonConfig, chsh_all_combinations,
                               chsh_from_correlation, chsh_S, correlation, franson_coincidence,
                               path_amplitude, port_probabilities)

phases = st.floats(-2 * np.pi, 2 * np.pi, allow_nan=False)
vis = st.floats(0.0, 1.0)


def like_rate(phi1, phi2, v=1.0, entangled=True):
    cfg = FransonConfig(phi1=phi1, phi2=phi2, visibility=v, entangled=entangled)
    return franson_coincidence(cfg, "like").p_postselected_coincidence


def brute_force_classes():
    """Each photon independently short/long with probability 1/2, any output port."""
    return {p1 + p2: 0.25 for p1, p2 in itertools.product("SL", "SL")}


def test_class_probabilities():
    rates = franson_coincidence(FransonConfig(phi1=0.3, phi2=1.1))
    oracle = brute_force_classes()
    assert rates.p_sl == pytest.approx(oracle["SL"], abs=1e-15)
    assert rates.p_ls == pytest.approx(oracle["LS"], abs=1e-15)
    assert rates.p_ss + rates.p_ll + rates.p_sl + rates.p_ls == pytest.approx(1.0, abs=1e-12)


def test_single_photon_port_probabilities():
    # no first-order interference: each photon leaves each port half the time per path
    for k in (1, 2):
        for path in "SL":
            total = sum(abs(path_amplitude(k, path, port, 0.7)) ** 2 for port in "du")
            assert total == pytest.approx(0.5, abs=1e-15)


def test_perfect_zero():
    assert like_rate(0.0, 0.0) < 1e-15
    assert like_rate(0.4, -0.4) < 1e-15


@given(phi1=phases, phi2=phases, v=vis)
def test_fringe_formula(phi1, phi2, v):
    assert like_rate(phi1, phi2, v) == pytest.approx(0.25 * (1 - v * np.cos(phi1 + phi2)), abs=1e-12)
    cfg = FransonConfig(phi1=phi1, phi2=phi2, visibility=v)
    unlike = franson_coincidence(cfg, "unlike").p_postselected_coincidence
    assert unlike == pytest.approx(0.25 * (1 + v * np.cos(phi1 + phi2)), abs=1e-12)


@given(phi1=phases, phi2=phases, delta=phases, v=vis)
def test_phase_sum_invariance(phi1, phi2, delta, v):
    assert like_rate(phi1 + delta, phi2 - delta, v) == pytest.approx(like_rate(phi1, phi2, v), abs=1e-12)


@given(phi1=phases, phi2=phases, v=vis)
def test_probability_conservation(phi1, phi2, v):
    cfg = FransonConfig(phi1=phi1, phi2=phi2, visibility=v)
    like = franson_coincidence(cfg, "like").p_postselected_coincidence
    unlike = franson_coincidence(cfg, "unlike").p_postselected_coincidence
    assert like + unlike == pytest.approx(0.5, abs=1e-12)
    probs = port_probabilities(cfg)
    total = sum(probs[(cls, a, b)] for cls in ("SS+LL", "SL", "LS") for a in "du" for b in "du")
    assert total == pytest.approx(1.0, abs=1e-12)


@given(phi1=phases, phi2=phases)
def test_separable_is_flat(phi1, phi2):
    assert like_rate(phi1, phi2, entangled=False) == pytest.approx(like_rate(0, 0, entangled=False),
                                                                  abs=1e-12)


@pytest.mark.parametrize("v, expected", [(1.0, -2 * np.sqrt(2)), (1 / np.sqrt(2), -2.0)])
def test_chsh_closed_values(v, expected):
    res = chsh_S(v, *STANDARD_SETTINGS)
    assert res.S == pytest.approx(expected, abs=1e-9)


def test_chsh_measured_visibility():
    res = chsh_S(0.93, *STANDARD_SETTINGS)
    assert res.S == pytest.approx(-2.63, abs=0.01)
    assert res.violated
    assert all(abs(e) <= 0.93 + 1e-12 for e in res.correlations)


def test_chsh_rule_matches_manual_combination():
    # E = -cos at phase sums 45, -45, 45, 135 degrees, the last subtracted
    sums = np.radians([45, -45, 45, 135])
    e = -np.cos(sums)
    manual = e[0] + e[1] + e[2] - e[3]
    res = chsh_S(1.0, *STANDARD_SETTINGS)
    assert res.S == pytest.approx(manual, abs=1e-12)
    assert res.subtracted_term == 3


def test_monotone_in_visibility():
    values = [abs(chsh_S(v, *STANDARD_SETTINGS).S) for v in np.linspace(0, 1, 41)]
    assert all(b > a for a, b in zip(values, values[1:]))
    boundary = abs(chsh_S(1 / np.sqrt(2), *STANDARD_SETTINGS).S)
    assert boundary == pytest.approx(2.0, abs=1e-9)


@given(st.lists(st.floats(-np.pi, np.pi), min_size=4, max_size=4))
def test_separable_respects_local_bound(settings):
    def corr(x, y):
        return correlation(FransonConfig(phi1=x, phi2=y, entangled=False))
    assert max(abs(s) for s in chsh_all_combinations(corr, *settings)) <= 2 + 1e-9


def test_local_hidden_variable_bound():
    # deterministic +-1 outcome tables bound every CHSH combination by 2
    rng = np.random.default_rng(0)
    for _ in range(1000):
        a, ap, b, bp = rng.uniform(-np.pi, np.pi, 4)
        lam = rng.uniform(0, 2 * np.pi, 400)

        def corr(x, y):
            return float(np.mean(np.sign(np.cos(x - lam)) * np.sign(np.cos(y + lam))))
        assert max(abs(s) for s in chsh_all_combinations(corr, a, ap, b, bp)) <= 2 + 1e-9


def test_quantum_bound():
    rng = np.random.default_rng(1)
    for _ in range(200):
        v = rng.uniform(0, 1)
        settings = rng.uniform(-np.pi, np.pi, 4)

        def corr(x, y):
            return correlation(FransonConfig(phi1=x, phi2=y, visibility=v))
        assert max(abs(s) for s in chsh_all_combinations(corr, *settings)) <= 2 * np.sqrt(2) * v + 1e-9


def test_degenerate_settings_reported():
    # all four phase sums share the same cosine sign
    with pytest.raises(ValueError, match="degenerate"):
        chsh_S(1.0, 0.0, 0.1, 0.0, 0.1)
    # a phase sum on a fringe zero
    with pytest.raises(ValueError, match="degenerate"):
        chsh_S(1.0, np.pi / 2, 0.0, 0.0, 0.3)


def test_chsh_custom_sign_reference():
    res = chsh_from_correlation(lambda x, y: -np.cos(x + y), *STANDARD_SETTINGS,
                                sign_reference=lambda x, y: np.cos(x + y))
    assert res.S == pytest.approx(-2 * np.sqrt(2))


@pytest.mark.parametrize("kwargs", [
    dict(visibility=1.2),
    dict(path_imbalance=1e-3),
    dict(coincidence_window=5e-9),
    dict(coincidence_window=0.0),
])
def test_config_invariants(kwargs):
    with pytest.raises(ValueError):
        FransonConfig(**kwargs)


def test_visibility_argument_checked():
    with pytest.raises(ValueError):
        chsh_S(1.5, *STANDARD_SETTINGS)


def test_port_pattern_checked():
    with pytest.raises(ValueError):
        franson_coincidence(FransonConfig(), "both")
