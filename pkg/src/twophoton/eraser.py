"""Polarization-resolved HOM interferometer: which-path labeling and erasure.

A half-wave plate in arm A rotates that photon's polarization; optional linear
polarizers sit in front of each detector. Spectral and polarization degrees of
freedom factorize, so each coincidence amplitude is a spectral amplitude (as in
``hom``) times a polarization factor built from Jones matrices:

    TT: A -> D1, B -> D2   factor (J1 e_A)_k (J2 e_B)_l
    RR: A -> D2, B -> D1   factor (J1 e_B)_k (J2 e_A)_l

summed incoherently over detected polarization components k, l.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .hom import ArmConfig, HomScan, _two_photon_weights
from .optics import beamsplitter_amplitudes, jones_element, linear_polarization
from .spectral import PhotonPairState, make_pair_state


@dataclass(frozen=True)
class EraserConfig:
    pair: PhotonPairState
    hwp_angle: float = 0.0
    pol1: Optional[float] = None
    pol2: Optional[float] = None
    # documents a delayed-choice variant; the stationary model predicts the same rates
    delayed_choice: bool = False

    def __post_init__(self):
        for name in ("hwp_angle", "pol1", "pol2"):
            value = getattr(self, name)
            if value is not None and not -np.pi / 2 <= value <= np.pi / 2:
                raise ValueError(f"{name} must lie in [-pi/2, pi/2]")


@dataclass(frozen=True)
class EraserProfile:
    scan: HomScan
    visibility: float
    baseline: float


def _analyzer(angle: Optional[float]) -> np.ndarray:
    return np.eye(2, dtype=complex) if angle is None else jones_element("LP", angle)


def polarization_factors(config: EraserConfig):
    """Arrays (c_TT[k, l], c_RR[k, l]) over detected components at D1 (k) and D2 (l)."""
    pair = config.pair
    e_a = jones_element("HWP", config.hwp_angle) @ linear_polarization(pair.pol_a)
    e_b = linear_polarization(pair.pol_b)
    j1 = _analyzer(config.pol1)
    j2 = _analyzer(config.pol2)
    c_tt = np.outer(j1 @ e_a, j2 @ e_b)
    c_rr = np.outer(j1 @ e_b, j2 @ e_a)
    return c_tt, c_rr


def _spectral_terms(pair: PhotonPairState, tau: float):
    """(|TT|^2 sum, |RR|^2 sum, TT RR* sum) without beam-splitter or polarization factors."""
    grid = pair.grid
    w = grid.weights
    if pair.entangled:
        g = _two_photon_weights(pair, ArmConfig(), ArmConfig())
        phase = np.exp(-1j * grid.detunings * tau)
        a, b = g * phase, g[::-1] * np.conj(phase)
        return np.sum(np.abs(a) ** 2 * w), np.sum(np.abs(b) ** 2 * w), np.sum(a * np.conj(b) * w)
    f = pair.amplitude
    fa, fb = f, f[::-1]
    na, nb = np.sum(np.abs(fa) ** 2 * w), np.sum(np.abs(fb) ** 2 * w)
    overlap = np.sum(fa * np.conj(fb) * np.exp(-1j * grid.detunings * tau) * w)
    return na * nb, na * nb, abs(overlap) ** 2


def coincidence_rate(config: EraserConfig, tau: float, coherent: bool = True) -> float:
    """Coincidence rate in units of the unlabeled, unpolarized baseline."""
    t, r = beamsplitter_amplitudes()
    c_tt, c_rr = polarization_factors(config)
    s_tt, s_rr, s_x = _spectral_terms(config.pair, tau)
    total = 0.0
    for k in range(2):
        for l in range(2):
            a, b = t * t * c_tt[k, l], r * r * c_rr[k, l]
            term = abs(a) ** 2 * s_tt + abs(b) ** 2 * s_rr
            if coherent:
                term += 2 * np.real(a * np.conj(b) * s_x)
            total += term
    return 2.0 * float(total)


def eraser_scan(config: EraserConfig, delays) -> EraserProfile:
    delays = np.asarray(delays, dtype=float)
    rates = np.array([coincidence_rate(config, tau) for tau in delays])
    baseline = coincidence_rate(config, 0.0, coherent=False)
    scan = HomScan(delays, rates, baseline)
    if baseline <= 0:
        return EraserProfile(scan, 0.0, baseline)
    i = int(np.argmax(np.abs(rates - baseline)))
    return EraserProfile(scan, float((baseline - rates[i]) / baseline), baseline)


def zero_delay_visibility(config: EraserConfig) -> float:
    baseline = coincidence_rate(config, 0.0, coherent=False)
    if baseline <= 0:
        return 0.0
    return float(1 - coincidence_rate(config, 0.0) / baseline)


def eraser_visibility_curve(hwp_angle: float, pol1: Optional[float], pol2_values,
                            pair: PhotonPairState | None = None) -> list[float]:
    """Visibility at zero delay as the second polarizer rotates."""
    pair = pair or make_pair_state(351e-9, 702e-9, 6e-9)
    return [zero_delay_visibility(EraserConfig(pair, hwp_angle, pol1, p2)) for p2 in pol2_values]


def detector1_marginal(config: EraserConfig, tau: float = 0.0) -> float:
    """Rate of split-port events with D1 firing, summed over both outcomes at analyzer 2.

    Analyzer 2 is treated as a complete measurement in its own basis
    (pass axis and its orthogonal), so the sum traces over detector 2.
    """
    if config.pol2 is None:
        return coincidence_rate(config, tau)
    orthogonal = config.pol2 - np.pi / 2 if config.pol2 >= 0 else config.pol2 + np.pi / 2
    total = 0.0
    for angle in (config.pol2, orthogonal):
        total += coincidence_rate(EraserConfig(config.pair, config.hwp_angle, config.pol1, angle), tau)
    return total
