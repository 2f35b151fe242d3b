"""Hong-Ou-Mandel coincidence engine, dip fitting and dispersion cancellation.

Coincidences come from two processes at the final beam splitter: both photons
transmitted (TT) or both reflected (RR). For a pair with amplitude f(W), arm-A
photon at w0 + W and arm-B photon at w0 - W, and with the scan delay applied to
arm B, the amplitudes at detector frequencies (w0 + W, w0 - W) are

    TT = t^2 f(W)  H_A(w0 + W) H_B(w0 - W) exp(-i W tau)
    RR = r^2 f(-W) H_A(w0 - W) H_B(w0 + W) exp(+i W tau)

(the common factor exp(i w0 tau) dropped). Rates are normalized so that fully
distinguishable photons give 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .optics import (Material, ScalarTransfer, beamsplitter_amplitudes, group_delay,
                     material_dispersion)
from .spectral import PhotonPairState, correlation_time


class NoDipError(ValueError):
    """Scan shows no extremum distinguishable from its baseline."""


@dataclass(frozen=True)
class ArmConfig:
    elements: tuple = ()
    extra_delay: float = 0.0

    def transfer(self, omega) -> np.ndarray:
        omega = np.asarray(omega, dtype=float)
        h = np.exp(1j * omega * self.extra_delay)
        for element in self.elements:
            values = element(omega)
            if not np.all(np.isfinite(values)):
                raise ValueError("arm transfer is undefined on part of the frequency grid")
            h = h * values
        return h


@dataclass(frozen=True)
class HomScan:
    delays: np.ndarray
    rates: np.ndarray
    baseline: float = 1.0
    meta: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class DipFit:
    center: float
    rms_width: float
    visibility: float
    fit_residual: float
    baseline: float = 1.0


def _two_photon_weights(pair: PhotonPairState, arm_a: ArmConfig, arm_b: ArmConfig):
    w_a, w_b = pair.arm_frequencies()
    g = pair.amplitude * arm_a.transfer(w_a) * arm_b.transfer(w_b)
    return g


def _rate_entangled(pair, g, tau):
    t, r = beamsplitter_amplitudes()
    grid = pair.grid
    phase = np.exp(-1j * grid.detunings * tau)
    tt = t * t * g * phase
    rr = r * r * g[::-1] * np.conj(phase)
    # 2 = 1 / (baseline probability of distinguishable photons)
    return 2.0 * float(np.sum(np.abs(tt + rr) ** 2 * grid.weights))


def _rate_separable(pair, a, b, tau):
    # Independent detunings: the double sum over detector frequencies factorizes.
    grid = pair.grid
    w = grid.weights
    na = np.sum(np.abs(a) ** 2 * w)
    nb = np.sum(np.abs(b) ** 2 * w)
    overlap = np.sum(a * np.conj(b) * np.exp(-1j * grid.detunings * tau) * w)
    return float(na * nb - abs(overlap) ** 2)


def hom_coincidence_scan(pair: PhotonPairState, arm_a: ArmConfig | None = None,
                         arm_b: ArmConfig | None = None, delays=()) -> HomScan:
    """Coincidence rate vs the extra delay of arm B."""
    arm_a = arm_a or ArmConfig()
    arm_b = arm_b or ArmConfig()
    delays = np.asarray(delays, dtype=float)
    if pair.entangled:
        g = _two_photon_weights(pair, arm_a, arm_b)
        rates = [_rate_entangled(pair, g, tau) for tau in delays]
    else:
        w0 = pair.center_angular_frequency
        det = pair.grid.detunings
        f = pair.amplitude
        # both photons indexed by detector detuning nu: A at w0 + nu, B at w0 + nu
        a = f * arm_a.transfer(w0 + det)
        b = f[::-1] * arm_b.transfer(w0 + det)
        rates = [_rate_separable(pair, a, b, tau) for tau in delays]
    return HomScan(delays, np.array(rates))


def _gaussian_dip(p, tau):
    base, vis, center, width = p
    return base * (1 - vis * np.exp(-(tau - center) ** 2 / (2 * width ** 2)))


def fit_dip(scan: HomScan, min_visibility: float = 1e-3) -> DipFit:
    """Least-squares Gaussian-on-baseline fit; negative visibility means a peak."""
    tau = np.asarray(scan.delays, dtype=float)
    y = np.asarray(scan.rates, dtype=float)
    n = tau.size
    if n < 7:
        raise ValueError("need at least 7 scan points to fit")
    edge = max(2, n // 10)
    base0 = float(np.median(np.concatenate([y[:edge], y[-edge:]])))
    dev = base0 - y
    i = int(np.argmax(np.abs(dev)))
    if base0 <= 0 or abs(dev[i]) / base0 < min_visibility:
        raise NoDipError("no dip: extremum indistinguishable from baseline")
    weight = np.abs(dev)
    center0 = tau[i]
    width0 = float(np.sqrt(np.sum(weight * (tau - center0) ** 2) / np.sum(weight)))
    width0 = max(width0, np.min(np.diff(tau)))
    # fit in units of the initial width around the initial center
    u = (tau - center0) / width0
    vis0 = float(np.clip(dev[i] / base0, -0.999, 0.999))
    res = least_squares(lambda p: _gaussian_dip(p, u) - y, [base0, vis0, 0.0, 1.0],
                        bounds=([-np.inf, -1.0, -np.inf, 1e-6], [np.inf, 1.0, np.inf, np.inf]),
                        xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=5000)
    base, vis, center_u, width_u = res.x
    center = center0 + center_u * width0
    width = width_u * width0
    width = abs(width)
    if abs(vis) < min_visibility:
        raise NoDipError("no dip: fitted visibility below threshold")
    if center - 3 * width < tau.min() or center + 3 * width > tau.max():
        raise ValueError("scan does not cover +/-3 fitted widths around the extremum")
    resid = float(np.sqrt(np.mean(res.fun ** 2)) / abs(base))
    return DipFit(float(center), float(width), float(vis), resid, float(base))


def dip_scan_delays(pair: PhotonPairState, center: float = 0.0, half_widths: float = 6.0,
                    points: int = 161) -> np.ndarray:
    """Delay grid spanning +/- ``half_widths`` correlation times around ``center``."""
    sigma_t = correlation_time(pair)
    return center + np.linspace(-half_widths, half_widths, points) * sigma_t


def _cross_group_delay(pair: PhotonPairState, transfer: ScalarTransfer | None) -> float:
    if transfer is None:
        return 0.0
    return group_delay(transfer, pair.center_angular_frequency)


def sample_delay_measurement(pair: PhotonPairState, sample: ScalarTransfer,
                             reference: ScalarTransfer | None = None,
                             points: int = 161) -> tuple[float, float]:
    """Dip shift and width ratio from inserting ``sample`` in arm A.

    ``reference`` is what the sample displaces (e.g. the same length of air);
    it sits in arm A for the reference scan. Positive shifts mean the arm-B
    delay had to be lengthened.
    """
    runs = []
    for element in (sample, reference):
        arm_a = ArmConfig((element,)) if element is not None else ArmConfig()
        guess = _cross_group_delay(pair, element)
        scan = hom_coincidence_scan(pair, arm_a, ArmConfig(), dip_scan_delays(pair, guess, points=points))
        runs.append(fit_dip(scan))
    with_sample, without = runs
    return with_sample.center - without.center, with_sample.rms_width / without.rms_width


def classical_pulse_width(material: Material, length: float, input_rms_width: float,
                          center_wavelength: float) -> float:
    """rms duration of a transform-limited Gaussian pulse after a dispersive slab."""
    _, _, beta2 = material_dispersion(material, center_wavelength)
    return float(input_rms_width * np.sqrt(1 + (beta2 * length / (2 * input_rms_width ** 2)) ** 2))


def bandwidth_for_dip_width(target_rms: float, center_wavelength: float,
                            lo: float = 0.5e-9, hi: float = 100e-9, **pair_kwargs) -> float:
    """FWHM bandwidth (m) whose pair state has the requested correlation time."""
    from scipy.optimize import brentq

    from .spectral import make_pair_state

    def err(bw):
        pair = make_pair_state(center_wavelength / 2, center_wavelength, bw, **pair_kwargs)
        return correlation_time(pair) - target_rms
    return brentq(err, lo, hi, xtol=1e-15)
