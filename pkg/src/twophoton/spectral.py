"""Energy-entangled photon pairs on a discrete detuning grid.

A pair is stored as a single-variable amplitude f(W): the arm-A photon sits at
w0 + W and the arm-B photon at w0 - W, so the pump energy is shared exactly
for every sample. A separable control state keeps the same marginal but is
flagged so that consumers treat the two detunings as independent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import c

FWHM_TO_RMS = 1.0 / np.sqrt(8.0 * np.log(2.0))


@dataclass(frozen=True)
class FrequencyGrid:
    center_angular_frequency: float
    detunings: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.detunings, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if d.ndim != 1 or d.size % 2 == 0:
            raise ValueError("detuning grid must be 1-D with an odd number of points")
        if np.any(np.diff(d) <= 0):
            raise ValueError("detunings must be strictly increasing")
        if not np.allclose(d, -d[::-1], rtol=0, atol=1e-9 * np.abs(d).max()):
            raise ValueError("detuning grid must be symmetric about zero")
        if w.shape != d.shape or np.any(w <= 0):
            raise ValueError("weights must be positive, one per detuning")
        d.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "detunings", d)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, center_angular_frequency: float, half_span: float,
                points: int) -> "FrequencyGrid":
        """Uniform grid on [-half_span, half_span] with trapezoid weights."""
        if points < 3 or points % 2 == 0:
            raise ValueError("points must be odd and >= 3")
        k = np.arange(points) - points // 2
        step = half_span / (points // 2)
        detunings = k * step  # exact antisymmetry, exact zero at the middle
        weights = np.full(points, step)
        weights[[0, -1]] = step / 2
        return cls(center_angular_frequency, detunings, weights)

    @property
    def step(self) -> float:
        return float(self.detunings[1] - self.detunings[0])

    @property
    def size(self) -> int:
        return self.detunings.size

    def mirror_index(self) -> np.ndarray:
        """Index map i -> j with detunings[j] == -detunings[i]."""
        return np.arange(self.size)[::-1]

    def integrate(self, values) -> complex:
        return np.sum(np.asarray(values) * self.weights)


@dataclass(frozen=True)
class Spectrum:
    grid: FrequencyGrid
    density: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.density, dtype=float)
        if rho.shape != self.grid.detunings.shape or np.any(rho < 0):
            raise ValueError("density must be non-negative, one value per grid sample")
        total = float(np.sum(rho * self.grid.weights))
        if total <= 0:
            raise ValueError("density has zero weight")
        rho = rho / total
        rho.setflags(write=False)
        object.__setattr__(self, "density", rho)

    def mean_detuning(self) -> float:
        return float(self.grid.integrate(self.grid.detunings * self.density))

    def rms_width(self) -> float:
        """rms spread of the angular frequency (rad/s)."""
        mu = self.mean_detuning()
        var = self.grid.integrate((self.grid.detunings - mu) ** 2 * self.density)
        return float(np.sqrt(var))

    def wavelengths(self) -> np.ndarray:
        return 2 * np.pi * c / (self.grid.center_angular_frequency + self.grid.detunings)


@dataclass(frozen=True)
class PhotonPairState:
    grid: FrequencyGrid
    amplitude: np.ndarray
    pump_angular_frequency: float
    pol_a: float = 0.0
    pol_b: float = 0.0
    entangled: bool = True

    def __post_init__(self):
        f = np.asarray(self.amplitude, dtype=complex)
        if f.shape != self.grid.detunings.shape:
            raise ValueError("amplitude must have one value per grid sample")
        norm = np.sum(np.abs(f) ** 2 * self.grid.weights)
        if norm <= 0:
            raise ValueError("amplitude is identically zero")
        f = f / np.sqrt(norm)
        f.setflags(write=False)
        object.__setattr__(self, "amplitude", f)

    @property
    def center_angular_frequency(self) -> float:
        return self.grid.center_angular_frequency

    def arm_frequencies(self) -> tuple[np.ndarray, np.ndarray]:
        """Angular frequencies of the arm-A and arm-B photons per sample."""
        w0 = self.grid.center_angular_frequency
        return w0 + self.grid.detunings, w0 - self.grid.detunings

    def marginal(self) -> Spectrum:
        """Arm-A spectrum indexed by its own detuning."""
        return Spectrum(self.grid, np.abs(self.amplitude) ** 2)

    def with_polarizations(self, pol_a: float, pol_b: float) -> "PhotonPairState":
        return PhotonPairState(self.grid, self.amplitude, self.pump_angular_frequency,
                               pol_a, pol_b, self.entangled)


def wavelength_fwhm_to_rms_angular(center_wavelength: float, fwhm: float) -> float:
    """Convert a FWHM in wavelength to an rms width in angular frequency."""
    return 2 * np.pi * c * fwhm * FWHM_TO_RMS / center_wavelength ** 2


def make_pair_state(pump_wavelength: float, daughter_center_wavelength: float,
                    daughter_bandwidth_fwhm: float, grid_points: int = 257,
                    span_factor: float = 6.0, entangled: bool = True) -> PhotonPairState:
    """Degenerate down-conversion pair with a Gaussian marginal spectrum.

    ``span_factor`` sets the grid half-span in units of the rms detuning of
    the marginal, so 6 covers +/-6 sigma.
    """
    if daughter_bandwidth_fwhm <= 0:
        raise ValueError("bandwidth must be positive")
    if grid_points < 64 or grid_points % 2 == 0:
        raise ValueError("grid_points must be odd and at least 64")
    if span_factor < 3:
        raise ValueError("span_factor must be at least 3")
    if abs(2 * pump_wavelength / daughter_center_wavelength - 1) > 0.01:
        raise ValueError(
            f"pump {pump_wavelength:.4g} m is not half the daughter wavelength "
            f"{daughter_center_wavelength:.4g} m within 1%")
    w0 = 2 * np.pi * c / daughter_center_wavelength
    sigma = wavelength_fwhm_to_rms_angular(daughter_center_wavelength, daughter_bandwidth_fwhm)
    grid = FrequencyGrid.uniform(w0, span_factor * sigma, grid_points)
    # |f|^2 has rms sigma
    f = np.exp(-grid.detunings ** 2 / (4 * sigma ** 2)).astype(complex)
    return PhotonPairState(grid, f, 2 * w0, 0.0, 0.0, entangled)


def gaussian_filter(center_wavelength: float, fwhm: float):
    """Intensity transmission of a Gaussian bandpass, as a function of angular frequency.

    ``fwhm=inf`` gives a filter that passes everything.
    """
    wc = 2 * np.pi * c / center_wavelength
    if np.isinf(fwhm):
        return lambda w: np.ones_like(np.asarray(w, dtype=float))
    if fwhm <= 0:
        raise ValueError("filter fwhm must be positive")
    s = wavelength_fwhm_to_rms_angular(center_wavelength, fwhm)
    return lambda w: np.exp(-(np.asarray(w) - wc) ** 2 / (2 * s ** 2))


def conditional_collapse(state: PhotonPairState, filter_center: float, filter_fwhm: float,
                         filtered_arm: str = "A") -> tuple[Spectrum, float]:
    """Spectrum of the unfiltered photon given that its twin passed a filter.

    Returns the conjugate-arm spectrum (indexed by that arm's own detuning)
    and its coherence length c / sigma_w.
    """
    if filtered_arm not in ("A", "B"):
        raise ValueError("filtered_arm must be 'A' or 'B'")
    grid = state.grid
    rho = np.abs(state.amplitude) ** 2
    w_a, w_b = state.arm_frequencies()
    transmission = gaussian_filter(filter_center, filter_fwhm)
    passed = transmission(w_a if filtered_arm == "A" else w_b)

    overlap = grid.integrate(rho * passed)
    if overlap < 1e-6:
        raise ValueError("filter passband does not overlap the pair spectrum")
    if np.isfinite(filter_fwhm):
        s_f = wavelength_fwhm_to_rms_angular(filter_center, filter_fwhm)
        if s_f < 4 * grid.step:
            raise ValueError(
                f"filter rms width {s_f:.3g} rad/s is under-resolved by grid step "
                f"{grid.step:.3g} rad/s; use more grid points")

    if not state.entangled:
        conj = Spectrum(grid, rho)
    elif filtered_arm == "A":
        # arm-B detuning is -W: reverse the sample order
        conj = Spectrum(grid, (rho * passed)[grid.mirror_index()])
    else:
        conj = Spectrum(grid, rho * passed)
    return conj, coherence_length(conj)


def coherence_length(spectrum: Spectrum) -> float:
    """c / (2 pi sigma_nu), i.e. c over the rms angular-frequency width."""
    return c / spectrum.rms_width()


def correlation_time(state: PhotonPairState, samples: int = 4001) -> float:
    """rms width of the two-photon correlation function.

    The correlation function is the Fourier transform of |f(W)|^2 with respect
    to the difference frequency 2W; for identical lossless arms it is the
    profile of the HOM dip.
    """
    grid = state.grid
    rho = np.abs(state.amplitude) ** 2
    sigma = state.marginal().rms_width()
    t = np.linspace(-10.0, 10.0, samples) / (2 * sigma)
    g = np.real(np.exp(2j * np.outer(t, grid.detunings)) @ (rho * grid.weights))
    g = np.clip(g, 0.0, None)
    norm = np.trapezoid(g, t)
    mean = np.trapezoid(t * g, t) / norm
    return float(np.sqrt(np.trapezoid((t - mean) ** 2 * g, t) / norm))
