"""Transfer-matrix optics of 1-D dielectric stacks and barrier traversal times.

Convention: fields vary as exp(i(k z - w t)), so the transmission phase grows
with frequency and the group delay d(arg t)/dw is positive. The transverse
wavevector k_x = k0 n_in sin(theta) is fixed by the incidence angle at the
operating frequency and held constant while differentiating, which makes an
index-matched layer of thickness d delay by exactly d / (c cos theta).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c
from scipy.optimize import brentq, minimize_scalar


class PhaseUnwrapError(RuntimeError):
    """Transmission phase jumped by a branch between adjacent samples."""


@dataclass(frozen=True)
class LayerStack:
    layers: tuple[tuple[complex, float], ...]
    ambient_index_in: float = 1.0
    ambient_index_out: float = 1.0

    def __post_init__(self):
        layers = tuple((complex(n) if np.iscomplexobj(n) else float(n), float(d))
                       for n, d in self.layers)
        if not layers:
            raise ValueError("stack needs at least one layer")
        if any(d <= 0 for _, d in layers):
            raise ValueError("layer thicknesses must be positive")
        object.__setattr__(self, "layers", layers)

    @property
    def total_thickness(self) -> float:
        return sum(d for _, d in self.layers)

    @property
    def lossless(self) -> bool:
        return all(np.imag(n) == 0 for n, _ in self.layers)

    def reversed(self) -> "LayerStack":
        return LayerStack(self.layers[::-1], self.ambient_index_out, self.ambient_index_in)


@dataclass(frozen=True)
class BlochCell:
    n_high: float
    d_high: float
    n_low: float
    d_low: float

    @property
    def period(self) -> float:
        return self.d_high + self.d_low

    def as_stack(self) -> LayerStack:
        return LayerStack(((self.n_high, self.d_high), (self.n_low, self.d_low)))


@dataclass(frozen=True)
class StackResponse:
    t: complex
    r: complex
    T: float
    R: float
    wavelength: float
    angle: float
    polarization: str


@dataclass(frozen=True)
class TunnelingTimes:
    group_delay: float
    semiclassical: float
    larmor: float
    larmor_y: float
    larmor_z: float
    d_over_c: float
    extras: dict = field(default_factory=dict, compare=False)


def design_wavelength_for_thickness(total_thickness: float, n_high: float, n_low: float,
                                    periods: int) -> float:
    """Design wavelength of an (HL)^p H quarter-wave stack with the given total thickness."""
    return total_thickness / ((periods + 1) / (4 * n_high) + periods / (4 * n_low))


def quarter_wave_stack(design_wavelength: float, n_high: float, n_low: float,
                       periods: int, ambient_in: float = 1.0,
                       ambient_out: float = 1.0) -> LayerStack:
    """(HL)^periods H with each layer lambda0/4 thick optically."""
    if periods < 1:
        raise ValueError("periods must be >= 1")
    if n_high <= 1 or n_low <= 1:
        raise ValueError("layer indices must exceed 1")
    h = (n_high, design_wavelength / (4 * n_high))
    lo = (n_low, design_wavelength / (4 * n_low))
    return LayerStack((h, lo) * periods + (h,), ambient_in, ambient_out)


def unit_cell(stack: LayerStack) -> BlochCell:
    """First H/L pair of a periodic stack."""
    (nh, dh), (nl, dl) = stack.layers[:2]
    return BlochCell(nh, dh, nl, dl)


# --- core transfer matrix -------------------------------------------------------

def _kz(k0sq, n, kx):
    # forward branch: Im >= 0, and Re >= 0 for propagating waves
    kz = np.sqrt(complex(k0sq * n * n - kx * kx))
    if kz.imag < 0 or (kz.imag == 0 and kz.real < 0):
        kz = -kz
    return kz


def _admittance(kz, n, pol):
    if pol == "s":
        return kz
    if pol == "p":
        return kz / (n * n)
    raise ValueError(f"polarization must be 's' or 'p', got {pol!r}")


def _characteristic(stack: LayerStack, omega: float, kx: float, pol: str,
                    local_shift: float = 0.0) -> np.ndarray:
    """Product of layer matrices. ``local_shift`` lowers k0^2 inside the layers only."""
    k0sq = (omega / c) ** 2 - local_shift
    m = np.eye(2, dtype=complex)
    for n, d in stack.layers:
        kz = _kz(k0sq, n, kx)
        q = _admittance(kz, n, pol)
        delta = kz * d
        cd, sd = np.cos(delta), np.sin(delta)
        m = m @ np.array([[cd, -1j * sd / q], [-1j * q * sd, cd]])
    return m


def _amplitudes(stack: LayerStack, omega: float, kx: float, pol: str,
                local_shift: float = 0.0):
    k0sq = (omega / c) ** 2
    n_in, n_out = stack.ambient_index_in, stack.ambient_index_out
    kz_in, kz_out = _kz(k0sq, n_in, kx), _kz(k0sq, n_out, kx)
    if kz_out.real == 0:
        raise ValueError("total internal reflection: the exit medium is evanescent")
    q_in, q_out = _admittance(kz_in, n_in, pol), _admittance(kz_out, n_out, pol)
    m = _characteristic(stack, omega, kx, pol, local_shift)
    b = q_in * m[0, 0] + q_in * q_out * m[0, 1]
    a = m[1, 0] + q_out * m[1, 1]
    t = 2 * q_in / (b + a)
    r = (b - a) / (b + a)
    T = float((q_out.real / q_in.real) * abs(t) ** 2)
    return t, r, T, float(abs(r) ** 2)


def _check_angle(angle):
    if not 0 <= angle < np.pi / 2:
        raise ValueError("angle must lie in [0, pi/2)")


def _kx(stack, omega, angle):
    return omega / c * stack.ambient_index_in * np.sin(angle)


def stack_response(stack: LayerStack, wavelength: float, angle: float = 0.0,
                   pol: str = "p") -> StackResponse:
    if wavelength <= 0:
        raise ValueError("wavelength must be positive")
    _check_angle(angle)
    omega = 2 * np.pi * c / wavelength
    t, r, T, R = _amplitudes(stack, omega, _kx(stack, omega, angle), pol)
    return StackResponse(t, r, T, R, wavelength, angle, pol)


def transmission_spectrum(stack: LayerStack, wavelengths, angle: float = 0.0, pol: str = "p"):
    return np.array([stack_response(stack, lam, angle, pol).T for lam in np.atleast_1d(wavelengths)])


# --- derivatives --------------------------------------------------------------

REL_STEP = 1e-5


def _phase_derivative(fn, x, h, what):
    """Centered derivative of arg(fn) and ln|fn| with one Richardson halving.

    The step halves automatically (up to 20 times) while a phase step exceeds
    pi/2 or the full and half steps disagree, which exposes a wrapped branch.
    """
    for _ in range(20):
        steps = []
        for step in (h, h / 2):
            fp, fm = fn(x + step), fn(x - step)
            dphi = np.angle(fp * np.conj(fm))
            if not np.isfinite(dphi):
                raise PhaseUnwrapError(f"{what}: non-finite transmission amplitude")
            steps.append((step, dphi, np.log(abs(fp)) - np.log(abs(fm))))
        (s1, phi1, ln1), (s2, phi2, ln2) = steps
        # smooth phases give a mismatch of order h^3; a wrapped branch gives O(1)
        if abs(phi1) <= np.pi / 2 and abs(phi1 - 2 * phi2) <= 1e-2 * max(abs(phi1), 1e-3):
            p1, p2 = phi1 / (2 * s1), phi2 / (2 * s2)
            l1, l2 = ln1 / (2 * s1), ln2 / (2 * s2)
            return (4 * p2 - p1) / 3, (4 * l2 - l1) / 3
        h /= 2
    raise PhaseUnwrapError(f"{what}: phase step stays ambiguous after step refinement")


def group_delay(stack: LayerStack, wavelength: float, angle: float = 0.0, pol: str = "p",
                rel_step: float = REL_STEP) -> float:
    """d(arg t)/dw at fixed transverse wavevector."""
    _check_angle(angle)
    omega = 2 * np.pi * c / wavelength
    kx = _kx(stack, omega, angle)
    dphi, _ = _phase_derivative(lambda w: _amplitudes(stack, w, kx, pol)[0],
                                omega, omega * rel_step, "group delay")
    return float(dphi)


def larmor_components(stack: LayerStack, wavelength: float, angle: float = 0.0,
                      pol: str = "p", rel_step: float = REL_STEP) -> tuple[float, float]:
    """Sensitivity of t to a local frequency shift confined to the barrier.

    The perturbation lowers k0^2 by u inside every layer, i.e. shifts the
    optical potential by u * n(z)^2; the components are
    tau_y = (2w/c^2) d(arg t)/d(k0^2) and tau_z = (2w/c^2) d ln|t| / d(k0^2).
    For a uniform non-dispersive slab tau_y equals the group delay exactly.
    """
    omega = 2 * np.pi * c / wavelength
    kx = _kx(stack, omega, angle)
    k0sq = (omega / c) ** 2
    jac = 2 * omega / c ** 2
    # derivative w.r.t. +k0^2 inside the layers == -d/du
    dphi, dln = _phase_derivative(lambda s: _amplitudes(stack, omega, kx, pol, -s)[0],
                                  0.0, 2 * k0sq * rel_step, "Larmor clock")
    return float(jac * dphi), float(jac * dln)


# --- Bloch waves --------------------------------------------------------------

def _half_trace(cell: BlochCell, omega, kx, pol):
    m = _characteristic(cell.as_stack(), omega, kx, pol)
    return 0.5 * (m[0, 0] + m[1, 1])


def _bloch_phase(cell: BlochCell, omega, kx, pol) -> complex:
    """K * period, unfolded onto the branch nearest the cell's optical phase."""
    half = _half_trace(cell, omega, kx, pol).real
    k0sq = (omega / c) ** 2
    optical = (_kz(k0sq, cell.n_high, kx) * cell.d_high + _kz(k0sq, cell.n_low, kx) * cell.d_low).real
    if abs(half) <= 1:
        theta = np.arccos(half)
        m = np.round(optical / (2 * np.pi))
        cands = [2 * np.pi * k + s * theta for k in (m - 1, m, m + 1) for s in (1, -1)]
        return complex(min(cands, key=lambda x: abs(x - optical)))
    kappa = np.arccosh(abs(half))
    # gap: real part pinned to an even (half > 1) or odd (half < -1) multiple of pi
    if half > 0:
        order = 2 * np.round(optical / (2 * np.pi))
    else:
        order = 2 * np.round((optical - np.pi) / (2 * np.pi)) + 1
    return complex(order * np.pi, kappa)


def bloch_wavevector(cell: BlochCell, wavelength: float, angle: float = 0.0, pol: str = "p",
                     ambient_index: float = 1.0) -> complex:
    """Bloch wavevector K (rad/m) of the infinite periodic medium, cos(K L) = Tr(M)/2."""
    _check_angle(angle)
    omega = 2 * np.pi * c / wavelength
    kx = omega / c * ambient_index * np.sin(angle)
    return _bloch_phase(cell, omega, kx, pol) / cell.period


def in_band_gap(cell: BlochCell, wavelength: float, angle: float = 0.0, pol: str = "p",
                ambient_index: float = 1.0) -> bool:
    omega = 2 * np.pi * c / wavelength
    kx = omega / c * ambient_index * np.sin(angle)
    return abs(_half_trace(cell, omega, kx, pol).real) > 1


def semiclassical_time(stack: LayerStack, wavelength: float, angle: float = 0.0,
                       pol: str = "p", rel_step: float = REL_STEP) -> float:
    """d * |dK/dw| in the bands, d * |d kappa/dw| in the gap (the factor i dropped)."""
    cell = unit_cell(stack)
    omega = 2 * np.pi * c / wavelength
    kx = _kx(stack, omega, angle)
    gap = in_band_gap(cell, wavelength, angle, pol, stack.ambient_index_in)
    part = (lambda z: z.imag) if gap else (lambda z: z.real)

    def central(h):
        kp = part(_bloch_phase(cell, omega + h, kx, pol))
        km = part(_bloch_phase(cell, omega - h, kx, pol))
        return (kp - km) / (2 * h) / cell.period

    h = omega * rel_step
    deriv = (4 * central(h / 2) - central(h)) / 3
    return float(stack.total_thickness * abs(deriv))


def reference_delay(stack: LayerStack, angle: float = 0.0) -> float:
    """Traversal time of the same thickness of ambient medium along the tilted path."""
    n = stack.ambient_index_in
    return stack.total_thickness * n / (c * np.cos(angle))


def tunneling_times(stack: LayerStack, wavelength: float, angle: float = 0.0,
                    pol: str = "p") -> TunnelingTimes:
    tau_g = group_delay(stack, wavelength, angle, pol)
    tau_y, tau_z = larmor_components(stack, wavelength, angle, pol)
    tau_sc = semiclassical_time(stack, wavelength, angle, pol)
    return TunnelingTimes(
        group_delay=tau_g,
        semiclassical=tau_sc,
        larmor=float(np.hypot(tau_y, tau_z)),
        larmor_y=tau_y,
        larmor_z=tau_z,
        d_over_c=stack.total_thickness / c,
        extras={"reference_delay": reference_delay(stack, angle)},
    )


# --- band-structure helpers ------------------------------------------------------

def gap_center(cell: BlochCell, guess_wavelength: float, angle: float = 0.0, pol: str = "p",
               ambient_index: float = 1.0) -> float:
    """Wavelength of maximal evanescent decay near ``guess_wavelength``."""
    def neg_kappa(lam):
        return -bloch_wavevector(cell, lam, angle, pol, ambient_index).imag
    res = minimize_scalar(neg_kappa, bounds=(0.85 * guess_wavelength, 1.15 * guess_wavelength),
                          method="bounded", options={"xatol": 1e-15})
    return float(res.x)


def band_edges(cell: BlochCell, guess_wavelength: float, angle: float = 0.0, pol: str = "p",
               ambient_index: float = 1.0) -> tuple[float, float]:
    """Short- and long-wavelength edges of the stop band containing the gap center."""
    center = gap_center(cell, guess_wavelength, angle, pol, ambient_index)

    def excess(lam):
        omega = 2 * np.pi * c / lam
        kx = omega / c * ambient_index * np.sin(angle)
        return abs(_half_trace(cell, omega, kx, pol).real) - 1

    if excess(center) <= 0:
        raise ValueError("no stop band near the guess wavelength")
    lo = center
    while excess(lo) > 0:
        lo *= 0.98
    hi = center
    while excess(hi) > 0:
        hi *= 1.02
    return (brentq(excess, lo, center, xtol=1e-15), brentq(excess, center, hi, xtol=1e-15))


def transmission_minimum(stack: LayerStack, lo: float, hi: float, angle: float = 0.0,
                         pol: str = "p", samples: int = 801) -> tuple[float, float]:
    """(wavelength, T) of the transmission minimum in [lo, hi]: dense scan, then polish."""
    lams = np.linspace(lo, hi, samples)
    T = transmission_spectrum(stack, lams, angle, pol)
    i = int(np.argmin(T))
    a, b = lams[max(i - 1, 0)], lams[min(i + 1, samples - 1)]
    res = minimize_scalar(lambda lam: stack_response(stack, lam, angle, pol).T,
                          bounds=(a, b), method="bounded", options={"xatol": 1e-14})
    return float(res.x), float(res.fun)
