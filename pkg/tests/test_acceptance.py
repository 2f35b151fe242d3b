"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""

import json
from pathlib import Path

import numpy as np
import pytest

from twophoton.eraser import EraserConfig, coincidence_rate, zero_delay_visibility
from twophoton.franson import (STANDARD_SETTINGS, FransonConfig, chsh_all_combinations, chsh_S,
                               correlation, franson_coincidence)
from twophoton.hom import (bandwidth_for_dip_width, classical_pulse_width, dip_scan_delays,
                           fit_dip, hom_coincidence_scan, sample_delay_measurement)
from twophoton.multilayer import (band_edges, design_wavelength_for_thickness, group_delay,
                                  larmor_components, quarter_wave_stack, reference_delay,
                                  semiclassical_time, stack_response, transmission_minimum,
                                  tunneling_times, unit_cell)
from twophoton.optics import (HALF_INCH, Material, beamsplitter_amplitudes, get_material,
                              jones_element, linear_polarization, slab_transfer)
from twophoton.runner import RunConfig, run_experiment
from twophoton.spectral import correlation_time, make_pair_state

NM = 1e-9
FS = 1e-15
PS = 1e-12
CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def within(value, target, tol):
    return abs(value - target) <= tol


@pytest.fixture(scope="module")
def pair():
    return make_pair_state(351 * NM, 702 * NM, 6 * NM)


@pytest.fixture(scope="module")
def barrier():
    lam0 = design_wavelength_for_thickness(1.1e-6, 2.22, 1.41, 5)
    return quarter_wave_stack(lam0, 2.22, 1.41, 5)


def fock_coincidence_rate(pair, hwp_angle, pol1, pol2, tau):
    """Coincidence rate from explicit two-photon mode transformations.

    Single-photon modes are (port, polarization, frequency sample). The pair is a
    two-photon amplitude matrix Phi over these modes; a linear optical network U
    maps it to U Phi U^T, and the probability of one click in each detector is the
    symmetrized amplitude squared, summed over output modes.
    """
    n = pair.grid.size
    w_a, w_b = pair.arm_frequencies()
    amp = pair.amplitude * np.sqrt(pair.grid.weights)
    size = 2 * 2 * n

    def mode(port, pol, i):
        return (port * 2 + pol) * n + i

    phi = np.zeros((size, size), dtype=complex)
    e_a = jones_element("HWP", hwp_angle) @ linear_polarization(pair.pol_a)
    e_b = linear_polarization(pair.pol_b)
    mirror = pair.grid.mirror_index()
    for i in range(n):
        j = mirror[i]  # arm-B photon sits on the sample with detuning -W
        for pa in range(2):
            for pb in range(2):
                # delay tau on arm B: phase exp(i w_B tau)
                phi[mode(0, pa, i), mode(1, pb, j)] = amp[i] * e_a[pa] * e_b[pb] * np.exp(1j * w_b[i] * tau)
    t, r = beamsplitter_amplitudes()
    bs = np.array([[t, r], [r, t]])  # rows: output D1, D2; columns: input A, B
    analyzers = [np.eye(2) if p is None else jones_element("LP", p) for p in (pol1, pol2)]
    u = np.zeros((size, size), dtype=complex)
    for out in range(2):
        for inp in range(2):
            block = bs[out, inp] * analyzers[out]
            for po in range(2):
                for pi in range(2):
                    rows = np.arange(n) + (out * 2 + po) * n
                    cols = np.arange(n) + (inp * 2 + pi) * n
                    u[rows, cols] = block[po, pi]
    out = u @ phi @ u.T
    sym = out + out.T
    d1 = np.arange(0, 2 * n)
    d2 = np.arange(2 * n, 4 * n)
    p = np.sum(np.abs(sym[np.ix_(d1, d2)]) ** 2)
    # distinguishable photons coincide half the time
    return 2 * float(p)


def test_criterion_1_hom_null(pair, acceptance):
    sigma_t = correlation_time(pair)
    zero = hom_coincidence_scan(pair, delays=[0.0]).rates[0]
    far = hom_coincidence_scan(pair, delays=[-10 * sigma_t, 10 * sigma_t]).rates
    rng = np.random.default_rng(1)
    bws = rng.uniform(1, 20, 20)
    worst = max(hom_coincidence_scan(make_pair_state(351 * NM, 702 * NM, bw * NM), delays=[0.0]).rates[0]
                for bw in bws)
    acceptance("1 HOM null", {
        "rate(0)<1e-9": (zero < 1e-9, f"{zero:.2e}"),
        "rate(+-10 sigma_t)=1+-0.02": (bool(np.all(np.abs(far - 1) <= 0.02)), f"{far}"),
        "rate(0) over 20 bandwidths": (worst < 1e-9, f"max {worst:.2e}"),
    })


def test_criterion_2_dip_width(pair, acceptance):
    fit = fit_dip(hom_coincidence_scan(pair, delays=dip_scan_delays(pair)))
    width = fit.rms_width
    needed = bandwidth_for_dip_width(15.3 * FS, 702 * NM)
    matched = make_pair_state(351 * NM, 702 * NM, needed)
    matched_fit = fit_dip(hom_coincidence_scan(matched, delays=dip_scan_delays(matched)))
    in_range = 5 * NM <= needed <= 9 * NM
    acceptance("2 dip width", {
        "6nm rms width 20fs+-25%": (within(width, 20 * FS, 5 * FS), f"{width / FS:.2f} fs"),
        "bandwidth for 15.3fs in [5,9] nm": (
            in_range and within(matched_fit.rms_width, 15.3 * FS, 0.05 * 15.3 * FS),
            f"needs {needed / NM:.2f} nm FWHM, fitted {matched_fit.rms_width / FS:.2f} fs"),
    })


def test_criterion_3_dispersion_cancellation(pair, acceptance):
    sample = slab_transfer(get_material("SF11"), HALF_INCH)
    air = slab_transfer(Material.vacuum(), HALF_INCH)
    shift, ratio = sample_delay_measurement(pair, sample, air)
    classical = classical_pulse_width(get_material("SF11"), HALF_INCH, 15 * FS, 702 * NM)
    acceptance("3 dispersion cancellation", {
        "shift 35.2ps+-1%": (within(shift, 35.2 * PS, 0.01 * 35.2 * PS), f"{shift / PS:.4f} ps"),
        "width_ratio<1.1": (ratio < 1.1, f"{ratio:.6f}"),
        "classical >=55fs": (classical >= 55 * FS, f"{classical / FS:.2f} fs"),
    })


def test_criterion_4_franson_fringes(acceptance):
    grid = np.linspace(0, 2 * np.pi, 20, endpoint=False)
    worst = 0.0
    sum_only = 0.0
    for v in (1.0, 0.93, 0.5):
        for p1 in grid:
            for p2 in grid:
                rate = franson_coincidence(FransonConfig(phi1=p1, phi2=p2, visibility=v)).p_postselected_coincidence
                worst = max(worst, abs(rate - 0.25 * (1 - v * np.cos(p1 + p2))))
                shifted = franson_coincidence(FransonConfig(phi1=p1 + 0.37, phi2=p2 - 0.37,
                                                            visibility=v)).p_postselected_coincidence
                sum_only = max(sum_only, abs(rate - shifted))
    acceptance("4 Franson fringes", {
        "formula 1e-12": (worst <= 1e-12, f"max dev {worst:.1e}"),
        "phase-sum only": (sum_only <= 1e-12, f"max dev {sum_only:.1e}"),
    })


def test_criterion_5_chsh(acceptance):
    s1 = chsh_S(1.0, *STANDARD_SETTINGS).S
    s93 = chsh_S(0.93, *STANDARD_SETTINGS).S
    sb = chsh_S(1 / np.sqrt(2), *STANDARD_SETTINGS).S
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        settings = rng.uniform(-np.pi, np.pi, 4)

        def corr(x, y):
            return correlation(FransonConfig(phi1=x, phi2=y, entangled=False))
        worst = max(worst, max(abs(s) for s in chsh_all_combinations(corr, *settings)))
    acceptance("5 CHSH", {
        "V=1 S=-2sqrt2": (within(s1, -2 * np.sqrt(2), 1e-9), f"{s1:.12f}"),
        "V=0.93 S=-2.63+-0.01": (within(s93, -2.63, 0.01), f"{s93:.4f}"),
        "V=1/sqrt2 |S|=2": (within(abs(sb), 2.0, 1e-9), f"{sb:.12f}"),
        "separable |S|<=2": (worst <= 2 + 1e-9, f"max {worst:.3f}"),
    })


def test_criterion_6_eraser(acceptance):
    pair = make_pair_state(351 * NM, 702 * NM, 6 * NM, grid_points=65)
    d = np.radians

    def vis(hwp, p1=None, p2=None):
        return zero_delay_visibility(EraserConfig(pair, d(hwp), None if p1 is None else d(p1),
                                                  None if p2 is None else d(p2)))

    table = {
        "a=0 V=1": (vis(0), 1.0),
        "a=45 none V=0": (vis(45), 0.0),
        "a=45 45/45 V=1": (vis(45, 45, 45), 1.0),
        "a=45 +45/-45 V=-1": (vis(45, 45, -45), -1.0),
        "a=45 P2 removed V=0": (vis(45, 45, None), 0.0),
        "a=45 P1 removed V=0": (vis(45, None, 45), 0.0),
    }
    checks = {k: (within(v, target, 0.01), f"{v:+.4f}") for k, (v, target) in table.items()}
    angles = np.linspace(-np.pi / 2, np.pi / 2, 5)
    worst_engine, worst_closed = 0.0, 0.0
    for th1 in angles:
        for th2 in angles:
            engine = coincidence_rate(EraserConfig(pair, np.pi / 4, th1, th2), 0.0)
            fock = fock_coincidence_rate(pair, np.pi / 4, th1, th2, 0.0)
            worst_engine = max(worst_engine, abs(engine - fock))
            worst_closed = max(worst_closed, abs(fock - 0.5 * np.sin(th1 - th2) ** 2))
    checks["engine vs mode oracle 1e-8"] = (worst_engine <= 1e-8, f"{worst_engine:.1e}")
    checks["oracle vs sin^2 1e-8"] = (worst_closed <= 1e-8, f"{worst_closed:.1e}")
    acceptance("6 eraser truth table", checks)


def test_criterion_7_barrier_spectrum(barrier, acceptance):
    lam_min, t_min = transmission_minimum(barrier, 600 * NM, 800 * NM)
    lo, hi = band_edges(unit_cell(barrier), 700 * NM)
    t55 = stack_response(barrier, 702 * NM, np.radians(55), "p").T
    acceptance("7 barrier spectrum", {
        "T min at 692+-15nm": (within(lam_min, 692 * NM, 15 * NM), f"{lam_min / NM:.2f} nm"),
        "T min 1%+-0.5pp": (within(t_min, 0.01, 0.005), f"{100 * t_min:.3f}%"),
        "edges 600/800+-25nm": (within(lo, 600 * NM, 25 * NM) and within(hi, 800 * NM, 25 * NM),
                                f"{lo / NM:.1f}/{hi / NM:.1f} nm"),
        "T(55deg,p,702nm)>0.40": (t55 > 0.40, f"{t55:.4f}"),
    })


def test_criterion_8_tunneling_times(barrier, acceptance):
    mid = tunneling_times(barrier, 702 * NM)
    lam0 = 4 * barrier.layers[0][0] * barrier.layers[0][1]
    center = tunneling_times(barrier, lam0)
    checks = {
        "tau_g=1.7+-0.4fs": (within(mid.group_delay, 1.7 * FS, 0.4 * FS), f"{mid.group_delay / FS:.3f} fs"),
        "tau_g<d/c": (mid.group_delay < mid.d_over_c, f"d/c {mid.d_over_c / FS:.3f} fs"),
        "semiclassical at gap center<0.2fs": (center.semiclassical < 0.2 * FS,
                                              f"{center.semiclassical / FS:.2e} fs"),
    }
    for lam in (lam0, 550 * NM, 850 * NM):
        tau = tunneling_times(barrier, lam)
        rel = abs(tau.larmor - tau.group_delay) / tau.group_delay
        checks[f"Larmor~tau_g at {lam / NM:.0f}nm"] = (
            rel <= 0.15, f"{tau.larmor / FS:.3f} vs {tau.group_delay / FS:.3f} fs ({100 * rel:.1f}%)")
    angles = np.radians(np.arange(0.0, 55.5, 0.5))
    excess = np.array([group_delay(barrier, 702 * NM, a, "p") - reference_delay(barrier, a)
                       for a in angles])
    crossings = int(np.count_nonzero(np.diff(np.sign(excess))))
    checks["one crossing 0-55deg"] = (excess[0] < 0 < excess[-1] and crossings == 1,
                                      f"{crossings} crossing(s)")
    acceptance("8 tunneling times", checks)


def test_criterion_9_structural(barrier, acceptance, tmp_path):
    rng = np.random.default_rng(9)
    worst = 0.0
    for k in range(200):
        lam = rng.uniform(450, 1000) * NM
        theta = rng.uniform(0, np.radians(80))
        resp = stack_response(barrier, lam, theta, "sp"[k % 2])
        worst = max(worst, abs(abs(resp.t) ** 2 + abs(resp.r) ** 2 - 1))
    fd = 0.0
    for lam in (550, 650, 702, 760, 850):
        for theta in (0.0, np.radians(30), np.radians(55)):
            for fn in (group_delay, semiclassical_time):
                a = fn(barrier, lam * NM, theta, "p")
                b = fn(barrier, lam * NM, theta, "p", rel_step=0.5e-5)
                if abs(a) > 1e-3 * FS:
                    fd = max(fd, abs(a - b) / abs(a))
            y1, z1 = larmor_components(barrier, lam * NM, theta, "p")
            y2, z2 = larmor_components(barrier, lam * NM, theta, "p", rel_step=0.5e-5)
            fd = max(fd, abs(np.hypot(y1, z1) - np.hypot(y2, z2)) / np.hypot(y1, z1))
    identical = True
    for name in ("hom_noisy.json", "barrier_angles.json", "eraser_peak.json"):
        cfg = RunConfig.from_dict(json.loads((CONFIGS / name).read_text()))
        serial = run_experiment(cfg, tmp_path / "serial", workers=1)
        parallel = run_experiment(cfg, tmp_path / "parallel", workers=4)
        for a, b in zip(serial.files, parallel.files):
            identical &= a.read_bytes() == b.read_bytes()
    acceptance("9 structural invariants", {
        "unitarity 1e-10 (200 pts)": (worst <= 1e-10, f"{worst:.1e}"),
        "FD halving <1e-4": (fd < 1e-4, f"{fd:.1e}"),
        "parallel==serial bytes": (identical, "hom/barrier/eraser"),
    })
