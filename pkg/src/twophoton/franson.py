"""Franson two-interferometer experiment: event classes, post-selection, CHSH.

Each photon of a pair enters its own unbalanced Mach-Zehnder and takes the
short (S) or long (L) arm. The four path combinations are enumerated with
their detector arrival-time offsets; a coincidence window keeps only the
offset-free SS and LL events, whose amplitudes add coherently when the pair
is energy-entangled (emission time unknown) and incoherently otherwise.

Port labels: each interferometer has a detector port "d" and an unused port
"u". With the beam-splitter convention t = 1/sqrt(2), r = i/sqrt(2), the
short/long amplitudes are

    interferometer 1, port d: (t t, r r e^{i phi1})   port u: (t r, r t e^{i phi1})
    interferometer 2, port d: (t r, r t e^{i phi2})   port u: (t t, r r e^{i phi2})

so the detector-port coincidence amplitude is proportional to
1 - e^{i(phi1 + phi2)}. "like" = (d, d) or (u, u); "unlike" = (d, u) or (u, d).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.constants import c

from .optics import beamsplitter_amplitudes

PATHS = ("S", "L")
PORTS = ("d", "u")


@dataclass(frozen=True)
class FransonConfig:
    path_imbalance: float = 0.63
    phi1: float = 0.0
    phi2: float = 0.0
    visibility: float = 1.0
    coincidence_window: float = 1e-9
    coherence_length: float = 50e-6
    entangled: bool = True

    def __post_init__(self):
        if not 0 <= self.visibility <= 1:
            raise ValueError("visibility must lie in [0, 1]")
        if self.path_imbalance / self.coherence_length <= 100:
            raise ValueError("path imbalance must exceed 100 coherence lengths "
                             "(no first-order interference)")
        if not 0 < self.coincidence_window < self.path_imbalance / c:
            raise ValueError("coincidence window must be shorter than the imbalance delay")


@dataclass(frozen=True)
class EventClassRates:
    p_ss: float
    p_ll: float
    p_sl: float
    p_ls: float
    p_postselected_coincidence: float
    port_pattern: str


@dataclass(frozen=True)
class ChshResult:
    settings: tuple
    correlations: tuple
    S: float
    violated: bool
    subtracted_term: int


def path_amplitude(interferometer: int, path: str, port: str, phi: float) -> complex:
    """Amplitude for one photon to traverse ``path`` and exit at ``port``."""
    t, r = beamsplitter_amplitudes()
    tt, rr, tr = t * t, r * r, t * r
    if interferometer == 1:
        table = {("S", "d"): tt, ("L", "d"): rr, ("S", "u"): tr, ("L", "u"): tr}
    else:
        table = {("S", "d"): tr, ("L", "d"): tr, ("S", "u"): tt, ("L", "u"): rr}
    amp = table[(path, port)]
    return amp * np.exp(1j * phi) if path == "L" else amp


def _arrival_offset(path1: str, path2: str, imbalance: float) -> float:
    # photon-2 click minus photon-1 click
    return ((path2 == "L") - (path1 == "L")) * imbalance / c


def port_probabilities(config: FransonConfig) -> dict:
    """Joint probabilities keyed by (class, port1, port2).

    class is "SS", "LL", "SL", "LS" for time-resolved events, or "SS+LL" for
    the post-selected, coherently combined events.
    """
    out = {}
    v = config.visibility
    for port1, port2 in itertools.product(PORTS, PORTS):
        amps = {}
        for p1, p2 in itertools.product(PATHS, PATHS):
            amps[p1 + p2] = (path_amplitude(1, p1, port1, config.phi1)
                             * path_amplitude(2, p2, port2, config.phi2))
        for cls in ("SL", "LS"):
            out[(cls, port1, port2)] = abs(amps[cls]) ** 2
        incoherent = abs(amps["SS"]) ** 2 + abs(amps["LL"]) ** 2
        out[("SS", port1, port2)] = abs(amps["SS"]) ** 2
        out[("LL", port1, port2)] = abs(amps["LL"]) ** 2
        if config.entangled:
            coherent = abs(amps["SS"] + amps["LL"]) ** 2
            out[("SS+LL", port1, port2)] = v * coherent + (1 - v) * incoherent
        else:
            out[("SS+LL", port1, port2)] = incoherent
    return out


def franson_coincidence(config: FransonConfig, port_pattern: str = "like") -> EventClassRates:
    if port_pattern not in ("like", "unlike"):
        raise ValueError("port_pattern must be 'like' or 'unlike'")
    probs = port_probabilities(config)

    def class_total(cls):
        return float(sum(probs[(cls, a, b)] for a, b in itertools.product(PORTS, PORTS)))

    window = config.coincidence_window
    kept = [cls for cls in ("SS", "LL", "SL", "LS")
            if abs(_arrival_offset(cls[0], cls[1], config.path_imbalance)) < window]
    if set(kept) != {"SS", "LL"}:
        raise ValueError("coincidence window does not isolate SS and LL events")
    pairs = [("d", "d"), ("u", "u")] if port_pattern == "like" else [("d", "u"), ("u", "d")]
    post = sum(probs[("SS+LL", a, b)] for a, b in pairs)
    return EventClassRates(class_total("SS"), class_total("LL"), class_total("SL"),
                           class_total("LS"), float(post), port_pattern)


def correlation(config: FransonConfig) -> float:
    """E = (like - unlike) / (like + unlike), assuming unused ports mirror the used ones."""
    like = franson_coincidence(config, "like").p_postselected_coincidence
    unlike = franson_coincidence(config, "unlike").p_postselected_coincidence
    return (like - unlike) / (like + unlike)


def chsh_from_correlation(corr, a: float, a_prime: float, b: float, b_prime: float,
                          sign_reference=None) -> ChshResult:
    """Combine four correlations, subtracting the term whose sign disagrees.

    ``corr(phi1, phi2)`` gives E. ``sign_reference(phi1, phi2)`` picks the
    term to subtract (default: cos(phi1 + phi2)); exactly one of the four
    settings must have the minority sign.
    """
    a, a_prime, b, b_prime = map(float, (a, a_prime, b, b_prime))
    settings = ((a, b), (a, b_prime), (a_prime, b_prime), (a_prime, b))
    sign_reference = sign_reference or (lambda x, y: np.cos(x + y))
    signs = np.sign(np.round([sign_reference(x, y) for x, y in settings], 12))
    if np.any(signs == 0):
        raise ValueError("degenerate settings: a phase sum sits on a fringe zero")
    minority = [i for i, s in enumerate(signs) if np.sum(signs == s) == 1]
    if len(minority) != 1:
        raise ValueError("degenerate settings: no sign-consistent CHSH combination")
    k = minority[0]
    values = tuple(float(corr(x, y)) for x, y in settings)
    s = sum(v if i != k else -v for i, v in enumerate(values))
    return ChshResult(settings, values, float(s), bool(abs(s) > 2), k)


def chsh_all_combinations(corr, a: float, a_prime: float, b: float, b_prime: float) -> list[float]:
    """The four CHSH sums obtained by subtracting each term in turn."""
    settings = ((a, b), (a, b_prime), (a_prime, b_prime), (a_prime, b))
    values = [float(corr(x, y)) for x, y in settings]
    total = sum(values)
    return [total - 2 * v for v in values]


def chsh_S(visibility: float, a: float, a_prime: float, b: float, b_prime: float,
           entangled: bool = True, **config_kwargs) -> ChshResult:
    """CHSH parameter from simulated post-selected Franson coincidences."""
    if not 0 <= visibility <= 1:
        raise ValueError("visibility must lie in [0, 1]")

    def corr(phi1, phi2):
        return correlation(FransonConfig(phi1=phi1, phi2=phi2, visibility=visibility,
                                         entangled=entangled, **config_kwargs))
    return chsh_from_correlation(corr, a, a_prime, b, b_prime)


# (a, a_prime, b, b_prime) = (45, 135, 0, -90) degrees
STANDARD_SETTINGS = tuple(float(x) for x in np.radians([45.0, 135.0, 0.0, -90.0]))
