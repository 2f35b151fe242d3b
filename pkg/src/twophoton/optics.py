"""Dispersive materials, scalar spectral transfers and Jones matrices."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from importlib import resources
from typing import Callable

import numpy as np
from scipy.constants import c

MATERIALS_ENV = "TWOPHOTON_MATERIALS"

# relative finite-difference steps in wavelength, each followed by one Richardson halving
FIRST_DERIVATIVE_STEP = 1e-4
SECOND_DERIVATIVE_STEP = 1e-3

HALF_INCH = 12.7e-3

ScalarTransfer = Callable[[np.ndarray], np.ndarray]


class OutOfRangeError(ValueError):
    """Wavelength outside a material's tabulated validity range."""


@dataclass(frozen=True)
class Material:
    name: str
    B: tuple[float, float, float]
    C: tuple[float, float, float]  # m^2
    valid_range: tuple[float, float]  # m

    @classmethod
    def vacuum(cls) -> "Material":
        return cls("vacuum", (0.0, 0.0, 0.0), (0.0, 0.0, 0.0), (1e-9, 1.0))

    @classmethod
    def from_record(cls, record: dict) -> "Material":
        missing = {"name", "B", "C_m2", "range_nm"} - record.keys()
        if missing:
            raise ValueError(f"material record missing {sorted(missing)}")
        if len(record["B"]) != 3 or len(record["C_m2"]) != 3 or len(record["range_nm"]) != 2:
            raise ValueError(f"material {record['name']!r}: B and C_m2 need 3 entries, range_nm 2")
        lo, hi = record["range_nm"]
        return cls(record["name"], tuple(map(float, record["B"])),
                   tuple(map(float, record["C_m2"])), (lo * 1e-9, hi * 1e-9))

    def check_range(self, wavelength) -> None:
        lam = np.asarray(wavelength, dtype=float)
        lo, hi = self.valid_range
        if np.any(lam < lo) or np.any(lam > hi):
            raise OutOfRangeError(
                f"{self.name}: wavelength outside [{lo * 1e9:g}, {hi * 1e9:g}] nm")

    def index(self, wavelength):
        """Refractive index from the three-term Sellmeier formula."""
        self.check_range(wavelength)
        return self._sellmeier(np.asarray(wavelength, dtype=float))

    def _sellmeier(self, lam):
        l2 = lam ** 2
        n2 = 1.0 + sum(b * l2 / (l2 - cc) for b, cc in zip(self.B, self.C))
        return np.sqrt(n2)

    def index_at_angular_frequency(self, omega):
        return self.index(2 * np.pi * c / np.asarray(omega, dtype=float))


def _materials_data(path=None):
    path = path or os.environ.get(MATERIALS_ENV)
    if path:
        with open(path) as fh:
            return json.load(fh)
    return json.loads(resources.files("twophoton").joinpath("data/materials.json").read_text())


def materials_version(path=None) -> str | None:
    data = _materials_data(path)
    return data.get("version") if isinstance(data, dict) else None


def load_materials(path: str | os.PathLike | None = None) -> dict[str, Material]:
    """Read the materials file; ``$TWOPHOTON_MATERIALS`` overrides the bundled one."""
    data = _materials_data(path)
    records = data["materials"] if isinstance(data, dict) else data
    out = {m.name: m for m in map(Material.from_record, records)}
    out.setdefault("vacuum", Material.vacuum())
    return out


def get_material(name: str, path=None) -> Material:
    table = load_materials(path)
    try:
        return table[name]
    except KeyError:
        raise KeyError(f"unknown material {name!r}; known: {sorted(table)}") from None


def _richardson(estimate: Callable[[float], float], h: float) -> float:
    # centered differences have O(h^2) error
    return (4 * estimate(h / 2) - estimate(h)) / 3


def dn_dlambda(material: Material, wavelength: float, rel_step: float = FIRST_DERIVATIVE_STEP):
    material.check_range(wavelength)
    n = material._sellmeier

    def central(h):
        return (n(wavelength + h) - n(wavelength - h)) / (2 * h)

    return _richardson(central, wavelength * rel_step)


def d2n_dlambda2(material: Material, wavelength: float, rel_step: float = SECOND_DERIVATIVE_STEP):
    material.check_range(wavelength)
    n = material._sellmeier

    def central(h):
        return (n(wavelength + h) - 2 * n(wavelength) + n(wavelength - h)) / h ** 2

    return _richardson(central, wavelength * rel_step)


def material_dispersion(material: Material, wavelength: float) -> tuple[float, float, float]:
    """Return (n, group index, GVD in s^2/m) at ``wavelength``."""
    n = float(material.index(wavelength))
    n_group = n - wavelength * dn_dlambda(material, wavelength)
    gvd = wavelength ** 3 / (2 * np.pi * c ** 2) * d2n_dlambda2(material, wavelength)
    return n, float(n_group), float(gvd)


def slab_transfer(material: Material, length: float) -> ScalarTransfer:
    """Lossless slab: H(w) = exp(i n(w) w L / c)."""
    if length < 0:
        raise ValueError("slab length must be non-negative")

    def transfer(omega):
        omega = np.asarray(omega, dtype=float)
        if length == 0:
            return np.ones_like(omega, dtype=complex)
        n = material.index_at_angular_frequency(omega)
        return np.exp(1j * n * omega * length / c)

    transfer.material = material
    transfer.length = length
    return transfer


def delay_transfer(delay: float) -> ScalarTransfer:
    """Free-space delay exp(i w tau)."""
    def transfer(omega):
        return np.exp(1j * np.asarray(omega, dtype=float) * delay)
    return transfer


def spectral_phase_transfer(center_angular_frequency: float, coefficients) -> ScalarTransfer:
    """exp(i sum_k a_k (w - w0)^k) for k = 1, 2, ...; ``coefficients`` = (a_1, a_2, ...)."""
    coefficients = tuple(coefficients)

    def transfer(omega):
        x = np.asarray(omega, dtype=float) - center_angular_frequency
        phase = sum(a * x ** (k + 1) for k, a in enumerate(coefficients))
        return np.exp(1j * phase)
    return transfer


def compose(*transfers: ScalarTransfer) -> ScalarTransfer:
    def transfer(omega):
        out = np.ones_like(np.asarray(omega, dtype=float), dtype=complex)
        for t in transfers:
            out = out * t(omega)
        return out
    return transfer


def group_delay(transfer: ScalarTransfer, omega: float, rel_step: float = 1e-5) -> float:
    """d(arg H)/dw by a centered difference of the phase ratio.

    A first estimate from a tiny step bounds the phase slope; the working step
    is then capped so the phase moves by at most pi/4 across it, which keeps
    long delays from aliasing onto a neighbouring branch.
    """
    def phase_step(step):
        ratio = transfer(np.array([omega + step]))[0] * np.conj(transfer(np.array([omega - step]))[0])
        return np.angle(ratio)

    probe = omega * 1e-10
    slope = abs(phase_step(probe)) / (2 * probe)
    h = omega * rel_step
    if slope > 0:
        h = min(h, np.pi / 4 / (2 * slope))
    if abs(phase_step(h)) > np.pi / 2 or abs(phase_step(h / 2)) > np.pi / 4 + 1e-3:
        raise ValueError("transfer phase varies too fast to differentiate")
    return float(_richardson(lambda step: phase_step(step) / (2 * step), h))


def unwrapped_phase(values: np.ndarray, max_step: float = np.pi / 2) -> np.ndarray:
    """Sequentially unwrap arg(values); raise if adjacent samples jump by more than ``max_step``."""
    steps = np.angle(values[1:] * np.conj(values[:-1]))
    if np.any(np.abs(steps) > max_step):
        raise ValueError("phase sampling too coarse to unwrap unambiguously")
    return np.angle(values[0]) + np.concatenate([[0.0], np.cumsum(steps)])


# --- polarization -------------------------------------------------------------

def _rotation(angle: float) -> np.ndarray:
    ca, sa = np.cos(angle), np.sin(angle)
    return np.array([[ca, sa], [-sa, ca]])


def jones_element(kind: str, axis_angle: float) -> np.ndarray:
    """Jones matrix in the (H, V) basis for a waveplate or polarizer with axis at ``axis_angle``."""
    kind = kind.upper()
    if kind == "HWP":
        core = np.diag([1.0, -1.0]).astype(complex)
    elif kind == "QWP":
        core = np.diag([1.0, 1j])
    elif kind == "LP":
        core = np.diag([1.0, 0.0]).astype(complex)
    else:
        raise ValueError(f"unknown element kind {kind!r}")
    r = _rotation(axis_angle)
    return r.T @ core @ r


def linear_polarization(angle: float) -> np.ndarray:
    return np.array([np.cos(angle), np.sin(angle)], dtype=complex)


def beamsplitter_amplitudes() -> tuple[complex, complex]:
    """Lossless symmetric 50/50 splitter: reflection carries a factor i."""
    return 1 / np.sqrt(2) + 0j, 1j / np.sqrt(2)


def beamsplitter_matrix() -> np.ndarray:
    t, r = beamsplitter_amplitudes()
    return np.array([[t, r], [r, t]])
