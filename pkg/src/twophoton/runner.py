"""Config-driven experiment runs: schema validation, engines, shot noise, CSV/JSON output."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np
from scipy.constants import c

from . import __version__
from .eraser import EraserConfig, coincidence_rate, eraser_scan
from .franson import (STANDARD_SETTINGS, FransonConfig, chsh_from_correlation, correlation,
                      franson_coincidence)
from .hom import ArmConfig, HomScan, NoDipError, fit_dip, hom_coincidence_scan
from .multilayer import (LayerStack, PhaseUnwrapError, band_edges, design_wavelength_for_thickness,
                         quarter_wave_stack, stack_response, transmission_minimum, tunneling_times,
                         unit_cell)
from .optics import get_material, group_delay, materials_version, slab_transfer
from .spectral import (PhotonPairState, coherence_length, conditional_collapse, correlation_time,
                       make_pair_state)

PRNG_NAME = "numpy.random.PCG64"
FS = 1e-15
NM = 1e-9

SOURCE_DEFAULTS = {"pump_nm": 351.0, "center_nm": 702.0, "bandwidth_nm": 6.0,
                   "grid_points": 257, "span_factor": 6.0, "entangled": True}

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending key."""


def load_schema(name: str) -> dict:
    text = resources.files("twophoton").joinpath(f"schemas/{name}.schema.json").read_text()
    return json.loads(text)


def _check(instance, schema_name: str) -> None:
    validator = jsonschema.Draft202012Validator(load_schema(schema_name))
    errors = sorted(validator.iter_errors(instance), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {err.message}")


def validate_config(config: dict) -> None:
    _check(config, "run_config")
    if "noise" in config and config["experiment"] not in ("hom", "eraser"):
        raise ConfigError("noise: shot noise applies only to hom and eraser scans")


def validate_summary(summary: dict) -> None:
    _check(summary, "summary")


def config_digest(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


@dataclass(frozen=True)
class NoiseConfig:
    integration_time: float
    peak_rate: float
    seed: int


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    raw: dict
    name: str = "run"
    output_dir: Path = Path("results")
    noise: NoiseConfig | None = None

    @classmethod
    def from_dict(cls, config: dict, default_name: str = "run") -> "RunConfig":
        validate_config(config)
        out = config.get("output", {})
        noise = NoiseConfig(**config["noise"]) if "noise" in config else None
        name = out.get("prefix") or config.get("name") or default_name
        return cls(config["experiment"], config, name, Path(out.get("directory", "results")), noise)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        path = Path(path)
        text = path.read_text()
        try:
            config = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"<file>: not valid JSON ({exc})") from None
        return cls.from_dict(config, default_name=path.stem)

    @property
    def digest(self) -> str:
        return config_digest(self.raw)

    def block(self) -> dict:
        return self.raw[self.experiment]


@dataclass
class ResultTable:
    columns: tuple[str, ...]
    rows: list[tuple]
    metadata: dict = field(default_factory=dict)

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_fmt(v) for v in row])
        return buf.getvalue()


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if not np.isfinite(value):
            raise FloatingPointError("non-finite value in result table")
        return f"{float(value):.12g}"
    return str(value)


def poisson_counts(rate_curve, integration_time: float, peak_rate: float, seed: int) -> np.ndarray:
    """Independent Poisson draws with mean rate * peak_rate * integration_time."""
    rates = np.asarray(rate_curve, dtype=float)
    if np.any(rates < 0) or not np.all(np.isfinite(rates)):
        raise ValueError("rates must be finite and non-negative")
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.poisson(rates * peak_rate * integration_time)


def _parallel_map(fn, items, workers: int = 1) -> list:
    items = list(items)
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# --- building engine inputs ---------------------------------------------------

def build_pair(config: dict) -> PhotonPairState:
    src = {**SOURCE_DEFAULTS, **config.get("source", {})}
    return make_pair_state(src["pump_nm"] * NM, src["center_nm"] * NM, src["bandwidth_nm"] * NM,
                           grid_points=src["grid_points"], span_factor=src["span_factor"],
                           entangled=src["entangled"])


def build_arm(block: dict | None) -> ArmConfig:
    block = block or {}
    elements = tuple(slab_transfer(get_material(e["material"]), e["length_mm"] * 1e-3)
                     for e in block.get("elements", ()))
    return ArmConfig(elements, block.get("extra_delay_fs", 0.0) * FS)


def build_stack(block: dict) -> LayerStack:
    amb_in, amb_out = block.get("ambient_in", 1.0), block.get("ambient_out", 1.0)
    if "layers" in block:
        return LayerStack(tuple((layer["n"], layer["d_nm"] * NM) for layer in block["layers"]),
                          amb_in, amb_out)
    nh, nl, p = block["n_high"], block["n_low"], block["periods"]
    if "design_nm" in block:
        lam0 = block["design_nm"] * NM
    else:
        lam0 = design_wavelength_for_thickness(block["total_nm"] * NM, nh, nl, p)
    return quarter_wave_stack(lam0, nh, nl, p, amb_in, amb_out)


def scan_delays(scan: dict, pair: PhotonPairState, center: float = 0.0) -> np.ndarray:
    if "start_fs" in scan:
        return np.linspace(scan["start_fs"], scan["stop_fs"], scan["points"]) * FS
    sigma = correlation_time(pair)
    return center + np.linspace(-scan["half_widths"], scan["half_widths"], scan["points"]) * sigma


def _fit_summary(scan: HomScan) -> dict:
    try:
        fit = fit_dip(scan)
    except NoDipError as exc:
        return {"status": "no_dip", "message": str(exc)}
    except ValueError as exc:
        return {"status": "fit_failed", "message": str(exc)}
    return {"status": "ok", "center_fs": fit.center / FS, "rms_width_fs": fit.rms_width / FS,
            "visibility": fit.visibility, "baseline": fit.baseline, "residual": fit.fit_residual}


def _arm_group_delay(arm: ArmConfig, pair: PhotonPairState) -> float:
    return group_delay(arm.transfer, pair.center_angular_frequency)


def _scan_table(delays, rates, noise: NoiseConfig | None, results: dict, baseline: float = 1.0):
    columns = ("delay_fs", "rate")
    counts = None
    if noise is not None:
        counts = poisson_counts(rates, noise.integration_time, noise.peak_rate, noise.seed)
        columns += ("counts",)
        scale = noise.peak_rate * noise.integration_time
        noisy = HomScan(delays, counts / scale, baseline)
        results["fit_counts"] = _fit_summary(noisy)
        results["total_counts"] = int(np.sum(counts))
    rows = []
    for i, (tau, rate) in enumerate(zip(delays, rates)):
        row = (tau / FS, float(rate))
        rows.append(row + ((int(counts[i]),) if counts is not None else ()))
    return ResultTable(columns, rows)


# --- experiments ----------------------------------------------------------------

def _run_hom(cfg: RunConfig, workers: int):
    block = cfg.block()
    pair = build_pair(cfg.raw)
    arm_a, arm_b = build_arm(block.get("arm_a")), build_arm(block.get("arm_b"))
    expected = _arm_group_delay(arm_a, pair) - _arm_group_delay(arm_b, pair)
    delays = scan_delays(block["scan"], pair, expected)

    def point(tau):
        return hom_coincidence_scan(pair, arm_a, arm_b, [tau]).rates[0]

    rates = np.array(_parallel_map(point, delays, workers))
    scan = HomScan(delays, rates)
    results = {"correlation_time_fs": correlation_time(pair) / FS,
               "expected_center_fs": expected / FS,
               "min_rate": float(rates.min()), "max_rate": float(rates.max())}
    if block.get("fit", True):
        results["fit"] = _fit_summary(scan)
    table = _scan_table(delays, rates, cfg.noise, results)
    return {"scan": table}, results, pair


def _run_eraser(cfg: RunConfig, workers: int):
    block = cfg.block()
    pair = build_pair(cfg.raw)
    rad = np.radians

    def angle(key):
        value = block.get(key)
        return None if value is None else float(rad(value))

    config = EraserConfig(pair, float(rad(block["hwp_deg"])), angle("pol1_deg"), angle("pol2_deg"),
                          block.get("delayed_choice", False))
    delays = scan_delays(block["scan"], pair)
    rates = np.array(_parallel_map(lambda tau: coincidence_rate(config, tau), delays, workers))
    profile = eraser_scan(config, [0.0])
    results = {"visibility": profile.visibility, "baseline": profile.baseline,
               "zero_delay_rate": float(profile.scan.rates[0]),
               "delayed_choice": config.delayed_choice}
    table = _scan_table(delays, rates, cfg.noise, results, profile.baseline)
    return {"scan": table}, results, pair


def _franson_config(block: dict, phi1: float, phi2: float) -> FransonConfig:
    return FransonConfig(path_imbalance=block.get("path_imbalance_m", 0.63), phi1=phi1, phi2=phi2,
                         visibility=block.get("visibility", 1.0),
                         coincidence_window=block.get("coincidence_window_ns", 1.0) * 1e-9,
                         coherence_length=block.get("coherence_length_um", 50.0) * 1e-6,
                         entangled=block.get("entangled", True))


def _run_franson(cfg: RunConfig, workers: int):
    block = cfg.block()
    phi1s = block.get("phi1_deg", list(np.arange(0.0, 360.0, 15.0)))
    phi2s = block.get("phi2_deg", [0.0])
    grid = [(p1, p2) for p1 in phi1s for p2 in phi2s]

    def point(phases):
        p1, p2 = phases
        config = _franson_config(block, float(np.radians(p1)), float(np.radians(p2)))
        like = franson_coincidence(config, "like")
        unlike = franson_coincidence(config, "unlike")
        return [(p1, p2, "SS", like.p_ss), (p1, p2, "LL", like.p_ll), (p1, p2, "SL", like.p_sl),
                (p1, p2, "LS", like.p_ls), (p1, p2, "like", like.p_postselected_coincidence),
                (p1, p2, "unlike", unlike.p_postselected_coincidence)]

    rows = [row for chunk in _parallel_map(point, grid, workers) for row in chunk]
    table = ResultTable(("phi1_deg", "phi2_deg", "class", "rate"), rows)

    if "chsh_deg" in block:
        s = block["chsh_deg"]
        settings = tuple(float(np.radians(s[k])) for k in ("a", "a_prime", "b", "b_prime"))
    else:
        settings = STANDARD_SETTINGS
    chsh = chsh_from_correlation(lambda x, y: correlation(_franson_config(block, x, y)), *settings)
    results = {"visibility": block.get("visibility", 1.0),
               "chsh": {"S": chsh.S, "violated": chsh.violated,
                        "subtracted_term": chsh.subtracted_term,
                        "correlations": list(chsh.correlations),
                        "settings_deg": [[float(np.degrees(x)), float(np.degrees(y))]
                                         for x, y in chsh.settings]}}
    return {"fringes": table}, results, None


def _run_barrier(cfg: RunConfig, workers: int):
    block = cfg.block()
    stack = build_stack(block["stack"])
    wl = block["wavelengths_nm"]
    lams = np.linspace(wl["start"], wl["stop"], wl["points"]) * NM
    angles = block.get("angles_deg", [0.0])
    pols = block.get("pols", ["p"])
    grid = [(pol, a, lam) for pol in pols for a in angles for lam in lams]

    def point(item):
        pol, a_deg, lam = item
        theta = float(np.radians(a_deg))
        resp = stack_response(stack, lam, theta, pol)
        times = tunneling_times(stack, lam, theta, pol)
        return (lam / NM, a_deg, pol, resp.T, times.group_delay / FS,
                times.semiclassical / FS, times.larmor / FS)

    rows = _parallel_map(point, grid, workers)
    table = ResultTable(("wavelength_nm", "angle_deg", "pol", "T", "group_delay_fs",
                         "semiclassical_fs", "larmor_fs"), rows)

    results = {"total_thickness_nm": stack.total_thickness / NM, "layers": len(stack.layers),
               "d_over_c_fs": stack.total_thickness / c / FS}
    sb = block["stack"]
    if "layers" not in sb:
        lam0 = 4 * stack.layers[0][0] * stack.layers[0][1]
        results["design_nm"] = lam0 / NM
        lo, hi = band_edges(unit_cell(stack), lam0, ambient_index=stack.ambient_index_in)
        results["band_edges_nm"] = [lo / NM, hi / NM]
    probe = block.get("probe_nm", results.get("design_nm", float(np.mean(lams) / NM))) * NM
    times = tunneling_times(stack, probe, 0.0, "p")
    results["probe"] = {"wavelength_nm": probe / NM, "angle_deg": 0.0, "pol": "p",
                        "T": stack_response(stack, probe, 0.0, "p").T,
                        "group_delay_fs": times.group_delay / FS,
                        "semiclassical_fs": times.semiclassical / FS,
                        "larmor_fs": times.larmor / FS}
    results["group_delay_fs"] = times.group_delay / FS
    lam_min, t_min = transmission_minimum(stack, lams[0], lams[-1])
    results["transmission_minimum"] = {"wavelength_nm": lam_min / NM, "T": t_min}
    return {"spectrum": table}, results, None


def _density_per_nm(spectrum):
    lam = spectrum.wavelengths()
    rho = spectrum.density * 2 * np.pi * c / lam ** 2 * NM
    order = np.argsort(lam)
    return ResultTable(("wavelength_nm", "density"),
                       [(float(l / NM), float(r)) for l, r in zip(lam[order], rho[order])])


def _run_collapse(cfg: RunConfig, workers: int):
    block = cfg.block()
    pair = build_pair(cfg.raw)
    marginal = pair.marginal()
    conditional, cond_length = conditional_collapse(
        pair, block["filter_center_nm"] * NM, block["filter_fwhm_nm"] * NM,
        block.get("filtered_arm", "A"))
    w0 = pair.center_angular_frequency

    def center_nm(spectrum):
        return 2 * np.pi * c / (w0 + spectrum.mean_detuning()) / NM

    def rms_nm(spectrum):
        lam = 2 * np.pi * c / w0
        return spectrum.rms_width() * lam ** 2 / (2 * np.pi * c) / NM

    results = {"marginal": {"center_nm": center_nm(marginal), "rms_width_nm": rms_nm(marginal),
                            "coherence_length_um": coherence_length(marginal) * 1e6},
               "conditional": {"center_nm": center_nm(conditional),
                               "rms_width_nm": rms_nm(conditional),
                               "coherence_length_um": cond_length * 1e6},
               "filtered_arm": block.get("filtered_arm", "A")}
    return {"conditional": _density_per_nm(conditional), "marginal": _density_per_nm(marginal)}, \
        results, pair


ENGINES = {"hom": _run_hom, "eraser": _run_eraser, "franson": _run_franson,
           "barrier": _run_barrier, "collapse": _run_collapse}


@dataclass
class RunResult:
    summary: dict
    files: list[Path]


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def run_experiment(cfg: RunConfig, output_dir=None, workers: int = 1) -> RunResult:
    """Run one configured experiment and write its CSV tables and JSON summary."""
    tables, results, pair = ENGINES[cfg.experiment](cfg, workers)
    grid = {}
    if pair is not None:
        src = {**SOURCE_DEFAULTS, **cfg.raw.get("source", {})}
        grid = {"points": pair.grid.size, "span_factor": float(src["span_factor"]),
                "step_rad_per_s": pair.grid.step}
    try:
        mat_version = materials_version()
    except (OSError, ValueError):
        mat_version = None
    out_dir = Path(output_dir) if output_dir is not None else cfg.output_dir
    names = [f"{cfg.name}_{key}.csv" for key in tables]
    summary = _clean({
        "experiment": cfg.experiment,
        "name": cfg.name,
        "metadata": {"config_sha256": cfg.digest, "code_version": __version__,
                     "materials_version": mat_version, "grid": grid,
                     "prng": PRNG_NAME if cfg.noise is not None else None},
        "results": results,
        "files": names + [f"{cfg.name}_summary.json"],
    })
    validate_summary(summary)
    text = json.dumps(summary, indent=2, sort_keys=True, allow_nan=False) + "\n"
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for name, table in zip(names, tables.values()):
        path = out_dir / name
        path.write_text(table.to_csv_text())
        written.append(path)
    path = out_dir / f"{cfg.name}_summary.json"
    path.write_text(text)
    written.append(path)
    return RunResult(summary, written)


NUMERICAL_ERRORS = (NoDipError, PhaseUnwrapError, ArithmeticError, RuntimeError,
                    np.linalg.LinAlgError)
