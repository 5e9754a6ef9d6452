"""Monte-Carlo sweep campaigns over bands, distances and SNR levels.

A sweep cell is one (band, distance, snr) combination; every cell runs
``trials`` repetitions.  In the default ``all`` angle mode each trial sweeps
every grid angle (one estimation per incident angle, the hardware-style
experiment); in ``random`` mode each trial draws a single incident angle.
Per-estimation noise seeds derive from (master_seed, cell_index, trial,
angle slot), so reports are byte-identical for a fixed master seed no matter
how many workers run the cells.
"""

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__ as _pkg_version
from . import svgplot
from ._kernels import resolve_backend
from .config import (ExperimentConfig, angle_grid, build_apertures,
                     config_to_dict, parse_config)
from .errors import ConfigError
from .estimator import estimate_from_gram, gram_matrix, svd_spectrum
from .fileio import save_manifest, save_svd
from .grids import FrequencyGrid
from .sensing import build_sensing_matrix, cross_correlate
from .forward import synth_pattern

ROW_COLUMNS = ("band_index", "f_min_hz", "f_max_hz", "f_count", "distance_m",
               "snr_db", "trial", "angle_index", "true_angle_deg",
               "est_angle_deg", "bin_error", "residual_norm", "iterations")
SUMMARY_COLUMNS = ("band_index", "f_min_hz", "f_max_hz", "f_count",
                   "distance_m", "snr_db", "trials", "n_estimates",
                   "exact_rate", "within_one_rate", "median_bin_error",
                   "max_bin_error")

ANGLE_MODE_ALL = "all"
ANGLE_MODE_RANDOM = "random"


@dataclass(frozen=True)
class BandSpec:
    f_min_hz: float
    f_max_hz: float
    count: int

    def grid(self) -> FrequencyGrid:
        return FrequencyGrid(self.f_min_hz, self.f_max_hz, self.count)


def paper_bands() -> tuple[BandSpec, ...]:
    """The four reference band settings used by the headline experiment."""
    return (BandSpec(8.5e9, 11.5e9, 301), BandSpec(8.5e9, 11.5e9, 61),
            BandSpec(9.0e9, 11.0e9, 201), BandSpec(9.25e9, 10.75e9, 151))


@dataclass(frozen=True)
class SweepSpec:
    bands: tuple[BandSpec, ...] = field(default_factory=paper_bands)
    distances: tuple[float, ...] = (0.21, 0.26, 0.335)
    snr_db_list: tuple[float, ...] = (math.inf,)
    trials: int = 1
    master_seed: int = 0
    angle_mode: str = ANGLE_MODE_ALL
    workers: int = 1
    max_estimations: int = 1_000_000

    def __post_init__(self):
        if not self.bands:
            raise ConfigError("at least one band is required", key="bands")
        if not self.distances or any(d <= 0 for d in self.distances):
            raise ConfigError("distances must be positive", key="distances")
        if not self.snr_db_list:
            raise ConfigError("at least one SNR entry is required",
                              key="snr_db_list")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1", key="trials")
        if self.angle_mode not in (ANGLE_MODE_ALL, ANGLE_MODE_RANDOM):
            raise ConfigError("angle_mode must be 'all' or 'random'",
                              key="angle_mode")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1", key="workers")
        for i, band in enumerate(self.bands):
            try:
                band.grid()
            except ValueError as exc:
                raise ConfigError(str(exc), key=f"bands[{i}]") from exc

    def n_cells(self) -> int:
        return len(self.bands) * len(self.distances) * len(self.snr_db_list)

    def estimations_per_cell(self, angle_count: int) -> int:
        per_trial = angle_count if self.angle_mode == ANGLE_MODE_ALL else 1
        return self.trials * per_trial


@dataclass(frozen=True)
class SweepReport:
    rows: list
    summary: list
    paths: dict


def _noise_seed(master_seed, cell_index, trial, slot) -> int:
    return int(np.random.default_rng(
        (master_seed, cell_index, trial, slot)).integers(0, 2 ** 63))


def _run_cell(cfg_dict, band_tuple, band_index, distance, snr_db, trials,
              master_seed, cell_index, angle_mode):
    """All rows of one sweep cell.  Top-level so worker processes can run it."""
    cfg = parse_config(cfg_dict)
    ap1, ap2 = build_apertures(cfg)
    angles = angle_grid(cfg)
    freqs = BandSpec(*band_tuple).grid()
    ref1 = synth_pattern(ap1, angles.values_rad, freqs.values, cfg.ref_distance_m)
    ref2 = synth_pattern(ap2, angles.values_rad, freqs.values, cfg.ref_distance_m)
    h = build_sensing_matrix(ref1, ref2, freqs, angles, cfg.ref_distance_m)
    a = gram_matrix(h, cfg.solver.tikhonov)
    tol = cfg.solver.tol
    max_iter = cfg.solver.max_iter if cfg.solver.max_iter > 0 else None

    v1 = synth_pattern(ap1, angles.values_rad, freqs.values, distance)
    v2 = synth_pattern(ap2, angles.values_rad, freqs.values, distance)
    g0 = cross_correlate(v1, v2)
    signal_power = np.mean(np.abs(g0) ** 2, axis=0)
    port_power = (np.mean(np.abs(v1) ** 2, axis=0),
                  np.mean(np.abs(v2) ** 2, axis=0))

    from .sensing import MeasurementVector

    rows = []
    for trial in range(trials):
        if angle_mode == ANGLE_MODE_ALL:
            slots = [(slot, slot) for slot in range(angles.count)]
        else:
            rng = np.random.default_rng((master_seed, cell_index, trial))
            slots = [(0, int(rng.integers(0, angles.count)))]
        for slot, j in slots:
            if math.isinf(snr_db):
                entries = g0[:, j]
            elif cfg.noise_on_ports:
                rng = np.random.default_rng(
                    _noise_seed(master_seed, cell_index, trial, slot))
                scale = 10.0 ** (-snr_db / 10.0)
                noisy = []
                for v, power in zip((v1[:, j], v2[:, j]),
                                    (port_power[0][j], port_power[1][j])):
                    draws = rng.standard_normal((2, freqs.count))
                    noisy.append(v + math.sqrt(power * scale / 2.0)
                                 * (draws[0] + 1j * draws[1]))
                entries = cross_correlate(noisy[0], noisy[1])
            else:
                rng = np.random.default_rng(
                    _noise_seed(master_seed, cell_index, trial, slot))
                scale = 10.0 ** (-snr_db / 10.0)
                draws = rng.standard_normal((2, freqs.count))
                entries = g0[:, j] + (math.sqrt(signal_power[j] * scale / 2.0)
                                      * (draws[0] + 1j * draws[1]))
            g = MeasurementVector(entries, freqs)
            result = estimate_from_gram(h, a, g, tol=tol, max_iter=max_iter)
            true_deg = float(angles.values_deg[j])
            rows.append((band_index, freqs.f_min, freqs.f_max, freqs.count,
                         distance, snr_db, trial, j, true_deg,
                         result.angle_deg,
                         angles.circular_bin_error(result.angle_deg, true_deg),
                         result.residual_norm, result.iterations))
    return rows


def _summarize_cell(rows):
    errs = np.array([r[10] for r in rows], dtype=float)
    first = rows[0]
    return (first[0], first[1], first[2], first[3], first[4], first[5],
            len({r[6] for r in rows}), len(rows),
            float(np.mean(errs == 0.0)), float(np.mean(errs <= 1.0)),
            float(np.median(errs)), float(np.max(errs)))


def _csv_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path, columns, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_csv_cell(v) for v in row) + "\n")


def run_sweep(cfg: ExperimentConfig, spec: SweepSpec, out_dir: str,
              plot: bool = False) -> SweepReport:
    """Execute the campaign and write rows, summary, SVD spectra, manifest."""
    angles = angle_grid(cfg)
    total = spec.n_cells() * spec.estimations_per_cell(angles.count)
    if total > spec.max_estimations:
        raise ConfigError(
            f"sweep would run {total} estimations, above the cap of "
            f"{spec.max_estimations}; shrink the grid or raise max_estimations")

    os.makedirs(out_dir, exist_ok=True)
    cfg_dict = config_to_dict(cfg)

    cells = []
    cell_index = 0
    for band_index, band in enumerate(spec.bands):
        for distance in spec.distances:
            for snr_db in spec.snr_db_list:
                cells.append((cfg_dict,
                              (band.f_min_hz, band.f_max_hz, band.count),
                              band_index, distance, float(snr_db), spec.trials,
                              spec.master_seed, cell_index, spec.angle_mode))
                cell_index += 1

    if spec.workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            per_cell = list(pool.map(_run_cell_star, cells))
    else:
        per_cell = [_run_cell(*args) for args in cells]

    rows = [row for cell_rows in per_cell for row in cell_rows]
    summary = [_summarize_cell(cell_rows) for cell_rows in per_cell]

    paths = {
        "rows": os.path.join(out_dir, "sweep_rows.csv"),
        "summary": os.path.join(out_dir, "sweep_summary.csv"),
        "manifest": os.path.join(out_dir, "sweep_manifest.json"),
    }
    _write_csv(paths["rows"], ROW_COLUMNS, rows)
    _write_csv(paths["summary"], SUMMARY_COLUMNS, summary)

    ap1, ap2 = build_apertures(cfg)
    spectra = []
    for band_index, band in enumerate(spec.bands):
        freqs = band.grid()
        h = build_sensing_matrix(
            synth_pattern(ap1, angles.values_rad, freqs.values, cfg.ref_distance_m),
            synth_pattern(ap2, angles.values_rad, freqs.values, cfg.ref_distance_m),
            freqs, angles, cfg.ref_distance_m)
        s = svd_spectrum(h)
        spath = os.path.join(out_dir, f"svd_band{band_index}.csv")
        save_svd(spath, s)
        paths[f"svd_band{band_index}"] = spath
        label = (f"{band.f_min_hz / 1e9:g}-{band.f_max_hz / 1e9:g} GHz, "
                 f"M={band.count}")
        spectra.append((label, s.values))

    if plot:
        svg = os.path.join(out_dir, "svd_spectra.svg")
        svgplot.svd_curves(svg, spectra)
        paths["svd_plot"] = svg
        for ci, cell_rows in enumerate(per_cell):
            first = cell_rows[0]
            title = (f"band {first[0]} d={first[4]:g} m snr={first[5]:g} dB")
            svg = os.path.join(out_dir, f"scatter_cell{ci}.svg")
            svgplot.scatter_estimated_vs_incident(
                svg, [r[8] for r in cell_rows], [r[9] for r in cell_rows], title)
            paths[f"scatter_cell{ci}"] = svg

    import datetime

    manifest = {
        "tool": "fdaoa",
        "version": _pkg_version,
        "backend": resolve_backend(None),
        "config": cfg_dict,
        "sweep": {
            "bands": [[b.f_min_hz, b.f_max_hz, b.count] for b in spec.bands],
            "distances": list(spec.distances),
            "snr_db_list": [repr(float(s)) for s in spec.snr_db_list],
            "trials": spec.trials,
            "master_seed": spec.master_seed,
            "angle_mode": spec.angle_mode,
            "workers": spec.workers,
        },
        "artifacts": sorted(os.path.basename(p) for p in paths.values()),
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    save_manifest(paths["manifest"], manifest)
    return SweepReport(rows=rows, summary=summary, paths=paths)


def _run_cell_star(args):
    return _run_cell(*args)
