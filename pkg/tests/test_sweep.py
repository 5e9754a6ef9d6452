import csv
import math
import os

import numpy as np
import pytest

from fdaoa import BandSpec, ConfigError, ExperimentConfig, SweepSpec, run_sweep
from fdaoa.sweep import ROW_COLUMNS, SUMMARY_COLUMNS, paper_bands


def _small_spec(**kwargs):
    defaults = dict(bands=(BandSpec(8.5e9, 11.5e9, 31),),
                    distances=(0.21,), snr_db_list=(math.inf,),
                    trials=1, master_seed=3)
    defaults.update(kwargs)
    return SweepSpec(**defaults)


def test_paper_bands_values():
    bands = paper_bands()
    assert [(b.f_min_hz, b.f_max_hz, b.count) for b in bands] == [
        (8.5e9, 11.5e9, 301), (8.5e9, 11.5e9, 61),
        (9.0e9, 11.0e9, 201), (9.25e9, 10.75e9, 151)]


def test_sweep_one_cell_covers_all_angles(tmp_path, default_cfg):
    report = run_sweep(default_cfg, _small_spec(), str(tmp_path))
    assert len(report.rows) == 72
    assert sorted(r[7] for r in report.rows) == list(range(72))
    assert os.path.exists(report.paths["rows"])
    assert os.path.exists(report.paths["summary"])
    assert os.path.exists(report.paths["svd_band0"])
    assert os.path.exists(report.paths["manifest"])


def test_sweep_rows_byte_identical(tmp_path, default_cfg):
    spec = _small_spec(snr_db_list=(20.0,), trials=2)
    r1 = run_sweep(default_cfg, spec, str(tmp_path / "a"))
    r2 = run_sweep(default_cfg, spec, str(tmp_path / "b"))
    for key in ("rows", "summary"):
        b1 = open(r1.paths[key], "rb").read()
        b2 = open(r2.paths[key], "rb").read()
        assert b1 == b2


def test_sweep_workers_match_serial(tmp_path, default_cfg):
    spec1 = _small_spec(bands=(BandSpec(8.5e9, 11.5e9, 21),
                               BandSpec(9e9, 11e9, 21)),
                        snr_db_list=(20.0,), trials=1)
    spec2 = SweepSpec(bands=spec1.bands, distances=spec1.distances,
                      snr_db_list=spec1.snr_db_list, trials=1,
                      master_seed=spec1.master_seed, workers=2)
    r1 = run_sweep(default_cfg, spec1, str(tmp_path / "serial"))
    r2 = run_sweep(default_cfg, spec2, str(tmp_path / "parallel"))
    assert open(r1.paths["rows"], "rb").read() == \
        open(r2.paths["rows"], "rb").read()


def test_sweep_aggregates_recomputable(tmp_path, default_cfg):
    spec = _small_spec(snr_db_list=(10.0,), trials=3)
    report = run_sweep(default_cfg, spec, str(tmp_path))
    with open(report.paths["rows"]) as fh:
        rows = list(csv.DictReader(fh))
    with open(report.paths["summary"]) as fh:
        summary = list(csv.DictReader(fh))
    assert list(rows[0].keys()) == list(ROW_COLUMNS)
    assert list(summary[0].keys()) == list(SUMMARY_COLUMNS)
    errs = np.array([float(r["bin_error"]) for r in rows])
    s = summary[0]
    assert int(s["n_estimates"]) == len(rows)
    assert float(s["exact_rate"]) == pytest.approx(np.mean(errs == 0.0))
    assert float(s["within_one_rate"]) == pytest.approx(np.mean(errs <= 1.0))
    assert float(s["median_bin_error"]) == pytest.approx(np.median(errs))
    assert float(s["max_bin_error"]) == pytest.approx(np.max(errs))


def test_sweep_random_angle_mode(tmp_path, default_cfg):
    spec = _small_spec(snr_db_list=(20.0,), trials=10, angle_mode="random")
    report = run_sweep(default_cfg, spec, str(tmp_path))
    assert len(report.rows) == 10
    drawn = {r[7] for r in report.rows}
    assert len(drawn) > 1   # the draws vary across trials


def test_sweep_noiseless_full_band_hits_everywhere(tmp_path, default_cfg):
    spec = _small_spec(bands=(BandSpec(8.5e9, 11.5e9, 301),),
                       distances=(0.21, 0.26, 0.335))
    report = run_sweep(default_cfg, spec, str(tmp_path))
    for cell in report.summary:
        assert cell[9] >= 70.0 / 72.0   # within-one-bin rate per distance


def test_sweep_estimation_cap_refusal(tmp_path, default_cfg):
    spec = _small_spec(trials=100, max_estimations=1000)
    with pytest.raises(ConfigError) as exc:
        run_sweep(default_cfg, spec, str(tmp_path))
    assert "cap" in str(exc.value)


def test_sweep_spec_validation():
    with pytest.raises(ConfigError):
        SweepSpec(bands=())
    with pytest.raises(ConfigError):
        _small_spec(trials=0)
    with pytest.raises(ConfigError):
        _small_spec(distances=(-0.1,))
    with pytest.raises(ConfigError):
        _small_spec(angle_mode="sometimes")
    with pytest.raises(ConfigError):
        _small_spec(bands=(BandSpec(11e9, 9e9, 10),))


def test_sweep_plots_written(tmp_path, default_cfg):
    spec = _small_spec()
    report = run_sweep(default_cfg, spec, str(tmp_path), plot=True)
    assert os.path.exists(report.paths["svd_plot"])
    assert os.path.exists(report.paths["scatter_cell0"])
    text = open(report.paths["scatter_cell0"]).read()
    assert text.startswith("<svg") and text.rstrip().endswith("</svg>")


def test_sweep_port_noise_flag(tmp_path):
    import dataclasses

    cfg = dataclasses.replace(ExperimentConfig(), noise_on_ports=True)
    spec = _small_spec(snr_db_list=(20.0,))
    report = run_sweep(cfg, spec, str(tmp_path))
    assert len(report.rows) == 72
