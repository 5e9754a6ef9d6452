"""Acceptance suite: one test per headline criterion, printed pass/fail lines.

Run as ``pytest tests/test_acceptance.py -v``.  Every test times the work it
performs and enforces the stated runtime budget alongside the quality gate.
"""

import math
import time

import numpy as np
import pytest

from fdaoa import (BandSpec, ExperimentConfig, FrequencyGrid, MeasurementVector,
                   SensingMatrix, SourceSpec, SweepSpec, add_noise,
                   build_apertures, build_sensing_matrix, cgs_solve,
                   estimate_aoa, measure, pattern_sweep, run_sweep,
                   svd_spectrum)
from fdaoa.config import angle_grid
from fdaoa.fileio import (load_matrix, load_pattern, load_result, load_svd,
                          load_vector, save_matrix, save_pattern, save_result,
                          save_svd, save_vector)
from fdaoa.errors import FileFormatError
from fdaoa.grids import AngleGrid

from conftest import random_diag_dominant

BANDS = {
    "full_301": BandSpec(8.5e9, 11.5e9, 301),
    "full_61": BandSpec(8.5e9, 11.5e9, 61),
    "mid_201": BandSpec(9.0e9, 11.0e9, 201),
    "narrow_151": BandSpec(9.25e9, 10.75e9, 151),
}


@pytest.fixture(scope="module")
def cfg():
    return ExperimentConfig()


@pytest.fixture(scope="module")
def ports(cfg):
    return build_apertures(cfg)


@pytest.fixture(scope="module")
def grid(cfg):
    return angle_grid(cfg)


def _build_h(cfg, ports, grid, band: BandSpec) -> SensingMatrix:
    freqs = band.grid()
    p1 = pattern_sweep(ports[0], grid, freqs, cfg.ref_distance_m)
    p2 = pattern_sweep(ports[1], grid, freqs, cfg.ref_distance_m)
    return build_sensing_matrix(p1, p2, freqs, grid, cfg.ref_distance_m)


def _report(capsys, index, label, ok, elapsed, budget, detail=""):
    with capsys.disabled():
        status = "PASS" if ok else "FAIL"
        extra = f" [{detail}]" if detail else ""
        print(f"\n[criterion {index:2d}] {status}  {label}: "
              f"{elapsed:.1f}s < {budget:.0f}s{extra}")
    assert ok, f"criterion {index} failed: {label} {detail}"
    assert elapsed < budget, f"criterion {index} exceeded runtime budget"


def test_criterion_01_phase_reference_invariance(cfg, ports, grid, capsys):
    t0 = time.perf_counter()
    freqs = BANDS["full_301"].grid()
    p1 = pattern_sweep(ports[0], grid, freqs, cfg.ref_distance_m)
    p2 = pattern_sweep(ports[1], grid, freqs, cfg.ref_distance_m)
    h0 = build_sensing_matrix(p1, p2, freqs, grid, cfg.ref_distance_m)
    scale = np.max(np.abs(h0.entries))
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(100):
        phase = np.exp(1j * rng.uniform(0, 2 * np.pi, freqs.count))[:, None]
        h1 = build_sensing_matrix(p1 * phase, p2 * phase, freqs, grid,
                                  cfg.ref_distance_m)
        worst = max(worst, float(np.max(np.abs(h1.entries - h0.entries))) / scale)
    elapsed = time.perf_counter() - t0
    _report(capsys, 1, "phase-reference invariance", worst <= 1e-12, elapsed,
            5.0, f"max rel dH {worst:.2e}")


def test_criterion_02_noiseless_self_consistency(cfg, ports, grid, capsys):
    t0 = time.perf_counter()
    h = _build_h(cfg, ports, grid, BANDS["full_301"])
    hits = 0
    for j, theta in enumerate(grid.values_rad):
        g = measure(SourceSpec(theta, cfg.ref_distance_m), h.freqs, ports)
        hits += estimate_aoa(h, g).bin_index == j
    elapsed = time.perf_counter() - t0
    _report(capsys, 2, "noiseless grid self-consistency", hits == 72, elapsed,
            60.0, f"{hits}/72 exact")


def test_criterion_03_distance_robustness(cfg, ports, grid, capsys):
    t0 = time.perf_counter()
    h = _build_h(cfg, ports, grid, BANDS["full_301"])
    counts = {}
    for d in (0.21, 0.26, 0.335):
        within = 0
        for j, theta in enumerate(grid.values_rad):
            g = measure(SourceSpec(theta, d), h.freqs, ports)
            r = estimate_aoa(h, g)
            within += grid.circular_bin_error(r.angle_deg,
                                              grid.values_deg[j]) <= 1.0
        counts[d] = within
    elapsed = time.perf_counter() - t0
    ok = all(v >= 70 for v in counts.values())
    _report(capsys, 3, "distance robustness (0.21/0.26/0.335 m)", ok, elapsed,
            180.0, "within-1-bin " + ", ".join(f"{k}: {v}/72"
                                               for k, v in counts.items()))


def test_criterion_04_bandwidth_degradation(cfg, tmp_path, capsys):
    t0 = time.perf_counter()
    sequence = ("full_301", "full_61", "mid_201", "narrow_151")
    spec = SweepSpec(bands=tuple(BANDS[k] for k in sequence),
                     distances=(0.26,), snr_db_list=(20.0,), trials=100,
                     master_seed=11, angle_mode="random")
    report = run_sweep(cfg, spec, str(tmp_path / "degradation"))
    medians = [cell[10] for cell in report.summary]
    elapsed = time.perf_counter() - t0
    ok = all(medians[i] <= medians[i + 1] + 1e-12 for i in range(3))
    _report(capsys, 4, "bandwidth/point-count degradation ordering", ok,
            elapsed, 600.0,
            "median bins " + ", ".join(f"{k}={m:g}"
                                       for k, m in zip(sequence, medians)))


def test_criterion_05_svd_trend(cfg, ports, grid, capsys):
    t0 = time.perf_counter()
    spectra = {k: svd_spectrum(_build_h(cfg, ports, grid, BANDS[k]))
               for k in ("full_301", "mid_201", "narrow_151")}
    full = spectra["full_301"].values
    narrow = spectra["narrow_151"].values
    dominates = bool(np.all(full[5:] >= narrow[5:]))
    ranks = [spectra[k].effective_rank
             for k in ("full_301", "mid_201", "narrow_151")]
    rank_ok = ranks[0] >= ranks[1] >= ranks[2]
    elapsed = time.perf_counter() - t0
    _report(capsys, 5, "SVD spectrum dominance and effective-rank ordering",
            dominates and rank_ok, elapsed, 30.0,
            f"ranks {ranks[0]}>={ranks[1]}>={ranks[2]}")


def test_criterion_06_cgs_oracle_equivalence(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(66)
    breakdowns = 0
    worst = 0.0
    total = 200
    for _ in range(total):
        n = int(rng.integers(2, 65))
        a = random_diag_dominant(rng, n)
        b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        sol = cgs_solve(a, b, tol=1e-10, max_iter=1000)
        if sol.breakdown:
            breakdowns += 1
            continue
        direct = np.linalg.solve(a, b)
        worst = max(worst, float(np.linalg.norm(sol.x - direct)
                                 / np.linalg.norm(direct)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and breakdowns / total < 0.05
    _report(capsys, 6, "CGS matches the dense direct solve", ok, elapsed, 30.0,
            f"worst rel err {worst:.2e}, breakdowns {breakdowns}/{total}")


def test_criterion_07_argmax_scale_invariance(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(77)
    mismatches = 0
    for _ in range(1000):
        m, n = 24, 12
        freqs = FrequencyGrid(9e9, 10e9, m)
        angles = AngleGrid(n, 360.0 / n)
        h = SensingMatrix(rng.standard_normal((m, n))
                          + 1j * rng.standard_normal((m, n)),
                          freqs, angles, 0.16)
        g = MeasurementVector(rng.standard_normal(m)
                              + 1j * rng.standard_normal(m), freqs)
        c = 0j
        while c == 0:
            c = complex(rng.standard_normal(), rng.standard_normal())
        scaled = MeasurementVector(g.entries * c, freqs)
        if estimate_aoa(h, g).bin_index != estimate_aoa(h, scaled).bin_index:
            mismatches += 1
    elapsed = time.perf_counter() - t0
    _report(capsys, 7, "argmax scale invariance over 1000 triples",
            mismatches == 0, elapsed, 10.0, f"{mismatches} mismatches")


def test_criterion_08_noise_calibration(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(88)
    m = 100
    freqs = FrequencyGrid(9e9, 10e9, m)
    g = MeasurementVector(rng.standard_normal(m) + 1j * rng.standard_normal(m),
                          freqs)
    signal_power = float(np.mean(np.abs(g.entries) ** 2))
    total = 0.0
    seeds = 100          # 100 seeds x 100 samples = 1e4 noise draws
    for seed in range(seeds):
        noisy = add_noise(g, 0.0, seed)
        total += float(np.sum(np.abs(noisy.entries - g.entries) ** 2))
    ratio = (total / (seeds * m)) / signal_power
    elapsed = time.perf_counter() - t0
    _report(capsys, 8, "zero-dB noise power calibration",
            0.9 <= ratio <= 1.1, elapsed, 5.0, f"ratio {ratio:.3f}")


def test_criterion_09_io_round_trips(cfg, ports, grid, tmp_path, capsys):
    t0 = time.perf_counter()
    ok = True
    detail = []
    freqs = FrequencyGrid(9e9, 10e9, 6)
    angles6 = AngleGrid(6, 60.0)
    rng = np.random.default_rng(9)
    pattern = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))

    ppath = str(tmp_path / "p.csv")
    save_pattern(ppath, pattern, freqs, angles6, 1, 0.16)
    ok &= np.array_equal(load_pattern(ppath)[0], pattern)

    h = SensingMatrix(pattern, freqs, angles6, 0.16)
    mpath = str(tmp_path / "h.csv")
    save_matrix(mpath, h)
    ok &= np.array_equal(load_matrix(mpath).entries, h.entries)

    g = MeasurementVector(pattern[:, 0], freqs,
                          truth=SourceSpec(1.0, 0.26),
                          noise=None)
    vpath = str(tmp_path / "g.csv")
    save_vector(vpath, g)
    ok &= np.array_equal(load_vector(vpath).entries, g.entries)

    r = estimate_aoa(h, g, tol=1e-10, max_iter=60)
    rpath = str(tmp_path / "r.json")
    save_result(rpath, r)
    r2 = load_result(rpath)
    ok &= (r2.bin_index == r.bin_index
           and np.array_equal(r2.profile.values, r.profile.values)
           and r2.residual_norm == r.residual_norm)

    s = svd_spectrum(h)
    spath = str(tmp_path / "s.csv")
    save_svd(spath, s)
    ok &= np.array_equal(load_svd(spath).values, s.values)

    from fdaoa import dump_config, load_config

    cpath = str(tmp_path / "cfg.json")
    dump_config(cfg, cpath)
    ok &= load_config(cpath) == cfg
    detail.append("round trips exact" if ok else "round trip broke")

    # malformed corpus: every fixture must raise a structured error
    base = open(ppath).read()
    lines = base.splitlines()
    fixtures = [
        "",
        "garbage\n",
        base.replace("fdaoa-pattern v1", "fdaoa-pattern v99"),
        base.replace("# f_count=6", "# f_count=six"),
        "\n".join(l for l in lines if "f_count" not in l) + "\n",
        lines[0] + "\n# intruder=1\n" + "\n".join(lines[1:]) + "\n",
        "\n".join(l for l in lines if l != "freq_hz,angle_deg,re,im") + "\n",
        base + "9e9,0,1\n",
        base + "9e9,0,1,nanobot\n",
        base + "9123,0,1,2\n",
        base + lines[-1] + "\n",
        "\n".join(lines[:-1]) + "\n",
    ]
    crashes = 0
    structured = 0
    for i, text in enumerate(fixtures):
        path = str(tmp_path / f"bad{i}.csv")
        with open(path, "w") as fh:
            fh.write(text)
        try:
            load_pattern(path)
        except FileFormatError:
            structured += 1
        except Exception:
            crashes += 1
    ok &= structured == len(fixtures) and crashes == 0
    detail.append(f"{structured}/{len(fixtures)} malformed fixtures rejected "
                  f"cleanly")
    elapsed = time.perf_counter() - t0
    _report(capsys, 9, "IO round trips and malformed-input corpus", bool(ok),
            elapsed, 10.0, "; ".join(detail))


def test_criterion_10_sweep_determinism(cfg, tmp_path, capsys):
    t0 = time.perf_counter()
    spec = SweepSpec(bands=(BANDS["full_61"], BANDS["mid_201"]),
                     distances=(0.21, 0.26), snr_db_list=(math.inf, 20.0),
                     trials=1, master_seed=123)
    r1 = run_sweep(cfg, spec, str(tmp_path / "run1"))
    r2 = run_sweep(cfg, spec, str(tmp_path / "run2"))
    same = True
    for key in ("rows", "summary", "svd_band0", "svd_band1"):
        same &= (open(r1.paths[key], "rb").read()
                 == open(r2.paths[key], "rb").read())
    elapsed = time.perf_counter() - t0
    _report(capsys, 10, "byte-identical sweep reports under a fixed seed",
            same, elapsed, 120.0)
