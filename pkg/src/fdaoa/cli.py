"""Command-line harness wiring the pipeline end to end.

Subcommands: simulate, build-matrix, estimate, svd, sweep.
Exit codes: 0 success, 2 config error, 3 parse error, 4 degenerate input.
"""

import argparse
import datetime
import math
import os
import sys

import numpy as np

from . import __version__
from ._kernels import resolve_backend
from .config import (angle_grid, build_apertures, config_to_dict,
                     frequency_grid, load_config)
from .errors import (EXIT_CONFIG, EXIT_DEGENERATE, EXIT_OK, EXIT_PARSE,
                     BelowCutoffError, ConfigError, DegenerateInputError,
                     FileFormatError, ShapeMismatchError)
from .estimator import estimate_aoa, matched_filter, svd_spectrum
from .fileio import (load_matrix, load_pattern, load_vector, save_manifest,
                     save_matrix, save_pattern, save_result, save_svd,
                     save_vector)
from .forward import SourceSpec, pattern_sweep
from .sensing import add_noise, build_sensing_matrix, measure
from .sweep import ANGLE_MODE_ALL, BandSpec, SweepSpec, run_sweep
from . import svgplot


def _manifest_skeleton(cfg):
    return {
        "tool": "fdaoa",
        "version": __version__,
        "backend": resolve_backend(None),
        "config": config_to_dict(cfg),
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        import dataclasses

        cfg = dataclasses.replace(cfg, rng_seed=args.seed)
    ap1, ap2 = build_apertures(cfg)
    freqs = frequency_grid(cfg)
    angles = angle_grid(cfg)
    os.makedirs(args.out, exist_ok=True)
    paths = []
    for ap in (ap1, ap2):
        p = pattern_sweep(ap, angles, freqs, cfg.ref_distance_m)
        path = os.path.join(args.out, f"pattern_port{ap.port_id}.csv")
        save_pattern(path, p, freqs, angles, ap.port_id, cfg.ref_distance_m)
        paths.append(path)
        print(f"wrote {path} ({freqs.count}x{angles.count})")
    manifest = _manifest_skeleton(cfg)
    manifest["artifacts"] = [os.path.basename(p) for p in paths]
    save_manifest(os.path.join(args.out, "run_manifest.json"), manifest)
    return EXIT_OK


def cmd_build_matrix(args) -> int:
    p1, meta1 = load_pattern(args.port1)
    p2, meta2 = load_pattern(args.port2)
    if meta1["freqs"] != meta2["freqs"] or meta1["angles"] != meta2["angles"]:
        raise FileFormatError("the two pattern files use different grids")
    if meta1["ref_distance_m"] != meta2["ref_distance_m"]:
        raise FileFormatError("the two pattern files use different reference "
                              "distances")
    h = build_sensing_matrix(p1, p2, meta1["freqs"], meta1["angles"],
                             meta1["ref_distance_m"])
    save_matrix(args.out, h)
    print(f"wrote {args.out} ({h.shape[0]}x{h.shape[1]})")
    return EXIT_OK


def _parse_source_spec(text: str):
    """θ_deg,distance_m[,snr_db[,seed]]; snr 'inf' or omitted = noiseless."""
    parts = [p.strip() for p in text.split(",")]
    if not 2 <= len(parts) <= 4:
        raise ConfigError("--simulate-source expects "
                          "'angle_deg,distance_m[,snr_db[,seed]]'")
    try:
        angle_deg = float(parts[0])
        distance = float(parts[1])
        snr_db = float(parts[2]) if len(parts) >= 3 and parts[2].lower() not in (
            "", "none") else math.inf
        seed = int(parts[3]) if len(parts) == 4 else 0
    except ValueError as exc:
        raise ConfigError(f"--simulate-source: {exc}") from exc
    return angle_deg, distance, snr_db, seed


def cmd_estimate(args) -> int:
    h = load_matrix(args.matrix)
    cfg = load_config(args.config)
    if args.simulate_source is not None:
        angle_deg, distance, snr_db, seed = _parse_source_spec(args.simulate_source)
        apertures = build_apertures(cfg)
        g = measure(SourceSpec(math.radians(angle_deg), distance), h.freqs,
                    apertures)
        if not math.isinf(snr_db):
            g = add_noise(g, snr_db, seed)
    else:
        g = load_vector(args.measurement)
        if g.freqs != h.freqs:
            raise FileFormatError("measurement and matrix frequency grids differ")
    if args.method == "matched-filter":
        result = matched_filter(h, g)
    else:
        result = estimate_aoa(h, g, tol=args.tol, max_iter=args.max_iter,
                              tikhonov=args.tikhonov)
    print(f"estimated angle: {result.angle_deg:g} deg (bin {result.bin_index})")
    print(f"method: {result.method}  residual: {result.residual_norm:.3e}  "
          f"iterations: {result.iterations}"
          + ("  [breakdown]" if result.breakdown else ""))
    if g.truth is not None:
        true_deg = math.degrees(g.truth.angle)
        err = h.angles.circular_bin_error(result.angle_deg, true_deg)
        print(f"true angle: {true_deg:g} deg  circular bin error: {err:g}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        rpath = os.path.join(args.out, "estimate_result.json")
        save_result(rpath, result)
        if args.simulate_source is not None:
            vpath = os.path.join(args.out, "measurement.csv")
            save_vector(vpath, g)
            print(f"wrote {vpath}")
        print(f"wrote {rpath}")
    return EXIT_OK


def cmd_svd(args) -> int:
    h = load_matrix(args.matrix)
    s = svd_spectrum(h)
    save_svd(args.out, s)
    print(f"wrote {args.out} ({s.values.size} values, effective rank "
          f"{s.effective_rank})")
    if args.plot:
        svg = os.path.splitext(args.out)[0] + ".svg"
        label = (f"{h.freqs.f_min / 1e9:g}-{h.freqs.f_max / 1e9:g} GHz, "
                 f"M={h.freqs.count}")
        svgplot.svd_curves(svg, [(label, s.values)])
        print(f"wrote {svg}")
    return EXIT_OK


def _parse_bands(text: str):
    bands = []
    for i, part in enumerate(text.split(";")):
        fields = part.split(":")
        if len(fields) != 3:
            raise ConfigError(f"--bands entry {i}: expected "
                              f"'f_min_hz:f_max_hz:count'")
        try:
            bands.append(BandSpec(float(fields[0]), float(fields[1]),
                                  int(fields[2])))
        except ValueError as exc:
            raise ConfigError(f"--bands entry {i}: {exc}") from exc
    return tuple(bands)


def _parse_floats_list(text: str, flag: str):
    try:
        return tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError as exc:
        raise ConfigError(f"{flag}: {exc}") from exc


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        import dataclasses

        cfg = dataclasses.replace(cfg, rng_seed=args.seed)
    kwargs = {}
    if args.bands is not None:
        kwargs["bands"] = _parse_bands(args.bands)
    if args.distances is not None:
        kwargs["distances"] = _parse_floats_list(args.distances, "--distances")
    if args.snr is not None:
        kwargs["snr_db_list"] = _parse_floats_list(args.snr, "--snr")
    spec = SweepSpec(trials=args.trials, master_seed=args.master_seed,
                     angle_mode=args.angle_mode, workers=args.workers,
                     max_estimations=args.max_estimations, **kwargs)
    report = run_sweep(cfg, spec, args.out, plot=args.plot)
    print(f"wrote {report.paths['rows']} ({len(report.rows)} rows)")
    print(f"wrote {report.paths['summary']} ({len(report.summary)} cells)")
    for row in report.summary:
        print(f"  band {row[0]} d={row[4]:g} snr={row[5]:g}: exact "
              f"{row[8] * 100:.1f}%  within-1-bin {row[9] * 100:.1f}%  "
              f"median err {row[10]:g} bins")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdaoa",
        description="Conformal frequency-diverse metasurface AoA pipeline")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate",
                       help="synthesize both ports' reference patterns")
    p.add_argument("--config", default=None, help="JSON config path")
    p.add_argument("--out", default="fdaoa_out", help="output directory")
    p.add_argument("--seed", type=int, default=None,
                   help="override the config RNG seed")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("build-matrix",
                       help="cross-correlate two pattern files into a "
                            "sensing matrix")
    p.add_argument("port1", help="pattern file for port 1")
    p.add_argument("port2", help="pattern file for port 2")
    p.add_argument("--out", default="sensing_matrix.csv", help="output file")
    p.set_defaults(func=cmd_build_matrix)

    p = sub.add_parser("estimate", help="estimate the angle of arrival")
    p.add_argument("--matrix", required=True, help="sensing matrix file")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--measurement", help="measurement vector file")
    group.add_argument("--simulate-source",
                       help="'angle_deg,distance_m[,snr_db[,seed]]'")
    p.add_argument("--config", default=None,
                   help="JSON config path (for --simulate-source)")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--method", choices=["cgs", "matched-filter"], default="cgs")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--tikhonov", type=float, default=0.0)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("svd", help="normalized singular values of a matrix")
    p.add_argument("--matrix", required=True, help="sensing matrix file")
    p.add_argument("--out", default="svd_spectrum.csv", help="output CSV")
    p.add_argument("--plot", action="store_true", help="also write an SVG")
    p.set_defaults(func=cmd_svd)

    p = sub.add_parser("sweep", help="Monte-Carlo campaign over bands, "
                                     "distances and SNR levels")
    p.add_argument("--config", default=None, help="JSON config path")
    p.add_argument("--out", default="fdaoa_sweep", help="output directory")
    p.add_argument("--bands", default=None,
                   help="'f_min:f_max:count;...' (default: the four "
                        "reference band settings)")
    p.add_argument("--distances", default=None,
                   help="comma-separated meters (default 0.21,0.26,0.335)")
    p.add_argument("--snr", default=None,
                   help="comma-separated dB, 'inf' for noiseless "
                        "(default inf)")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=None,
                   help="override the config RNG seed (hardware draw)")
    p.add_argument("--master-seed", type=int, default=0,
                   help="seed for per-trial noise/angle draws")
    p.add_argument("--angle-mode", choices=["all", "random"],
                   default=ANGLE_MODE_ALL)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--max-estimations", type=int, default=1_000_000)
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FileFormatError, ShapeMismatchError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DegenerateInputError as exc:
        print(f"degenerate input: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (BelowCutoffError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
