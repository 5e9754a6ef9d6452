"""Artifact file formats: patterns, sensing matrices, vectors, results, spectra.

Primary formats are UTF-8 CSV with ``# key=value`` header lines so every
artifact is inspectable; floats are written with 17 significant digits and
round-trip value-exact.  A packed little-endian binary variant exists for
large pattern sweeps.  Angles are stored in degrees, frequencies in Hz,
distances in meters.  Parsers raise FileFormatError naming the offending row
or header item; they never propagate raw crashes on malformed text.
"""

import json
import math
import struct

import numpy as np

from .errors import FileFormatError
from .forward import SourceSpec
from .grids import AngleGrid, FrequencyGrid
from .sensing import MeasurementVector, NoiseSpec, SensingMatrix

FORMAT_VERSION = 1
_PATTERN_MAGIC = "fdaoa-pattern"
_MATRIX_MAGIC = "fdaoa-matrix"
_VECTOR_MAGIC = "fdaoa-vector"
_BINARY_MAGIC = b"FDAOAPB1"


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _read_lines(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read().splitlines()
    except UnicodeDecodeError as exc:
        raise FileFormatError(f"{path}: not a UTF-8 text file") from exc


def _parse_header(lines, magic, path):
    """Split '# key=value' header lines from data lines; validate the magic."""
    if not lines or not lines[0].startswith("# "):
        raise FileFormatError(f"{path}: missing '# {magic} v1' header line")
    tag = lines[0][2:].strip()
    if tag != f"{magic} v{FORMAT_VERSION}":
        raise FileFormatError(f"{path}: bad magic line {tag!r}, "
                              f"expected '{magic} v{FORMAT_VERSION}'")
    meta = {}
    i = 1
    while i < len(lines) and lines[i].startswith("#"):
        body = lines[i][1:].strip()
        if body:
            if "=" not in body:
                raise FileFormatError(f"{path}: line {i + 1}: malformed header "
                                      f"entry {body!r}")
            key, _, value = body.partition("=")
            meta[key.strip()] = value.strip()
        i += 1
    return meta, i


def _meta_float(meta, key, path):
    if key not in meta:
        raise FileFormatError(f"{path}: missing header key {key}")
    try:
        return float(meta[key])
    except ValueError as exc:
        raise FileFormatError(f"{path}: header key {key} is not a number") from exc


def _meta_int(meta, key, path):
    v = _meta_float(meta, key, path)
    if int(v) != v:
        raise FileFormatError(f"{path}: header key {key} must be an integer")
    return int(v)


def _grids_from_meta(meta, path):
    try:
        freqs = FrequencyGrid(_meta_float(meta, "f_min_hz", path),
                              _meta_float(meta, "f_max_hz", path),
                              _meta_int(meta, "f_count", path))
        angles = AngleGrid(_meta_int(meta, "angle_count", path),
                           _meta_float(meta, "angle_step_deg", path))
    except ValueError as exc:
        raise FileFormatError(f"{path}: invalid grid header: {exc}") from exc
    return freqs, angles


def _grid_header_lines(freqs: FrequencyGrid, angles: AngleGrid):
    return [f"# f_min_hz={_fmt(freqs.f_min)}",
            f"# f_max_hz={_fmt(freqs.f_max)}",
            f"# f_count={freqs.count}",
            f"# angle_count={angles.count}",
            f"# angle_step_deg={_fmt(angles.step_deg)}"]


def _freq_index(value, freqs: FrequencyGrid, path, row):
    if freqs.count == 1:
        idx = 0
    else:
        step = (freqs.f_max - freqs.f_min) / (freqs.count - 1)
        idx = int(round((value - freqs.f_min) / step))
    if not 0 <= idx < freqs.count or abs(value - freqs.values[idx]) > 1e-6 * max(1.0, abs(value)):
        raise FileFormatError(f"{path}: row {row}: frequency {value!r} is not "
                              f"on the declared grid")
    return idx


def _angle_index(value, angles: AngleGrid, path, row):
    idx = int(round(value / angles.step_deg))
    if not 0 <= idx < angles.count or abs(value - idx * angles.step_deg) > 1e-9:
        raise FileFormatError(f"{path}: row {row}: angle {value!r} is not on "
                              f"the declared grid")
    return idx


def _parse_floats(line, arity, path, row):
    parts = line.split(",")
    if len(parts) != arity:
        raise FileFormatError(f"{path}: row {row}: expected {arity} "
                              f"comma-separated values, got {len(parts)}")
    out = []
    for p in parts:
        try:
            out.append(float(p))
        except ValueError as exc:
            raise FileFormatError(f"{path}: row {row}: not a number: "
                                  f"{p.strip()!r}") from exc
    return out


# -- pattern files ----------------------------------------------------------


def save_pattern(path, pattern: np.ndarray, freqs: FrequencyGrid,
                 angles: AngleGrid, port_id: int, ref_distance_m: float):
    pattern = np.asarray(pattern, dtype=np.complex128)
    if pattern.shape != (freqs.count, angles.count):
        raise ValueError(f"pattern shape {pattern.shape} does not match grids")
    fvals = freqs.values
    avals = angles.values_deg
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {_PATTERN_MAGIC} v{FORMAT_VERSION}\n")
        fh.write(f"# port_id={int(port_id)}\n")
        fh.write(f"# ref_distance_m={_fmt(ref_distance_m)}\n")
        for line in _grid_header_lines(freqs, angles):
            fh.write(line + "\n")
        fh.write("freq_hz,angle_deg,re,im\n")
        for i in range(freqs.count):
            fi = _fmt(fvals[i])
            for j in range(angles.count):
                v = pattern[i, j]
                fh.write(f"{fi},{_fmt(avals[j])},{_fmt(v.real)},{_fmt(v.imag)}\n")


def load_pattern(path):
    """Returns (pattern, meta); row order in the file is irrelevant."""
    lines = _read_lines(path)
    meta, start = _parse_header(lines, _PATTERN_MAGIC, path)
    known = {"port_id", "ref_distance_m", "f_min_hz", "f_max_hz", "f_count",
             "angle_count", "angle_step_deg"}
    for key in meta:
        if key not in known:
            raise FileFormatError(f"{path}: unknown header key {key}")
    freqs, angles = _grids_from_meta(meta, path)
    port_id = _meta_int(meta, "port_id", path)
    ref_distance = _meta_float(meta, "ref_distance_m", path)
    if start >= len(lines) or lines[start].strip() != "freq_hz,angle_deg,re,im":
        raise FileFormatError(f"{path}: line {start + 1}: expected column "
                              f"header 'freq_hz,angle_deg,re,im'")
    pattern = np.zeros((freqs.count, angles.count), dtype=np.complex128)
    seen = np.zeros((freqs.count, angles.count), dtype=bool)
    for k, line in enumerate(lines[start + 1:], start=start + 2):
        if not line.strip():
            continue
        f, a, re, im = _parse_floats(line, 4, path, k)
        i = _freq_index(f, freqs, path, k)
        j = _angle_index(a, angles, path, k)
        if seen[i, j]:
            raise FileFormatError(f"{path}: row {k}: duplicate cell "
                                  f"(freq {f!r}, angle {a!r})")
        seen[i, j] = True
        pattern[i, j] = complex(re, im)
    if not seen.all():
        i, j = np.argwhere(~seen)[0]
        raise FileFormatError(
            f"{path}: incomplete grid; missing cell "
            f"(freq {freqs.values[i]!r}, angle {angles.values_deg[j]!r})")
    return pattern, {"port_id": port_id, "ref_distance_m": ref_distance,
                     "freqs": freqs, "angles": angles}


def save_pattern_binary(path, pattern: np.ndarray, freqs: FrequencyGrid,
                        angles: AngleGrid, port_id: int, ref_distance_m: float):
    pattern = np.ascontiguousarray(pattern, dtype=np.complex128)
    if pattern.shape != (freqs.count, angles.count):
        raise ValueError(f"pattern shape {pattern.shape} does not match grids")
    header = json.dumps({
        "port_id": int(port_id), "ref_distance_m": float(ref_distance_m),
        "f_min_hz": freqs.f_min, "f_max_hz": freqs.f_max, "f_count": freqs.count,
        "angle_count": angles.count, "angle_step_deg": angles.step_deg,
    }, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_BINARY_MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, len(header)))
        fh.write(header)
        fh.write(pattern.astype("<c16").tobytes())


def load_pattern_binary(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 16 or blob[:8] != _BINARY_MAGIC:
        raise FileFormatError(f"{path}: not a binary pattern file (bad magic)")
    version, hlen = struct.unpack("<II", blob[8:16])
    if version != FORMAT_VERSION:
        raise FileFormatError(f"{path}: unsupported binary version {version}")
    if len(blob) < 16 + hlen:
        raise FileFormatError(f"{path}: truncated header")
    try:
        meta = json.loads(blob[16:16 + hlen].decode("utf-8"))
        freqs = FrequencyGrid(meta["f_min_hz"], meta["f_max_hz"], meta["f_count"])
        angles = AngleGrid(meta["angle_count"], meta["angle_step_deg"])
        port_id = int(meta["port_id"])
        ref_distance = float(meta["ref_distance_m"])
    except (ValueError, KeyError, TypeError) as exc:
        raise FileFormatError(f"{path}: invalid binary header: {exc}") from exc
    payload = blob[16 + hlen:]
    expect = freqs.count * angles.count * 16
    if len(payload) != expect:
        raise FileFormatError(f"{path}: payload is {len(payload)} bytes, "
                              f"expected {expect}")
    pattern = np.frombuffer(payload, dtype="<c16").reshape(
        freqs.count, angles.count).astype(np.complex128)
    return pattern, {"port_id": port_id, "ref_distance_m": ref_distance,
                     "freqs": freqs, "angles": angles}


# -- sensing matrix files ---------------------------------------------------


def save_matrix(path, h: SensingMatrix):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {_MATRIX_MAGIC} v{FORMAT_VERSION}\n")
        fh.write(f"# ref_distance_m={_fmt(h.ref_distance)}\n")
        for line in _grid_header_lines(h.freqs, h.angles):
            fh.write(line + "\n")
        fh.write("freq_hz,angle_deg,re,im\n")
        fvals = h.freqs.values
        avals = h.angles.values_deg
        for i in range(h.freqs.count):
            fi = _fmt(fvals[i])
            for j in range(h.angles.count):
                v = h.entries[i, j]
                fh.write(f"{fi},{_fmt(avals[j])},{_fmt(v.real)},{_fmt(v.imag)}\n")


def load_matrix(path) -> SensingMatrix:
    lines = _read_lines(path)
    meta, start = _parse_header(lines, _MATRIX_MAGIC, path)
    known = {"ref_distance_m", "f_min_hz", "f_max_hz", "f_count",
             "angle_count", "angle_step_deg"}
    for key in meta:
        if key not in known:
            raise FileFormatError(f"{path}: unknown header key {key}")
    freqs, angles = _grids_from_meta(meta, path)
    ref_distance = _meta_float(meta, "ref_distance_m", path)
    if start >= len(lines) or lines[start].strip() != "freq_hz,angle_deg,re,im":
        raise FileFormatError(f"{path}: line {start + 1}: expected column "
                              f"header 'freq_hz,angle_deg,re,im'")
    entries = np.zeros((freqs.count, angles.count), dtype=np.complex128)
    seen = np.zeros((freqs.count, angles.count), dtype=bool)
    for k, line in enumerate(lines[start + 1:], start=start + 2):
        if not line.strip():
            continue
        f, a, re, im = _parse_floats(line, 4, path, k)
        i = _freq_index(f, freqs, path, k)
        j = _angle_index(a, angles, path, k)
        if seen[i, j]:
            raise FileFormatError(f"{path}: row {k}: duplicate cell "
                                  f"(freq {f!r}, angle {a!r})")
        seen[i, j] = True
        entries[i, j] = complex(re, im)
    if not seen.all():
        i, j = np.argwhere(~seen)[0]
        raise FileFormatError(
            f"{path}: incomplete grid; missing cell "
            f"(freq {freqs.values[i]!r}, angle {angles.values_deg[j]!r})")
    return SensingMatrix(entries, freqs, angles, ref_distance)


# -- measurement vector files -----------------------------------------------


def save_vector(path, g: MeasurementVector):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {_VECTOR_MAGIC} v{FORMAT_VERSION}\n")
        fh.write(f"# f_min_hz={_fmt(g.freqs.f_min)}\n")
        fh.write(f"# f_max_hz={_fmt(g.freqs.f_max)}\n")
        fh.write(f"# f_count={g.freqs.count}\n")
        if g.truth is not None:
            fh.write(f"# truth_angle_deg={_fmt(math.degrees(g.truth.angle))}\n")
            fh.write(f"# truth_distance_m={_fmt(g.truth.distance)}\n")
        if g.noise is not None:
            fh.write(f"# snr_db={_fmt(g.noise.snr_db)}\n")
            fh.write(f"# noise_seed={g.noise.seed}\n")
        fh.write("freq_hz,re,im\n")
        fvals = g.freqs.values
        for i in range(g.freqs.count):
            v = g.entries[i]
            fh.write(f"{_fmt(fvals[i])},{_fmt(v.real)},{_fmt(v.imag)}\n")


def load_vector(path) -> MeasurementVector:
    lines = _read_lines(path)
    meta, start = _parse_header(lines, _VECTOR_MAGIC, path)
    known = {"f_min_hz", "f_max_hz", "f_count", "truth_angle_deg",
             "truth_distance_m", "snr_db", "noise_seed"}
    for key in meta:
        if key not in known:
            raise FileFormatError(f"{path}: unknown header key {key}")
    try:
        freqs = FrequencyGrid(_meta_float(meta, "f_min_hz", path),
                              _meta_float(meta, "f_max_hz", path),
                              _meta_int(meta, "f_count", path))
    except ValueError as exc:
        raise FileFormatError(f"{path}: invalid grid header: {exc}") from exc
    truth = None
    if "truth_angle_deg" in meta or "truth_distance_m" in meta:
        try:
            truth = SourceSpec(
                angle=math.radians(_meta_float(meta, "truth_angle_deg", path)),
                distance=_meta_float(meta, "truth_distance_m", path))
        except ValueError as exc:
            raise FileFormatError(f"{path}: invalid truth header: {exc}") from exc
    noise = None
    if "snr_db" in meta or "noise_seed" in meta:
        noise = NoiseSpec(snr_db=_meta_float(meta, "snr_db", path),
                          seed=_meta_int(meta, "noise_seed", path))
    if start >= len(lines) or lines[start].strip() != "freq_hz,re,im":
        raise FileFormatError(f"{path}: line {start + 1}: expected column "
                              f"header 'freq_hz,re,im'")
    entries = np.zeros(freqs.count, dtype=np.complex128)
    seen = np.zeros(freqs.count, dtype=bool)
    for k, line in enumerate(lines[start + 1:], start=start + 2):
        if not line.strip():
            continue
        f, re, im = _parse_floats(line, 3, path, k)
        i = _freq_index(f, freqs, path, k)
        if seen[i]:
            raise FileFormatError(f"{path}: row {k}: duplicate frequency {f!r}")
        seen[i] = True
        entries[i] = complex(re, im)
    if not seen.all():
        i = int(np.flatnonzero(~seen)[0])
        raise FileFormatError(f"{path}: incomplete sweep; missing frequency "
                              f"{freqs.values[i]!r}")
    return MeasurementVector(entries, freqs, truth=truth, noise=noise)


# -- estimation results and spectra -----------------------------------------


def save_result(path, result):
    payload = {
        "format": "fdaoa-result",
        "version": FORMAT_VERSION,
        "method": result.method,
        "bin_index": result.bin_index,
        "angle_deg": result.angle_deg,
        "residual_norm": result.residual_norm,
        "iterations": result.iterations,
        "breakdown": result.breakdown,
        "angle_count": result.profile.angles.count,
        "angle_step_deg": result.profile.angles.step_deg,
        "profile_re": [float(v) for v in result.profile.values.real],
        "profile_im": [float(v) for v in result.profile.values.imag],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def load_result(path):
    from .estimator import AoAProfile, EstimationResult

    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise FileFormatError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != "fdaoa-result":
        raise FileFormatError(f"{path}: not an estimation result file")
    try:
        angles = AngleGrid(int(payload["angle_count"]),
                           float(payload["angle_step_deg"]))
        values = (np.asarray(payload["profile_re"], dtype=np.float64)
                  + 1j * np.asarray(payload["profile_im"], dtype=np.float64))
        return EstimationResult(
            bin_index=int(payload["bin_index"]),
            angle_deg=float(payload["angle_deg"]),
            profile=AoAProfile(values, angles),
            residual_norm=float(payload["residual_norm"]),
            iterations=int(payload["iterations"]),
            method=str(payload["method"]),
            breakdown=bool(payload["breakdown"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"{path}: invalid result payload: {exc}") from exc


def save_svd(path, spectrum):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("index,normalized_value\n")
        for i, v in enumerate(spectrum.values):
            fh.write(f"{i},{_fmt(v)}\n")


def load_svd(path):
    from .estimator import SvdSpectrum

    lines = _read_lines(path)
    if not lines or lines[0].strip() != "index,normalized_value":
        raise FileFormatError(f"{path}: expected header 'index,normalized_value'")
    values = []
    for k, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        idx, val = _parse_floats(line, 2, path, k)
        if int(idx) != len(values):
            raise FileFormatError(f"{path}: row {k}: index out of order")
        values.append(val)
    try:
        return SvdSpectrum(np.asarray(values))
    except ValueError as exc:
        raise FileFormatError(f"{path}: invalid spectrum: {exc}") from exc


def save_manifest(path, manifest: dict):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_manifest(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise FileFormatError(f"{path}: invalid JSON: {exc}") from exc
