"""Experiment configuration: defaults, JSON parsing and the aperture builder.

An empty config file yields the full default configuration: 45 mm outer
radius, 15 mm guide width, eps_r 2.2, 17 elements per aperture, 72 angle bins
at 5 degrees, reference distance 0.16 m, sweep band 8.5-11.5 GHz with 301
points.  Unknown keys are rejected; errors carry the offending key path.
"""

import json
import math
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import ConfigError
from .forward import (SIDE_AFTER, SIDE_BEFORE, ApertureConfig, MetaElement,
                      resonant_coupling_for_fraction, wrap_pi)
from .grids import AngleGrid, FrequencyGrid


@dataclass(frozen=True)
class SolverSettings:
    tol: float = 1e-6
    max_iter: int = 0            # 0 = automatic (min(20, angle bin count))
    tikhonov: float = 0.0


@dataclass(frozen=True)
class ElementSpec:
    """Explicit element entry for configs that pin the hardware layout."""

    f0_hz: float
    q: float
    azimuth_deg: float
    coupling_amp: float | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    radius_m: float = 0.045
    siw_width_m: float = 0.015
    rel_permittivity: float = 2.2
    design_f_min_hz: float = 8.5e9
    design_f_max_hz: float = 11.5e9
    f_min_hz: float = 8.5e9
    f_max_hz: float = 11.5e9
    f_count: int = 301
    angle_count: int = 72
    angle_step_deg: float = 5.0
    ref_distance_m: float = 0.16
    n_elements: int = 17
    q_min: float = 25.0
    q_max: float = 60.0
    resonant_radiated_fraction: float = 0.35
    gain_exponent: float = 1.0
    backlobe_floor: float = 0.10
    bend_detune: bool = False
    bend_detune_frac: float = 0.01
    feed_azimuth_deg: tuple[float, float] = (0.0, 180.0)
    rng_seed: int = 7
    noise_on_ports: bool = False
    solver: SolverSettings = field(default_factory=SolverSettings)
    elements: tuple[tuple[ElementSpec, ...], tuple[ElementSpec, ...]] | None = None


_RANGE_CHECKS = {
    "radius_m": lambda v: v > 0,
    "siw_width_m": lambda v: v > 0,
    "rel_permittivity": lambda v: v >= 1.0,
    "design_f_min_hz": lambda v: v > 0,
    "design_f_max_hz": lambda v: v > 0,
    "f_min_hz": lambda v: v > 0,
    "f_max_hz": lambda v: v > 0,
    "f_count": lambda v: v >= 1,
    "angle_count": lambda v: v >= 1,
    "angle_step_deg": lambda v: v > 0,
    "ref_distance_m": lambda v: v > 0,
    "n_elements": lambda v: v >= 1,
    "q_min": lambda v: v > 0,
    "q_max": lambda v: v > 0,
    "resonant_radiated_fraction": lambda v: 0.0 < v < 1.0,
    "gain_exponent": lambda v: v > 0,
    "backlobe_floor": lambda v: 0.0 <= v < 1.0,
    "bend_detune_frac": lambda v: 0.0 <= v < 1.0,
}

_INT_KEYS = {"f_count", "angle_count", "n_elements", "rng_seed"}
_BOOL_KEYS = {"bend_detune", "noise_on_ports"}


def _as_number(key, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError("expected a number", key=key)
    if not math.isfinite(value):
        raise ConfigError("value must be finite", key=key)
    return value


def _parse_element(entry, key):
    if not isinstance(entry, dict):
        raise ConfigError("expected an object", key=key)
    known = {"f0_hz", "q", "azimuth_deg", "coupling_amp"}
    for k in entry:
        if k not in known:
            raise ConfigError("unknown key", key=f"{key}.{k}")
    for req in ("f0_hz", "q", "azimuth_deg"):
        if req not in entry:
            raise ConfigError("missing required key", key=f"{key}.{req}")
    f0 = _as_number(f"{key}.f0_hz", entry["f0_hz"])
    q = _as_number(f"{key}.q", entry["q"])
    azimuth = _as_number(f"{key}.azimuth_deg", entry["azimuth_deg"])
    if f0 <= 0:
        raise ConfigError("must be positive", key=f"{key}.f0_hz")
    if q <= 0:
        raise ConfigError("must be positive", key=f"{key}.q")
    coupling = entry.get("coupling_amp")
    if coupling is not None:
        coupling = _as_number(f"{key}.coupling_amp", coupling)
        if coupling < 0:
            raise ConfigError("must be non-negative", key=f"{key}.coupling_amp")
    return ElementSpec(f0_hz=float(f0), q=float(q), azimuth_deg=float(azimuth),
                       coupling_amp=None if coupling is None else float(coupling))


def parse_config(data: dict) -> ExperimentConfig:
    """Validate a raw mapping and return the full configuration."""
    if not isinstance(data, dict):
        raise ConfigError("top-level config must be an object")
    known = {f.name for f in fields(ExperimentConfig)}
    out = {}
    for key, value in data.items():
        if key not in known:
            raise ConfigError("unknown key", key=key)
        if key == "solver":
            if not isinstance(value, dict):
                raise ConfigError("expected an object", key=key)
            solver_known = {f.name for f in fields(SolverSettings)}
            kw = {}
            for sk, sv in value.items():
                if sk not in solver_known:
                    raise ConfigError("unknown key", key=f"solver.{sk}")
                sv = _as_number(f"solver.{sk}", sv)
                if sk == "tol" and sv <= 0:
                    raise ConfigError("must be positive", key="solver.tol")
                if sk == "max_iter" and (sv < 0 or int(sv) != sv):
                    raise ConfigError("must be a non-negative integer",
                                      key="solver.max_iter")
                if sk == "tikhonov" and sv < 0:
                    raise ConfigError("must be non-negative", key="solver.tikhonov")
                kw[sk] = int(sv) if sk == "max_iter" else float(sv)
            out[key] = SolverSettings(**kw)
        elif key == "elements":
            if value is None:
                out[key] = None
                continue
            if not isinstance(value, list) or len(value) != 2:
                raise ConfigError("expected a two-entry list (one per port)",
                                  key=key)
            ports = []
            for p, entries in enumerate(value):
                if not isinstance(entries, list) or not entries:
                    raise ConfigError("expected a non-empty list",
                                      key=f"elements[{p}]")
                ports.append(tuple(
                    _parse_element(e, f"elements[{p}][{i}]")
                    for i, e in enumerate(entries)))
            out[key] = (ports[0], ports[1])
        elif key == "feed_azimuth_deg":
            if (not isinstance(value, list) or len(value) != 2
                    or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                               for v in value)):
                raise ConfigError("expected a two-entry list of numbers", key=key)
            out[key] = (float(value[0]), float(value[1]))
        elif key in _BOOL_KEYS:
            if not isinstance(value, bool):
                raise ConfigError("expected true or false", key=key)
            out[key] = value
        else:
            value = _as_number(key, value)
            check = _RANGE_CHECKS.get(key)
            if check is not None and not check(value):
                raise ConfigError("value out of range", key=key)
            if key in _INT_KEYS:
                if int(value) != value:
                    raise ConfigError("expected an integer", key=key)
                value = int(value)
            out[key] = float(value) if key not in _INT_KEYS else value
    cfg = ExperimentConfig(**out)
    _validate_cross_fields(cfg)
    return cfg


def _validate_cross_fields(cfg: ExperimentConfig):
    if cfg.design_f_max_hz <= cfg.design_f_min_hz:
        raise ConfigError("design_f_max_hz must exceed design_f_min_hz",
                          key="design_f_max_hz")
    if cfg.f_count > 1 and cfg.f_max_hz <= cfg.f_min_hz:
        raise ConfigError("f_max_hz must exceed f_min_hz", key="f_max_hz")
    if cfg.q_max < cfg.q_min:
        raise ConfigError("q_max must be >= q_min", key="q_max")
    if abs(cfg.angle_count * cfg.angle_step_deg - 360.0) > 1e-9:
        raise ConfigError("angle_count * angle_step_deg must equal 360",
                          key="angle_step_deg")
    if cfg.ref_distance_m <= cfg.radius_m:
        raise ConfigError("ref_distance_m must exceed radius_m",
                          key="ref_distance_m")
    cutoff = 299_792_458.0 / (2.0 * cfg.siw_width_m * math.sqrt(cfg.rel_permittivity))
    if cfg.f_min_hz <= cutoff:
        raise ConfigError(
            f"f_min_hz must exceed the guided cutoff ({cutoff:.4g} Hz)",
            key="f_min_hz")
    if cfg.elements is not None:
        for p, entries in enumerate(cfg.elements):
            for i, el in enumerate(entries):
                if not cfg.design_f_min_hz <= el.f0_hz <= cfg.design_f_max_hz:
                    raise ConfigError(
                        "resonance outside the design band",
                        key=f"elements[{p}][{i}].f0_hz")


def load_config(path: str | None) -> ExperimentConfig:
    """Read a JSON config file; None or an empty file gives the defaults."""
    if path is None:
        return ExperimentConfig()
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if not text.strip():
        return ExperimentConfig()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    return parse_config(data)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    out = {}
    for f in fields(ExperimentConfig):
        value = getattr(cfg, f.name)
        if f.name == "solver":
            out[f.name] = {"tol": value.tol, "max_iter": value.max_iter,
                           "tikhonov": value.tikhonov}
        elif f.name == "elements":
            if value is None:
                out[f.name] = None
            else:
                out[f.name] = [[
                    {k: v for k, v in (("f0_hz", e.f0_hz), ("q", e.q),
                                       ("azimuth_deg", e.azimuth_deg),
                                       ("coupling_amp", e.coupling_amp))
                     if v is not None}
                    for e in port] for port in value]
        elif f.name == "feed_azimuth_deg":
            out[f.name] = list(value)
        else:
            out[f.name] = value
    return out


def dump_config(cfg: ExperimentConfig, path: str):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config_to_dict(cfg), fh, indent=2, sort_keys=True)
        fh.write("\n")


def frequency_grid(cfg: ExperimentConfig) -> FrequencyGrid:
    return FrequencyGrid(cfg.f_min_hz, cfg.f_max_hz, cfg.f_count)


def angle_grid(cfg: ExperimentConfig) -> AngleGrid:
    return AngleGrid(cfg.angle_count, cfg.angle_step_deg)


def _random_side(rng, n_side, half_span, f_lo, f_hi, cfg):
    """Element parameters for one feed branch: sorted random azimuth offsets,
    stratified resonances (each branch covers the whole design band), Q drawn
    uniformly."""
    offsets = np.sort(rng.uniform(0.0, half_span, n_side))
    edges = np.linspace(f_lo, f_hi, n_side + 1)
    f0 = rng.uniform(edges[:-1], edges[1:])
    rng.shuffle(f0)
    q = rng.uniform(cfg.q_min, cfg.q_max, n_side)
    if cfg.bend_detune:
        f0 = f0 * (1.0 + rng.uniform(-cfg.bend_detune_frac,
                                     cfg.bend_detune_frac, n_side))
        f0 = np.clip(f0, f_lo, f_hi)
    return offsets, f0, q


def _build_random_port(cfg: ExperimentConfig, port_index: int) -> ApertureConfig:
    rng = np.random.default_rng((cfg.rng_seed, port_index))
    n = cfg.n_elements
    # Alternating split keeps the two ports' layouts distinct.
    n_before = n // 2 if port_index == 0 else n - n // 2
    n_after = n - n_before
    feed = math.radians(cfg.feed_azimuth_deg[port_index])
    half_span = math.pi / 2.0
    elements = []
    for side_name, n_side, sign in ((SIDE_BEFORE, n_before, -1.0),
                                    (SIDE_AFTER, n_after, +1.0)):
        if n_side == 0:
            continue
        offsets, f0, q = _random_side(rng, n_side, half_span,
                                      cfg.design_f_min_hz, cfg.design_f_max_hz,
                                      cfg)
        for off, f, qq in zip(offsets, f0, q):
            elements.append(MetaElement(
                resonance_freq=float(f),
                quality_factor=float(qq),
                coupling_amp=resonant_coupling_for_fraction(
                    cfg.resonant_radiated_fraction, float(qq)),
                azimuth=(feed + sign * float(off)) % (2.0 * math.pi),
                side_of_feed=side_name))
    return ApertureConfig(
        radius=cfg.radius_m, siw_width=cfg.siw_width_m,
        rel_permittivity=cfg.rel_permittivity, feed_azimuth=feed,
        elements=tuple(elements), arc_span=math.pi, port_id=port_index + 1,
        gain_exponent=cfg.gain_exponent, backlobe_floor=cfg.backlobe_floor)


def _build_explicit_port(cfg: ExperimentConfig, port_index: int) -> ApertureConfig:
    feed = math.radians(cfg.feed_azimuth_deg[port_index])
    groups = {SIDE_BEFORE: [], SIDE_AFTER: []}
    for spec in cfg.elements[port_index]:
        az = math.radians(spec.azimuth_deg) % (2.0 * math.pi)
        off = wrap_pi(az - feed)
        side = SIDE_BEFORE if off < 0 else SIDE_AFTER
        coupling = spec.coupling_amp
        if coupling is None:
            coupling = resonant_coupling_for_fraction(
                cfg.resonant_radiated_fraction, spec.q)
        groups[side].append((abs(off), MetaElement(
            resonance_freq=spec.f0_hz, quality_factor=spec.q,
            coupling_amp=coupling, azimuth=az, side_of_feed=side)))
    elements = []
    for side in (SIDE_BEFORE, SIDE_AFTER):
        elements.extend(el for _, el in sorted(groups[side], key=lambda t: t[0]))
    return ApertureConfig(
        radius=cfg.radius_m, siw_width=cfg.siw_width_m,
        rel_permittivity=cfg.rel_permittivity, feed_azimuth=feed,
        elements=tuple(elements), arc_span=math.pi, port_id=port_index + 1,
        gain_exponent=cfg.gain_exponent, backlobe_floor=cfg.backlobe_floor)


def build_apertures(cfg: ExperimentConfig) -> tuple[ApertureConfig, ApertureConfig]:
    """Both ports, either from explicit element lists or from the seeded RNG."""
    if cfg.elements is not None:
        return (_build_explicit_port(cfg, 0), _build_explicit_port(cfg, 1))
    return (_build_random_port(cfg, 0), _build_random_port(cfg, 1))
