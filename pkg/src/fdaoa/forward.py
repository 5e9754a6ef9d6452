"""Parametric forward model of the conformal frequency-diverse antenna pair.

Each port is a half-cylinder guided-wave aperture dressed with resonant
radiating elements and fed at the arc midpoint; guided waves travel both ways
from the feed and are progressively depleted by the elements they pass.  The
received port signal for a point source is the superposition of the
spherical-wave contributions of all elements, weighted by the guided
amplitude reaching each element, its resonator response and its shadowed
embedded-element pattern.  The same signal model serves radiation and
reception (reciprocity); the time convention is e^{+j omega t} with outgoing
waves e^{-j k r} / r.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import BelowCutoffError
from .grids import AngleGrid, FrequencyGrid

C_LIGHT = _kernels.C_LIGHT

SIDE_BEFORE = "before"
SIDE_AFTER = "after"


def wrap_pi(angle: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    w = math.fmod(angle + math.pi, 2.0 * math.pi)
    if w <= 0.0:
        w += 2.0 * math.pi
    return w - math.pi


@dataclass(frozen=True)
class MetaElement:
    """One resonant radiator on the cylinder wall."""

    resonance_freq: float        # Hz
    quality_factor: float
    coupling_amp: float
    azimuth: float               # rad, absolute position on the cylinder
    side_of_feed: str = SIDE_AFTER

    def __post_init__(self):
        if not (math.isfinite(self.resonance_freq) and self.resonance_freq > 0):
            raise ValueError("resonance_freq must be positive and finite")
        if not (math.isfinite(self.quality_factor) and self.quality_factor > 0):
            raise ValueError("quality_factor must be positive")
        if not (math.isfinite(self.coupling_amp) and self.coupling_amp >= 0):
            raise ValueError("coupling_amp must be non-negative")
        if self.side_of_feed not in (SIDE_BEFORE, SIDE_AFTER):
            raise ValueError("side_of_feed must be 'before' or 'after'")


@dataclass(frozen=True)
class SourceSpec:
    """Transmit probe: azimuth (rad), distance from the cylinder axis, drive."""

    angle: float
    distance: float
    amplitude: complex = 1.0 + 0.0j

    def __post_init__(self):
        if not (math.isfinite(self.distance) and self.distance > 0):
            raise ValueError("distance must be positive")
        if not math.isfinite(self.angle):
            raise ValueError("angle must be finite")


@dataclass(frozen=True)
class ApertureConfig:
    """One semicircular guided-wave antenna.

    ``gain_exponent`` shapes the embedded-element pattern cos(psi)**e;
    ``backlobe_floor`` is an optional minimum pattern amplitude modelling
    curvature diffraction into the shadow region (0 = hard shadow).
    Element ordering must be monotonic in arc length from the feed within
    each side group.
    """

    radius: float = 0.045
    siw_width: float = 0.015
    rel_permittivity: float = 2.2
    feed_azimuth: float = 0.0
    elements: tuple[MetaElement, ...] = field(default_factory=tuple)
    arc_span: float = math.pi
    port_id: int = 1
    gain_exponent: float = 1.0
    backlobe_floor: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if self.radius <= 0 or self.siw_width <= 0:
            raise ValueError("radius and siw_width must be positive")
        if self.rel_permittivity < 1.0:
            raise ValueError("rel_permittivity must be >= 1")
        if not 0 < self.arc_span <= 2.0 * math.pi:
            raise ValueError("arc_span must lie in (0, 2*pi]")
        if self.port_id not in (1, 2):
            raise ValueError("port_id must be 1 or 2")
        if self.gain_exponent <= 0:
            raise ValueError("gain_exponent must be positive")
        if not 0.0 <= self.backlobe_floor < 1.0:
            raise ValueError("backlobe_floor must lie in [0, 1)")
        half = self.arc_span / 2.0 + 1e-12
        last_arc = {SIDE_BEFORE: -1.0, SIDE_AFTER: -1.0}
        for i, el in enumerate(self.elements):
            off = wrap_pi(el.azimuth - self.feed_azimuth)
            if abs(off) > half:
                raise ValueError(f"element {i} azimuth outside the aperture arc")
            s = self.radius * abs(off)
            if s < last_arc[el.side_of_feed]:
                raise ValueError(
                    f"element {i} breaks arc-length ordering on side "
                    f"{el.side_of_feed!r}")
            last_arc[el.side_of_feed] = s

    @property
    def cutoff_freq(self) -> float:
        """Guided-mode cutoff of the dielectric-filled guide."""
        return C_LIGHT / (2.0 * self.siw_width * math.sqrt(self.rel_permittivity))

    def arc_length_from_feed(self, elem_index: int) -> float:
        el = self.elements[elem_index]
        return self.radius * abs(wrap_pi(el.azimuth - self.feed_azimuth))


def resonant_coupling_for_fraction(fraction: float, quality_factor: float) -> float:
    """Coupling amplitude that radiates the given power fraction at resonance."""
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must lie in (0, 1)")
    return math.sqrt(fraction / (1.0 - fraction)) / quality_factor


def lorentzian_response(elem: MetaElement, f: float) -> complex:
    """Resonator response A f^2 / (f0^2 - f^2 + j f f0 / Q)."""
    if not (math.isfinite(f) and f > 0):
        raise ValueError("frequency must be positive and finite")
    f0 = elem.resonance_freq
    return elem.coupling_amp * f * f / (f0 * f0 - f * f
                                        + 1j * (f * f0 / elem.quality_factor))


def radiated_fraction(elem: MetaElement, f: float) -> float:
    """Fraction of guided power radiated at f; saturates below 1."""
    a2 = abs(lorentzian_response(elem, f)) ** 2
    return a2 / (1.0 + a2)


def guided_wavenumber(aperture: ApertureConfig, f: float) -> float:
    """Propagation constant of the guided mode, rad/m."""
    if not math.isfinite(f):
        raise ValueError("frequency must be finite")
    if f <= aperture.cutoff_freq:
        raise BelowCutoffError(
            f"{f:.6g} Hz is at or below the guided cutoff "
            f"{aperture.cutoff_freq:.6g} Hz")
    k0 = 2.0 * math.pi * f / C_LIGHT
    return math.sqrt(aperture.rel_permittivity * k0 * k0
                     - (math.pi / aperture.siw_width) ** 2)


def guided_amplitude(aperture: ApertureConfig, elem_index: int, f: float) -> complex:
    """Guided wave reaching element n: feed-to-element phase times the
    transmission of every element nearer the feed on the same branch."""
    if not 0 <= elem_index < len(aperture.elements):
        raise IndexError(f"element index {elem_index} out of range")
    beta = guided_wavenumber(aperture, f)
    el = aperture.elements[elem_index]
    depletion = 1.0
    for m, other in enumerate(aperture.elements):
        if m == elem_index or other.side_of_feed != el.side_of_feed:
            continue
        if aperture.arc_length_from_feed(m) < aperture.arc_length_from_feed(elem_index) \
                or (aperture.arc_length_from_feed(m) == aperture.arc_length_from_feed(elem_index)
                    and m < elem_index):
            depletion *= math.sqrt(1.0 - radiated_fraction(other, f))
    s = aperture.arc_length_from_feed(elem_index)
    return complex(math.cos(beta * s), -math.sin(beta * s)) * depletion


def element_gain(elem: MetaElement, aperture: ApertureConfig,
                 source: SourceSpec) -> float:
    """Shadowed embedded-element pattern max(0, cos psi)**e, floored by the
    aperture's backlobe level."""
    if source.distance <= aperture.radius:
        raise ValueError("source distance must exceed the aperture radius")
    px = aperture.radius * math.cos(elem.azimuth)
    py = aperture.radius * math.sin(elem.azimuth)
    dx = source.distance * math.cos(source.angle) - px
    dy = source.distance * math.sin(source.angle) - py
    r = math.hypot(dx, dy)
    cospsi = (math.cos(elem.azimuth) * dx + math.sin(elem.azimuth) * dy) / r
    g = max(cospsi, 0.0) ** aperture.gain_exponent
    return max(g, aperture.backlobe_floor)


def _element_tables(aperture: ApertureConfig):
    az = np.array([el.azimuth for el in aperture.elements], dtype=np.float64)
    arc = np.array([aperture.arc_length_from_feed(i)
                    for i in range(len(aperture.elements))], dtype=np.float64)
    side = np.array([0 if el.side_of_feed == SIDE_BEFORE else 1
                     for el in aperture.elements], dtype=np.int8)
    f0 = np.array([el.resonance_freq for el in aperture.elements], dtype=np.float64)
    q = np.array([el.quality_factor for el in aperture.elements], dtype=np.float64)
    amp = np.array([el.coupling_amp for el in aperture.elements], dtype=np.float64)
    return az, arc, side, f0, q, amp


def synth_pattern(aperture: ApertureConfig, angles_rad: np.ndarray,
                  freqs_hz: np.ndarray, distance: float,
                  amplitude: complex = 1.0 + 0.0j,
                  backend: str | None = None) -> np.ndarray:
    """Raw-array sweep used by pattern_sweep, received_signal and measure.

    All three must share this code path so that a single-angle measurement is
    bit-identical to the matching column of a full sweep.
    """
    freqs_hz = np.atleast_1d(np.asarray(freqs_hz, dtype=np.float64))
    angles_rad = np.atleast_1d(np.asarray(angles_rad, dtype=np.float64))
    if freqs_hz.size == 0 or angles_rad.size == 0:
        raise ValueError("frequency and angle arrays must be non-empty")
    if not np.all(np.isfinite(freqs_hz)):
        raise ValueError("frequencies must be finite")
    if distance <= aperture.radius:
        raise ValueError("source distance must exceed the aperture radius")
    if freqs_hz.min() <= aperture.cutoff_freq:
        raise BelowCutoffError(
            f"sweep reaches {freqs_hz.min():.6g} Hz, at or below the guided "
            f"cutoff {aperture.cutoff_freq:.6g} Hz")
    az, arc, side, f0, q, amp = _element_tables(aperture)
    out = _kernels.synth_patterns(
        freqs_hz, angles_rad, float(distance), aperture.radius,
        aperture.siw_width, aperture.rel_permittivity, aperture.gain_exponent,
        aperture.backlobe_floor, az, arc, side, f0, q, amp, backend=backend)
    if amplitude != 1.0 + 0.0j:
        out = out * complex(amplitude)
    return out


def received_signal(aperture: ApertureConfig, source: SourceSpec, f: float,
                    backend: str | None = None) -> complex:
    """Complex port signal for one source and one frequency."""
    if not (math.isfinite(f) and f > 0):
        raise ValueError("frequency must be positive and finite")
    out = synth_pattern(aperture, np.array([source.angle]), np.array([f]),
                        source.distance, amplitude=source.amplitude,
                        backend=backend)
    return complex(out[0, 0])


def pattern_sweep(aperture: ApertureConfig, angles: AngleGrid,
                  freqs: FrequencyGrid, distance: float,
                  backend: str | None = None) -> np.ndarray:
    """M x N port response: rows are frequencies, columns are grid angles."""
    return synth_pattern(aperture, angles.values_rad, freqs.values, distance,
                         backend=backend)
