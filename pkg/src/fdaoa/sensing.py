"""Cross-correlation sensing matrix and measurement vectors.

The sensing matrix entry H(i, j) is the product of the two port signals
V1 * conj(V2) for frequency i and reference angle j, which cancels any phase
(or distance) reference common to both ports.  Measurement vectors g are the
same cross-correlated quantity for an unknown source, optionally with
additive circular complex Gaussian noise.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, ShapeMismatchError
from .forward import ApertureConfig, SourceSpec, synth_pattern
from .grids import AngleGrid, FrequencyGrid


@dataclass(frozen=True)
class NoiseSpec:
    snr_db: float
    seed: int


@dataclass(frozen=True)
class SensingMatrix:
    entries: np.ndarray          # complex M x N
    freqs: FrequencyGrid
    angles: AngleGrid
    ref_distance: float

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=np.complex128)
        object.__setattr__(self, "entries", e)
        if e.ndim != 2 or e.shape != (self.freqs.count, self.angles.count):
            raise ShapeMismatchError(
                f"entries shape {e.shape} does not match grids "
                f"({self.freqs.count}, {self.angles.count})")
        if not (np.all(np.isfinite(e.real)) and np.all(np.isfinite(e.imag))):
            raise ValueError("sensing matrix entries must be finite")
        if self.ref_distance <= 0:
            raise ValueError("ref_distance must be positive")

    @property
    def shape(self):
        return self.entries.shape


@dataclass(frozen=True)
class MeasurementVector:
    entries: np.ndarray          # complex M
    freqs: FrequencyGrid
    truth: SourceSpec | None = None
    noise: NoiseSpec | None = None

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=np.complex128).reshape(-1)
        object.__setattr__(self, "entries", e)
        if e.shape[0] != self.freqs.count:
            raise ShapeMismatchError(
                f"vector length {e.shape[0]} does not match the frequency "
                f"grid ({self.freqs.count})")


def cross_correlate(v1, v2):
    """V1 * conj(V2); any phase common to both arguments cancels."""
    return np.multiply(v1, np.conj(v2))


def build_sensing_matrix(p1: np.ndarray, p2: np.ndarray, freqs: FrequencyGrid,
                         angles: AngleGrid, ref_distance: float) -> SensingMatrix:
    """Elementwise cross-correlation of the two port patterns."""
    p1 = np.asarray(p1, dtype=np.complex128)
    p2 = np.asarray(p2, dtype=np.complex128)
    if p1.shape != p2.shape:
        raise ShapeMismatchError(f"port patterns differ: {p1.shape} vs {p2.shape}")
    if p1.shape != (freqs.count, angles.count):
        raise ShapeMismatchError(
            f"pattern shape {p1.shape} does not match grids "
            f"({freqs.count}, {angles.count})")
    return SensingMatrix(cross_correlate(p1, p2), freqs, angles, ref_distance)


def measure(source: SourceSpec, freqs: FrequencyGrid,
            apertures: tuple[ApertureConfig, ApertureConfig],
            backend: str | None = None) -> MeasurementVector:
    """Cross-correlated two-port response of one source over the sweep.

    Shares the sweep kernel with pattern_sweep, so a source at a grid angle
    and the reference distance reproduces the matching sensing-matrix column
    exactly.
    """
    ap1, ap2 = apertures
    angles = np.array([source.angle])
    v1 = synth_pattern(ap1, angles, freqs.values, source.distance,
                       amplitude=source.amplitude, backend=backend)[:, 0]
    v2 = synth_pattern(ap2, angles, freqs.values, source.distance,
                       amplitude=source.amplitude, backend=backend)[:, 0]
    return MeasurementVector(cross_correlate(v1, v2), freqs, truth=source)


def add_noise(g: MeasurementVector, snr_db: float, seed: int) -> MeasurementVector:
    """Add circular complex AWGN at the requested SNR.

    Noise power is referenced to the mean signal power over the sweep:
    E|n|^2 = mean(|g|^2) / 10^(snr_db/10), split evenly between the real and
    imaginary parts.  Deterministic per seed.
    """
    if g.entries.size == 0:
        raise DegenerateInputError("cannot add noise to an empty vector")
    signal_power = float(np.mean(np.abs(g.entries) ** 2))
    if math.isinf(snr_db):
        noisy = g.entries.copy()
    else:
        noise_power = signal_power * 10.0 ** (-snr_db / 10.0)
        rng = np.random.default_rng(seed)
        draws = rng.standard_normal((2, g.entries.shape[0]))
        noise = math.sqrt(noise_power / 2.0) * (draws[0] + 1j * draws[1])
        noisy = g.entries + noise
    return MeasurementVector(noisy, g.freqs, truth=g.truth,
                             noise=NoiseSpec(snr_db=float(snr_db), seed=int(seed)))


def measure_noisy(source: SourceSpec, freqs: FrequencyGrid,
                  apertures: tuple[ApertureConfig, ApertureConfig],
                  snr_db: float, seed: int, on_ports: bool = False,
                  backend: str | None = None) -> MeasurementVector:
    """Measurement with noise either on the correlated vector (default) or
    injected per port before correlation (sequential-switch model)."""
    if not on_ports or math.isinf(snr_db):
        return add_noise(measure(source, freqs, apertures, backend=backend),
                         snr_db, seed)
    ap1, ap2 = apertures
    angles = np.array([source.angle])
    v1 = synth_pattern(ap1, angles, freqs.values, source.distance,
                       amplitude=source.amplitude, backend=backend)[:, 0]
    v2 = synth_pattern(ap2, angles, freqs.values, source.distance,
                       amplitude=source.amplitude, backend=backend)[:, 0]
    rng = np.random.default_rng(seed)
    corrupted = []
    for v in (v1, v2):
        noise_power = float(np.mean(np.abs(v) ** 2)) * 10.0 ** (-snr_db / 10.0)
        draws = rng.standard_normal((2, v.shape[0]))
        corrupted.append(v + math.sqrt(noise_power / 2.0) * (draws[0] + 1j * draws[1]))
    return MeasurementVector(cross_correlate(corrupted[0], corrupted[1]), freqs,
                             truth=source,
                             noise=NoiseSpec(snr_db=float(snr_db), seed=int(seed)))
