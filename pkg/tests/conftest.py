import numpy as np
import pytest

from fdaoa import (ApertureConfig, ExperimentConfig, MetaElement,
                   angle_grid, build_apertures, build_sensing_matrix,
                   frequency_grid, pattern_sweep,
                   resonant_coupling_for_fraction)


@pytest.fixture(scope="session")
def default_cfg():
    return ExperimentConfig()


@pytest.fixture(scope="session")
def apertures(default_cfg):
    return build_apertures(default_cfg)


@pytest.fixture(scope="session")
def angles(default_cfg):
    return angle_grid(default_cfg)


@pytest.fixture(scope="session")
def full_freqs(default_cfg):
    return frequency_grid(default_cfg)


@pytest.fixture(scope="session")
def full_h(default_cfg, apertures, angles, full_freqs):
    ap1, ap2 = apertures
    p1 = pattern_sweep(ap1, angles, full_freqs, default_cfg.ref_distance_m)
    p2 = pattern_sweep(ap2, angles, full_freqs, default_cfg.ref_distance_m)
    return build_sensing_matrix(p1, p2, full_freqs, angles,
                                default_cfg.ref_distance_m)


def make_element(f0=10e9, q=40.0, fraction=0.35, azimuth=0.0, side="after"):
    return MetaElement(
        resonance_freq=f0, quality_factor=q,
        coupling_amp=resonant_coupling_for_fraction(fraction, q),
        azimuth=azimuth, side_of_feed=side)


def make_aperture(elements, feed_azimuth=0.0, floor=0.0, **kwargs):
    return ApertureConfig(feed_azimuth=feed_azimuth, elements=tuple(elements),
                          backlobe_floor=floor, **kwargs)


def random_diag_dominant(rng, n):
    """Complex system with guaranteed diagonal dominance (CGS-friendly)."""
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    off = np.abs(a).sum(axis=1) - np.abs(np.diag(a))
    a[np.arange(n), np.arange(n)] = (off + 1.0) * np.exp(
        1j * rng.uniform(0, 2 * np.pi, n))
    return a
