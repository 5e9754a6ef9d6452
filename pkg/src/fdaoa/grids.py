"""Frequency and azimuth grids shared by the forward model and the sensing stage."""

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform frequency sweep, endpoints included.

    A single-point grid (count == 1) degenerates to [f_min]; it is allowed so
    that one-frequency sanity runs work end to end.
    """

    f_min: float
    f_max: float
    count: int

    def __post_init__(self):
        if not (math.isfinite(self.f_min) and math.isfinite(self.f_max)):
            raise ValueError("frequency bounds must be finite")
        if self.f_min <= 0:
            raise ValueError("f_min must be positive")
        if int(self.count) != self.count or self.count < 1:
            raise ValueError("count must be a positive integer")
        object.__setattr__(self, "count", int(self.count))
        if self.count == 1:
            if self.f_max < self.f_min:
                raise ValueError("f_max must be >= f_min")
        elif self.f_max <= self.f_min:
            raise ValueError("f_max must exceed f_min")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.f_min, self.f_max, self.count)


@dataclass(frozen=True)
class AngleGrid:
    """Azimuth bins covering the full horizon; bin centers at k * step_deg."""

    count: int = 72
    step_deg: float = 5.0

    def __post_init__(self):
        if int(self.count) != self.count or self.count < 1:
            raise ValueError("count must be a positive integer")
        object.__setattr__(self, "count", int(self.count))
        if abs(self.count * self.step_deg - 360.0) > 1e-9:
            raise ValueError("count * step_deg must equal 360")

    @property
    def values_deg(self) -> np.ndarray:
        return np.arange(self.count) * self.step_deg

    @property
    def values_rad(self) -> np.ndarray:
        return np.deg2rad(self.values_deg)

    def index_of(self, angle_deg: float) -> int:
        """Nearest bin index for an arbitrary azimuth (circular)."""
        return int(round(angle_deg / self.step_deg)) % self.count

    def circular_bin_error(self, a_deg: float, b_deg: float) -> float:
        """Shortest angular distance between two azimuths, in bins."""
        d = abs(a_deg - b_deg) % 360.0
        return min(d, 360.0 - d) / self.step_deg
