"""Conformal frequency-diverse metasurface simulator and AoA pipeline."""

__version__ = "0.1.0"

from ._kernels import numba_available, resolve_backend
from .errors import (BelowCutoffError, ConfigError, DegenerateInputError,
                     FdaoaError, FileFormatError, ShapeMismatchError)
from .grids import AngleGrid, FrequencyGrid
from .forward import (ApertureConfig, MetaElement, SourceSpec, element_gain,
                      guided_amplitude, guided_wavenumber, lorentzian_response,
                      pattern_sweep, radiated_fraction, received_signal,
                      resonant_coupling_for_fraction)
from .sensing import (MeasurementVector, NoiseSpec, SensingMatrix, add_noise,
                      build_sensing_matrix, cross_correlate, measure,
                      measure_noisy)
from .estimator import (AoAProfile, CgsSolution, EstimationResult, SvdSpectrum,
                        cgs_solve, estimate_aoa, matched_filter, svd_spectrum)
from .config import (ElementSpec, ExperimentConfig, SolverSettings,
                     angle_grid, build_apertures, config_to_dict, dump_config,
                     frequency_grid, load_config, parse_config)
from .sweep import BandSpec, SweepReport, SweepSpec, paper_bands, run_sweep

__all__ = [
    "__version__",
    "AngleGrid", "FrequencyGrid",
    "MetaElement", "ApertureConfig", "SourceSpec",
    "lorentzian_response", "radiated_fraction", "resonant_coupling_for_fraction",
    "guided_wavenumber", "guided_amplitude", "element_gain",
    "received_signal", "pattern_sweep",
    "SensingMatrix", "MeasurementVector", "NoiseSpec",
    "cross_correlate", "build_sensing_matrix", "measure", "measure_noisy",
    "add_noise",
    "AoAProfile", "EstimationResult", "SvdSpectrum", "CgsSolution",
    "cgs_solve", "estimate_aoa", "matched_filter", "svd_spectrum",
    "ExperimentConfig", "SolverSettings", "ElementSpec",
    "load_config", "parse_config", "dump_config", "config_to_dict",
    "build_apertures", "frequency_grid", "angle_grid",
    "SweepSpec", "BandSpec", "SweepReport", "paper_bands", "run_sweep",
    "numba_available", "resolve_backend",
    "FdaoaError", "ConfigError", "FileFormatError", "ShapeMismatchError",
    "DegenerateInputError", "BelowCutoffError",
]
