"""Inverse solvers for g = H f and conditioning diagnostics of H.

H is M x N (frequencies by angles) and not square, so the iterative solve
runs on the normal equations (H^H H) f = H^H g.  The estimated angle is the
grid angle at which |f_est| peaks; a matched filter f_est = H^H g is kept as
an independent baseline.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .errors import DegenerateInputError, ShapeMismatchError
from .grids import AngleGrid
from .sensing import MeasurementVector, SensingMatrix

METHOD_CGS = "cgs_normal_eq"
METHOD_MATCHED = "matched_filter"


class CgsSolution(NamedTuple):
    x: np.ndarray
    residual: float
    iterations: int
    breakdown: bool


@dataclass(frozen=True)
class AoAProfile:
    values: np.ndarray           # complex N
    angles: AngleGrid

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128).reshape(-1)
        object.__setattr__(self, "values", v)
        if v.shape[0] != self.angles.count:
            raise ShapeMismatchError(
                f"profile length {v.shape[0]} does not match the angle grid "
                f"({self.angles.count})")


@dataclass(frozen=True)
class EstimationResult:
    bin_index: int
    angle_deg: float
    profile: AoAProfile
    residual_norm: float
    iterations: int
    method: str
    breakdown: bool = False


@dataclass(frozen=True)
class SvdSpectrum:
    """Singular values of H divided by the largest, descending."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64).reshape(-1)
        object.__setattr__(self, "values", v)
        if v.size == 0:
            raise ValueError("spectrum must be non-empty")
        if v[0] != 1.0:
            raise ValueError("leading normalized singular value must be 1")
        if np.any(v < 0.0) or np.any(np.diff(v) > 0.0):
            raise ValueError("spectrum must be non-negative and non-increasing")

    @property
    def effective_rank(self) -> int:
        """Count of normalized singular values >= 0.01."""
        return int(np.count_nonzero(self.values >= 0.01))


def cgs_solve(a: np.ndarray, b: np.ndarray, tol: float = 1e-6,
              max_iter: int | None = None,
              backend: str | None = None) -> CgsSolution:
    """Conjugate Gradient Squared on a square system, zero initial guess.

    Defaults follow the common library convention for this solver family:
    tol 1e-6 and an iteration cap of min(20, n).  Returns the converged
    iterate, or the best iterate seen when the cap is reached or the
    recurrence breaks down (flagged).
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128).reshape(-1)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeMismatchError(f"matrix must be square, got {a.shape}")
    if a.shape[0] != b.shape[0]:
        raise ShapeMismatchError(
            f"matrix is {a.shape} but right-hand side has length {b.shape[0]}")
    if not (np.all(np.isfinite(b.real)) and np.all(np.isfinite(b.imag))):
        raise ValueError("right-hand side contains non-finite values")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if max_iter is None:
        max_iter = min(20, a.shape[0])
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    x, res, iters, breakdown = _kernels.cgs(a, b, tol, max_iter, backend=backend)
    return CgsSolution(x, float(res), int(iters), bool(breakdown))


def _argmax_profile(values: np.ndarray) -> int:
    # np.argmax returns the first occurrence, which is the declared tie-break.
    return int(np.argmax(np.abs(values)))


def gram_matrix(h: SensingMatrix, tikhonov: float = 0.0) -> np.ndarray:
    """H^H H (+ lambda I), precomputable when many g share one H."""
    if tikhonov < 0:
        raise ValueError("tikhonov must be non-negative")
    a = h.entries.conj().T @ h.entries
    if tikhonov > 0.0:
        a = a + tikhonov * np.eye(h.angles.count)
    return a


def estimate_from_gram(h: SensingMatrix, a: np.ndarray, g: MeasurementVector,
                       tol: float = 1e-6, max_iter: int | None = None,
                       backend: str | None = None) -> EstimationResult:
    """estimate_aoa with the Gram matrix supplied by the caller."""
    if g.entries.shape[0] != h.entries.shape[0]:
        raise ShapeMismatchError(
            f"measurement length {g.entries.shape[0]} does not match the "
            f"sensing matrix rows ({h.entries.shape[0]})")
    if not np.any(g.entries):
        raise DegenerateInputError("measurement vector is all zero")
    n = h.angles.count
    if max_iter is None:
        max_iter = min(20, n)
    b = h.entries.conj().T @ g.entries
    sol = cgs_solve(a, b, tol=tol, max_iter=max_iter, backend=backend)
    profile = AoAProfile(sol.x, h.angles)
    bin_index = _argmax_profile(profile.values)
    return EstimationResult(
        bin_index=bin_index,
        angle_deg=float(h.angles.values_deg[bin_index]),
        profile=profile,
        residual_norm=sol.residual,
        iterations=sol.iterations,
        method=METHOD_CGS,
        breakdown=sol.breakdown)


def estimate_aoa(h: SensingMatrix, g: MeasurementVector, tol: float = 1e-6,
                 max_iter: int | None = None, tikhonov: float = 0.0,
                 backend: str | None = None) -> EstimationResult:
    """Solve (H^H H + lambda I) f = H^H g with CGS and read off the peak bin.

    The default iteration cap min(20, N) matters: the normal equations of a
    physical sensing matrix are numerically singular, and the early-stopped
    Krylov iterate is the regularized solution that tolerates distance
    mismatch and noise.  Driving the residual further down (large max_iter,
    tight tol) fits the out-of-range part of g and degrades the readout.
    ``tikhonov`` defaults to 0 (no regularization); a positive value adds
    lambda I for explicit regularization on low-SNR runs.
    """
    return estimate_from_gram(h, gram_matrix(h, tikhonov), g,
                              tol=tol, max_iter=max_iter, backend=backend)


def matched_filter(h: SensingMatrix, g: MeasurementVector) -> EstimationResult:
    """Baseline estimator f_est = H^H g with the same argmax readout."""
    if g.entries.shape[0] != h.entries.shape[0]:
        raise ShapeMismatchError(
            f"measurement length {g.entries.shape[0]} does not match the "
            f"sensing matrix rows ({h.entries.shape[0]})")
    if not np.any(g.entries):
        raise DegenerateInputError("measurement vector is all zero")
    f_est = h.entries.conj().T @ g.entries
    profile = AoAProfile(f_est, h.angles)
    bin_index = _argmax_profile(profile.values)
    residual = float(np.linalg.norm(g.entries - h.entries @ f_est)
                     / np.linalg.norm(g.entries))
    return EstimationResult(
        bin_index=bin_index,
        angle_deg=float(h.angles.values_deg[bin_index]),
        profile=profile,
        residual_norm=residual,
        iterations=0,
        method=METHOD_MATCHED)


def svd_spectrum(h: SensingMatrix) -> SvdSpectrum:
    """Normalized singular values of H, descending, leading entry exactly 1."""
    if h.entries.size == 0:
        raise DegenerateInputError("sensing matrix is empty")
    s = np.linalg.svd(h.entries, compute_uv=False)
    if s[0] == 0.0:
        raise DegenerateInputError("sensing matrix is identically zero")
    return SvdSpectrum(s / s[0])
