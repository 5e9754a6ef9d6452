import numpy as np
import pytest

from fdaoa import _kernels
from fdaoa.forward import synth_pattern

from conftest import random_diag_dominant


def test_resolve_backend_explicit():
    assert _kernels.resolve_backend("numpy") == "numpy"
    if _kernels.numba_available():
        assert _kernels.resolve_backend("numba") == "numba"
    with pytest.raises(ValueError):
        _kernels.resolve_backend("cuda")


def test_resolve_backend_env(monkeypatch):
    monkeypatch.setenv("FDAOA_BACKEND", "numpy")
    assert _kernels.resolve_backend(None) == "numpy"
    monkeypatch.setenv("FDAOA_BACKEND", "auto")
    assert _kernels.resolve_backend(None) in ("numba", "numpy")
    monkeypatch.delenv("FDAOA_BACKEND")
    assert _kernels.resolve_backend(None) in ("numba", "numpy")


@pytest.mark.skipif(not _kernels.numba_available(), reason="numba missing")
def test_synth_backends_agree(apertures):
    ap1, ap2 = apertures
    freqs = np.linspace(8.6e9, 11.4e9, 41)
    angles = np.deg2rad(np.arange(0, 360, 15, dtype=float))
    for ap in (ap1, ap2):
        a = synth_pattern(ap, angles, freqs, 0.21, backend="numba")
        b = synth_pattern(ap, angles, freqs, 0.21, backend="numpy")
        assert np.max(np.abs(a - b)) <= 1e-12 * np.max(np.abs(b))


def test_synth_backend_deterministic(apertures):
    ap1, _ = apertures
    freqs = np.linspace(9e9, 10e9, 5)
    angles = np.deg2rad(np.array([10.0, 200.0]))
    for backend in ("numpy", "numba") if _kernels.numba_available() else ("numpy",):
        a = synth_pattern(ap1, angles, freqs, 0.16, backend=backend)
        b = synth_pattern(ap1, angles, freqs, 0.16, backend=backend)
        assert np.array_equal(a, b)


def test_env_flag_selects_fallback(monkeypatch, apertures):
    ap1, _ = apertures
    freqs = np.linspace(9e9, 10e9, 5)
    angles = np.deg2rad(np.array([40.0]))
    monkeypatch.setenv("FDAOA_BACKEND", "numpy")
    a = synth_pattern(ap1, angles, freqs, 0.16)
    b = synth_pattern(ap1, angles, freqs, 0.16, backend="numpy")
    assert np.array_equal(a, b)


@pytest.mark.skipif(not _kernels.numba_available(), reason="numba missing")
def test_cgs_backends_agree_well_conditioned():
    rng = np.random.default_rng(17)
    a = random_diag_dominant(rng, 24)
    b = rng.standard_normal(24) + 1j * rng.standard_normal(24)
    xn, rn, itn, bdn = _kernels.cgs(a, b, 1e-12, 200, backend="numba")
    xp_, rp, itp, bdp = _kernels.cgs(a, b, 1e-12, 200, backend="numpy")
    assert not bdn and not bdp
    assert rn <= 1e-12 and rp <= 1e-12
    assert np.linalg.norm(xn - xp_) <= 1e-9 * np.linalg.norm(xp_)


def test_cgs_zero_rhs_returns_zero():
    a = np.eye(3, dtype=np.complex128)
    x, res, iters, breakdown = _kernels.cgs(a, np.zeros(3, np.complex128),
                                            1e-10, 50, backend="numpy")
    assert np.all(x == 0) and res == 0.0 and iters == 0 and not breakdown
