"""Hot numeric kernels: two-port pattern synthesis and the CGS recurrence.

Each kernel has a numba-compiled version and a pure-numpy twin.  The active
backend is chosen per call: an explicit ``backend=`` argument wins, otherwise
the ``FDAOA_BACKEND`` environment variable (``numba`` | ``numpy`` | ``auto``),
otherwise ``auto`` (numba when importable, numpy fallback).

Results are deterministic for a fixed backend; the two backends agree to
floating-point roundoff but not bit-for-bit (summation orders differ).
"""

import math
import os

import numpy as np

C_LIGHT = 299_792_458.0

_BACKENDS = ("numba", "numpy")
_numba_synth = None
_numba_cgs = None
_numba_failed = False


def numba_available() -> bool:
    global _numba_failed
    if _numba_failed:
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        _numba_failed = True
        return False
    return True


def resolve_backend(choice: str | None = None) -> str:
    """Map an explicit choice / env var / auto-probe to 'numba' or 'numpy'."""
    if choice is None:
        choice = os.environ.get("FDAOA_BACKEND", "auto")
    choice = choice.lower()
    if choice == "auto":
        return "numba" if numba_available() else "numpy"
    if choice not in _BACKENDS:
        raise ValueError(f"unknown backend {choice!r}; expected numba, numpy or auto")
    if choice == "numba" and not numba_available():
        raise RuntimeError("numba backend requested but numba is not importable")
    return choice


# ---------------------------------------------------------------------------
# Pattern synthesis
#
# out[i, j] = sum_n G_n(f_i) * alpha_n(f_i) * gain_n(theta_j) * e^{-j k r}/r
#
# with G_n the guided amplitude (propagation phase times the depletion left
# by elements nearer the feed on the same branch), alpha_n the resonator
# response, gain_n the shadowed embedded-element pattern and r the distance
# from the source point to element n.
# ---------------------------------------------------------------------------


def _synth_loops(freqs, angles, distance, radius, siw_width, eps_r,
                 gain_exp, floor, az, arc, side, f0, q, amp, out):
    m = freqs.shape[0]
    n_ang = angles.shape[0]
    n_el = az.shape[0]

    cos_az = np.cos(az)
    sin_az = np.sin(az)
    # Source-to-element geometry is frequency independent.
    rdist = np.empty((n_ang, n_el))
    gains = np.empty((n_ang, n_el))
    for j in range(n_ang):
        sx = distance * math.cos(angles[j])
        sy = distance * math.sin(angles[j])
        for n in range(n_el):
            dx = sx - radius * cos_az[n]
            dy = sy - radius * sin_az[n]
            r = math.sqrt(dx * dx + dy * dy)
            rdist[j, n] = r
            c = (cos_az[n] * dx + sin_az[n] * dy) / r
            if c < 0.0:
                c = 0.0
            g = c ** gain_exp
            if g < floor:
                g = floor
            gains[j, n] = g

    wall = math.pi / siw_width
    weights = np.empty(n_el, dtype=np.complex128)
    for i in range(m):
        f = freqs[i]
        k0 = 2.0 * math.pi * f / C_LIGHT
        beta = math.sqrt(eps_r * k0 * k0 - wall * wall)
        cum0 = 1.0
        cum1 = 1.0
        for n in range(n_el):
            den = f0[n] * f0[n] - f * f + 1j * (f * f0[n] / q[n])
            alpha = amp[n] * f * f / den
            a2 = alpha.real * alpha.real + alpha.imag * alpha.imag
            t = math.sqrt(1.0 / (1.0 + a2))  # |t|^2 = 1 - a2/(1+a2)
            ph = beta * arc[n]
            prop = complex(math.cos(ph), -math.sin(ph))
            if side[n] == 0:
                weights[n] = prop * cum0 * alpha
                cum0 *= t
            else:
                weights[n] = prop * cum1 * alpha
                cum1 *= t
        for j in range(n_ang):
            acc = 0.0 + 0.0j
            for n in range(n_el):
                r = rdist[j, n]
                ph = k0 * r
                sph = complex(math.cos(ph), -math.sin(ph)) / r
                acc += weights[n] * gains[j, n] * sph
            out[i, j] = acc
    return out


def _synth_numpy(freqs, angles, distance, radius, siw_width, eps_r,
                 gain_exp, floor, az, arc, side, f0, q, amp):
    m = freqs.shape[0]
    f = freqs[:, None]
    k0 = 2.0 * np.pi * freqs / C_LIGHT

    alpha = amp[None, :] * f * f / (f0[None, :] ** 2 - f * f
                                    + 1j * (f * f0[None, :] / q[None, :]))
    a2 = np.abs(alpha) ** 2
    t = np.sqrt(1.0 / (1.0 + a2))

    beta = np.sqrt(eps_r * k0 ** 2 - (np.pi / siw_width) ** 2)
    depletion = np.empty_like(t)
    for s in (0, 1):
        idx = np.flatnonzero(side == s)
        if idx.size == 0:
            continue
        cum = np.cumprod(t[:, idx], axis=1)
        depletion[:, idx] = np.hstack([np.ones((m, 1)), cum[:, :-1]])
    weights = np.exp(-1j * beta[:, None] * arc[None, :]) * depletion * alpha

    sx = distance * np.cos(angles)
    sy = distance * np.sin(angles)
    dx = sx[:, None] - radius * np.cos(az)[None, :]
    dy = sy[:, None] - radius * np.sin(az)[None, :]
    r = np.sqrt(dx ** 2 + dy ** 2)
    cospsi = (np.cos(az)[None, :] * dx + np.sin(az)[None, :] * dy) / r
    gains = np.maximum(np.maximum(cospsi, 0.0) ** gain_exp, floor)

    phase = np.exp(-1j * k0[:, None, None] * r[None, :, :])
    cells = weights[:, None, :] * (gains / r)[None, :, :] * phase
    return cells.sum(axis=-1)


def _get_numba_synth():
    global _numba_synth
    if _numba_synth is None:
        from numba import njit

        _numba_synth = njit(cache=True)(_synth_loops)
    return _numba_synth


def synth_patterns(freqs, angles, distance, radius, siw_width, eps_r,
                   gain_exp, floor, az, arc, side, f0, q, amp,
                   backend: str | None = None) -> np.ndarray:
    """Complex received signal for every (frequency, angle) cell, one port."""
    freqs = np.ascontiguousarray(freqs, dtype=np.float64)
    angles = np.ascontiguousarray(angles, dtype=np.float64)
    out = np.empty((freqs.shape[0], angles.shape[0]), dtype=np.complex128)
    if az.shape[0] == 0:
        out[:] = 0.0
        return out
    if resolve_backend(backend) == "numba":
        return _get_numba_synth()(freqs, angles, float(distance), float(radius),
                                  float(siw_width), float(eps_r), float(gain_exp),
                                  float(floor), az, arc, side, f0, q, amp, out)
    return _synth_numpy(freqs, angles, float(distance), float(radius),
                        float(siw_width), float(eps_r), float(gain_exp),
                        float(floor), az, arc, side, f0, q, amp)


# ---------------------------------------------------------------------------
# Conjugate Gradient Squared (Sonneveld), zero initial guess.
#
# Returns (x, relative_residual, iterations, breakdown).  The best iterate
# seen so far is returned when the iteration cap is reached or a recurrence
# inner product collapses (breakdown).
# ---------------------------------------------------------------------------


def _cgs_numpy(a, b, tol, max_iter):
    n = b.shape[0]
    x = np.zeros(n, dtype=np.complex128)
    bnrm = np.sqrt(np.real(np.vdot(b, b)))
    if bnrm == 0.0:
        return x, 0.0, 0, False

    r = b.copy()
    r_tld = b.copy()
    q = np.zeros(n, dtype=np.complex128)
    p = np.zeros(n, dtype=np.complex128)
    best_x = x.copy()
    best_res = 1.0
    rho_prev = 0.0 + 0.0j

    for it in range(1, max_iter + 1):
        rho = np.vdot(r_tld, r)
        if rho == 0.0 or not np.isfinite(rho):
            return best_x, best_res, it, True
        if it == 1:
            u = r.copy()
            p = u.copy()
        else:
            beta = rho / rho_prev
            u = r + beta * q
            p = u + beta * (q + beta * p)
        v = np.dot(a, p)
        sigma = np.vdot(r_tld, v)
        if sigma == 0.0 or not np.isfinite(sigma):
            return best_x, best_res, it, True
        alpha = rho / sigma
        q = u - alpha * v
        uq = u + q
        x += alpha * uq
        r -= alpha * np.dot(a, uq)
        res = np.sqrt(np.real(np.vdot(r, r))) / bnrm
        if not np.isfinite(res):
            return best_x, best_res, it, True
        if res < best_res:
            best_res = res
            best_x[:] = x
        if res <= tol:
            return x, res, it, False
        rho_prev = rho

    return best_x, best_res, max_iter, False


def _cgs_loops(a, b, tol, max_iter):
    # Same recurrence as _cgs_numpy with allocation-free inner loops; the
    # per-iteration cost is dominated by the two matrix-vector products.
    n = b.shape[0]
    x = np.zeros(n, dtype=np.complex128)
    bnrm2 = 0.0
    for i in range(n):
        bnrm2 += b[i].real * b[i].real + b[i].imag * b[i].imag
    bnrm = math.sqrt(bnrm2)
    if bnrm == 0.0:
        return x, 0.0, 0, False

    r = b.copy()
    r_tld = b.copy()
    u = np.zeros(n, dtype=np.complex128)
    p = np.zeros(n, dtype=np.complex128)
    q = np.zeros(n, dtype=np.complex128)
    uq = np.zeros(n, dtype=np.complex128)
    best_x = np.zeros(n, dtype=np.complex128)
    best_res = 1.0
    rho_prev = 0.0 + 0.0j

    for it in range(1, max_iter + 1):
        rho = 0.0 + 0.0j
        for i in range(n):
            rho += r_tld[i].conjugate() * r[i]
        if rho == 0.0 or not (math.isfinite(rho.real) and math.isfinite(rho.imag)):
            return best_x, best_res, it, True
        if it == 1:
            for i in range(n):
                u[i] = r[i]
                p[i] = r[i]
        else:
            beta = rho / rho_prev
            for i in range(n):
                u[i] = r[i] + beta * q[i]
                p[i] = u[i] + beta * (q[i] + beta * p[i])
        v = np.dot(a, p)
        sigma = 0.0 + 0.0j
        for i in range(n):
            sigma += r_tld[i].conjugate() * v[i]
        if sigma == 0.0 or not (math.isfinite(sigma.real) and math.isfinite(sigma.imag)):
            return best_x, best_res, it, True
        alpha = rho / sigma
        for i in range(n):
            q[i] = u[i] - alpha * v[i]
            uq[i] = u[i] + q[i]
            x[i] += alpha * uq[i]
        auq = np.dot(a, uq)
        res2 = 0.0
        for i in range(n):
            r[i] -= alpha * auq[i]
            res2 += r[i].real * r[i].real + r[i].imag * r[i].imag
        res = math.sqrt(res2) / bnrm
        if not math.isfinite(res):
            return best_x, best_res, it, True
        if res < best_res:
            best_res = res
            for i in range(n):
                best_x[i] = x[i]
        if res <= tol:
            return x, res, it, False
        rho_prev = rho

    return best_x, best_res, max_iter, False


def _get_numba_cgs():
    global _numba_cgs
    if _numba_cgs is None:
        from numba import njit

        _numba_cgs = njit(cache=True)(_cgs_loops)
    return _numba_cgs


def cgs(a, b, tol: float, max_iter: int, backend: str | None = None):
    a = np.ascontiguousarray(a, dtype=np.complex128)
    b = np.ascontiguousarray(b, dtype=np.complex128)
    if resolve_backend(backend) == "numba":
        return _get_numba_cgs()(a, b, float(tol), int(max_iter))
    return _cgs_numpy(a, b, float(tol), int(max_iter))
