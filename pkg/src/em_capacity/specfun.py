"""Spherical Bessel and Hankel functions of complex argument.

``j_n`` is computed with Miller's downward recurrence, ``y_n`` with upward
recurrence, and the Hankel functions by combination.  Everything is
vectorised over the argument; the ``*_all`` helpers return every order
``0..nmax`` at once, which is what the mode machinery needs.

The convention is the usual one, ``y_0(z) = -cos(z)/z``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class BesselEval:
    n: int
    z: complex
    value: complex
    derivative: complex


@lru_cache(maxsize=64)
def gauss_legendre(nodes: int):
    """Cached Gauss-Legendre rule on [-1, 1] (read-only arrays)."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _as_complex_array(z):
    z = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(z)):
        raise ValueError("spherical Bessel argument must be finite")
    return z


def _miller_start(nmax: int, absz: float) -> int:
    # Enough headroom that the seeded ratio has decayed well below 1e-16.
    return int(nmax + absz + 16 + 4 * math.sqrt(nmax + absz + 1) + 10)


def _jn_scalar(nmax: int, z: complex):
    """Miller recurrence for a single nonzero argument in plain complex arithmetic."""
    start = _miller_start(nmax, abs(z))
    inv = 1.0 / z
    f_next, f_cur = 0j, 1e-30 + 0j
    buf = [0j] * (nmax + 1)
    for k in range(start, 0, -1):
        f_next, f_cur = f_cur, (2 * k + 1) * inv * f_cur - f_next
        if abs(f_cur) > 1e250:
            f_cur *= 1e-250
            f_next *= 1e-250
            for i in range(k, nmax + 1):
                buf[i] *= 1e-250
        if k - 1 <= nmax:
            buf[k - 1] = f_cur
    s, c = cmath.sin(z), cmath.cos(z)
    j0 = s * inv
    j1 = (s * inv - c) * inv
    if nmax >= 1 and abs(j1) > abs(j0):
        scale = j1 / buf[1]
    else:
        scale = j0 / buf[0]
    return np.array(buf, dtype=complex) * scale


def sph_jn_all(nmax: int, z):
    """Return ``j_0..j_nmax`` at ``z`` as an array of shape ``(nmax+1, *z.shape)``."""
    z = _as_complex_array(z)
    if z.ndim == 0 and z != 0:
        return _jn_scalar(nmax, complex(z))
    shape = z.shape
    zf = z.ravel()
    out = np.zeros((nmax + 1, zf.size), dtype=complex)
    zero = zf == 0
    out[0, zero] = 1.0
    nz = ~zero
    if np.any(nz):
        zz = zf[nz]
        start = _miller_start(nmax, float(np.max(np.abs(zz))))
        inv = 1.0 / zz
        f_next = np.zeros_like(zz)
        f_cur = np.full_like(zz, 1e-30)
        buf = np.empty((nmax + 1, zz.size), dtype=complex)
        inv_min = 1.0 / float(np.min(np.abs(zz)))
        # log of an upper bound on max(|f_cur|, |f_next|); the arrays are
        # only inspected for rescaling once this bound nears overflow
        log_bound = math.log(1e-30)
        for k in range(start, 0, -1):
            f_prev = (2 * k + 1) * inv * f_cur - f_next
            f_next, f_cur = f_cur, f_prev
            log_bound += math.log1p((2 * k + 1) * inv_min)
            if log_bound > 575.0:  # about log(1e250)
                big = np.abs(f_cur) > 1e250
                if big.any():
                    f_cur = np.where(big, f_cur * 1e-250, f_cur)
                    f_next = np.where(big, f_next * 1e-250, f_next)
                    if k <= nmax:
                        buf[k:, big] *= 1e-250
                peak = max(float(np.abs(f_cur).max()), float(np.abs(f_next).max()))
                log_bound = math.log(peak) if peak > 0 else math.log(1e-300)
            if k - 1 <= nmax:
                buf[k - 1] = f_cur
        # normalise against whichever of j0, j1 is larger in magnitude
        j0 = np.sin(zz) * inv
        j1 = (np.sin(zz) * inv - np.cos(zz)) * inv
        if nmax >= 1:
            use0 = np.abs(j0) >= np.abs(j1)
            scale = np.where(use0, j0 / buf[0], j1 / buf[1])
        else:
            scale = j0 / buf[0]
        out[:, nz] = buf * scale
    return out.reshape((nmax + 1,) + shape)


def sph_yn_all(nmax: int, z):
    """Return ``y_0..y_nmax`` at ``z`` (upward recurrence)."""
    z = _as_complex_array(z)
    if np.any(z == 0):
        raise ZeroDivisionError("y_n has a pole at z = 0")
    inv = 1.0 / z
    out = np.empty((nmax + 1,) + z.shape, dtype=complex)
    c, s = np.cos(z), np.sin(z)
    out[0] = -c * inv
    if nmax >= 1:
        out[1] = (-c * inv - s) * inv
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, nmax):
            out[n + 1] = (2 * n + 1) * inv * out[n] - out[n - 1]
    return out


def sph_hankel_all(kind: int, nmax: int, z):
    j = sph_jn_all(nmax, z)
    y = sph_yn_all(nmax, z)
    if kind == 1:
        return j + 1j * y
    if kind == 2:
        return j - 1j * y
    raise ValueError("Hankel kind must be 1 or 2")


def _scalarize(a):
    return complex(a) if np.ndim(a) == 0 else a


def sph_bessel_j(n: int, z):
    if n < 0:
        raise ValueError("order must be nonnegative")
    return _scalarize(sph_jn_all(n, z)[n])


def sph_bessel_y(n: int, z):
    if n < 0:
        raise ValueError("order must be nonnegative")
    return _scalarize(sph_yn_all(n, z)[n])


def sph_hankel(kind: int, n: int, z):
    if n < 0:
        raise ValueError("order must be nonnegative")
    return _scalarize(sph_hankel_all(kind, n, z)[n])


def _derivative(f, n: int, z):
    """``f_n'(z) = f_{n-1}(z) - (n+1) f_n(z)/z``; for n = 0, ``-f_1``."""
    if n == 0:
        return -f[1]
    return f[n - 1] - (n + 1) * f[n] / z


def sph_bessel_j_eval(n: int, z) -> BesselEval:
    f = sph_jn_all(n + 1, z)
    return BesselEval(n, complex(z), complex(f[n]), complex(_derivative(f, n, complex(z))))


def sph_bessel_y_eval(n: int, z) -> BesselEval:
    f = sph_yn_all(n + 1, z)
    return BesselEval(n, complex(z), complex(f[n]), complex(_derivative(f, n, complex(z))))


def riccati(kind: str, n: int, z):
    """Riccati-Bessel function and its derivative.

    ``kind`` is one of ``"j"``, ``"y"``, ``"h1"``, ``"h2"``; returns
    ``(F(z), F'(z))`` with ``F(z) = z f_n(z)`` and ``F' = z f_n' + f_n``.
    """
    z = np.asarray(z, dtype=complex)
    if kind == "j":
        f = sph_jn_all(n + 1, z)
    elif kind == "y":
        f = sph_yn_all(n + 1, z)
    elif kind == "h1":
        f = sph_hankel_all(1, n + 1, z)
    elif kind == "h2":
        f = sph_hankel_all(2, n + 1, z)
    else:
        raise ValueError(f"unknown Riccati kind {kind!r}")
    d = _derivative(f, n, z)
    return _scalarize(z * f[n]), _scalarize(z * d + f[n])


def growth_factors(beta):
    """Exponential growth factors ``f1(beta), f2(beta)`` of j_n and y_n for 0 < beta <= 1."""
    beta = np.asarray(beta, dtype=float)
    if np.any(beta <= 0) or np.any(beta > 1):
        raise ValueError("growth factors are defined for 0 < beta <= 1")
    s = np.sqrt(1 - beta**2)
    f1 = np.exp(s) * (1 - s) / beta
    f2 = (1 + s) / (beta * np.exp(s))
    return f1, f2


def bessel_nearfield_asymptotics(n: int, rho: float):
    """Steepest-descent approximations of ``j_n(rho)`` and ``y_n(rho)`` for ``rho <= n``.

    Valid deep in the evanescent region where ``n`` is large.  Evaluated in
    log space so that large orders do not overflow before the final exp.
    """
    if n < 1:
        raise ValueError("order must be positive")
    if not 0 < rho <= n:
        raise ValueError("near-field asymptotics need 0 < rho <= n")
    s = math.sqrt(n * n - rho * rho)
    if s == 0:
        raise ValueError("asymptotic forms are singular at rho == n")
    log_j = s + n * math.log((n - s) / rho) + 0.5 * math.log((n - s) / s) - math.log(2 * rho)
    log_y = -s + n * math.log((n + s) / rho) + 0.5 * math.log((n + s) / s) - math.log(rho)
    return math.exp(log_j), -math.exp(log_y)
