"""Independent reference computations used by the test-suite.

Nothing here calls into ``em_capacity`` numerics: Bessel values come from
mpmath or scipy.special, integrals from adaptive quadrature, and boundary
matching from a direct linear solve.
"""
import math

import mpmath as mp
import numpy as np
from scipy import integrate
from scipy import special as sp


def mp_sph_j(n, z, dps=40):
    with mp.workdps(dps):
        z = mp.mpmathify(z)
        return complex(mp.sqrt(mp.pi / (2 * z)) * mp.besselj(n + mp.mpf(1) / 2, z))


def mp_sph_y(n, z, dps=40):
    with mp.workdps(dps):
        z = mp.mpmathify(z)
        return complex(mp.sqrt(mp.pi / (2 * z)) * mp.bessely(n + mp.mpf(1) / 2, z))


def series_sph_j(n, z, terms=60, dps=50):
    """Ascending series ``z^n sum (-z^2/2)^k / (k! (2n+2k+1)!!)``."""
    with mp.workdps(dps):
        z = mp.mpmathify(z)
        total = mp.mpf(0)
        term = z**n / mp.fac2(2 * n + 1)
        for k in range(terms):
            total += term
            term *= -(z * z / 2) / ((k + 1) * (2 * n + 2 * k + 3))
        return complex(total)


def quad_complex(f, a, b, rel=1e-12):
    re = integrate.quad(lambda t: f(t).real, a, b, epsabs=0, epsrel=rel, limit=400)[0]
    im = integrate.quad(lambda t: f(t).imag, a, b, epsabs=0, epsrel=rel, limit=400)[0]
    return complex(re, im)


def _order_weights(n, l):
    if l == 1:
        return [(n, 1.0)]
    return [(n - 1, (n + 1) / (2 * n + 1)), (n + 1, n / (2 * n + 1))]


def radial_integrals_quad(n, l, k, r):
    """``(I^jj, I^yj, I^jj*, I^yj*)`` by adaptive quadrature over scipy.special values."""
    k = complex(k)
    out = np.zeros(4, dtype=complex)
    for m, c in _order_weights(n, l):
        j = lambda t: sp.spherical_jn(m, k * t)
        y = lambda t: sp.spherical_yn(m, k * t)
        out[0] += c * quad_complex(lambda t: j(t) ** 2 * t * t, 0, r)
        out[1] += c * quad_complex(lambda t: y(t) * j(t) * t * t, 0, r)
        out[2] += c * quad_complex(lambda t: abs(j(t)) ** 2 * t * t, 0, r)
        out[3] += c * quad_complex(lambda t: y(t) * np.conj(j(t)) * t * t, 0, r)
    return out


def _riccati_sp(kind, n, x):
    """Riccati-Bessel value and derivative from scipy.special."""
    if kind == "j":
        f, d = sp.spherical_jn(n, x), sp.spherical_jn(n, x, derivative=True)
    elif kind == "y":
        f, d = sp.spherical_yn(n, x), sp.spherical_yn(n, x, derivative=True)
    else:
        f = sp.spherical_jn(n, x) + 1j * sp.spherical_yn(n, x)
        d = sp.spherical_jn(n, x, derivative=True) + 1j * sp.spherical_yn(n, x, derivative=True)
    return x * f, x * d + f


def boundary_solve(n, l, c, z):
    """Interior reflection and transmission from tangential field continuity.

    Inside: ``U(k1) + R V(k1)``; outside: ``T U(k0)``.  For ``l = 1`` the
    tangential E follows the radial function itself and tangential H its
    Riccati derivative; ``l = 2`` swaps the two roles.
    """
    H, dH = _riccati_sp("h", n, complex(z))
    Hc, dHc = _riccati_sp("h", n, c * z)
    Jc, dJc = _riccati_sp("j", n, c * z)
    if l == 1:
        # E_t: (Hc + R Jc)/c = T H ;  H_t: dHc + R dJc = T dH
        A = np.array([[Jc / c, -H], [dJc, -dH]])
        b = -np.array([Hc / c, dHc])
    else:
        # E_t: (dHc + R dJc)/c = T dH ;  H_t: Hc + R Jc = T H
        A = np.array([[dJc / c, -dH], [Jc, -H]])
        b = -np.array([dHc / c, Hc])
    R, T = np.linalg.solve(A, b)
    return complex(R), complex(T)


def ball_quadrature(f, R, nr=48, nt=24, nphi=8):
    """``int_ball f dV`` with Gauss-Legendre in r and cos(theta), trapezoid in phi."""
    x, w = np.polynomial.legendre.leggauss(nr)
    r = 0.5 * R * (x + 1)
    wr = 0.5 * R * w
    u, wu = np.polynomial.legendre.leggauss(nt)
    th = np.arccos(u)
    ph = np.arange(nphi) * 2 * math.pi / nphi
    Rg, T, P = np.meshgrid(r, th, ph, indexing="ij")
    W = (wr[:, None, None] * r[:, None, None] ** 2) * wu[None, :, None] * (2 * math.pi / nphi)
    return np.sum(W * f((Rg, T, P)))


def sphere_quadrature(f, nt=32, nphi=32):
    u, wu = np.polynomial.legendre.leggauss(nt)
    th = np.arccos(u)
    ph = np.arange(nphi) * 2 * math.pi / nphi
    T, P = np.meshgrid(th, ph, indexing="ij")
    return np.sum(wu[:, None] * (2 * math.pi / nphi) * f(T, P))


def fd_curl(F, position, h=1e-5):
    """Curl of a Cartesian vector field given in spherical position arguments (4th-order stencil)."""
    r, t, f = position
    X = np.array([r * math.sin(t) * math.cos(f), r * math.sin(t) * math.sin(f), r * math.cos(t)])

    def at(Xc):
        rr = float(np.linalg.norm(Xc))
        return np.asarray(F((rr, math.acos(Xc[2] / rr), math.atan2(Xc[1], Xc[0]))))

    J = np.zeros((3, 3), dtype=complex)
    for a in range(3):
        e = np.zeros(3)
        e[a] = h
        J[:, a] = (-at(X + 2 * e) + 8 * at(X + e) - 8 * at(X - e) + at(X - 2 * e)) / (12 * h)
    return np.array([J[2, 1] - J[1, 2], J[0, 2] - J[2, 0], J[1, 0] - J[0, 1]])


def waterlevel_bruteforce(P, gains):
    """Water level by grid scan then bisection on the allocated-power function."""
    h2 = np.array([g for g, _ in gains], dtype=float)
    mult = np.array([m for _, m in gains], dtype=float)
    used = lambda mu: float(np.sum(mult * np.maximum(mu - 1 / h2, 0.0)))
    grid = np.linspace(1 / h2.max(), 1 / h2.min() + P / mult.sum() + P, 20001)
    vals = np.sum(mult * np.maximum(grid[:, None] - 1 / h2, 0.0), axis=1)
    i = int(np.searchsorted(vals, P))
    lo, hi = grid[max(i - 1, 0)], grid[min(i, len(grid) - 1)]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if used(mid) < P else (lo, mid)
    return 0.5 * (lo + hi)
