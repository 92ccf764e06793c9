"""Spherical vector waves, their radial integrals and the field inside the sphere.

Angular basis
-------------
``A1 = grad(Y) x r / sqrt(n(n+1))``, ``A2 = r_hat Y``, ``A3 = r grad(Y) / sqrt(n(n+1))``
with ``Y_nm`` orthonormal over the unit sphere (Condon-Shortley phase).  The
three families are jointly orthonormal.

Vector waves
------------
``l = 1``: ``sqrt(n(n+1)) f_n(kr) A1``;
``l = 2``: ``n(n+1)/(2n+1) f^(2)(kr) A2 + sqrt(n(n+1)) f^(3)(kr) A3`` where
``f^(2) = f_{n-1} + f_{n+1}`` and ``f^(3) = ((n+1) f_{n-1} - n f_{n+1})/(2n+1)``.
``f`` is ``j`` for V, ``y`` for W and ``h1`` for U.  The starred families use
the complex conjugate of the radial part, so ``V*(k) = V(conj(k))``.

All vectors are returned as Cartesian ``(x, y, z)`` components in the last
axis.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre as npleg

from .specfun import gauss_legendre, sph_hankel_all, sph_jn_all, sph_yn_all


@dataclass(frozen=True)
class ModeIndex:
    n: int
    m: int
    l: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"mode order n must be >= 1, got {self.n}")
        if abs(self.m) > self.n:
            raise ValueError(f"|m| must not exceed n, got m={self.m}, n={self.n}")
        if self.l not in (1, 2):
            raise ValueError(f"l must be 1 or 2, got {self.l}")


def modes_up_to(N: int, m_values=None):
    """All mode indices with ``1 <= n <= N`` in (n, m, l) lexical order."""
    out = []
    for n in range(1, N + 1):
        ms = range(-n, n + 1) if m_values is None else [m for m in m_values if abs(m) <= n]
        for m in ms:
            for l in (1, 2):
                out.append(ModeIndex(n, m, l))
    return out


# ---------------------------------------------------------------------------
# angular functions


@lru_cache(maxsize=None)
def _legendre_derivs(n: int, m: int):
    base = npleg.Legendre.basis(n)
    return base.deriv(m) if m > 0 else base, base.deriv(m + 1)


def _ylm_parts(n: int, m: int, theta, phi):
    """``Y_nm``, ``dY/dtheta`` and ``(1/sin theta) dY/dphi``; finite at the poles."""
    am = abs(m)
    x = np.cos(theta)
    s = np.sin(theta)
    qm, qm1 = _legendre_derivs(n, am)
    Qm, Qm1 = qm(x), qm1(x)
    c = math.sqrt((2 * n + 1) / (4 * math.pi) * math.factorial(n - am) / math.factorial(n + am))
    c *= (-1) ** am
    ph = np.exp(1j * am * phi)
    y = c * s**am * Qm * ph
    if am > 0:
        s_m1 = s ** (am - 1)
        dth = c * (am * s_m1 * x * Qm - s ** (am + 1) * Qm1) * ph
        dph = 1j * am * c * s_m1 * Qm * ph
    else:
        dth = -c * s * Qm1 * ph
        dph = np.zeros_like(y)
    if m < 0:
        sign = (-1) ** am
        y, dth, dph = sign * np.conj(y), sign * np.conj(dth), sign * np.conj(dph)
    return y, dth, dph


def spherical_unit_vectors(theta, phi):
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    zero = np.zeros_like(st * cp)
    rhat = np.stack(np.broadcast_arrays(st * cp, st * sp, ct), axis=-1)
    that = np.stack(np.broadcast_arrays(ct * cp, ct * sp, -st), axis=-1)
    phat = np.stack(np.broadcast_arrays(-sp + zero, cp + zero, zero), axis=-1)
    return rhat, that, phat


def _vsh_all(n: int, m: int, theta, phi):
    y, dth, dph = _ylm_parts(n, m, theta, phi)
    rhat, that, phat = spherical_unit_vectors(theta, phi)
    s = math.sqrt(n * (n + 1))
    a_t, a_p = dth / s, dph / s
    A1 = a_p[..., None] * that - a_t[..., None] * phat
    A2 = y[..., None] * rhat
    A3 = a_t[..., None] * that + a_p[..., None] * phat
    return A1, A2, A3


def vsh(i: int, mode: ModeIndex, theta, phi):
    """Vector spherical harmonic ``A^(i)_nm`` at the given angles (Cartesian components)."""
    if i not in (1, 2, 3):
        raise ValueError("VSH family must be 1, 2 or 3")
    return _vsh_all(mode.n, mode.m, np.asarray(theta, float), np.asarray(phi, float))[i - 1]


# ---------------------------------------------------------------------------
# radial functions and vector waves


def _radial_orders(kind: str, nmax: int, z):
    if kind == "j":
        return sph_jn_all(nmax, z)
    if kind == "y":
        return sph_yn_all(nmax, z)
    if kind == "h":
        return sph_hankel_all(1, nmax, z)
    raise ValueError(kind)


def radial_parts(kind: str, n: int, z):
    """``(f^(1), f^(2), f^(3))`` at ``z`` for radial kind j, y or h."""
    f = _radial_orders(kind, n + 1, z)
    f1 = f[n]
    f2 = f[n - 1] + f[n + 1]
    f3 = ((n + 1) * f[n - 1] - n * f[n + 1]) / (2 * n + 1)
    return f1, f2, f3


def _assemble(n: int, l: int, radial, angular):
    f1, f2, f3 = radial
    A1, A2, A3 = angular
    s = math.sqrt(n * (n + 1))
    if l == 1:
        return s * f1[..., None] * A1
    return (n * (n + 1) / (2 * n + 1)) * f2[..., None] * A2 + s * f3[..., None] * A3


_FAMILIES = {"V": "j", "W": "y", "U": "h", "V*": "j", "W*": "y", "U*": "h"}


def wave_function(family: str, mode: ModeIndex, k, position):
    """Spherical vector wave ``family`` evaluated at ``position = (r, theta, phi)``."""
    if family not in _FAMILIES:
        raise ValueError(f"unknown wave family {family!r}")
    r, theta, phi = (np.asarray(p, dtype=float) for p in position)
    if np.any(r <= 0) and family not in ("V", "V*"):
        raise ValueError("W and U waves are singular at r = 0")
    ang = _vsh_all(mode.n, mode.m, theta, phi)
    star = family.endswith("*")
    if family in ("U", "U*"):
        j = radial_parts("j", mode.n, k * r)
        y = radial_parts("y", mode.n, k * r)
        if star:
            rad = tuple(np.conj(a) - 1j * np.conj(b) for a, b in zip(j, y))
        else:
            rad = tuple(a + 1j * b for a, b in zip(j, y))
    else:
        rad = radial_parts(_FAMILIES[family], mode.n, k * r)
        if star:
            rad = tuple(np.conj(a) for a in rad)
    return _assemble(mode.n, mode.l, rad, ang)


def im_green_coincident(k0: float) -> float:
    """Scalar factor of the imaginary part of the free-space DGF at coincident points."""
    if k0 <= 0:
        raise ValueError("k0 must be positive")
    return k0 / (6 * math.pi)


# ---------------------------------------------------------------------------
# radial integrals


@dataclass(frozen=True)
class RadialIntegrals:
    i_jj: complex
    i_yj: complex
    i_jjstar: float
    i_yjstar: complex


def _ext_bessel(nmax: int, z):
    """j and y for orders -1..nmax; index 0 holds order -1."""
    z = complex(z)
    j = np.empty(nmax + 2, dtype=complex)
    y = np.empty(nmax + 2, dtype=complex)
    j[1:] = sph_jn_all(nmax, z)
    y[1:] = sph_yn_all(nmax, z)
    j[0] = cmath.cos(z) / z
    y[0] = cmath.sin(z) / z
    return j, y


def _unit_phase_power(k: complex, n: int) -> complex:
    """``k^-n conj(k)^n`` computed as a pure phase."""
    return cmath.exp(-2j * n * cmath.phase(k))


_SMALL_LOSS = 1e-3
_TINY_LOSS = 1e-14


def _im_yjstar(n: int, k: complex, r: float) -> float:
    x, w = gauss_legendre(int(40 + 2 * abs(k) * r))
    t = 0.5 * r * (x + 1)
    z = k * t
    if n >= 0:
        jv = sph_jn_all(n, z)[n]
        yv = sph_yn_all(n, z)[n]
    else:
        jv, yv = np.cos(z) / z, np.sin(z) / z
    return 0.5 * r * float(np.sum(w * t * t * (yv * np.conj(jv)).imag))


def _order1_integrals(n: int, k: complex, r: float, j, y, lossy: bool):
    jn, jm, jp = j[n + 1], j[n], j[n + 2]
    yn, ym, yp = y[n + 1], y[n], y[n + 2]
    i_jj = r**3 / 2 * (jn * jn - jm * jp)
    i_yj = r**3 / 2 * (jn * yn - (jm * yp + ym * jp) / 2) - (2 * n + 1) / (4 * k**3)
    if lossy and k.imag <= _TINY_LOSS * abs(k):
        # k'' too small for the closed forms' 1/(k^2 - conj(k)^2): use the
        # real-k limits, which are exact to O(k''/k')
        i_jjs = i_jj.real
        i_yjs = complex(i_yj.real, _im_yjstar(n, k, r))
    elif lossy:
        kc = k.conjugate()
        d = k * k - kc * kc
        i_jjs = (r * r / d * (kc * jm.conjugate() * jn - k * jm * jn.conjugate())).real
        i_yjs = r * r / d * (kc * jm.conjugate() * yn - k * ym * jn.conjugate())
        i_yjs += _unit_phase_power(k, n) / (k * d)
        if k.imag < _SMALL_LOSS * k.real:
            # The closed form's imaginary part is a difference of nearly
            # equal terms divided by k^2 - conj(k)^2 = O(k'').  The integrand
            # Im(y conj(j)) is itself O(k'') pointwise, so integrate it.
            i_yjs = complex(i_yjs.real, _im_yjstar(n, k, r))
    else:
        i_jjs, i_yjs = i_jj.real, i_yj
    return np.array([i_jj, i_yj, i_jjs, i_yjs], dtype=complex)


@lru_cache(maxsize=8192)
def radial_integrals(n: int, l: int, k, r: float) -> RadialIntegrals:
    """Closed-form ``int_0^r`` of ``j j``, ``y j``, ``|j|^2`` and ``y conj(j)`` times ``r'^2``.

    For ``l = 2`` the order-1 integrals are combined with weights
    ``(n+1)/(2n+1)`` and ``n/(2n+1)`` at orders ``n-1`` and ``n+1``.
    """
    if n < 1 or l not in (1, 2):
        raise ValueError("need n >= 1 and l in {1, 2}")
    if r <= 0:
        raise ValueError("radius must be positive")
    k = complex(k)
    lossy = k.imag != 0
    j, y = _ext_bessel(n + 2, k * r)
    if l == 1:
        vals = _order1_integrals(n, k, r, j, y, lossy)
    else:
        lo = _order1_integrals(n - 1, k, r, j, y, lossy)
        hi = _order1_integrals(n + 1, k, r, j, y, lossy)
        vals = ((n + 1) * lo + n * hi) / (2 * n + 1)
    return RadialIntegrals(complex(vals[0]), complex(vals[1]), float(vals[2].real), complex(vals[3]))


def calligraphic_E(n: int, l: int, k) -> complex:
    k = complex(k)
    if k == 0:
        raise ValueError("k must be nonzero")
    if l == 1:
        return _unit_phase_power(k, n)
    if l == 2:
        return ((n + 1) * _unit_phase_power(k, n - 1) + n * _unit_phase_power(k, n + 1)) / (2 * n + 1)
    raise ValueError("l must be 1 or 2")


def surface_radial_norm_sq(n: int, l: int, z) -> float:
    """``|h^(1)|^2`` weight of the U-wave surface norm, without the ``n(n+1)`` factor."""
    h = sph_hankel_all(1, n + 1, z)
    if l == 1:
        return float(abs(h[n]) ** 2)
    return float(((n + 1) * abs(h[n - 1]) ** 2 + n * abs(h[n + 1]) ** 2) / (2 * n + 1))


def normalization(region: str, n: int, l: int, k, R: float) -> float:
    """Norm of ``V_nml`` over the ball (``"V"``) or of ``U_nml`` over the sphere (``"S"``)."""
    if R <= 0:
        raise ValueError("radius must be positive")
    if region == "V":
        return math.sqrt(n * (n + 1) * radial_integrals(n, l, k, R).i_jjstar)
    if region == "S":
        return math.sqrt(n * (n + 1) * surface_radial_norm_sq(n, l, complex(k) * R))
    raise ValueError("region must be 'V' or 'S'")


# ---------------------------------------------------------------------------
# conjugate defect: V(conj k) - E V(k), which is O(k'')


def e_weights(n: int, l: int):
    """Orders and weights whose phase factors average to ``calligraphic_E(n, l, .)``."""
    if l == 1:
        return ((n, 1.0),)
    return ((n - 1, (n + 1) / (2 * n + 1)), (n + 1, n / (2 * n + 1)))


def _phase_gap(m: int, q: int, phi: float) -> complex:
    """``e^{-2im phi} - e^{-2iq phi}`` without cancellation."""
    return -2j * math.sin((m - q) * phi) * cmath.exp(-1j * (m + q) * phi)


def defect_radial_parts(n: int, l_wave: int, l_E: int, k, r):
    """Radial triple of ``V_{nm,l_wave}(conj k) - E_{n,l_E}(k) V_{nm,l_wave}(k)``.

    Per order ``m`` the difference is
    ``-2i e^{-im phi} Im(e^{-im phi} j_m(kr)) + (E_m - E) j_m(kr)`` with
    ``phi = arg k``; both pieces are small quantities computed directly, so
    the result keeps full relative accuracy as ``k'' -> 0``.
    """
    k = complex(k)
    phi = cmath.phase(k)
    z = k * np.asarray(r, dtype=float)
    j = sph_jn_all(n + 1, z)
    weights = e_weights(n, l_E)

    def order(m):
        u = cmath.exp(-1j * m * phi) * j[m]
        gap = sum(w * _phase_gap(m, q, phi) for q, w in weights)
        return -2j * cmath.exp(-1j * m * phi) * u.imag + gap * j[m]

    if l_wave == 1:
        d1 = order(n)
        return d1, None, None
    lo, hi = order(n - 1), order(n + 1)
    return None, lo + hi, ((n + 1) * lo - n * hi) / (2 * n + 1)


def pair_product(n: int, l: int, f, g):
    """Angular integral of ``f . g`` for two l-type radial triples (``n(n+1)`` included)."""
    s = n * (n + 1)
    if l == 1:
        return s * f[0] * g[0]
    return s * (s / (2 * n + 1) ** 2 * f[1] * g[1] + f[2] * g[2])


def internal_brackets(n: int, l: int, k, D, r):
    """Radial triples of the E and H brackets of the interior field.

    ``F V(k) + c V(conj k) = D V(k) + c (V(conj k) - E V(k))`` and
    ``k F V'(k) + conj(k) c V'(conj k) = (k D - i E/(2k')) V'(k)
    + c conj(k) (V'(conj k) - E V'(k))`` with ``V' = V_{nm,3-l}``, ``c = 1/(4k'k'')``.
    """
    k = complex(k)
    c = 1.0 / (4 * k.real * k.imag)
    E = calligraphic_E(n, l, k)
    jl = radial_parts("j", n, k * np.asarray(r, dtype=float))
    dl = defect_radial_parts(n, l, l, k, r)
    b_e = tuple(None if d is None else D * a + c * d for a, d in zip(jl, dl))
    lp = 3 - l
    jp = radial_parts("j", n, k * np.asarray(r, dtype=float))
    dp = defect_radial_parts(n, lp, l, k, r)
    g = k * D - 0.5j * E / k.real
    b_h = tuple(None if d is None else g * a + c * k.conjugate() * d for a, d in zip(jp, dp))
    return b_e, b_h


# ---------------------------------------------------------------------------
# field of a normalised conjugate source inside the sphere


def internal_field(mode: ModeIndex, medium, R1: float, position, which: str = "E"):
    """Field inside the sphere radiated by the unit source ``v*_nml``.

    ``E = -(w mu0/N) (F V(k1) + V(conj k1) / (4 k1' k1''))`` and
    ``H = (i/N) (k1 F V_{3-l}(k1) + conj(k1) V_{3-l}(conj k1) / (4 k1' k1''))``.
    ``F`` is of order ``1/k1''`` and nearly cancels the second term, so both
    are evaluated through :func:`internal_brackets`.
    """
    from .channel import mode_DEF
    from .scattering import MU0

    r = np.asarray(position[0], dtype=float)
    if np.any(r >= R1) or np.any(r < 0):
        raise ValueError("internal field is only defined for 0 <= r < R1")
    k1 = medium.k1
    if k1.imag <= 0:
        raise ValueError("internal field formula needs a lossy sphere (k1'' > 0)")
    if which not in ("E", "H"):
        raise ValueError("which must be 'E' or 'H'")
    n, l = mode.n, mode.l
    D, _, _ = mode_DEF(n, l, medium, R1)
    N = normalization("V", n, l, k1, R1)
    b_e, b_h = internal_brackets(n, l, k1, D, r)
    ang = _vsh_all(n, mode.m, np.asarray(position[1], float), np.asarray(position[2], float))
    if which == "E":
        return -(medium.omega * MU0 / N) * _assemble(n, l, _fill(b_e), ang)
    return (1j / N) * _assemble(n, 3 - l, _fill(b_h), ang)


def _fill(triple):
    return tuple(np.zeros(()) if t is None else t for t in triple)
