"""Quality factor of a single source mode.

``Q~ = max(Q~m, Q~e)`` with each term ``2 w W / P_rad`` summed over the
energy stored inside the sphere and outside it.  The outside part uses the
classical ``A_n`` functions of the outgoing spherical wave, the inside part
the interior field of the dielectric sphere.  ``Q = eta Q~`` is referenced
to the consumed power.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import LOSSLESS_THRESHOLD, mode_DEF, mode_powers
from .modes import internal_brackets, pair_product, radial_integrals
from .scattering import MU0, Medium
from .specfun import gauss_legendre, sph_jn_all, sph_yn_all

# loss tangent standing in for a lossless sphere when stored energies are needed
LOSSLESS_Q_PROXY = 1e-10


@dataclass(frozen=True)
class QBreakdown:
    n: int
    l: int
    w_e_in: float
    w_m_in: float
    q_ext_m: float
    q_ext_e: float
    q_m: float
    q_e: float
    q_tilde: float
    q: float
    eta: float


def collin_A(n: int, k0: float, r: float) -> float:
    """``A_n(r) = -(x^3/2)(|h_n|^2 - j_{n+1} j_{n-1} - y_{n+1} y_{n-1} - 2/x^2)``, ``x = k0 r``.

    Equals ``int_x^inf t^2 (|h_n(t)|^2 - 1/t^2) dt``.  ``n = 0`` uses
    ``j_{-1} = cos(x)/x`` and ``y_{-1} = sin(x)/x``.
    """
    x = k0 * r
    if not x > 0:
        raise ValueError("k0 r must be positive")
    if n < 0:
        raise ValueError("order must be nonnegative")
    j = sph_jn_all(n + 1, x).real
    y = sph_yn_all(n + 1, x).real
    if n == 0:
        jm, ym = math.cos(x) / x, math.sin(x) / x
    else:
        jm, ym = j[n - 1], y[n - 1]
    bracket = j[n] ** 2 + y[n] ** 2 - j[n + 1] * jm - y[n + 1] * ym - 2 / x**2
    return float(-(x**3) / 2 * bracket)


def external_Q_terms(n: int, l: int, k0: float, R1: float):
    """``(2w W_m_out / P_rad, 2w W_e_out / P_rad)`` outside the sphere of radius ``R1``."""
    if not R1 > 0:
        raise ValueError("R1 must be positive")
    own = collin_A(n, k0, R1)
    mixed = ((n + 1) * collin_A(n - 1, k0, R1) + n * collin_A(n + 1, k0, R1)) / (2 * n + 1)
    if l == 1:
        return mixed, own
    if l == 2:
        return own, mixed
    raise ValueError("l must be 1 or 2")


def _energy_brackets_closed(n: int, l: int, medium: Medium, R1: float):
    k1 = medium.k1
    _, _, F = mode_DEF(n, l, medium, R1)
    ri = radial_integrals(n, l, k1, R1)
    rd = radial_integrals(n, 3 - l, k1, R1)
    c = 1 / (4 * k1.real * k1.imag)
    X = abs(F) ** 2 + c * c + 2 * c * (F * ri.i_jj).real / ri.i_jjstar
    Y = (abs(k1 * F) ** 2 + abs(k1 * c) ** 2) * rd.i_jjstar / ri.i_jjstar
    Y += 2 * c * (k1 * k1 * F * rd.i_jj).real / ri.i_jjstar
    return X, Y


def _energy_brackets_stable(n: int, l: int, medium: Medium, R1: float):
    k1 = medium.k1
    D, _, _ = mode_DEF(n, l, medium, R1)
    x, w = gauss_legendre(int(48 + 2 * abs(k1) * R1))
    r = 0.5 * R1 * (x + 1)
    wr = 0.5 * R1 * w * r * r
    b_e, b_h = internal_brackets(n, l, k1, D, r)
    cj = lambda t: tuple(None if a is None else np.conj(a) for a in t)
    norm = n * (n + 1) * radial_integrals(n, l, k1, R1).i_jjstar
    X = float(np.sum(wr * pair_product(n, l, cj(b_e), b_e).real)) / norm
    Y = float(np.sum(wr * pair_product(n, 3 - l, cj(b_h), b_h).real)) / norm
    return X, Y


def internal_energies(n: int, l: int, medium: Medium, R1: float, method: str = "stable"):
    """Electric and magnetic energy stored inside the sphere, per unit source coefficient.

    ``W_e = (eps1'/4) w^2 mu0^2 X`` and ``W_m = (mu0/4) Y`` where ``X`` and
    ``Y`` are the volume integrals of the squared interior field brackets.
    ``method="closed"`` uses the expansion in ``F``, ``I^jj`` and ``I^jj*``;
    its terms grow like ``1/k1''^2`` and cancel, so it degrades as the loss
    vanishes.  ``method="stable"`` integrates the regrouped brackets radially.
    """
    if medium.k1.imag <= 0:
        raise ValueError("stored energies need a lossy sphere; use the lossless proxy")
    if method == "closed":
        X, Y = _energy_brackets_closed(n, l, medium, R1)
    elif method == "stable":
        X, Y = _energy_brackets_stable(n, l, medium, R1)
    else:
        raise ValueError(f"unknown method {method!r}")
    eps1p = medium.eps1.real
    w_e = eps1p / 4 * medium.omega**2 * MU0**2 * X
    w_m = MU0 / 4 * Y
    return float(w_e), float(w_m)


def quality_factor(n: int, l: int, medium: Medium, R1: float) -> QBreakdown:
    """Q breakdown of mode (n, l); lossless media use ``LOSSLESS_Q_PROXY``."""
    if medium.tan_delta < LOSSLESS_THRESHOLD:
        medium = medium.with_loss(LOSSLESS_Q_PROXY)
    rho, tau = mode_powers(n, l, medium, R1)
    eta = rho / tau
    w_e, w_m = internal_energies(n, l, medium, R1)
    p_rad = MU0 * medium.omega / 2 * rho
    q_ext_m, q_ext_e = external_Q_terms(n, l, medium.k0, R1)
    q_m = 2 * medium.omega * w_m / p_rad + q_ext_m
    q_e = 2 * medium.omega * w_e / p_rad + q_ext_e
    q_tilde = max(q_m, q_e)
    return QBreakdown(n, l, w_e, w_m, q_ext_m, q_ext_e, q_m, q_e, q_tilde, eta * q_tilde, eta)
