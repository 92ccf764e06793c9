"""Dielectric sphere in free space: medium parameters and scattering coefficients."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

from scipy import constants

from .specfun import riccati

EPS0 = constants.epsilon_0
MU0 = constants.mu_0
C0 = constants.c
Z0 = math.sqrt(MU0 / EPS0)


class ResonanceError(ArithmeticError):
    """Scattering denominator vanished (a resonance of the lossless sphere)."""


@dataclass(frozen=True)
class Medium:
    """Homogeneous dielectric filling the source sphere.

    Permittivity is ``eps_r * eps0 * (1 + i tan_delta)`` at carrier ``f_c``.
    """

    f_c: float
    eps_r: float
    tan_delta: float = 0.0

    def __post_init__(self):
        if not (self.f_c > 0 and math.isfinite(self.f_c)):
            raise ValueError(f"f_c must be positive, got {self.f_c!r}")
        if not (self.eps_r > 0 and math.isfinite(self.eps_r)):
            raise ValueError(f"eps_r must be positive, got {self.eps_r!r}")
        if not (self.tan_delta >= 0 and math.isfinite(self.tan_delta)):
            raise ValueError(f"tan_delta must be nonnegative, got {self.tan_delta!r}")

    @property
    def omega(self) -> float:
        return 2 * math.pi * self.f_c

    @property
    def wavelength(self) -> float:
        return C0 / self.f_c

    @property
    def k0(self) -> float:
        return self.omega / C0

    @property
    def eps1(self) -> complex:
        return self.eps_r * EPS0 * complex(1.0, self.tan_delta)

    @cached_property
    def k1(self) -> complex:
        # principal branch: Re k1 > 0, Im k1 >= 0 (decaying in the lossy sphere)
        k = self.k0 * cmath.sqrt(self.eps_r * complex(1.0, self.tan_delta))
        if self.tan_delta == 0:
            k = complex(k.real, 0.0)
        return k

    @property
    def lossless(self) -> bool:
        return self.tan_delta == 0

    def with_loss(self, tan_delta: float) -> "Medium":
        return Medium(self.f_c, self.eps_r, tan_delta)

    @classmethod
    def from_k0(cls, k0: float, eps_r: float, tan_delta: float = 0.0) -> "Medium":
        return cls(k0 * C0 / (2 * math.pi), eps_r, tan_delta)


@dataclass(frozen=True)
class ScatterCoeffs:
    n: int
    l: int
    r_nl: complex
    t_nl: complex


def contrast(medium: Medium) -> complex:
    return medium.k1 / medium.k0


def coefficients_from_contrast(n: int, l: int, c: complex, z: float):
    """Interior reflection and transmission ``(R, T)`` for contrast ``c`` at ``z = k0 R1``."""
    if n < 1:
        raise ValueError("mode order n must be >= 1")
    if l not in (1, 2):
        raise ValueError("l must be 1 or 2")
    H, dH = riccati("h1", n, z)
    Hc, dHc = riccati("h1", n, c * z)
    Jc, dJc = riccati("j", n, c * z)
    if l == 1:
        den = Jc * dH - c * dJc * H
        num = c * H * dHc - dH * Hc
    else:
        den = c * Jc * dH - dJc * H
        num = H * dHc - c * dH * Hc
    if not (cmath.isfinite(num) and cmath.isfinite(den)):
        return _coefficients_by_ratios(l, c, H, dH, Hc, dHc, Jc, dJc)
    if abs(den) < 1e-300:
        raise ResonanceError(f"scattering denominator vanished at n={n}, l={l}, z={z}")
    return num / den, 1j / den


def _coefficients_by_ratios(l, c, H, dH, Hc, dHc, Jc, dJc):
    # High orders: the Riccati products overflow although R and T do not.
    # Factor the large values out and work with logarithmic derivatives.
    gH, gHc, gJc = dH / H, dHc / Hc, dJc / Jc
    if l == 1:
        den_red = gH - c * gJc
        num_red = c * gHc - gH
    else:
        den_red = c * gH - gJc
        num_red = gHc - c * gH
    if abs(den_red) < 1e-300:
        raise ResonanceError("scattering denominator vanished at high order")
    r = (Hc / Jc) * (num_red / den_red)
    t = 1j / (Jc * (H * den_red))
    return r, t


@lru_cache(maxsize=8192)
def scattering_coeffs(n: int, l: int, medium: Medium, R1: float) -> ScatterCoeffs:
    if R1 <= 0:
        raise ValueError("R1 must be positive")
    r, t = coefficients_from_contrast(n, l, contrast(medium), medium.k0 * R1)
    return ScatterCoeffs(n, l, complex(r), complex(t))


def lossless_transmission_parts(n: int, l: int, c: float, z: float):
    """``(Re(1+R), |T|^2)`` for a real contrast, free of cancellation.

    Deep in the evanescent regime ``R`` is ``-1`` plus a huge imaginary
    part, so ``Re(1+R)`` cannot be read off ``R``.  Expanding
    ``Re((num + den) conj(den))`` in real Riccati-Bessel values, every large
    product cancels in pairs and what remains is
    ``c W(Jc, Yc) W(J, Y)`` with the two Riccati Wronskians evaluated
    numerically.
    """
    c = float(c)
    z = float(z)
    J, dJ = (complex(v).real for v in riccati("j", n, z))
    Y, dY = (complex(v).real for v in riccati("y", n, z))
    Jc, dJc = (complex(v).real for v in riccati("j", n, c * z))
    Yc, dYc = (complex(v).real for v in riccati("y", n, c * z))
    if l == 1:
        den = complex(Jc * dJ - c * dJc * J, Jc * dY - c * dJc * Y)
    elif l == 2:
        den = complex(c * Jc * dJ - dJc * J, c * Jc * dY - dJc * Y)
    else:
        raise ValueError("l must be 1 or 2")
    d2 = abs(den) ** 2
    if d2 == 0:
        raise ResonanceError(f"scattering denominator vanished at n={n}, l={l}, z={z}")
    w_in = Jc * dYc - dJc * Yc
    w_out = J * dY - dJ * Y
    return c * w_in * w_out / d2, 1.0 / d2
