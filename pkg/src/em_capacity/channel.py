"""Per-mode power coefficients, efficiencies, channel gains and capacity.

A unit-norm source ``J v*_nml`` in the sphere consumes ``(w mu0/2)|J|^2 tau``
and radiates ``(w mu0/2)|J|^2 rho``.  The efficiency ``eta = rho/tau`` fixes
the equivalent scalar gain ``h^2 = 3 alpha eta / (4 kB T B)`` of the sampled
channel, and capacity follows by waterfilling over all (n, m, l).

Channel input power uses the time-average convention ``p = E|X|^2 / 2``;
with it the sampled-field gain ``sqrt(3 alpha/2) sqrt(eta)`` and ``h`` give
the same SNR.
"""
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .modes import (
    ModeIndex,
    calligraphic_E,
    radial_integrals,
    radial_parts,
)
from .specfun import gauss_legendre, sph_jn_all
from .scattering import Medium, lossless_transmission_parts, scattering_coeffs

log = logging.getLogger(__name__)

LOSSLESS_THRESHOLD = 1e-12


class BranchError(ValueError):
    """Lossy-only formula called on a lossless medium, or the reverse."""


class NumericalInconsistency(ArithmeticError):
    """A quantity that must be positive came out nonpositive."""


@dataclass(frozen=True)
class ChannelSpec:
    medium: Medium
    R1: float
    N: int
    alpha: float
    noise_floor: float = 1.0  # 4 kB T B in W
    power: float = 1.0

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if self.power < 0:
            raise ValueError(f"power must be nonnegative, got {self.power}")
        if not self.noise_floor > 0:
            raise ValueError(f"noise_floor must be positive, got {self.noise_floor}")
        if not self.R1 > 0:
            raise ValueError(f"R1 must be positive, got {self.R1}")


@dataclass(frozen=True)
class ModeChannel:
    n: int
    l: int
    rho: float
    tau: float
    eta: float
    gain_sq: float
    multiplicity: int


@dataclass(frozen=True)
class CapacityResult:
    water_level: float
    allocations: list = field(default_factory=list)
    capacity_nats: float = 0.0

    @property
    def capacity_bits(self) -> float:
        return self.capacity_nats / math.log(2)

    @property
    def total_power(self) -> float:
        return math.fsum(mult * p for _, p, mult in self.allocations)


def _is_lossless(medium: Medium) -> bool:
    return medium.tan_delta < LOSSLESS_THRESHOLD


@lru_cache(maxsize=4096)
def mode_DEF(n: int, l: int, medium: Medium, R1: float):
    """``(D, E, F)`` for a lossy sphere; ``F = D - E/(4 k1' k1'')``."""
    k1 = medium.k1
    if k1.imag <= 0:
        raise BranchError("D, E, F need k1'' > 0; use the lossless branch")
    sc = scattering_coeffs(n, l, medium, R1)
    ri = radial_integrals(n, l, k1, R1)
    D = k1 * ((1 + sc.r_nl) * ri.i_jjstar + 1j * ri.i_yjstar)
    E = calligraphic_E(n, l, k1)
    F = D - E / (4 * k1.real * k1.imag)
    return D, E, F


def _phase_deficit(n: int, k: complex, R: float, nodes: int):
    """``2 int_0^R r^2 Im(e^{-i n arg k} j_n(kr))^2 dr`` by Gauss-Legendre."""
    x, w = gauss_legendre(nodes)
    r = 0.5 * R * (x + 1)
    u = np.exp(-1j * n * np.angle(k)) * sph_jn_all(n, k * r)[n]
    return 0.5 * R * float(np.sum(w * r * r * 2 * u.imag**2))


def loss_deficit(n: int, l: int, k: complex, R: float) -> float:
    """``I^jj* - Re(E I^jj)`` evaluated without cancellation.

    With ``u = e^{-i n arg k} j_n(kr)`` one has ``|j|^2 - Re(E j^2) = 2 (Im u)^2``
    and ``Im u = O(k'')``, so the difference is integrated directly.  For
    ``l = 2`` the composite adds a cross term ``w- w+ Re((E- - E+)(I- - I+))``.
    """
    k = complex(k)
    nodes = int(32 + abs(k) * R)
    if l == 1:
        return _phase_deficit(n, k, R, nodes)
    wm, wp = (n + 1) / (2 * n + 1), n / (2 * n + 1)
    lo = radial_integrals(n - 1, 1, k, R) if n > 1 else None
    hi = radial_integrals(n + 1, 1, k, R)
    phi = cmath.phase(k)
    e_diff = 2j * math.sin(2 * phi) * cmath.exp(-2j * n * phi)
    if n > 1:
        i_lo = lo.i_jj
    else:
        # order-0 piece of the l = 2 composite
        x, w = gauss_legendre(nodes)
        r = 0.5 * R * (x + 1)
        i_lo = 0.5 * R * complex(np.sum(w * r * r * sph_jn_all(0, k * r)[0] ** 2))
    cross = wm * wp * (e_diff * (i_lo - hi.i_jj)).real
    return wm * _phase_deficit(n - 1, k, R, nodes) + wp * _phase_deficit(n + 1, k, R, nodes) + cross


def lossless_mode_powers(n: int, l: int, medium: Medium, R1: float):
    """``(rho, tau)`` for a lossless sphere: ``tau = k1 I^jj Re(1+R)``."""
    if medium.tan_delta != 0:
        raise BranchError("lossless formulas need tan_delta == 0")
    k1 = medium.k1.real
    re_1pr, t_sq = lossless_transmission_parts(n, l, k1 / medium.k0, medium.k0 * R1)
    i_jj = radial_integrals(n, l, k1, R1).i_jj.real
    tau = k1 * i_jj * re_1pr
    rho = i_jj * k1 * k1 * t_sq / medium.k0
    return rho, tau


def mode_powers(n: int, l: int, medium: Medium, R1: float):
    """Radiated and consumed power coefficients ``(rho, tau)`` of mode (n, l)."""
    if _is_lossless(medium):
        rho, tau = lossless_mode_powers(n, l, medium.with_loss(0.0), R1)
    else:
        k1 = medium.k1
        D, _, _ = mode_DEF(n, l, medium, R1)
        sc = scattering_coeffs(n, l, medium, R1)
        ri = radial_integrals(n, l, k1, R1)
        c = 1.0 / (4 * k1.real * k1.imag)
        rho = ri.i_jjstar * abs(k1 * sc.t_nl) ** 2 / medium.k0
        # tau = Re(F I^jj)/I* + c, regrouped so the O(1/k'') pieces cancel
        # analytically instead of in floating point.
        tau = (D * ri.i_jj).real / ri.i_jjstar + c * loss_deficit(n, l, k1, R1) / ri.i_jjstar
    if not (tau > 0 and math.isfinite(tau)):
        raise NumericalInconsistency(f"tau = {tau} for n={n}, l={l}")
    return float(rho), float(tau)


def efficiency(n: int, l: int, medium: Medium, R1: float) -> float:
    rho, tau = mode_powers(n, l, medium, R1)
    return rho / tau


def mode_channel(spec: ChannelSpec, n: int, l: int) -> ModeChannel:
    rho, tau = mode_powers(n, l, spec.medium, spec.R1)
    eta = rho / tau
    return ModeChannel(n, l, rho, tau, eta, 3 * spec.alpha * eta / spec.noise_floor, 2 * n + 1)


def mode_gain(spec: ChannelSpec, n: int, l: int) -> float:
    """Scalar channel gain ``h`` (same for every m)."""
    return math.sqrt(mode_channel(spec, n, l).gain_sq)


def mode_channels(spec: ChannelSpec):
    return [mode_channel(spec, n, l) for n in range(1, spec.N + 1) for l in (1, 2)]


def waterfill(spec, gains) -> CapacityResult:
    """Waterfilling over parallel channels.

    ``spec`` is a :class:`ChannelSpec` or a total power in W; ``gains`` is a
    list of ``(h^2, multiplicity)`` pairs, or of ``(label, h^2, multiplicity)``.
    Allocations come back as ``(label, p, multiplicity)`` with ``p`` per
    channel, so the total power is ``sum(multiplicity * p)``.
    """
    P = spec.power if isinstance(spec, ChannelSpec) else float(spec)
    if P < 0:
        raise ValueError("power must be nonnegative")
    items = []
    for idx, g in enumerate(gains):
        label, h2, mult = (idx, *g) if len(g) == 2 else g
        if not h2 > 0:
            raise ValueError(f"channel gains must be positive, got {h2}")
        if mult < 1:
            raise ValueError("multiplicity must be a positive integer")
        items.append((label, float(h2), int(mult)))
    if not items:
        raise ValueError("waterfilling needs at least one channel")
    if P == 0:
        return CapacityResult(0.0, [], 0.0)

    # Exact water level: fund the strongest channels first and stop at the
    # first channel whose noise level lies above the resulting level.
    order = sorted(range(len(items)), key=lambda i: -items[i][1])
    inv = np.array([1.0 / items[i][1] for i in order])
    mult = np.array([items[i][2] for i in order], dtype=float)
    cum_m = np.cumsum(mult)
    cum_inv = np.cumsum(mult * inv)
    level = None
    for k in range(len(order)):
        cand = (P + cum_inv[k]) / cum_m[k]
        if k + 1 == len(order) or cand <= inv[k + 1]:
            level = cand
            break
    alloc = []
    cap = []
    for label, h2, m in items:
        p = max(level - 1.0 / h2, 0.0)
        alloc.append((label, p, m))
        cap.append(m * math.log1p(p * h2))
    return CapacityResult(float(level), alloc, math.fsum(cap))


def capacity(spec: ChannelSpec) -> CapacityResult:
    """Theorem-style capacity in nats over all modes with ``n <= N``."""
    chans = mode_channels(spec)
    return waterfill(spec, [((c.n, c.l), c.gain_sq, c.multiplicity) for c in chans])


def capacity_lossless(spec: ChannelSpec) -> float:
    """Closed form for ``2N(N+2)`` equal channels with ``h^2 = 3 alpha / (4 kB T B)``."""
    dof = 2 * spec.N * (spec.N + 2)
    h2 = 3 * spec.alpha / spec.noise_floor
    return dof * math.log1p(spec.power * h2 / dof)


# ---------------------------------------------------------------------------
# reverse-channel noise statistic by direct double integration


def _pair(n: int, l: int, f, g):
    """Angular-integrated dot product of two radial triples, ``n(n+1)`` included."""
    s = n * (n + 1)
    if l == 1:
        return s * f[0] * g[0]
    return s * (s / (2 * n + 1) ** 2 * f[1] * g[1] + f[2] * g[2])


def reverse_noise_statistic(n: int, l: int, medium: Medium, R1: float, nodes: int = 96) -> float:
    """``Re <v, -i G, v>`` over the sphere for the normalised source ``v = v*_nml``.

    The Green dyadic of the dielectric sphere is expanded in interior vector
    waves and the resulting radial double integral is evaluated with nested
    Gauss-Legendre rules split at ``r' = r``.  The result should reproduce
    ``tau`` from :func:`mode_powers`.
    """
    k = medium.k1
    R = scattering_coeffs(n, l, medium, R1).r_nl
    x, w = gauss_legendre(nodes)
    r = 0.5 * R1 * (x + 1)
    wr = 0.5 * R1 * w
    # inner nodes on [0, r_i] for every outer node
    rr = 0.5 * r[:, None] * (x[None, :] + 1)
    ww = 0.5 * r[:, None] * w[None, :]

    def trip(kind, z):
        return radial_parts(kind, n, z)

    def h_of(z):
        j = trip("j", z)
        y = trip("y", z)
        return tuple(a + 1j * b for a, b in zip(j, y))

    j_o = trip("j", k * r)
    jc_o = tuple(np.conj(a) for a in j_o)
    h_o = h_of(k * r)
    j_i = trip("j", k * rr)
    jc_i = tuple(np.conj(a) for a in j_i)

    # r > r': outgoing at r, regular at r'
    outer = _pair(n, l, j_o, h_o) * r**2
    inner = np.sum(_pair(n, l, j_i, jc_i) * rr**2 * ww, axis=1)
    below = np.sum(wr * outer * inner)
    # r < r': regular at r, outgoing at r' (outer variable is r' here)
    outer = _pair(n, l, h_o, jc_o) * r**2
    inner = np.sum(_pair(n, l, j_i, j_i) * rr**2 * ww, axis=1)
    above = np.sum(wr * outer * inner)
    # reflected part separates
    a = np.sum(wr * _pair(n, l, j_o, j_o) * r**2)
    b = np.sum(wr * _pair(n, l, j_o, jc_o) * r**2)
    total = k / (n * (n + 1)) * (below + above + R * a * b)
    if l == 2:
        # singular radial-radial part of the dyadic at r = r'
        s = n * (n + 1) / (2 * n + 1)
        total += 1j / k**2 * np.sum(wr * r**2 * s * s * np.abs(j_o[1]) ** 2)
    nsq = n * (n + 1) * radial_integrals(n, l, k, R1).i_jjstar
    return float((total / nsq).real)
