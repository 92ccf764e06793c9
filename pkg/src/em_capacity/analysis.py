"""Mode counting, near-field backscatter and Q-constrained gain optimisation."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .channel import mode_powers
from .modes import ModeIndex, _vsh_all, radial_integrals
from .qfactor import quality_factor
from .scattering import MU0, Z0, Medium, scattering_coeffs
from .specfun import sph_jn_all, sph_yn_all

log = logging.getLogger(__name__)


class InconclusiveCount(RuntimeError):
    """Mode search hit its cap while modes were still admissible."""


class InfeasibleQ(ValueError):
    """The Q bound lies below every admissible mode's Q."""

    def __init__(self, q_bar, q_min):
        super().__init__(f"q_bar = {q_bar:g} is below the minimum achievable Q_J = {q_min:g}")
        self.q_bar = q_bar
        self.q_min = q_min


class UnboundedBeam(ValueError):
    """The pattern never falls to half its peak on the cut."""


# ---------------------------------------------------------------------------
# spatial degrees of freedom


@dataclass(frozen=True)
class DofQuery:
    medium: Medium
    R1: float
    eta_min: float
    q_max: float
    n_cap: int = 60

    def __post_init__(self):
        if not 0 < self.eta_min <= 1:
            raise ValueError("eta_min must lie in (0, 1]")
        if not self.q_max > 0:
            raise ValueError("q_max must be positive")
        if self.n_cap < 1:
            raise ValueError("n_cap must be >= 1")


def dof_count(query: DofQuery, quiet_orders: int = 3) -> int:
    """Number of (n, m, l) modes with ``eta >= eta_min`` and ``Q <= q_max``.

    The search over ``n`` stops once ``quiet_orders`` consecutive orders have
    both polarisations below ``eta_min``.
    """
    count = 0
    quiet = 0
    for n in range(1, query.n_cap + 1):
        below = 0
        for l in (1, 2):
            q = quality_factor(n, l, query.medium, query.R1)
            if q.eta < query.eta_min:
                below += 1
            elif q.q <= query.q_max:
                count += 2 * n + 1
        quiet = quiet + 1 if below == 2 else 0
        if quiet >= quiet_orders:
            return count
    raise InconclusiveCount(
        f"reached n_cap = {query.n_cap} with efficiency still above {query.eta_min}"
    )


def dof_small_sphere_reference(k0R1: float) -> float:
    """``2 x (x + 2)``: the count when exactly the orders ``n <= k0 R1`` are usable."""
    return 2 * k0R1 * (k0R1 + 2)


# ---------------------------------------------------------------------------
# backscatter


@dataclass(frozen=True)
class BackscatterResult:
    p_l: float
    p_s: float
    p_t: float
    ratio: float
    p_r: float = 1.0


def backscatter_powers(n: int, k0: float, R2: float) -> BackscatterResult:
    """Load and scatter-induced powers for a matched dipole at ``k0 R2`` (unit nominal power)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    x = k0 * R2
    if not x > 0:
        raise ValueError("k0 R2 must be positive")
    j = float(sph_jn_all(n, x)[n].real)
    y = float(sph_yn_all(n, x)[n].real)
    p_l = 3 / 32 * (2 * n + 1) * (y * y + j * j)
    p_s = 3 / 16 * (2 * n + 1) * (y * y - j * j)
    p_t = 1.0 + p_s
    return BackscatterResult(p_l, p_s, p_t, p_l / p_t)


def backscatter_sequence(beta: float, n_sequence):
    if not beta > 0:
        raise ValueError("beta must be positive")
    return [backscatter_powers(n, 1.0, beta * n).ratio for n in n_sequence]


def backscatter_limit(beta: float, n_sequence) -> float:
    """``P_L/P_T`` at ``k0 R2 = n beta`` for the last order of ``n_sequence``."""
    if beta == 1:
        raise ValueError("the limit of P_L/P_T is undefined at beta = 1")
    seq = backscatter_sequence(beta, list(n_sequence))
    if not seq:
        raise ValueError("n_sequence is empty")
    return seq[-1]


# ---------------------------------------------------------------------------
# far field and gain


@dataclass(frozen=True)
class ModeData:
    n: int
    l: int
    tau: float
    rho: float
    q: float
    K: complex


def mode_data(n: int, l: int, medium: Medium, R1: float) -> ModeData:
    rho, tau = mode_powers(n, l, medium, R1)
    q = quality_factor(n, l, medium, R1).q
    k1 = medium.k1
    t = scattering_coeffs(n, l, medium, R1).t_nl
    i_s = radial_integrals(n, l, k1, R1).i_jjstar
    K = -medium.omega * MU0 * k1 * t * math.sqrt(i_s / (n * (n + 1)))
    return ModeData(n, l, tau, rho, q, complex(K))


def far_field_pattern(mode: ModeIndex, k0: float, theta, phi):
    """``lim r U_nml(k0, r) e^{-i k0 r}`` as Cartesian components."""
    A1, _, A3 = _vsh_all(mode.n, mode.m, np.asarray(theta, float), np.asarray(phi, float))
    s = math.sqrt(mode.n * (mode.n + 1)) / k0
    if mode.l == 1:
        return s * (-1j) ** (mode.n + 1) * A1
    return s * (-1j) ** mode.n * A3


@dataclass
class Excitation:
    coefficients: dict
    N: int

    def __post_init__(self):
        vals = np.array(list(self.coefficients.values()), dtype=complex)
        if vals.size == 0 or not np.all(np.isfinite(vals)) or not np.any(vals != 0):
            raise ValueError("excitation needs finite coefficients, at least one nonzero")
        for mode in self.coefficients:
            if abs(mode.m) != 1 or mode.n > self.N:
                raise ValueError(f"mode {mode} is outside the boresight set")

    def scaled(self, c: complex) -> "Excitation":
        return Excitation({k: c * v for k, v in self.coefficients.items()}, self.N)


class _ModeTable:
    def __init__(self, medium: Medium, R1: float):
        self.medium = medium
        self.R1 = R1
        self._cache = {}

    def __call__(self, n: int, l: int) -> ModeData:
        if (n, l) not in self._cache:
            self._cache[(n, l)] = mode_data(n, l, self.medium, self.R1)
        return self._cache[(n, l)]


def _far_field(exc: Excitation, table: _ModeTable, theta, phi):
    k0 = table.medium.k0
    out = 0
    for mode, J in exc.coefficients.items():
        out = out + table(mode.n, mode.l).K * J * far_field_pattern(mode, k0, theta, phi)
    return out


def _powers(exc: Excitation, table: _ModeTable):
    w = table.medium.omega * MU0 / 2
    p_tot = w * sum(abs(J) ** 2 * table(m.n, m.l).tau for m, J in exc.coefficients.items())
    p_rad = w * sum(abs(J) ** 2 * table(m.n, m.l).rho for m, J in exc.coefficients.items())
    return p_tot, p_rad


def excitation_q(exc: Excitation, medium: Medium, R1: float, table=None) -> float:
    """``Q_J``: the tau-weighted mean of the mode Q factors."""
    table = table or _ModeTable(medium, R1)
    num = den = 0.0
    for m, J in exc.coefficients.items():
        d = table(m.n, m.l)
        num += d.q * abs(J) ** 2 * d.tau
        den += abs(J) ** 2 * d.tau
    return num / den


def gain_and_directivity(exc: Excitation, medium: Medium, R1: float, theta=0.0, phi=0.0, table=None):
    table = table or _ModeTable(medium, R1)
    e = _far_field(exc, table, theta, phi)
    U = np.sum(np.abs(e) ** 2, axis=-1) / (2 * Z0)
    p_tot, p_rad = _powers(exc, table)
    return 4 * math.pi * U / p_tot, 4 * math.pi * U / p_rad


# ---------------------------------------------------------------------------
# optimisation


def _solve_block(a, qk, q_bar):
    """Maximise ``|a.x|^2 / |x|^2`` subject to ``sum (q_k - q_bar)|x_k|^2 <= 0``.

    The optimum is ``x_k ~ conj(a_k) / (1 + nu (q_k - q_bar))`` with the
    multiplier ``nu`` fixed by the active constraint.  The residual
    ``g(nu) = sum (q_k - q_bar)|a_k|^2 / (1 + nu (q_k - q_bar))^2`` decreases
    monotonically on the admissible interval, so a bracketing root finder
    is exact.
    """
    d = qk - q_bar
    w = np.abs(a) ** 2

    def g(nu):
        return float(np.sum(d * w / (1 + nu * d) ** 2))

    if g(0.0) <= 0:
        nu = 0.0
    else:
        lo_mask = d < 0
        if not np.any(lo_mask & (w > 0)):
            # only modes with zero boresight weight are below the bound
            raise InfeasibleQ(q_bar, float(np.min(qk)))
        nu_max = 1.0 / float(np.max(-d[lo_mask]))
        hi = nu_max * (1 - 1e-15)
        while g(hi) > 0:  # pragma: no cover - g -> -inf at nu_max
            hi = nu_max - (nu_max - hi) / 10
        nu = brentq(g, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    x = np.conj(a) / (1 + nu * d)
    return x, nu


@dataclass(frozen=True)
class GainResult:
    excitation: Excitation
    gain: float
    directivity: float
    q_j: float
    multiplier: float


def optimize_gain(medium: Medium, R1: float, N: int, q_bar: float, polarization: str = "x", table=None):
    """Maximise boresight gain subject to ``Q_J <= q_bar`` over modes ``(n, +-1, l)``, ``n <= N``.

    The m = +1 and m = -1 modes radiate opposite circular polarisations on
    the axis and contribute identical, decoupled problems; the optimum of
    one block is also the joint optimum.  ``polarization`` picks which of
    the equivalent optima is returned: ``"x"`` combines both blocks into an
    x-polarised beam, ``"rhc"``/``"lhc"`` keep a single block.

    Returns ``(Excitation, gain, directivity)``.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    table = table or _ModeTable(medium, R1)
    keys = [(n, l) for n in range(1, N + 1) for l in (1, 2)]
    data = [table(n, l) for n, l in keys]
    qk = np.array([d.q for d in data])
    if q_bar < qk.min():
        raise InfeasibleQ(q_bar, float(qk.min()))
    tau = np.array([d.tau for d in data])
    # boresight field of each m = +1 mode projected on (x + iy)/sqrt(2)
    e_plus = np.array([1, 1j, 0]) / math.sqrt(2)
    k0 = medium.k0
    s = np.array([
        d.K * np.vdot(e_plus, far_field_pattern(ModeIndex(n, 1, l), k0, 0.0, 0.0))
        for (n, l), d in zip(keys, data)
    ])
    x, nu = _solve_block(s / np.sqrt(tau), qk, q_bar)
    J = x / np.sqrt(tau)
    coeffs = {}
    for (n, l), Jk in zip(keys, J):
        if polarization in ("x", "rhc"):
            coeffs[ModeIndex(n, 1, l)] = complex(Jk)
        if polarization in ("x", "lhc"):
            # mirror coefficients so that the m = -1 field at the pole is the
            # conjugate circular component with the same amplitude
            m_plus = far_field_pattern(ModeIndex(n, 1, l), k0, 0.0, 0.0)
            m_minus = far_field_pattern(ModeIndex(n, -1, l), k0, 0.0, 0.0)
            ratio = np.vdot(np.conj(e_plus), m_minus) / np.vdot(e_plus, m_plus)
            coeffs[ModeIndex(n, -1, l)] = complex(Jk / ratio)
    if polarization not in ("x", "rhc", "lhc"):
        raise ValueError("polarization must be 'x', 'rhc' or 'lhc'")
    exc = Excitation(coeffs, N)
    gain, directivity = gain_and_directivity(exc, medium, R1, table=table)
    return GainResult(exc, float(gain), float(directivity), excitation_q(exc, medium, R1, table), nu)


def gain_sweep(medium: Medium, R1: float, q_bar: float, N_values=range(1, 9), rel_tol: float = 1e-3):
    """Optimal gain for each N and the smallest N reaching the best gain within ``rel_tol``."""
    table = _ModeTable(medium, R1)
    results = {}
    for N in N_values:
        try:
            results[N] = optimize_gain(medium, R1, N, q_bar, table=table)
        except InfeasibleQ:
            continue
    if not results:
        raise InfeasibleQ(q_bar, min(table(1, l).q for l in (1, 2)))
    best = max(r.gain for r in results.values())
    argmax = min(N for N, r in results.items() if r.gain >= best * (1 - rel_tol))
    return results, argmax


# ---------------------------------------------------------------------------
# beam pattern


@dataclass(frozen=True)
class BeamPattern:
    theta_grid: np.ndarray  # signed polar angle: theta < 0 lies on the cut phi + pi
    phi_cuts: np.ndarray
    gain: np.ndarray  # shape (len(phi_cuts), len(theta_grid))
    directivity: np.ndarray = field(default=None)


def beam_pattern(exc: Excitation, medium: Medium, R1: float, theta_grid=None, phi_cuts=(0.0, math.pi / 2)):
    """Gain on plane cuts through the boresight axis.

    ``theta_grid`` holds signed polar angles in radians; a negative value
    ``-t`` on cut ``phi`` is the direction ``(t, phi + pi)``.  The default
    grid spans [-180, 180] degrees in 0.25 degree steps.
    """
    if theta_grid is None:
        theta_grid = np.deg2rad(np.arange(-180.0, 180.0 + 1e-9, 0.25))
    theta_grid = np.asarray(theta_grid, float)
    phi_cuts = np.asarray(phi_cuts, float)
    table = _ModeTable(medium, R1)
    th = np.abs(theta_grid)[None, :]
    ph = phi_cuts[:, None] + np.where(theta_grid < 0, math.pi, 0.0)[None, :]
    g, d = gain_and_directivity(exc, medium, R1, th, ph, table=table)
    return BeamPattern(theta_grid, phi_cuts, np.asarray(g), np.asarray(d))


def pattern_solid_angle_average(exc: Excitation, medium: Medium, R1: float, n_theta: int = 720, n_phi: int = 4):
    """``(1/4pi) int G dOmega`` and ``(1/4pi) int D dOmega`` by midpoint-theta, uniform-phi rules."""
    th = (np.arange(n_theta) + 0.5) * math.pi / n_theta
    ph = np.arange(n_phi) * 2 * math.pi / n_phi
    T, P = np.meshgrid(th, ph, indexing="ij")
    g, d = gain_and_directivity(exc, medium, R1, T, P)
    w = np.sin(T) * (math.pi / n_theta) * (2 * math.pi / n_phi) / (4 * math.pi)
    return float(np.sum(w * g)), float(np.sum(w * d))


def _crossing(x0, g0, x1, g1, level):
    return x0 + (level - g0) * (x1 - x0) / (g1 - g0)


def beamwidth(pattern, cut: int = 0) -> float:
    """Full width in degrees between the half-gain points around the peak of one cut.

    ``pattern`` is a :class:`BeamPattern` or a pair ``(theta_grid, values)``.
    """
    if isinstance(pattern, BeamPattern):
        theta, g = pattern.theta_grid, pattern.gain[cut]
    else:
        theta, g = (np.asarray(a, float) for a in pattern)
    i = int(np.argmax(g))
    half = g[i] / 2
    left = right = None
    for k in range(i, 0, -1):
        if g[k - 1] < half:
            left = _crossing(theta[k - 1], g[k - 1], theta[k], g[k], half)
            break
    for k in range(i, len(g) - 1):
        if g[k + 1] < half:
            right = _crossing(theta[k], g[k], theta[k + 1], g[k + 1], half)
            break
    if left is None or right is None:
        raise UnboundedBeam("pattern does not fall to half its peak on both sides")
    return math.degrees(right - left)
