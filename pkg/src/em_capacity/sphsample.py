"""Point sets on the observation sphere and Monte-Carlo runs of the sampled channels.

Forward channel: the sphere's field is sampled at ``K`` points of radius
``R2`` with ``k0 R2 = sqrt(K/alpha)`` and projected on the normalised
outgoing waves ``u_nml``.  Reverse channel: point dipoles at the same
points are driven through the conjugate waves ``u*_nml`` and the field in
the sphere is projected on ``v_nml``.  In both directions the normalised
input ``X`` (with ``p = E|X|^2/2``) and output ``Y`` should satisfy
``E|gain|^2 = (3 alpha / 2) eta``.

Randomness comes from Philox streams keyed by ``(seed, block index)``; each
block of draws is reduced on its own and block statistics are summed in
block order, so results do not depend on how blocks are batched.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .channel import ChannelSpec, mode_powers, reverse_noise_statistic
from .modes import modes_up_to, normalization, radial_integrals, wave_function
from .scattering import MU0, scattering_coeffs

GOLDEN_ANGLE = math.pi * (3 - math.sqrt(5))
BLOCK = 1000  # draws per random stream


class ApproximationInvalid(ValueError):
    """Sample sphere lies inside the reactive near field of the highest order."""


@dataclass(frozen=True)
class PointSet:
    K: int
    alpha: float
    theta: np.ndarray
    phi: np.ndarray
    min_pair_distance: float

    @property
    def beta(self) -> float:
        """Measured separation constant: min chord distance times ``sqrt(K)``."""
        return self.min_pair_distance * math.sqrt(self.K)

    @property
    def k0R2(self) -> float:
        return math.sqrt(self.K / self.alpha)

    def unit_vectors(self):
        st = np.sin(self.theta)
        return np.stack([st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)], axis=-1)


def fibonacci_points(K: int, alpha: float) -> PointSet:
    """Golden-angle spiral with equal-area latitude bands."""
    if K < 8:
        raise ValueError("need at least 8 points")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    i = np.arange(K)
    z = 1 - (2 * i + 1) / K
    theta = np.arccos(z)
    phi = np.mod(i * GOLDEN_ANGLE, 2 * math.pi)
    st = np.sin(theta)
    xyz = np.stack([st * np.cos(phi), st * np.sin(phi), z], axis=-1)
    d, _ = cKDTree(xyz).query(xyz, k=2)
    return PointSet(K, alpha, theta, phi, float(d[:, 1].min()))


def octant_counts(points: PointSet):
    xyz = points.unit_vectors()
    idx = (xyz[:, 0] > 0).astype(int) * 4 + (xyz[:, 1] > 0).astype(int) * 2 + (xyz[:, 2] > 0)
    return np.bincount(idx, minlength=8)


def sample_matrix(points: PointSet, N: int, conjugate: bool = False):
    """``(3K, M)`` matrix of ``u_nml`` (or ``u*_nml``) at the points, units ``k0 = 1``."""
    modes = modes_up_to(N)
    x = points.k0R2
    r = np.full(points.K, x)
    cols = []
    for mode in modes:
        u = wave_function("U*" if conjugate else "U", mode, 1.0, (r, points.theta, points.phi))
        cols.append(u.reshape(-1) / normalization("S", mode.n, mode.l, 1.0, x))
    return np.stack(cols, axis=1), modes


def gram_matrix(points: PointSet, N: int, conjugate: bool = False):
    """``(4 pi/K) sum_j u_a(s_j)^H u_b(s_j)`` over all modes with ``n <= N``."""
    if points.K < 10 * points.alpha * N * N:
        warnings.warn("K is not much larger than alpha N^2; sampled orthogonality is poor", stacklevel=2)
    U, _ = sample_matrix(points, N, conjugate)
    return (4 * math.pi / points.K) * (U.conj().T @ U)


# ---------------------------------------------------------------------------
# Monte Carlo


@dataclass(frozen=True)
class NoiseDraw:
    """Thermal field noise at the sample points, shape ``(n_draws, K, 3)``."""

    seed: int
    samples: np.ndarray
    variance: float  # per Cartesian component


def point_noise_variance(omega: float, k0: float, noise_floor: float = 1.0) -> float:
    """``4kTB w mu0 k0 / (6 pi)``: per-component field noise at well separated points."""
    return noise_floor * omega * MU0 * k0 / (6 * math.pi)


def draw_point_noise(points: PointSet, omega: float, k0: float, n_draws: int, seed: int = 0, noise_floor: float = 1.0):
    """Independent circular Gaussian noise per point and component."""
    var = point_noise_variance(omega, k0, noise_floor)
    rng = _stream(seed, 0)
    return NoiseDraw(seed, math.sqrt(var) * _cn(rng, (n_draws, points.K, 3)), var)




@dataclass
class SimulationResult:
    direction: str
    seed: int
    n_draws: int
    modes: list
    gain_sq: np.ndarray
    gain_sq_se: np.ndarray
    expected_gain_sq: np.ndarray
    noise_cov: np.ndarray  # normalised by 4 kB T B
    generator: str = "Philox"
    extras: dict = field(default_factory=dict)

    def by_nl(self):
        """Average over m of measured and expected ``|gain|^2`` keyed by (n, l)."""
        out = {}
        for i, mode in enumerate(self.modes):
            out.setdefault((mode.n, mode.l), []).append(i)
        return {
            key: (
                float(np.mean(self.gain_sq[idx])),
                float(np.sqrt(np.sum(self.gain_sq_se[idx] ** 2)) / len(idx)),
                float(np.mean(self.expected_gain_sq[idx])),
            )
            for key, idx in out.items()
        }


def _stream(seed: int, block: int):
    ss = np.random.SeedSequence(seed, spawn_key=(block,))
    return np.random.Generator(np.random.Philox(ss))


def _cn(rng, shape):
    """Circular complex normal with unit variance."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)


def _threads():
    try:
        return max(1, int(os.environ.get("EM_CAPACITY_THREADS", "1")))
    except ValueError:
        return 1


def simulate_channel(
    direction: str,
    spec: ChannelSpec,
    points: PointSet,
    n_draws: int,
    seed: int = 0,
    batch_blocks: int = 4,
    point_noise: bool = False,
    input_power: float = 1.0,
) -> SimulationResult:
    """Estimate per-mode ``|gain|^2`` and the normalised noise covariance.

    Each draw sends independent inputs ``X ~ CN(0, 2 input_power)`` on all
    modes.  Gains are least-squares estimates ``sum conj(X) Y / sum |X|^2``.
    Forward noise is i.i.d. at the sample points with per-component variance
    ``4kTB w mu0 k0 / (6 pi)``.  Its projection only sees the span of the
    sampled waves; with ``U = QR`` the projected noise is drawn as
    ``R^H z`` (``point_noise=False``), which has exactly the same law as
    projecting a full ``3K``-vector of point noise (``point_noise=True``).
    Reverse noise on each mode has variance ``4kTB w mu0 <v, -iG, v>``
    with the statistic evaluated from the sphere's Green dyadic.
    """
    if direction not in ("forward", "reverse"):
        raise ValueError("direction must be 'forward' or 'reverse'")
    if abs(points.alpha - spec.alpha) > 1e-12:
        raise ValueError("point set and channel use different alpha")
    if points.K < spec.alpha * spec.N**2:
        raise ApproximationInvalid(
            f"K = {points.K} < alpha N^2 = {spec.alpha * spec.N**2:g}: samples are in the reactive near field"
        )
    if n_draws < 1:
        raise ValueError("n_draws must be positive")
    medium = spec.medium
    w, k0 = medium.omega, medium.k0
    x = points.k0R2
    U, modes = sample_matrix(points, spec.N, conjugate=(direction == "reverse"))
    M = len(modes)
    gram = (4 * math.pi / points.K) * (U.conj().T @ U)

    info = {}
    for n in range(1, spec.N + 1):
        for l in (1, 2):
            rho, tau = mode_powers(n, l, medium, spec.R1)
            k1 = medium.k1
            T = scattering_coeffs(n, l, medium, spec.R1).t_nl
            i_s = radial_integrals(n, l, k1, spec.R1).i_jjstar
            n_s = normalization("S", n, l, 1.0, x)
            n_v = math.sqrt(n * (n + 1) * i_s)
            # coupling of the source coefficient to the wave on the sample sphere
            G = -w * MU0 * k1 * T * n_v * n_s / (n * (n + 1))
            info[(n, l)] = (rho, tau, G)
    tau = np.array([info[(m.n, m.l)][1] for m in modes])
    eta = np.array([info[(m.n, m.l)][0] / info[(m.n, m.l)][1] for m in modes])
    G = np.array([info[(m.n, m.l)][2] for m in modes])
    y_scale = math.sqrt(6 * math.pi / (w * MU0 * k0))
    root = math.sqrt(4 * math.pi / points.K)
    if direction == "forward":
        # Y = y_scale root U^H E,  E = U diag(G) J,  J = X / sqrt(w mu0 tau)
        A = y_scale * root * (U.conj().T @ U) * (G / np.sqrt(w * MU0 * tau))[None, :]
        sigma_pt = math.sqrt(point_noise_variance(w, k0, spec.noise_floor))
        R = np.linalg.qr(U, mode="r")
        noise_map = y_scale * root * sigma_pt * R.conj().T
        noise_std = None
    else:
        # d_j = y_scale root sum u*_b X_b, E_a = G_a sum_j u*_a^H d_j, Y = E / sqrt(w mu0 tau)
        A = (G / np.sqrt(w * MU0 * tau))[:, None] * y_scale * root * (U.conj().T @ U)
        stat = {key: reverse_noise_statistic(key[0], key[1], medium, spec.R1) for key in info}
        var = np.array([spec.noise_floor * w * MU0 * stat[(m.n, m.l)] for m in modes]) / (w * MU0 * tau)
        noise_std = np.sqrt(var)
        noise_map = None
        info_power = (w * MU0 * k0 / (12 * math.pi)) * y_scale**2 * root**2 * np.real(np.trace(U.conj().T @ U)) / M
        info["power_per_unit_input"] = info_power

    n_blocks = -(-n_draws // BLOCK)
    scale_x = math.sqrt(2 * input_power)

    def run_block(b):
        rng = _stream(seed, b)
        size = min(BLOCK, n_draws - b * BLOCK)
        X = scale_x * _cn(rng, (M, size))
        if noise_map is not None:
            if point_noise:
                e = _cn(rng, (U.shape[0], size))
                Z = y_scale * root * sigma_pt * (U.conj().T @ e)
            else:
                Z = noise_map @ _cn(rng, (M, size))
        else:
            Z = noise_std[:, None] * _cn(rng, (M, size))
        Y = A @ X + Z
        return (
            np.sum(np.conj(X) * Y, axis=1),
            np.sum(np.abs(X) ** 2, axis=1),
            np.sum(np.abs(Y) ** 2, axis=1),
            Z @ Z.conj().T,
        )

    stats = [None] * n_blocks
    threads = _threads()
    for start in range(0, n_blocks, batch_blocks):
        idx = list(range(start, min(n_blocks, start + batch_blocks)))
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                for b, s in zip(idx, pool.map(run_block, idx)):
                    stats[b] = s
        else:
            for b in idx:
                stats[b] = run_block(b)

    sxy = sum(s[0] for s in stats)
    sxx = sum(s[1] for s in stats)
    syy = sum(s[2] for s in stats)
    szz = sum(s[3] for s in stats)
    g_hat = sxy / sxx
    resid = np.maximum(syy - np.abs(sxy) ** 2 / sxx, 0.0) / n_draws
    se_g = np.sqrt(resid / sxx)
    gain_sq = np.abs(g_hat) ** 2
    gain_sq_se = math.sqrt(2) * np.abs(g_hat) * se_g
    noise_cov = szz / n_draws / spec.noise_floor
    extras = {"gram": gram, "eta": eta}
    if direction == "reverse":
        extras["noise_statistic"] = {k: v for k, v in stat.items()}
        extras["power_per_unit_input"] = info["power_per_unit_input"]
    return SimulationResult(
        direction, seed, n_draws, modes, gain_sq, gain_sq_se, 1.5 * spec.alpha * eta, noise_cov, extras=extras
    )
