"""Capacity, efficiency, Q factor and gain of EM channels with lossy dielectric-sphere sources."""
from .scattering import Medium, ResonanceError, scattering_coeffs
from .modes import ModeIndex, modes_up_to
from .channel import ChannelSpec, capacity, capacity_lossless, efficiency, mode_powers, waterfill
from .qfactor import quality_factor
from .analysis import DofQuery, backscatter_powers, dof_count, gain_sweep, optimize_gain
from .sphsample import fibonacci_points, gram_matrix, simulate_channel

__version__ = "0.1.0"

__all__ = [
    "Medium",
    "ResonanceError",
    "scattering_coeffs",
    "ModeIndex",
    "modes_up_to",
    "ChannelSpec",
    "capacity",
    "capacity_lossless",
    "efficiency",
    "mode_powers",
    "waterfill",
    "quality_factor",
    "DofQuery",
    "backscatter_powers",
    "dof_count",
    "gain_sweep",
    "optimize_gain",
    "fibonacci_points",
    "gram_matrix",
    "simulate_channel",
]
