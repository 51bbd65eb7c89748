"""interceptsim: delay-aware pursuit-evasion interception simulation.

A planar engagement simulator combining a two-delay differential-game
guidance law, a multiple-model particle filter with a sojourn-time state,
a real-time uncertainty-interval estimator, and a fixed-lag particle
smoother, evaluated through seeded Monte Carlo campaigns.
"""

from .dynamics import EngagementState, Measurement, VehicleParams
from .game import DelayModel, GameParams
from .kernels import BACKEND as KERNEL_BACKEND
from .scenario import ScenarioConfig, read_config, write_config

__all__ = [
    "EngagementState", "Measurement", "VehicleParams",
    "DelayModel", "GameParams",
    "ScenarioConfig", "read_config", "write_config",
    "KERNEL_BACKEND",
]

__version__ = "0.1.0"
