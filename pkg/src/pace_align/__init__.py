"""Speech-motion synchronization toolkit.

Variable admittance guidance along a reference curve, paced together with
time-scaled and adaptively paraphrased speech audio, under a time-varying
cooperation estimate.
"""

__version__ = "0.1.0"

from .config import SCHEMES, SessionConfig, UserConfig, load_config
from .pacing import CooperationEstimator, PaceState, ideal_paces
from .session import SessionLog, SessionRunner, compute_summary, run_session
from .speech import PhrasingGraph, load_graph
from .trajectory import Trajectory, load_trajectory

__all__ = [
    "SCHEMES",
    "SessionConfig",
    "UserConfig",
    "load_config",
    "CooperationEstimator",
    "PaceState",
    "ideal_paces",
    "SessionLog",
    "SessionRunner",
    "compute_summary",
    "run_session",
    "PhrasingGraph",
    "load_graph",
    "Trajectory",
    "load_trajectory",
    "__version__",
]
