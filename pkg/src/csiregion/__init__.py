"""Joint uplink/downlink sum-rate regions under imperfect channel knowledge.

The package chains WSSUS channel statistics, MMSE pilot-based estimation
and prediction, rank-reduced CSI feedback and multi-user capacity bounds
into a parameter sweep over pilot densities and feedback budgets.
"""
from .errors import InvalidArgument, NumericFailure, UnusableLink
from .kernels import BACKEND_NAME

__version__ = "0.1.0"

__all__ = ["InvalidArgument", "NumericFailure", "UnusableLink", "BACKEND_NAME", "__version__"]
