"""Hausdorff operators on weighted function spaces of the upper half-plane."""
from ._accel import BACKEND
from .analysis import *  # noqa: F401,F403
from .errors import DomainError, PreconditionError
from .holo_expr import *  # noqa: F401,F403
from .kernels import *  # noqa: F401,F403
from .operators import *  # noqa: F401,F403
from .quadrature import *  # noqa: F401,F403
from .spaces import *  # noqa: F401,F403

__version__ = "0.1.0"
