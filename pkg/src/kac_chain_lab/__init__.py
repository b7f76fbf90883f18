"""Exact and Monte-Carlo verification of Kac-type return-time identities.

Finite Z^d-systems are handled with exact rationals: invariant chains and
their vertex expectations, the return-time identity catalog, poset epochs
and durations, the dyadic odometer and equidecomposition LPs.  Circle and
torus flows and renewal processes are checked statistically.
"""

from .action import FiniteSystem, act, from_descriptor, random_system, rotation, torus
from .chains import ChainKernel, verify_ve
from .errors import KacLabError
from .mc import McEstimate
from .returns import IdentityCatalog, evaluate_identity

__version__ = "0.1.0"

__all__ = [
    "FiniteSystem", "act", "from_descriptor", "random_system", "rotation", "torus",
    "ChainKernel", "verify_ve", "KacLabError", "McEstimate", "IdentityCatalog",
    "evaluate_identity", "__version__",
]
