"""Fixed block-length joint source-channel coding toolkit.

Exact information functionals, random-coding exponents, admissible-region
checkers for correlated sources over multiple-access and interference
channels, separation scanners, and a Monte Carlo simulator of the matrix
coding scheme with exact distributional verification.
"""

from .core import Alphabet, BudgetError, Channel, JointPmf, Pmf
from .logreal import LogReal

__version__ = "0.1.0"

__all__ = [
    "Alphabet",
    "BudgetError",
    "Channel",
    "JointPmf",
    "LogReal",
    "Pmf",
    "__version__",
]
