"""Exact time-dependent stationary correlations of the periodic TASEP.

The package evaluates Z^-1 <S| s_1 exp(-tH) s_m |S> for N particles on an
M-site ring from the determinantal Bethe-ansatz spectral sum, and checks it
against brute-force generator evolution and Monte Carlo simulation.
"""

__version__ = "0.1.0"

from .combinat import RingShape, binomial
from .bethe import BetheSolution, SolutionCatalog, solve_all
from .correlator import CorrelationResult, correlation
from .oracle import build_generator, direct_correlation, spectrum

__all__ = [
    "RingShape",
    "binomial",
    "BetheSolution",
    "SolutionCatalog",
    "solve_all",
    "CorrelationResult",
    "correlation",
    "build_generator",
    "direct_correlation",
    "spectrum",
    "__version__",
]
