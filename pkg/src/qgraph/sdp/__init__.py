"""Semidefinite programming: problem model, reductions and an interior-point solver."""
from .problem import (DualProblem, LowRank, SdpProblem, arrow, complex_to_real, corner, dual_of,
                      hmat, hvec, realify, smat, svec, unrealify)
from .sdpa import from_sdpa, to_sdpa
from .solver import SdpNumericalError, SdpSolution, SolverOptions, solve

__all__ = [
    "DualProblem", "LowRank", "SdpProblem", "SdpSolution", "SdpNumericalError", "SolverOptions",
    "arrow", "complex_to_real", "corner", "dual_of", "from_sdpa", "hmat", "hvec", "realify",
    "smat", "solve", "svec", "to_sdpa", "unrealify",
]
