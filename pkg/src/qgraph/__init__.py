"""Channel-approximation invariants of matricial systems and graphs."""
from .channel import ChannelMap
from .graphs import Graph, parse_graph_spec
from .invariants import (InvariantResult, extract_vector_representation, lovasz_theta,
                         phi_lin_dual, phi_lin_general, phi_lin_graph, phi_quad_general,
                         phi_quad_graph)
from .sdp import SolverOptions, solve
from .systems import MatricialSystem, constant_diagonal_system, graph_system

__version__ = "0.1.0"

__all__ = [
    "ChannelMap", "Graph", "InvariantResult", "MatricialSystem", "SolverOptions",
    "constant_diagonal_system", "extract_vector_representation", "graph_system",
    "lovasz_theta", "parse_graph_spec", "phi_lin_dual", "phi_lin_general", "phi_lin_graph",
    "phi_quad_general", "phi_quad_graph", "solve",
]
