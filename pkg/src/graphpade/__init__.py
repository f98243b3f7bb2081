"""Pade rational spectral graph filters with Remez initialization."""

from .errors import (
    EdgeListError,
    InvalidParameterError,
    NoFitError,
    NumericalFailure,
    PoleError,
    SingularSystemError,
)
from .filters import PolynomialFilter, RationalFilter, apply_rational_vertex, fit_poly_least_squares
from .graph import Graph, build_laplacian, generate_block_graph, read_edge_list, write_edge_list
from .optimizer import FitReport, TrainConfig, gradients, spectral_loss, train
from .remez import DiscreteTarget, RemezState, remez_fit, remez_poly, traverse_orders
from .spectral import EigenSystem, apply_spectral_filter, decompose, gft, igft
from .theory import JumpTarget, eval_jump, newman_approx, rate_experiment

__all__ = [
    "DiscreteTarget", "EdgeListError", "EigenSystem", "FitReport", "Graph", "InvalidParameterError",
    "JumpTarget", "NoFitError", "NumericalFailure", "PoleError", "PolynomialFilter", "RationalFilter",
    "RemezState", "SingularSystemError", "TrainConfig", "apply_rational_vertex", "apply_spectral_filter",
    "build_laplacian", "decompose", "eval_jump", "fit_poly_least_squares", "generate_block_graph", "gft",
    "gradients", "igft", "newman_approx", "rate_experiment", "read_edge_list", "remez_fit", "remez_poly",
    "spectral_loss", "train", "traverse_orders", "write_edge_list",
]
