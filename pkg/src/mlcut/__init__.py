"""Multilevel MAXCUT with QAOA-based refinement."""

from .coarsen import CoarsenConfig, build_hierarchy, interpolate
from .estimators import DonorParameterRegressor, MultilevelMaxCut, SpectralSignatureEmbedding
from .graph import (GraphFormatError, WeightedGraph, apply_flip, cut_value, gain_vector,
                    karloff_generate, load_graph, load_gset, load_matrix_market,
                    random_weighted_graph, save_gset)
from .localsearch import LsConfig, brute_force, multistart_ls, steepest_flip
from .qaoa import CapacityError, QaoaParams, cost_diagonal, expectation, qaoa_state
from .qiro import correlations_p1, qiro_solve
from .refine import RefineConfig, SolveReport, vcycle_solve
from .transfer import (CorpusModel, build_corpus, gl_subsolver, load_corpus, save_corpus,
                       spectral_signature)

__version__ = "0.1.0"

__all__ = [
    "CapacityError", "CoarsenConfig", "CorpusModel", "DonorParameterRegressor",
    "GraphFormatError", "LsConfig", "MultilevelMaxCut", "QaoaParams", "RefineConfig",
    "SolveReport", "SpectralSignatureEmbedding", "WeightedGraph", "apply_flip",
    "brute_force", "build_corpus", "build_hierarchy", "correlations_p1",
    "cost_diagonal", "cut_value", "expectation", "gain_vector", "gl_subsolver",
    "interpolate", "karloff_generate", "load_corpus", "load_graph", "load_gset",
    "load_matrix_market", "multistart_ls", "qaoa_state", "qiro_solve",
    "random_weighted_graph", "save_corpus", "spectral_signature", "steepest_flip",
    "vcycle_solve",
]
