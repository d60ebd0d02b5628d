"""Input checks shared by the estimators and the command-line driver."""

from __future__ import annotations

import numbers

import numpy as np
import scipy.sparse as sp

from .graph import WeightedGraph


def check_graph(X) -> WeightedGraph:
    """Coerce ``X`` to a :class:`WeightedGraph`.

    Accepts a graph, a square dense or sparse symmetric adjacency matrix, or
    anything with a networkx-style ``edges(data=True)`` and ``number_of_nodes``.
    Only the upper triangle of a matrix is read.
    """
    if isinstance(X, WeightedGraph):
        return X
    if hasattr(X, "number_of_nodes") and hasattr(X, "edges"):
        nodes = list(X.nodes())
        index = {v: k for k, v in enumerate(nodes)}
        triples = [(index[a], index[b], float(d.get("weight", 1.0)))
                   for a, b, d in X.edges(data=True)]
        return WeightedGraph.from_edges(len(nodes), triples)
    if sp.issparse(X):
        if X.ndim != 2 or X.shape[0] != X.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {X.shape}")
        coo = sp.triu(X, k=1).tocoo()
        if not np.all(np.isfinite(coo.data)):
            raise ValueError("adjacency contains non-finite weights")
        return WeightedGraph(X.shape[0], coo.row, coo.col, coo.data)
    A = np.asarray(X, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"adjacency must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("adjacency contains non-finite weights")
    return WeightedGraph.from_adjacency(A)


def check_assignment(x, n: int) -> np.ndarray:
    x = np.asarray(x)
    if x.shape != (n,):
        raise ValueError(f"assignment must have shape ({n},), got {x.shape}")
    if x.size and not np.isin(x, (0, 1)).all():
        raise ValueError("assignment entries must be 0 or 1")
    return x.astype(np.int8)


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_graphs(X) -> list[WeightedGraph]:
    """A single graph or a sequence of graphs, as a list."""
    if isinstance(X, WeightedGraph) or sp.issparse(X) or hasattr(X, "number_of_nodes"):
        return [check_graph(X)]
    if isinstance(X, np.ndarray) and X.ndim == 2:
        return [check_graph(X)]
    return [check_graph(item) for item in X]
