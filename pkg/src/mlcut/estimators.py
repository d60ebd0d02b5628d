"""scikit-learn style wrappers around the solver and the transfer model."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import transfer
from .coarsen import CoarsenConfig
from .graph import cut_value
from .localsearch import LsConfig
from .qaoa import QaoaParams
from .refine import RefineConfig, vcycle_solve
from .validation import check_assignment, check_graph, check_graphs


def _resolve_corpus(corpus):
    if corpus is None or isinstance(corpus, transfer.CorpusModel):
        return corpus
    if corpus == "default":
        return transfer.load_corpus(transfer.default_corpus_path())
    return transfer.load_corpus(Path(corpus))


class MultilevelMaxCut(BaseEstimator):
    """Multilevel MAXCUT solver.

    ``fit`` takes a graph (or adjacency matrix) and stores the best
    assignment found in ``labels_`` and its cut in ``cut_``.

    Parameters
    ----------
    sub_solver : {"qiro", "gl-qaoa", "local", "exact"}, default="qiro"
    subproblem_size : int, default=20
        Free nodes per refinement subproblem (two supernodes are added).
    coarsest_size : int, default=200
    dim : int, default=5
        Sphere-embedding dimension used for matching.
    shots : int, default=10240
    qiro_smallest : int, default=10
    corpus : CorpusModel, path, "default" or None
        Donor corpus; required for ``gl-qaoa``.
    patience, max_iterations : int
        Refinement stopping rule.
    restarts : int, default=64
        Local-search restarts at the coarsest level.
    random_state : int, default=0
    """

    def __init__(self, sub_solver="qiro", subproblem_size=20, coarsest_size=200,
                 dim=5, shots=10240, qiro_smallest=10, corpus=None, patience=3,
                 max_iterations=10, restarts=64, random_state=0):
        self.sub_solver = sub_solver
        self.subproblem_size = subproblem_size
        self.coarsest_size = coarsest_size
        self.dim = dim
        self.shots = shots
        self.qiro_smallest = qiro_smallest
        self.corpus = corpus
        self.patience = patience
        self.max_iterations = max_iterations
        self.restarts = restarts
        self.random_state = random_state

    def _configs(self):
        corpus = self.corpus
        if corpus is None and self.sub_solver == "gl-qaoa":
            corpus = "default"
        seed = int(self.random_state)
        rcfg = RefineConfig(
            subproblem_size=self.subproblem_size, sub_solver=self.sub_solver,
            patience=self.patience, max_iterations=self.max_iterations,
            shots=self.shots, qiro_smallest=self.qiro_smallest,
            corpus=_resolve_corpus(corpus), seed=seed)
        ccfg = CoarsenConfig(coarsest_size=self.coarsest_size, dim=self.dim)
        return rcfg, ccfg, LsConfig(restarts=self.restarts, seed=seed)

    def fit(self, X, y=None):
        g = check_graph(X)
        rcfg, ccfg, lcfg = self._configs()
        report = vcycle_solve(g, rcfg, ccfg, lcfg)
        self.report_ = report
        self.labels_ = report.assignment
        self.cut_ = report.cut
        self.n_nodes_ = g.n
        return self

    def fit_predict(self, X, y=None):
        return self.fit(X).labels_

    def score(self, X, y=None):
        """Cut value of ``y`` (default: the fitted labels) on graph ``X``."""
        check_is_fitted(self, "labels_")
        g = check_graph(X)
        x = self.labels_ if y is None else y
        return cut_value(g, check_assignment(x, g.n))


class SpectralSignatureEmbedding(TransformerMixin, BaseEstimator):
    """Map graphs to padded spectral signatures.

    Parameters
    ----------
    dim : int, default=22
        Output length; graphs with more nodes are rejected.
    node_weights : {"unit", "volumes"}, default="unit"
    """

    def __init__(self, dim=transfer.CORPUS_NODES, node_weights="unit"):
        self.dim = dim
        self.node_weights = node_weights

    def fit(self, X, y=None):
        if self.node_weights not in ("unit", "volumes"):
            raise ValueError("node_weights must be 'unit' or 'volumes'")
        self.n_features_out_ = int(self.dim)
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_out_")
        rows = []
        for g in check_graphs(X):
            w = np.ones(g.n) if self.node_weights == "unit" else None
            rows.append(transfer.spectral_signature(g, node_weights=w).padded(self.dim))
        return np.vstack(rows)


class DonorParameterRegressor(RegressorMixin, BaseEstimator):
    """Nearest-donor lookup from spectral signatures to QAOA angles.

    ``fit(S, Y)`` stores signatures ``S`` (``N x n``) and angle vectors ``Y``
    (``N x 2p``, gammas then betas). ``predict`` returns the angles of the
    closest stored signature; ties go to the earliest donor.
    """

    def __init__(self, corpus=None):
        self.corpus = corpus

    def fit(self, X=None, y=None):
        if X is None:
            model = _resolve_corpus(self.corpus if self.corpus is not None else "default")
        else:
            S = np.atleast_2d(np.asarray(X, dtype=float))
            Y = np.atleast_2d(np.asarray(y, dtype=float))
            if S.shape[0] != Y.shape[0]:
                raise ValueError("X and y must have the same number of rows")
            if Y.shape[1] % 2:
                raise ValueError("y rows must hold gammas followed by betas")
            entries = [transfer.CorpusEntry(s, QaoaParams.from_vector(t), float("nan"))
                       for s, t in zip(S, Y)]
            model = transfer.CorpusModel(entries, n=S.shape[1], p=Y.shape[1] // 2)
        self.model_ = model
        self.n_features_in_ = model.n
        return self

    def kneighbors(self, X):
        """Distances and donor indices of the nearest donor for each row."""
        check_is_fitted(self, "model_")
        S = np.atleast_2d(np.asarray(X, dtype=float))
        out = [transfer.nearest_params(self.model_, s) for s in S]
        return (np.array([d for _, d, _ in out]), np.array([k for _, _, k in out]))

    def predict(self, X):
        _, idx = self.kneighbors(X)
        return np.vstack([self.model_.entries[k].params.to_vector() for k in idx])
