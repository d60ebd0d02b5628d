"""Quantum-informed recursive optimisation for MAXCUT.

Each round prepares a depth-1 QAOA state, reads ``<Z_i Z_j>`` on every
edge, and eliminates one variable through ``z_j = sgn(M_ij) z_i``. The
reduced problem keeps an exact constant offset so that cuts on the reduced
graph translate back to the original graph without loss.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import qaoa
from .graph import WeightedGraph
from .localsearch import brute_force

logger = logging.getLogger(__name__)

GRID = 32
REFINE_EVALS = 100
MAX_DENSE_NODES = 4096
# elements per temporary (grid x edges x nodes) block
_CHUNK_ELEMS = 1 << 22

_closed_form_trusted: bool | None = None


@dataclass(frozen=True)
class EliminationStep:
    kept: int
    removed: int
    sign: int
    edge_weight: float = 0.0
    m_value: float = 0.0

    def to_dict(self) -> dict:
        return {"kept": self.kept, "removed": self.removed, "sign": self.sign,
                "edge_weight": self.edge_weight, "M_value": self.m_value}


@dataclass
class CorrelationMatrix:
    diag: np.ndarray
    offdiag: dict


@dataclass
class SimplificationTrace:
    steps: list[EliminationStep] = field(default_factory=list)
    terminal_weights: np.ndarray | None = None
    terminal_labels: np.ndarray | None = None
    terminal_assignment: np.ndarray | None = None
    offset: float = 0.0

    def to_json(self) -> list[dict]:
        return [s.to_dict() for s in self.steps]


def _edges_of(W: np.ndarray):
    iu, iv = np.nonzero(np.triu(W, k=1))
    return iu, iv


def _gamma_terms(W: np.ndarray, iu, iv, gammas: np.ndarray):
    """Per-edge light-cone factors of the depth-1 ``<Z_u Z_v>``.

    With ``J = -W/2`` (the Ising coupling of the cut diagonal),
    ``<Z_u Z_v> = sin(4b) A(g) - sin(2b)^2 B(g)`` where ``A`` and ``B`` are
    returned with shape ``(len(gammas), n_edges)``.
    """
    J = -0.5 * W
    n = W.shape[0]
    n_e = iu.shape[0]
    gammas = np.atleast_1d(np.asarray(gammas, dtype=float))
    A = np.empty((gammas.shape[0], n_e))
    B = np.empty((gammas.shape[0], n_e))
    step = max(1, _CHUNK_ELEMS // max(1, gammas.shape[0] * n))
    for lo in range(0, n_e, step):
        u = iu[lo:lo + step]
        v = iv[lo:lo + step]
        e = np.arange(u.shape[0])
        Ju, Jv = J[u], J[v]  # (E, n)
        g2 = 2.0 * gammas[:, None, None]
        cu = np.cos(g2 * Ju)
        cu[:, e, v] = 1.0
        cv = np.cos(g2 * Jv)
        cv[:, e, u] = 1.0
        plus = np.cos(g2 * (Ju + Jv))
        minus = np.cos(g2 * (Ju - Jv))
        for arr in (plus, minus):
            arr[:, e, u] = 1.0
            arr[:, e, v] = 1.0
        s = np.sin(2.0 * gammas[:, None] * J[u, v][None, :])
        A[:, lo:lo + step] = 0.5 * s * (cu.prod(axis=2) + cv.prod(axis=2))
        B[:, lo:lo + step] = 0.5 * (plus.prod(axis=2) - minus.prod(axis=2))
    return A, B


def _zz_closed(W, iu, iv, gamma, beta) -> np.ndarray:
    A, B = _gamma_terms(W, iu, iv, np.array([gamma]))
    return np.sin(4 * beta) * A[0] - np.sin(2 * beta) ** 2 * B[0]


def _zz_statevector(W, iu, iv, gamma, beta):
    g = WeightedGraph.from_adjacency(W)
    cd = qaoa.cost_diagonal(g)
    psi = qaoa.qaoa_state(cd, qaoa.QaoaParams([gamma], [beta]))
    z, zz = qaoa.pauli_correlations(psi, zip(iu.tolist(), iv.tolist()))
    return z, np.array([zz[(a, b)] for a, b in zip(iu.tolist(), iv.tolist())])


def closed_form_trusted() -> bool:
    """Check the closed-form backend against the statevector once per process."""
    global _closed_form_trusted
    if _closed_form_trusted is None:
        rng = np.random.default_rng(12345)
        ok = True
        for n in (3, 5, 8):
            W = np.triu(rng.uniform(-1, 1, (n, n)) * (rng.random((n, n)) < 0.6), 1)
            W = W + W.T
            iu, iv = _edges_of(W)
            if iu.size == 0:
                continue
            gam, bet = rng.uniform(0, np.pi), rng.uniform(0, np.pi / 2)
            ref = _zz_statevector(W, iu, iv, gam, bet)[1]
            ok &= bool(np.allclose(_zz_closed(W, iu, iv, gam, bet), ref, atol=1e-9))
        if not ok:
            logger.warning("closed-form correlations disagree with statevector; "
                           "falling back to statevector backend")
        _closed_form_trusted = ok
    return _closed_form_trusted


def correlations_p1(g: WeightedGraph, gamma: float, beta: float,
                    backend: str = "closed") -> CorrelationMatrix:
    """Exact ``<Z_i>`` and edge ``<Z_i Z_j>`` of the depth-1 QAOA state."""
    return _correlations_dense(g.dense(), gamma, beta, backend)


def _correlations_dense(W, gamma, beta, backend="closed") -> CorrelationMatrix:
    iu, iv = _edges_of(W)
    n = W.shape[0]
    if backend == "statevector":
        z, zz = _zz_statevector(W, iu, iv, gamma, beta)
    elif backend == "closed":
        # no linear terms: <Z_i> vanishes by global spin-flip symmetry
        z = np.zeros(n)
        zz = _zz_closed(W, iu, iv, gamma, beta)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return CorrelationMatrix(z, dict(zip(zip(iu.tolist(), iv.tolist()), zz.tolist())))


def _expected_cut_closed(W, iu, iv, gamma, beta):
    w = W[iu, iv]
    zz = _zz_closed(W, iu, iv, gamma, beta)
    return float(0.5 * (w * (1.0 - zz)).sum())


def optimize_p1(g: WeightedGraph | np.ndarray, seed=None, backend: str | None = None):
    """Grid search on ``[0, pi) x [0, pi/2)`` followed by Nelder-Mead polishing.

    Returns ``(gamma, beta, expected_cut)``. ``seed`` is accepted for API
    symmetry; the procedure is deterministic.
    """
    W = g.dense() if isinstance(g, WeightedGraph) else np.asarray(g, dtype=float)
    iu, iv = _edges_of(W)
    w = W[iu, iv]
    if iu.size == 0:
        return 0.0, 0.0, 0.0
    if backend is None:
        backend = "closed" if closed_form_trusted() else "statevector"

    gammas = np.arange(GRID) * (np.pi / GRID)
    betas = np.arange(GRID) * (np.pi / 2 / GRID)
    if backend == "closed":
        A, B = _gamma_terms(W, iu, iv, gammas)
        a, b = A @ w, B @ w
        grid = 0.5 * w.sum() - 0.5 * (np.outer(a, np.sin(4 * betas))
                                      - np.outer(b, np.sin(2 * betas) ** 2))

        def value(x):
            return _expected_cut_closed(W, iu, iv, x[0], x[1])
    else:
        cd = qaoa.cost_diagonal(WeightedGraph.from_adjacency(W))

        def value(x):
            psi = qaoa.qaoa_state(cd, qaoa.QaoaParams([x[0]], [x[1]]))
            return qaoa.expectation(psi, cd)

        grid = np.array([[value((gm, bt)) for bt in betas] for gm in gammas])

    k = int(np.argmax(grid))
    x0 = np.array([gammas[k // GRID], betas[k % GRID]])
    best = float(grid.flat[k])
    res = minimize(lambda x: -value(x), x0, method="Nelder-Mead",
                   options={"maxfev": REFINE_EVALS, "fatol": 1e-6, "xatol": 1e-8})
    if -res.fun > best:
        return float(res.x[0]), float(res.x[1]), float(-res.fun)
    return float(x0[0]), float(x0[1]), best


def eliminate_once(W, M: CorrelationMatrix):
    """Remove one node by imposing ``z_j = sgn(M_ij) z_i`` on the strongest edge.

    Works on a dense symmetric weight matrix and returns
    ``(W', step, offset_delta)`` where ``step`` uses local indices of ``W``.
    Node ``j`` is deleted and later indices shift down by one.
    """
    if isinstance(W, WeightedGraph):
        W = W.dense()
    iu, iv = _edges_of(W)
    if iu.size == 0:
        raise ValueError("cannot eliminate from an edgeless graph")
    m = np.array([M.offdiag.get((a, b), 0.0) for a, b in zip(iu.tolist(), iv.tolist())])
    w = W[iu, iv]
    # largest |M|, then largest |w|, then lexicographic (i, j)
    order = np.lexsort((iv, iu, -np.abs(w), -np.abs(m)))
    e = order[0]
    i, j = int(iu[e]), int(iv[e])
    sign = -1 if m[e] < 0 else 1

    W = W.copy()
    row_j = W[j].copy()
    offset = 0.0
    if sign < 0:
        # w(1 + z_i z_k)/2 = w - w(1 - z_i z_k)/2: the edge (i,j) is always cut
        # and every other edge of j re-attaches to i negated, plus a constant
        offset = float(row_j.sum())
    row_j[i] = 0.0
    W[i] += sign * row_j
    W[:, i] = W[i]
    W[i, i] = 0.0
    W = np.delete(np.delete(W, j, axis=0), j, axis=1)
    step = EliminationStep(i, j, sign, float(w[e]), float(m[e]))
    return W, step, offset


def qiro_solve(g: WeightedGraph, smallest_size: int = 10, seed=None,
               backend: str | None = None, return_trace: bool = False):
    """Recursively eliminate variables until ``smallest_size`` nodes remain.

    The terminal graph is solved exactly and eliminated variables are
    recovered in reverse order. Returns the assignment (and the trace when
    ``return_trace`` is set).
    """
    n = g.n
    if n > MAX_DENSE_NODES:
        raise qaoa.CapacityError(
            f"stand-alone QIRO uses dense matrices; {n} nodes exceeds {MAX_DENSE_NODES}")
    if n > 24:
        logger.info("stand-alone QIRO on %d nodes is experimental", n)
    W = g.dense()
    labels = np.arange(n)
    trace = SimplificationTrace()
    while W.shape[0] > smallest_size and np.any(W):
        scale = np.abs(W).max()
        Ws = W / scale
        gamma, beta, _ = optimize_p1(Ws, seed=seed, backend=backend)
        corr = _correlations_dense(Ws, gamma, beta,
                                   backend or ("closed" if closed_form_trusted()
                                               else "statevector"))
        # correlations are scale-covariant; merging happens on the raw weights
        W, step, offset = eliminate_once(W, corr)
        trace.offset += offset
        kept, removed = int(labels[step.kept]), int(labels[step.removed])
        trace.steps.append(EliminationStep(kept, removed, step.sign,
                                           step.edge_weight, step.m_value))
        labels = np.delete(labels, step.removed)

    x = np.zeros(n, dtype=np.int8)
    if W.shape[0] and np.any(W):
        terminal = WeightedGraph.from_adjacency(W)
        x_term, _ = brute_force(terminal)
    else:
        x_term = np.zeros(W.shape[0], dtype=np.int8)
    x[labels] = x_term
    for step in reversed(trace.steps):
        x[step.removed] = x[step.kept] ^ (step.sign < 0)
    trace.terminal_weights = W
    trace.terminal_labels = labels
    trace.terminal_assignment = x_term
    if return_trace:
        return x, trace
    return x
