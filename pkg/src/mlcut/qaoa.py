"""Ideal statevector simulation of MAXCUT QAOA.

Bit ``i`` of a basis index ``z`` is the side of node ``i``. The phase
separator uses the cut-value diagonal directly, ``exp(-i gamma C)``, and the
mixer is ``exp(-i beta X)`` on every qubit.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import _kernels
from .graph import WeightedGraph

logger = logging.getLogger(__name__)

MAX_QUBITS = 26
SIMPLEX_STEP = 0.1


class CapacityError(ValueError):
    """Requested instance is too large for dense enumeration or simulation."""


@dataclass(frozen=True)
class QaoaParams:
    gammas: tuple
    betas: tuple

    def __post_init__(self):
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if len(self.gammas) != len(self.betas):
            raise ValueError("gammas and betas must have equal length")
        if not self.gammas:
            raise ValueError("depth must be >= 1")

    @property
    def p(self) -> int:
        return len(self.gammas)

    def to_vector(self) -> np.ndarray:
        return np.array(self.gammas + self.betas)

    @classmethod
    def from_vector(cls, vec) -> "QaoaParams":
        vec = np.asarray(vec, dtype=float)
        p = vec.shape[0] // 2
        return cls(vec[:p], vec[p:])

    def padded(self) -> "QaoaParams":
        """Same circuit one layer deeper (the extra layer is the identity)."""
        return QaoaParams(self.gammas + (0.0,), self.betas + (0.0,))


@dataclass(frozen=True)
class CostDiagonal:
    """Cut value of every basis state, plus the dense weights that produced it."""

    values: np.ndarray
    weights: np.ndarray | None = None

    @property
    def n(self) -> int:
        return int(self.values.shape[0]).bit_length() - 1

    def scaled(self, factor: float) -> "CostDiagonal":
        w = None if self.weights is None else self.weights * factor
        return CostDiagonal(self.values * factor, w)


def seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def _check_capacity(n: int):
    if n > MAX_QUBITS:
        raise CapacityError(f"{n} nodes exceeds the {MAX_QUBITS}-qubit limit")


def cost_diagonal(g: WeightedGraph) -> CostDiagonal:
    _check_capacity(g.n)
    W = g.dense()
    values = np.empty(1 << g.n)
    _kernels.cost_values(W, values)
    return CostDiagonal(values, W)


def uniform_state(n: int) -> np.ndarray:
    return np.full(1 << n, 2.0 ** (-n / 2), dtype=np.complex128)


def apply_phase(psi: np.ndarray, cd: CostDiagonal, gamma: float, _scratch=None):
    """In-place ``psi *= exp(-i gamma C)``."""
    if gamma == 0.0:
        return psi
    if cd.weights is not None and cd.n > 0:
        table = np.empty_like(psi)
        scratch = _scratch if _scratch is not None else np.empty(
            max(psi.shape[0] // 2, 1), dtype=np.complex128)
        _kernels.phase_table(cd.weights, gamma, table, scratch)
        psi *= table
    else:
        _kernels.phase_from_values(psi, cd.values, gamma)
    return psi


def apply_mixer(psi: np.ndarray, beta: float):
    """In-place ``exp(-i beta X)`` on every qubit."""
    n = int(psi.shape[0]).bit_length() - 1
    if beta != 0.0 and n > 0:
        _kernels.apply_mixer(psi.view(np.float64), n, beta)
    return psi


def qaoa_state(cd: CostDiagonal, params: QaoaParams) -> np.ndarray:
    _check_capacity(cd.n)
    psi = uniform_state(cd.n)
    scratch = np.empty(max(psi.shape[0] // 2, 1), dtype=np.complex128)
    for gamma, beta in zip(params.gammas, params.betas):
        apply_phase(psi, cd, gamma, scratch)
        apply_mixer(psi, beta)
    return psi


def expectation(psi: np.ndarray, cd: CostDiagonal) -> float:
    if psi.shape != cd.values.shape:
        raise ValueError("state and cost diagonal sizes differ")
    return float(_kernels.weighted_probability_sum(psi, cd.values))


def sample(psi: np.ndarray, shots: int, seed=None, cd: CostDiagonal | None = None):
    """Draw ``shots`` measurement outcomes.

    Returns ``(counts, best_bitstring, best_cut)``; ``counts`` maps basis
    index to frequency. ``best_*`` are ``None`` when ``cd`` is not given.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    probs = psi.real ** 2 + psi.imag ** 2
    cdf = np.cumsum(probs)
    rng = np.random.default_rng(seed)
    draws = np.searchsorted(cdf, rng.random(shots) * cdf[-1], side="right")
    draws = np.minimum(draws, probs.shape[0] - 1)
    outcomes, freq = np.unique(draws, return_counts=True)
    counts = dict(zip(outcomes.tolist(), freq.tolist()))
    if cd is None:
        return counts, None, None
    vals = cd.values[outcomes]
    k = int(np.argmax(vals))
    return counts, int(outcomes[k]), float(vals[k])


def bits_of(z: int, n: int) -> np.ndarray:
    return ((int(z) >> np.arange(n)) & 1).astype(np.int8)


def pauli_correlations(psi: np.ndarray, edges=None):
    """``<Z_i>`` for every qubit and ``<Z_i Z_j>`` for each ``(i, j)`` in ``edges``."""
    probs = psi.real ** 2 + psi.imag ** 2
    n = int(probs.shape[0]).bit_length() - 1
    # marginal of qubit i: reshape so axis 1 is bit i
    z = np.empty(n)
    for i in range(n):
        t = probs.reshape(-1, 2, 1 << i).sum(axis=(0, 2))
        z[i] = t[0] - t[1]
    zz = {}
    if edges is not None:
        idx = np.arange(probs.shape[0])
        for i, j in edges:
            parity = ((idx >> i) ^ (idx >> j)) & 1
            zz[(int(i), int(j))] = float(probs.sum() - 2.0 * probs[parity == 1].sum())
    return z, zz


def optimize_params(cd: CostDiagonal, p: int, multistarts: int = 20,
                    eval_budget: int = 300, seed=None,
                    previous: QaoaParams | None = None, tol: float = 1e-6):
    """Maximise the QAOA expectation with Nelder-Mead from several starts.

    Random starts draw ``gamma`` from ``[0, pi)`` and ``beta`` from
    ``[0, pi/2)``. When ``previous`` (a depth ``p - 1`` optimum) is given the
    first start is that point padded with a zero layer, so the result is never
    worse than it. Returns ``(params, expectation)``.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if multistarts < 1:
        raise ValueError("multistarts must be >= 1")

    def negative(vec):
        return -expectation(qaoa_state(cd, QaoaParams.from_vector(vec)), cd)

    starts = []
    if previous is not None:
        if previous.p != p - 1:
            raise ValueError("previous parameters must have depth p - 1")
        starts.append(previous.padded().to_vector())
    ss = seed_sequence(seed)
    for child in ss.spawn(multistarts - len(starts)):
        rng = np.random.default_rng(child)
        starts.append(np.concatenate([rng.uniform(0, np.pi, p),
                                      rng.uniform(0, np.pi / 2, p)]))

    best_val, best_vec = -np.inf, None
    for vec0 in starts:
        val0 = -negative(vec0)
        # scipy's default simplex barely moves zero-padded layers
        simplex = np.vstack([vec0, vec0 + SIMPLEX_STEP * np.eye(vec0.size)])
        res = minimize(negative, vec0, method="Nelder-Mead",
                       options={"maxfev": eval_budget, "fatol": tol,
                                "xatol": 1e-8, "initial_simplex": simplex})
        val, vec = -float(res.fun), res.x
        if val0 > val:
            val, vec = val0, vec0
        if val > best_val:
            best_val, best_vec = val, vec
    return QaoaParams.from_vector(best_vec), float(best_val)


def optimize_progressive(cd: CostDiagonal, p: int, multistarts: int = 20,
                         eval_budget: int = 300, seed=None,
                         first: QaoaParams | None = None):
    """Optimise depths ``1..p`` in turn, warm-starting each from the last.

    ``first`` may supply an already optimised depth-1 point, in which case
    depth 1 is skipped.
    """
    ss = seed_sequence(seed)
    seeds = ss.spawn(p)
    prev = first
    val = None
    for depth in range(1, p + 1):
        if depth == 1 and first is not None:
            val = expectation(qaoa_state(cd, first), cd)
            continue
        prev, val = optimize_params(cd, depth, multistarts, eval_budget,
                                    seeds[depth - 1], previous=prev)
    return prev, val
