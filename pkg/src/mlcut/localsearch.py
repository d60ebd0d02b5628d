"""Classical MAXCUT baselines: exhaustive search and multistart 1-flip ascent."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .graph import WeightedGraph, cut_value, gain_vector

BRUTE_FORCE_LIMIT = 24


@dataclass
class LsConfig:
    restarts: int = 64
    max_flips: int | None = None  # default 50 * n
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


def brute_force(g: WeightedGraph):
    """Exact maximum cut by enumeration with node 0 pinned to side 0."""
    from .qaoa import CapacityError, cost_diagonal

    if g.n > BRUTE_FORCE_LIMIT:
        raise CapacityError(f"brute force limited to {BRUTE_FORCE_LIMIT} nodes, got {g.n}")
    if g.n == 0:
        return np.zeros(0, dtype=np.int8), 0.0
    values = cost_diagonal(g).values
    z = 2 * int(np.argmax(values[0::2]))
    x = ((z >> np.arange(g.n)) & 1).astype(np.int8)
    return x, cut_value(g, x)


def steepest_flip(g: WeightedGraph, x, max_flips: int | None = None) -> np.ndarray:
    """Flip the best-gain node until no flip improves the cut."""
    x = np.array(x, dtype=np.int8, copy=True)
    gains = gain_vector(g, x)
    if max_flips is None:
        max_flips = 50 * max(g.n, 1)
    _kernels.steepest_ascent(g.indptr, g.indices, g.data, x, gains, max_flips)
    return x


def random_start(n: int, seed, restart: int) -> np.ndarray:
    rng = np.random.default_rng([int(seed), int(restart)])
    return rng.integers(0, 2, size=n).astype(np.int8)


def multistart_ls(g: WeightedGraph, config: LsConfig | None = None):
    """Best of ``restarts`` steepest-ascent runs from seeded random sides.

    Restart ``r`` starts from ``random_start(n, seed, r)``, so a run with more
    restarts always contains the starts of a run with fewer.
    """
    cfg = config or LsConfig()
    best_x, best_cut = None, -np.inf
    for r in range(cfg.restarts):
        x = steepest_flip(g, random_start(g.n, cfg.seed, r), cfg.max_flips)
        c = cut_value(g, x)
        if c > best_cut:
            best_x, best_cut = x, c
    return best_x, float(best_cut)
