"""Supernode subproblems used by the refinement phase."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import WeightedGraph

SUPER_A, SUPER_B = 0, 1


@dataclass(frozen=True)
class Subproblem:
    """Chosen nodes plus two supernodes aggregating everything else.

    Sub-index 0 aggregates the non-chosen nodes on side 0, sub-index 1 those
    on side 1, and ``chosen[k]`` lives at sub-index ``k + 2``.
    """

    sub_graph: WeightedGraph
    chosen: np.ndarray
    initial_sub_assignment: np.ndarray


def select_subset(gains, n_sample: int, k: int, seed=None) -> np.ndarray:
    """Top-``k`` gain nodes from a uniform sample of ``n_sample`` distinct nodes.

    Gain ties go to the lower node id. If the graph has at most ``k`` nodes
    every node is returned.
    """
    gains = np.asarray(gains)
    n = gains.shape[0]
    if n <= k:
        return np.arange(n)
    n_sample = int(min(max(n_sample, k), n))
    rng = np.random.default_rng(seed)
    sample = np.sort(rng.choice(n, size=n_sample, replace=False))
    order = np.lexsort((sample, -gains[sample]))
    return sample[order[:k]]


def build_subproblem(g: WeightedGraph, x, subset) -> Subproblem:
    subset = np.asarray(subset, dtype=np.int64)
    if subset.size == 0:
        raise ValueError("subset must be non-empty")
    if subset.min() < 0 or subset.max() >= g.n:
        raise ValueError("subset contains an invalid node id")
    if np.unique(subset).size != subset.size:
        raise ValueError("subset contains duplicate node ids")
    x = np.asarray(x, dtype=np.int8)

    sub_id = np.where(x == 0, SUPER_A, SUPER_B).astype(np.int64)
    sub_id[subset] = np.arange(2, subset.size + 2)
    su, sv = sub_id[g.u], sub_id[g.v]
    # edges inside one supernode become self-loops and are dropped by the constructor
    sub = WeightedGraph(subset.size + 2, su, sv, g.w)
    keep = sub.w != 0.0

    outside = np.ones(g.n, dtype=bool)
    outside[subset] = False
    vol_a = int(g.volumes[outside & (x == 0)].sum())
    vol_b = int(g.volumes[outside & (x == 1)].sum())
    volumes = np.concatenate([[max(vol_a, 1), max(vol_b, 1)], g.volumes[subset]])
    sub = WeightedGraph(sub.n, sub.u[keep], sub.v[keep], sub.w[keep], volumes=volumes)

    y0 = np.concatenate([[0, 1], x[subset]]).astype(np.int8)
    return Subproblem(sub, subset, y0)


def lift_solution(g: WeightedGraph, x, sp: Subproblem, y) -> np.ndarray:
    """Write a sub-assignment back; chosen sides are taken relative to supernode A."""
    y = np.asarray(y, dtype=np.int8)
    if y.shape != (sp.sub_graph.n,):
        raise ValueError("sub-assignment does not match the subproblem")
    x_new = np.array(x, dtype=np.int8, copy=True)
    if x_new.shape != (g.n,):
        raise ValueError("assignment does not match the graph")
    x_new[sp.chosen] = y[2:] ^ y[SUPER_A]
    return x_new
