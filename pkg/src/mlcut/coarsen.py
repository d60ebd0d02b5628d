"""Coarsening hierarchy: sphere relaxation, nearest-neighbour matching, contraction."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.spatial import cKDTree

from . import _kernels
from .graph import WeightedGraph


@dataclass(frozen=True)
class SphereEmbedding:
    positions: np.ndarray

    @property
    def dim(self) -> int:
        return self.positions.shape[1]


@dataclass(frozen=True)
class Matching:
    pairs: np.ndarray  # shape (k, 2)
    singleton: int | None = None

    @property
    def n_coarse(self) -> int:
        return len(self.pairs) + (self.singleton is not None)

    def covers(self, n: int) -> bool:
        seen = self.pairs.ravel().tolist()
        if self.singleton is not None:
            seen.append(self.singleton)
        return len(seen) == n and sorted(seen) == list(range(n))


@dataclass(frozen=True)
class LevelMap:
    """Fine-to-coarse aggregation map between two consecutive levels."""

    fine_to_coarse: np.ndarray
    n_coarse: int

    def restriction(self) -> sp.csr_matrix:
        """Coarse-by-fine 0/1 operator with ``P[q, i] = 1`` iff node i maps to q."""
        n_fine = self.fine_to_coarse.shape[0]
        return sp.csr_matrix(
            (np.ones(n_fine), (self.fine_to_coarse, np.arange(n_fine))),
            shape=(self.n_coarse, n_fine))


@dataclass
class CoarsenConfig:
    coarsest_size: int = 200
    dim: int = 5
    max_sweeps: int = 30
    tolerance: float = 1e-3

    def __post_init__(self):
        if self.coarsest_size < 2:
            raise ValueError("coarsest_size must be >= 2")
        if self.dim < 2:
            raise ValueError("embedding dimension must be >= 2")


@dataclass
class Hierarchy:
    levels: list[WeightedGraph]
    maps: list[LevelMap]
    seconds: list[float] = field(default_factory=list)

    @property
    def depth(self) -> int:
        return len(self.levels)

    def stats(self) -> dict:
        secs = self.seconds or [0.0] * len(self.levels)
        return {"levels": [{"n": g.n, "m": g.m, "seconds": float(t)}
                           for g, t in zip(self.levels, secs)]}


def init_embedding(g: WeightedGraph, d: int = 5, seed=None) -> SphereEmbedding:
    """Random points of the hypercube ``[-1, 1]^d`` projected onto the unit sphere."""
    if d < 2:
        raise ValueError("embedding dimension must be >= 2")
    rng = np.random.default_rng(seed)
    pos = rng.uniform(-1.0, 1.0, size=(g.n, d))
    norms = np.linalg.norm(pos, axis=1)
    while (bad := norms < 1e-12).any():
        pos[bad] = rng.uniform(-1.0, 1.0, size=(int(bad.sum()), d))
        norms = np.linalg.norm(pos, axis=1)
    return SphereEmbedding(pos / norms[:, None])


def relax_embedding(g: WeightedGraph, emb: SphereEmbedding, max_sweeps: int = 30,
                    tolerance: float = 1e-3) -> SphereEmbedding:
    """Push every node away from its neighbours on the sphere.

    Each sweep visits nodes in id order and sets ``p_i = -s_i / |s_i|`` with
    ``s_i`` the weighted sum of neighbour positions; this maximises
    ``sum_j w_ij |p_i - p_j|^2`` over the sphere for node i alone.
    """
    pos = np.array(emb.positions, dtype=np.float64, copy=True)
    if pos.shape[0] != g.n:
        raise ValueError("embedding does not match graph size")
    order = np.arange(g.n, dtype=np.int64)
    for _ in range(max_sweeps):
        moved = _kernels.relax_sweep(g.indptr, g.indices, g.data, pos, order)
        if moved < tolerance:
            break
    return SphereEmbedding(pos)


def embedding_objective(g: WeightedGraph, emb: SphereEmbedding) -> float:
    diff = emb.positions[g.u] - emb.positions[g.v]
    return float((g.w * (diff * diff).sum(axis=1)).sum())


def match_nodes(g: WeightedGraph, emb: SphereEmbedding, seed=None) -> Matching:
    """Greedy nearest-unmatched-neighbour pairing in embedding space.

    Nodes are visited in a seeded random order. Candidates need not be graph
    neighbours. Distance ties resolve to the lowest node id.
    """
    n = g.n
    pos = emb.positions
    order = np.random.default_rng(seed).permutation(n)
    matched = np.zeros(n, dtype=bool)
    pairs = []
    singleton = None

    live = np.arange(n)
    tree = cKDTree(pos)
    unmatched = n
    for i in order.tolist():
        if matched[i]:
            continue
        if unmatched == 1:
            singleton = i
            matched[i] = True
            break
        # rebuild over the unmatched nodes once the tree is mostly dead weight
        if unmatched < len(live) // 2:
            live = np.flatnonzero(~matched)
            tree = cKDTree(pos[live])
        k = min(8, len(live))
        while True:
            dist, idx = tree.query(pos[i], k=k)
            dist = np.atleast_1d(dist)
            cand = live[np.atleast_1d(idx)]
            ok = (~matched[cand]) & (cand != i)
            if ok.any():
                best = dist[ok].min()
                # a tie may continue past the k returned points
                if dist[-1] > best or k == len(live):
                    j = int(cand[ok & (dist == best)].min())
                    break
            if k == len(live):
                raise RuntimeError("no unmatched partner found")  # unreachable
            k = min(4 * k, len(live))
        matched[i] = matched[j] = True
        unmatched -= 2
        pairs.append((i, j))
    return Matching(np.asarray(pairs, dtype=np.int64).reshape(-1, 2), singleton)


def coarsen_once(g: WeightedGraph, m: Matching) -> tuple[WeightedGraph, LevelMap]:
    """Contract matched pairs; coarse adjacency is ``P A P^T`` without the diagonal."""
    if not m.covers(g.n):
        raise ValueError("matching does not cover every node exactly once")
    f2c = np.empty(g.n, dtype=np.int64)
    k = len(m.pairs)
    f2c[m.pairs[:, 0]] = np.arange(k)
    f2c[m.pairs[:, 1]] = np.arange(k)
    if m.singleton is not None:
        f2c[m.singleton] = k
    lmap = LevelMap(f2c, m.n_coarse)
    R = lmap.restriction()
    A = (R @ g.adjacency() @ R.T).tocoo()
    upper = A.row < A.col
    volumes = np.bincount(f2c, weights=g.volumes, minlength=lmap.n_coarse)
    coarse = WeightedGraph(lmap.n_coarse, A.row[upper], A.col[upper], A.data[upper],
                           volumes=np.rint(volumes).astype(np.int64))
    return coarse, lmap


def build_hierarchy(g: WeightedGraph, config: CoarsenConfig | None = None,
                    seed: int = 0) -> Hierarchy:
    """Coarsen repeatedly until the graph has at most ``coarsest_size`` nodes.

    Level ``l`` draws its randomness from ``seed ^ l``.
    """
    cfg = config or CoarsenConfig()
    levels, maps, seconds = [g], [], [0.0]
    current = g
    lvl = 0
    while current.n > cfg.coarsest_size and current.n >= 2:
        t0 = time.perf_counter()
        level_seed = int(seed) ^ lvl
        ss = np.random.SeedSequence(level_seed)
        emb_seed, match_seed = ss.spawn(2)
        emb = init_embedding(current, cfg.dim, np.random.default_rng(emb_seed))
        emb = relax_embedding(current, emb, cfg.max_sweeps, cfg.tolerance)
        matching = match_nodes(current, emb, np.random.default_rng(match_seed))
        current, lmap = coarsen_once(current, matching)
        levels.append(current)
        maps.append(lmap)
        seconds.append(time.perf_counter() - t0)
        lvl += 1
    return Hierarchy(levels, maps, seconds)


def interpolate(coarse_x, lmap: LevelMap) -> np.ndarray:
    """Give every fine node the side of the coarse node that aggregates it."""
    coarse_x = np.asarray(coarse_x)
    if coarse_x.shape != (lmap.n_coarse,):
        raise ValueError(
            f"coarse assignment has length {coarse_x.shape}, expected {lmap.n_coarse}")
    return coarse_x[lmap.fine_to_coarse].astype(np.int8)
