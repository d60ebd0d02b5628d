"""Uncoarsening: gain-ranked subproblem refinement and the V-cycle driver."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .coarsen import CoarsenConfig, build_hierarchy, interpolate
from .graph import WeightedGraph, apply_flip, cut_value, gain_vector
from .localsearch import LsConfig, brute_force, multistart_ls
from .subproblem import build_subproblem, lift_solution, select_subset

logger = logging.getLogger(__name__)

SUB_SOLVERS = ("gl-qaoa", "qiro", "local", "exact")

# (sub_graph, seed) -> sub-assignment
SubSolver = Callable[[WeightedGraph, int], np.ndarray]


@dataclass
class RefineConfig:
    subproblem_size: int = 20
    sub_solver: str = "qiro"
    patience: int = 3
    max_iterations: int = 10
    sample_fraction: float = 0.3
    exact_threshold: int = 16
    shots: int = 10240
    qiro_smallest: int = 10
    corpus: object = None
    seed: int = 0
    check_gains: bool = False

    def __post_init__(self):
        if self.subproblem_size < 2:
            raise ValueError("subproblem_size must be >= 2")
        if self.patience > self.max_iterations:
            raise ValueError("patience must not exceed max_iterations")
        if self.sub_solver not in SUB_SOLVERS:
            raise ValueError(f"sub_solver must be one of {SUB_SOLVERS}")
        if self.sub_solver == "gl-qaoa" and self.corpus is None:
            raise ValueError("the gl-qaoa sub-solver needs a corpus")


@dataclass
class SolveReport:
    assignment: np.ndarray
    cut: float
    levels: list[dict]
    n_subproblems: int
    solver: str
    seed: int
    seconds: float
    hierarchy: dict = field(default_factory=dict)


def make_subsolver(cfg: RefineConfig) -> SubSolver:
    """Sub-solver callable; small subproblems always go to brute force."""

    def solve(sub: WeightedGraph, seed: int) -> np.ndarray:
        if sub.n - 2 <= cfg.exact_threshold or cfg.sub_solver == "exact":
            return brute_force(sub)[0]
        if cfg.sub_solver == "qiro":
            from .qiro import qiro_solve
            return qiro_solve(sub, cfg.qiro_smallest, seed=seed)
        if cfg.sub_solver == "gl-qaoa":
            from .transfer import gl_subsolver
            return gl_subsolver(sub, cfg.corpus, cfg.shots, seed=seed)
        return multistart_ls(sub, LsConfig(seed=seed))[0]

    return solve


def sample_size(n: int, k: int, count: int, fraction: float = 0.3) -> int:
    if count == 0:
        return n
    return min(n, max(math.ceil(fraction * n), 2 * k))


def refine_level(g: WeightedGraph, x0, solver: SubSolver, cfg: RefineConfig,
                 level: int = 0):
    """Improve ``x0`` with at most ``max_iterations`` subproblem solves.

    A candidate is accepted when its cut is at least the current cut; only a
    strict improvement resets the patience counter. Returns
    ``(assignment, n_solves)``.
    """
    x = np.array(x0, dtype=np.int8, copy=True)
    gains = gain_vector(g, x)
    obj = cut_value(g, x)
    count = iters = 0
    k = cfg.subproblem_size
    while count < cfg.patience and iters < cfg.max_iterations:
        n_sample = sample_size(g.n, k, count, cfg.sample_fraction)
        ss = np.random.SeedSequence([int(cfg.seed), level, iters])
        pick_seed, solve_seed = ss.generate_state(2)
        iters += 1
        try:
            subset = select_subset(gains, n_sample, k, seed=int(pick_seed))
            sp = build_subproblem(g, x, subset)
            y = solver(sp.sub_graph, int(solve_seed))
            candidate = lift_solution(g, x, sp, y)
            new = cut_value(g, candidate)
        except Exception:
            logger.exception("subproblem solve failed at level %d, iteration %d",
                             level, iters)
            count += 1
            continue
        if new >= obj:
            for i in np.flatnonzero(candidate != x).tolist():
                apply_flip(g, x, gains, i, inplace=True)
            if cfg.check_gains and not np.allclose(gains, gain_vector(g, x), atol=1e-9):
                raise AssertionError("incremental gains diverged from recompute")
            improved = new > obj + 1e-12 * max(1.0, abs(obj))
            obj = new
            count = 0 if improved else count + 1
        else:
            count += 1
    return x, iters


def vcycle_solve(g: WeightedGraph, cfg: RefineConfig | None = None,
                 coarsen_config: CoarsenConfig | None = None,
                 ls_config: LsConfig | None = None) -> SolveReport:
    """Coarsen, solve the coarsest level classically, then refine back up."""
    cfg = cfg or RefineConfig()
    ccfg = coarsen_config or CoarsenConfig()
    lcfg = ls_config or LsConfig(seed=cfg.seed)
    t_start = time.perf_counter()
    hierarchy = build_hierarchy(g, ccfg, seed=cfg.seed)
    solver = make_subsolver(cfg)

    t0 = time.perf_counter()
    coarsest = hierarchy.levels[-1]
    x, _ = multistart_ls(coarsest, lcfg)
    levels = [{"n": coarsest.n, "cut": cut_value(coarsest, x),
               "seconds": time.perf_counter() - t0}]
    n_sub = 0
    for lvl in range(hierarchy.depth - 2, -1, -1):
        t0 = time.perf_counter()
        fine = hierarchy.levels[lvl]
        x = interpolate(x, hierarchy.maps[lvl])
        x, used = refine_level(fine, x, solver, cfg, level=lvl)
        n_sub += used
        levels.append({"n": fine.n, "cut": cut_value(fine, x),
                       "seconds": time.perf_counter() - t0})
    return SolveReport(
        assignment=x, cut=cut_value(g, x), levels=levels, n_subproblems=n_sub,
        solver=cfg.sub_solver, seed=cfg.seed,
        seconds=time.perf_counter() - t_start, hierarchy=hierarchy.stats())
