"""Spectral graph signatures and nearest-donor QAOA parameter transfer."""

from __future__ import annotations

import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import qaoa
from .graph import WeightedGraph, random_weighted_graph, gain_vector
from .localsearch import random_start, steepest_flip
from .subproblem import build_subproblem, select_subset

logger = logging.getLogger(__name__)

CORPUS_VERSION = 1
CORPUS_NODES = 22
CORPUS_DEPTH = 3


class CorpusFormatError(ValueError):
    pass


@dataclass(frozen=True)
class SpectralSignature:
    vector: np.ndarray
    n: int
    eigenvalue: float = 0.0

    def padded(self, dim: int) -> np.ndarray:
        if self.vector.shape[0] > dim:
            raise ValueError(
                f"signature of length {self.vector.shape[0]} exceeds dimension {dim}")
        out = np.zeros(dim)
        out[: self.vector.shape[0]] = self.vector
        return out


@dataclass
class CorpusEntry:
    signature: np.ndarray
    params: qaoa.QaoaParams
    expectation: float
    meta: dict = field(default_factory=dict)


@dataclass
class CorpusModel:
    entries: list[CorpusEntry]
    n: int = CORPUS_NODES
    p: int = CORPUS_DEPTH

    def __post_init__(self):
        if not self.entries:
            raise CorpusFormatError("empty corpus")
        for e in self.entries:
            if e.signature.shape != (self.n,):
                raise CorpusFormatError("signature dimension differs from corpus n")
            if e.params.p != self.p:
                raise CorpusFormatError("parameter depth differs from corpus p")
        self._matrix = np.vstack([e.signature for e in self.entries])

    @property
    def matrix(self) -> np.ndarray:
        """``N x n`` matrix of stored signatures."""
        return self._matrix

    def __len__(self):
        return len(self.entries)


def weighted_laplacian(g: WeightedGraph, node_weights=None) -> np.ndarray:
    """``W^{-1/2} (D - A) W^{1/2}`` with ``D = diag(A w)`` and ``W = diag(w)``."""
    w = np.ones(g.n) if node_weights is None else np.asarray(node_weights, dtype=float)
    if w.shape != (g.n,):
        raise ValueError("node_weights must have one entry per node")
    if np.any(w <= 0):
        raise ValueError("node weights must be strictly positive")
    A = g.dense()
    L = np.diag(A @ w) - A
    r = np.sqrt(w)
    return L * (r[None, :] / r[:, None])


def _largest_component(g: WeightedGraph) -> np.ndarray:
    ncomp, labels = g.connected_components()
    if ncomp == 1:
        return np.arange(g.n)
    sizes = np.bincount(labels)
    return np.flatnonzero(labels == int(np.argmax(sizes)))


def spectral_signature(g: WeightedGraph, node_weights=None) -> SpectralSignature:
    """Sign-fixed, sorted second eigenvector of the weighted Laplacian.

    ``node_weights`` defaults to the graph volumes. Disconnected graphs use
    their largest component, zero-padded to ``g.n`` entries.
    """
    if g.n < 2:
        raise ValueError("signature needs at least 2 nodes")
    w = g.volumes.astype(float) if node_weights is None else np.asarray(node_weights, float)
    keep = _largest_component(g)
    if keep.size < g.n:
        mask = np.zeros(g.n, dtype=bool)
        mask[keep] = True
        sel = mask[g.u] & mask[g.v]
        remap = np.cumsum(mask) - 1
        sub = WeightedGraph(keep.size, remap[g.u[sel]], remap[g.v[sel]], g.w[sel])
        w_sub = w[keep]
    else:
        sub, w_sub = g, w
    if sub.n < 2:
        return SpectralSignature(np.zeros(g.n), g.n, 0.0)

    # L_W is similar to the symmetric D - A; solve that and map back
    A = sub.dense()
    L = np.diag(A @ w_sub) - A
    vals, vecs = np.linalg.eigh(L)
    vec = vecs[:, 1] / np.sqrt(w_sub)
    vec /= np.linalg.norm(vec)
    k = int(np.argmax(np.abs(vec)))
    if vec[k] < 0:
        vec = -vec
    vec = np.sort(vec)
    out = np.zeros(g.n)
    out[: vec.size] = vec
    return SpectralSignature(out, g.n, float(vals[1]))


def nearest_params(model: CorpusModel, sig):
    """Donor with the smallest Euclidean signature distance (ties: lowest index)."""
    vec = sig.padded(model.n) if isinstance(sig, SpectralSignature) else np.asarray(sig)
    if vec.shape[0] < model.n:
        vec = np.concatenate([vec, np.zeros(model.n - vec.shape[0])])
    dist = np.linalg.norm(model.matrix - vec[None, :], axis=1)
    k = int(np.argmin(dist))
    return model.entries[k].params, float(dist[k]), k


def scale_to_unit(g: WeightedGraph) -> tuple[WeightedGraph, float]:
    """Rescale so that ``max |w| = 1``; returns the graph and the factor used."""
    top = float(np.abs(g.w).max()) if g.m else 0.0
    if top == 0.0:
        return g, 1.0
    return g.scaled(1.0 / top), 1.0 / top


def gl_subsolver(sub_graph: WeightedGraph, model: CorpusModel, shots: int = 10240,
                 seed=None, return_info: bool = False):
    """Solve a small MAXCUT instance with donor parameters and shot sampling.

    The best-cut bitstring among ``shots`` samples of the depth-``p`` QAOA
    state at the transferred angles is returned.
    """
    if sub_graph.n > model.n:
        raise ValueError(f"subproblem has {sub_graph.n} nodes, corpus supports {model.n}")
    scaled, _ = scale_to_unit(sub_graph)
    if scaled.m == 0:
        x = np.zeros(sub_graph.n, dtype=np.int8)
        return (x, {"distance": None, "donor": None}) if return_info else x
    # donors carry unit volumes, so queries use unit node weights as well
    sig = spectral_signature(scaled, node_weights=np.ones(scaled.n))
    params, dist, donor = nearest_params(model, sig)
    cd = qaoa.cost_diagonal(scaled)
    psi = qaoa.qaoa_state(cd, params)
    counts, best_z, _ = qaoa.sample(psi, shots, seed, cd)
    x = qaoa.bits_of(best_z, sub_graph.n)
    if return_info:
        return x, {"distance": dist, "donor": donor, "params": params,
                   "counts": counts}
    return x


# ---------------------------------------------------------------------------
# corpus construction
# ---------------------------------------------------------------------------

def random_donor(rng: np.random.Generator, index: int, n: int = CORPUS_NODES):
    m = index % 10 + 1
    p_edge = float(rng.uniform(0.2, 0.9))
    g = random_weighted_graph(n, p_edge, 5.0 * m, seed=rng)
    return g, {"generator": "random", "weight_upper": 5.0 * m,
               "edge_probability": p_edge}


def supernode_donor(rng: np.random.Generator, n: int = CORPUS_NODES):
    """A subproblem cut from a locally optimised random graph, as refinement sees them."""
    k = n - 2
    for _ in range(100):
        big_n = int(rng.integers(60, 400))
        p_edge = float(rng.uniform(2.0, 12.0) / big_n)
        base = random_weighted_graph(big_n, p_edge, float(rng.choice([1.0, 5.0, 50.0])),
                                     seed=rng)
        x = steepest_flip(base, random_start(base.n, int(rng.integers(2**31)), 0))
        gains = gain_vector(base, x)
        n_sample = big_n if rng.random() < 0.5 else max(int(np.ceil(0.3 * big_n)), 2 * k)
        subset = select_subset(gains, n_sample, k, seed=rng)
        sub = build_subproblem(base, x, subset).sub_graph
        sub = WeightedGraph(sub.n, sub.u, sub.v, sub.w)  # donors carry unit volumes
        if sub.is_connected():
            return sub, {"generator": "supernode", "base_n": big_n,
                         "edge_probability": p_edge}
    raise RuntimeError("could not draw a connected supernode donor")


def build_corpus(count: int = 200, p: int = CORPUS_DEPTH, multistarts: int = 20,
                 eval_budget: int = 300, seed: int = 0, n: int = CORPUS_NODES,
                 return_graphs: bool = False, progress=None):
    """Generate donor graphs, optimise their QAOA angles, store signatures.

    Even indices draw random weighted graphs with weights in ``[0, 5m)``,
    odd indices draw supernode-shaped subproblems. Each donor is scaled to
    ``max |w| = 1``. Depth 1 is solved on a grid with the closed-form
    expectation; deeper layers are optimised in turn from the padded
    shallower optimum plus ``multistarts - 1`` random starts.
    """
    from .qiro import optimize_p1

    if count < 1:
        raise ValueError("count must be >= 1")
    root = np.random.SeedSequence(seed)
    entries, graphs = [], []
    for idx, child in enumerate(root.spawn(count)):
        gen_seed, opt_seed = child.spawn(2)
        rng = np.random.default_rng(gen_seed)
        if idx % 2 == 0:
            g, meta = random_donor(rng, idx, n)
        else:
            g, meta = supernode_donor(rng, n)
        g, factor = scale_to_unit(g)
        cd = qaoa.cost_diagonal(g)
        gamma, beta, _ = optimize_p1(g)
        params, value = qaoa.optimize_progressive(
            cd, p, multistarts, eval_budget, opt_seed,
            first=qaoa.QaoaParams([gamma], [beta]))
        sig = spectral_signature(g).padded(n)
        meta.update({"n": g.n, "m": g.m, "weight_scale": factor, "index": idx,
                     "total_weight": g.total_weight})
        entries.append(CorpusEntry(sig, params, value, meta))
        graphs.append(g)
        if progress is not None:
            progress(idx, entries[-1])
    model = CorpusModel(entries, n=n, p=p)
    return (model, graphs) if return_graphs else model


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def dumps_corpus(model: CorpusModel) -> str:
    lines = [json.dumps({"version": CORPUS_VERSION, "n": model.n, "p": model.p})]
    for e in model.entries:
        lines.append(json.dumps({
            "sig": [float(v) for v in e.signature],
            "gammas": list(e.params.gammas),
            "betas": list(e.params.betas),
            "exp": float(e.expectation),
            "meta": e.meta,
        }, sort_keys=False))
    return "\n".join(lines) + "\n"


def save_corpus(model: CorpusModel, sink):
    text = dumps_corpus(model)
    if isinstance(sink, (str, Path)):
        Path(sink).write_text(text, encoding="utf-8")
    else:
        sink.write(text)


def loads_corpus(text: str) -> CorpusModel:
    lines = [(k, ln) for k, ln in enumerate(io.StringIO(text), start=1) if ln.strip()]
    if not lines:
        raise CorpusFormatError("empty corpus")
    lineno, first = lines[0]
    try:
        header = json.loads(first)
    except json.JSONDecodeError as exc:
        raise CorpusFormatError(f"line {lineno}: malformed header: {exc}") from None
    if header.get("version") != CORPUS_VERSION:
        raise CorpusFormatError(
            f"line {lineno}: unsupported corpus version {header.get('version')!r}")
    try:
        n, p = int(header["n"]), int(header["p"])
    except (KeyError, TypeError, ValueError):
        raise CorpusFormatError(f"line {lineno}: header needs integer 'n' and 'p'") from None
    entries = []
    for lineno, line in lines[1:]:
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusFormatError(f"line {lineno}: malformed record: {exc}") from None
        for key in ("sig", "gammas", "betas", "exp"):
            if key not in rec:
                raise CorpusFormatError(f"line {lineno}: record is missing {key!r}")
        sig = np.asarray(rec["sig"], dtype=float)
        if sig.shape != (n,):
            raise CorpusFormatError(f"line {lineno}: signature length {sig.size} != {n}")
        if len(rec["gammas"]) != p or len(rec["betas"]) != p:
            raise CorpusFormatError(f"line {lineno}: expected {p} gammas and betas")
        entries.append(CorpusEntry(sig, qaoa.QaoaParams(rec["gammas"], rec["betas"]),
                                   float(rec["exp"]), rec.get("meta", {})))
    if not entries:
        raise CorpusFormatError("empty corpus")
    return CorpusModel(entries, n=n, p=p)


def load_corpus(source) -> CorpusModel:
    if isinstance(source, (str, Path)):
        return loads_corpus(Path(source).read_text(encoding="utf-8"))
    return loads_corpus(source.read())


def default_corpus_path() -> Path:
    return Path(__file__).parent / "data" / "corpus_n22_p3.jsonl"
