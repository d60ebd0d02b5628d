"""Weighted undirected graphs, cut arithmetic, file formats and generators."""

from __future__ import annotations

import io
import itertools
import logging
import math
from typing import Iterable

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

logger = logging.getLogger(__name__)


class GraphFormatError(ValueError):
    """Raised when a graph file cannot be parsed.

    ``line`` is the 1-based line number of the offending input line, or
    ``None`` when the problem is not tied to a single line.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class WeightedGraph:
    """Undirected weighted graph with per-node volumes.

    Edges are stored once per unordered pair with ``u < v`` in lexicographic
    order. A CSR adjacency index (both directions) backs O(deg) neighbourhood
    scans. Instances are treated as immutable after construction.

    Parameters
    ----------
    n : int
        Number of nodes.
    u, v, w : array_like
        Edge endpoints and weights. Duplicate pairs are summed, self-loops
        dropped.
    volumes : array_like of int, optional
        Number of finest-level nodes aggregated into each node. Defaults to
        all ones.
    """

    __slots__ = ("n", "u", "v", "w", "volumes", "indptr", "indices", "data",
                 "n_self_loops")

    def __init__(self, n, u=(), v=(), w=None, volumes=None):
        n = int(n)
        if n < 0:
            raise ValueError("node count must be non-negative")
        u = np.asarray(u, dtype=np.int64).ravel()
        v = np.asarray(v, dtype=np.int64).ravel()
        if w is None:
            w = np.ones(u.shape[0])
        w = np.asarray(w, dtype=np.float64).ravel()
        if not (u.shape == v.shape == w.shape):
            raise ValueError("edge arrays must have equal length")
        if u.size and (min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= n):
            raise ValueError("edge endpoint out of range")

        loops = u == v
        self.n_self_loops = int(loops.sum())
        u, v, w = u[~loops], v[~loops], w[~loops]
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        if lo.size:
            key = lo * n + hi
            uniq, inv = np.unique(key, return_inverse=True)
            w = np.bincount(inv, weights=w, minlength=uniq.size)
            lo, hi = uniq // n, uniq % n
        self.n = n
        self.u = lo.astype(np.int64)
        self.v = hi.astype(np.int64)
        self.w = w.astype(np.float64)

        if volumes is None:
            volumes = np.ones(n, dtype=np.int64)
        volumes = np.asarray(volumes, dtype=np.int64).ravel()
        if volumes.shape[0] != n:
            raise ValueError("volumes length must equal node count")
        if n and volumes.min() < 1:
            raise ValueError("volumes must be >= 1")
        self.volumes = volumes

        adj = sp.csr_matrix(
            (np.concatenate([self.w, self.w]),
             (np.concatenate([self.u, self.v]), np.concatenate([self.v, self.u]))),
            shape=(n, n),
        )
        adj.sort_indices()
        self.indptr = adj.indptr.astype(np.int64)
        self.indices = adj.indices.astype(np.int64)
        self.data = adj.data.astype(np.float64)
        for arr in (self.u, self.v, self.w, self.volumes, self.indptr,
                    self.indices, self.data):
            arr.flags.writeable = False

    @classmethod
    def from_edges(cls, n: int, edges: Iterable, volumes=None) -> "WeightedGraph":
        """Build from an iterable of ``(u, v)`` or ``(u, v, w)`` tuples."""
        us, vs, ws = [], [], []
        for e in edges:
            us.append(e[0])
            vs.append(e[1])
            ws.append(e[2] if len(e) > 2 else 1.0)
        return cls(n, us, vs, ws, volumes=volumes)

    @classmethod
    def from_adjacency(cls, A, volumes=None) -> "WeightedGraph":
        """Build from a symmetric dense or sparse adjacency matrix.

        Only the upper triangle is read; the diagonal is ignored.
        """
        A = sp.triu(sp.coo_matrix(A), k=1).tocoo()
        return cls(A.shape[0], A.row, A.col, A.data, volumes=volumes)

    @property
    def m(self) -> int:
        return int(self.u.shape[0])

    @property
    def total_weight(self) -> float:
        return float(self.w.sum())

    def edges(self):
        """Iterate ``(u, v, w)`` triples."""
        return zip(self.u.tolist(), self.v.tolist(), self.w.tolist())

    def neighbors(self, i: int):
        """Return ``(neighbor ids, weights)`` arrays for node ``i``."""
        a, b = self.indptr[i], self.indptr[i + 1]
        return self.indices[a:b], self.data[a:b]

    def degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    def adjacency(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.data, self.indices, self.indptr),
                             shape=(self.n, self.n))

    def dense(self) -> np.ndarray:
        A = np.zeros((self.n, self.n))
        A[self.u, self.v] = self.w
        A[self.v, self.u] = self.w
        return A

    def with_weights(self, w) -> "WeightedGraph":
        """Copy with edge weights replaced (same topology and volumes)."""
        return WeightedGraph(self.n, self.u, self.v, w, volumes=self.volumes)

    def scaled(self, factor: float) -> "WeightedGraph":
        return self.with_weights(self.w * factor)

    def relabel(self, perm) -> "WeightedGraph":
        """Return the graph with node ``i`` renamed ``perm[i]``."""
        perm = np.asarray(perm, dtype=np.int64)
        vol = np.empty_like(self.volumes)
        vol[perm] = self.volumes
        return WeightedGraph(self.n, perm[self.u], perm[self.v], self.w, volumes=vol)

    def connected_components(self) -> tuple[int, np.ndarray]:
        return csgraph.connected_components(self.adjacency(), directed=False)

    def is_connected(self) -> bool:
        return self.n <= 1 or self.connected_components()[0] == 1

    def __eq__(self, other):
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self.u, other.u)
                and np.array_equal(self.v, other.v)
                and np.array_equal(self.w, other.w)
                and np.array_equal(self.volumes, other.volumes))

    __hash__ = None

    def __repr__(self):
        return f"WeightedGraph(n={self.n}, m={self.m})"


def _check_assignment(g: WeightedGraph, x) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim != 1 or x.shape[0] != g.n:
        raise ValueError(
            f"assignment length {x.shape[0] if x.ndim else 0} does not match "
            f"node count {g.n}")
    return x.astype(np.int8, copy=False)


def cut_value(g: WeightedGraph, x) -> float:
    """Total weight of edges whose endpoints sit on different sides."""
    x = _check_assignment(g, x)
    return float(g.w[x[g.u] != x[g.v]].sum())


def gain_vector(g: WeightedGraph, x) -> np.ndarray:
    """Cut change obtained by flipping each node on its own."""
    x = _check_assignment(g, x)
    signed = np.where(x[g.u] == x[g.v], g.w, -g.w)
    return (np.bincount(g.u, weights=signed, minlength=g.n)
            + np.bincount(g.v, weights=signed, minlength=g.n))


def apply_flip(g: WeightedGraph, x, gains, i: int, inplace: bool = False):
    """Flip node ``i`` and update the gain vector in O(deg(i)).

    Returns the new ``(x, gains)``. With ``inplace=True`` the given arrays are
    modified and returned.
    """
    if not 0 <= i < g.n:
        raise IndexError(f"node {i} out of range for graph with {g.n} nodes")
    if not inplace:
        x = np.array(x, copy=True)
        gains = np.array(gains, dtype=np.float64, copy=True)
    nbr, wts = g.neighbors(i)
    # +2w where the edge was cut (becomes uncut), -2w where it was uncut
    was_cut = x[nbr] != x[i]
    gains[nbr] += np.where(was_cut, 2.0 * wts, -2.0 * wts)
    gains[i] = -gains[i]
    x[i] = 1 - x[i]
    return x, gains


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------

def _data_lines(text: str):
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.strip()
        if not line or line[0] in "%#":
            continue
        yield lineno, line


def _number(tok: str, lineno: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise GraphFormatError(f"non-numeric token {tok!r}", lineno) from None


def _integer(tok: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise GraphFormatError(f"expected integer, got {tok!r}", lineno) from None


def load_gset(text: str) -> WeightedGraph:
    """Parse Gset text: header ``n m`` then ``m`` lines ``u v [w]`` (1-indexed)."""
    lines = _data_lines(text)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise GraphFormatError("empty input") from None
    parts = header.split()
    if len(parts) < 2:
        raise GraphFormatError("header must be 'n m'", lineno)
    n, m = _integer(parts[0], lineno), _integer(parts[1], lineno)
    if n < 0 or m < 0:
        raise GraphFormatError("negative size in header", lineno)
    us, vs, ws = [], [], []
    for lineno, line in lines:
        parts = line.split()
        if len(parts) not in (2, 3):
            raise GraphFormatError("edge line must be 'u v [w]'", lineno)
        a, b = _integer(parts[0], lineno), _integer(parts[1], lineno)
        if not (1 <= a <= n and 1 <= b <= n):
            raise GraphFormatError(f"node id out of range 1..{n}", lineno)
        us.append(a - 1)
        vs.append(b - 1)
        ws.append(_number(parts[2], lineno) if len(parts) == 3 else 1.0)
    if len(us) != m:
        raise GraphFormatError(f"header declares {m} edges, found {len(us)}")
    g = WeightedGraph(n, us, vs, ws)
    if g.n_self_loops:
        logger.warning("dropped %d self-loop(s) from Gset input", g.n_self_loops)
    return g


def format_weight(w: float) -> str:
    """Shortest decimal text that round-trips through ``float``."""
    if float(w).is_integer() and abs(w) < 2**53:
        return str(int(w))
    return repr(float(w))


def save_gset(g: WeightedGraph) -> str:
    out = [f"{g.n} {g.m}"]
    out.extend(f"{a + 1} {b + 1} {format_weight(c)}" for a, b, c in g.edges())
    return "\n".join(out) + "\n"


def load_matrix_market(text: str) -> WeightedGraph:
    """Parse a coordinate-format Matrix Market matrix as an undirected graph.

    Diagonal entries are dropped and counted in ``n_self_loops``. ``symmetric`` matrices contribute each
    stored entry once; ``general`` matrices are folded as ``(A + A^T) / 2``.
    Signs are preserved; ``pattern`` matrices get unit weights.
    """
    stream = io.StringIO(text)
    banner = stream.readline()
    tokens = banner.strip().lower().split()
    if len(tokens) != 5 or tokens[0] != "%%matrixmarket" or tokens[1] != "matrix":
        raise GraphFormatError("missing %%MatrixMarket matrix banner", 1)
    _, _, fmt, field, symmetry = tokens
    if fmt != "coordinate":
        raise GraphFormatError(f"unsupported format {fmt!r}", 1)
    if field not in ("real", "integer", "pattern"):
        raise GraphFormatError(f"unsupported field {field!r}", 1)
    if symmetry not in ("general", "symmetric", "skew-symmetric"):
        raise GraphFormatError(f"unsupported symmetry {symmetry!r}", 1)

    lineno = 1
    size = None
    rows, cols, vals = [], [], []
    for raw in stream:
        lineno += 1
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        parts = line.split()
        if size is None:
            if len(parts) != 3:
                raise GraphFormatError("size line must be 'rows cols nnz'", lineno)
            size = tuple(_integer(t, lineno) for t in parts)
            if size[0] != size[1]:
                raise GraphFormatError(
                    f"matrix must be square, got {size[0]}x{size[1]}", lineno)
            continue
        want = 2 if field == "pattern" else 3
        if len(parts) != want:
            raise GraphFormatError(f"expected {want} tokens per entry", lineno)
        i, j = _integer(parts[0], lineno), _integer(parts[1], lineno)
        if not (1 <= i <= size[0] and 1 <= j <= size[1]):
            raise GraphFormatError("entry index outside matrix dimensions", lineno)
        rows.append(i - 1)
        cols.append(j - 1)
        vals.append(1.0 if field == "pattern" else _number(parts[2], lineno))
    if size is None:
        raise GraphFormatError("missing size line")
    if len(rows) != size[2]:
        raise GraphFormatError(
            f"size line declares {size[2]} entries, found {len(rows)}")

    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    vals = np.asarray(vals, dtype=np.float64)
    if symmetry == "general":
        vals = vals / 2.0
    # diagonal entries arrive as self-loops; the constructor drops and counts them
    g = WeightedGraph(size[0], rows, cols, vals)
    if g.n_self_loops:
        logger.warning("dropped %d diagonal entr%s", g.n_self_loops,
                       "y" if g.n_self_loops == 1 else "ies")
    return g


def load_graph(path, fmt: str | None = None) -> WeightedGraph:
    """Read a graph file; ``fmt`` is ``gset`` or ``mtx`` (inferred from suffix)."""
    path = str(path)
    if fmt is None:
        fmt = "mtx" if path.endswith(".mtx") else "gset"
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if fmt == "gset":
        return load_gset(text)
    if fmt == "mtx":
        return load_matrix_market(text)
    raise ValueError(f"unknown graph format {fmt!r}")


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def karloff_generate(b: int, t: int) -> WeightedGraph:
    """Karloff graph: ``b``-subsets of ``{1..2b}``, adjacent iff they share ``t`` elements."""
    if b < 2:
        raise ValueError("b must be >= 2")
    if not 0 <= t < b:
        raise ValueError(f"intersection size t must satisfy 0 <= t < b, got t={t}, b={b}")
    subsets = list(itertools.combinations(range(2 * b), b))
    masks = np.array([sum(1 << e for e in s) for s in subsets], dtype=np.int64)
    index = {int(mk): k for k, mk in enumerate(masks)}
    us, vs = [], []
    universe = range(2 * b)
    for a_idx, s in enumerate(subsets):
        inside = s
        outside = [e for e in universe if e not in set(s)]
        # neighbours keep t elements of s and take b - t from the complement
        for keep in itertools.combinations(inside, t):
            keep_mask = sum(1 << e for e in keep)
            for add in itertools.combinations(outside, b - t):
                c_idx = index[keep_mask | sum(1 << e for e in add)]
                if c_idx > a_idx:
                    us.append(a_idx)
                    vs.append(c_idx)
    return WeightedGraph(len(subsets), us, vs)


DENSE_PAIR_LIMIT = 5_000_000


def _pair_from_index(n: int, k: np.ndarray):
    """Row-major upper-triangle index -> (i, j) with i < j."""
    k = np.asarray(k, dtype=np.int64)
    i = n - 2 - np.floor(np.sqrt(-8.0 * k + 4.0 * n * (n - 1) - 7) / 2 - 0.5).astype(np.int64)
    j = k + i + 1 - n * (n - 1) // 2 + (n - i) * (n - i - 1) // 2
    return i, j


def random_weighted_graph(n: int, edge_probability: float, weight_upper: float,
                          seed=None) -> WeightedGraph:
    """Connected Erdos-Renyi graph with weights uniform in ``[0, weight_upper)``.

    Large ``n`` draws the edge count and then distinct pairs, which avoids
    enumerating all pairs. Disconnected draws are resampled up to 100 times; after that the
    remaining components are chained with random bridging edges.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if not 0 < edge_probability <= 1:
        raise ValueError("edge_probability must be in (0, 1]")
    if weight_upper <= 0:
        raise ValueError("weight_upper must be positive")
    rng = np.random.default_rng(seed)
    n_pairs = n * (n - 1) // 2
    dense = n_pairs <= DENSE_PAIR_LIMIT
    if dense:
        iu, iv = np.triu_indices(n, k=1)
    for _ in range(100):
        if dense:
            keep = rng.random(iu.shape[0]) < edge_probability
            u, v = iu[keep], iv[keep]
        else:
            m = rng.binomial(n_pairs, edge_probability)
            u, v = _pair_from_index(n, rng.choice(n_pairs, size=m, replace=False))
        w = rng.random(u.shape[0]) * weight_upper
        g = WeightedGraph(n, u, v, w)
        if g.is_connected():
            return g
    ncomp, labels = g.connected_components()
    reps = [int(rng.choice(np.flatnonzero(labels == c))) for c in rng.permutation(ncomp)]
    bu, bv = reps[:-1], reps[1:]
    bw = rng.random(len(bu)) * weight_upper
    return WeightedGraph(n, np.concatenate([g.u, bu]), np.concatenate([g.v, bv]),
                         np.concatenate([g.w, bw]))


def karloff_size(b: int, t: int) -> tuple[int, int]:
    """Closed-form ``(|V|, |E|)`` of the Karloff graph."""
    nv = math.comb(2 * b, b)
    return nv, nv * math.comb(b, t) * math.comb(b, b - t) // 2
