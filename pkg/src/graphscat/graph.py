"""Immutable CSR graphs and the diffusion operators built on them.

The central object is the lazy random walk P = (I + W D^-1) / 2, applied
column-wise to feature matrices without ever materializing an n x n power.
All arithmetic is float64; neighbor lists are sorted so runs are
bit-reproducible.
"""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    DuplicateEdge,
    IsolatedNodeError,
    IsolatedNodeWarning,
    NonSymmetricInput,
    SelfLoopError,
)


@dataclass(frozen=True)
class Graph:
    """Weighted undirected graph in CSR form with cached weighted degrees.

    Invariants: every edge is stored in both directions with the same
    positive weight, no self-loops, and degrees[v] equals the row sum of W.
    Arrays are frozen (non-writeable), so instances are safely shareable.
    """

    n: int
    csr_offsets: np.ndarray   # int64, shape (n+1,)
    csr_targets: np.ndarray   # int64, shape (nnz,) sorted within each row
    csr_weights: np.ndarray   # float64, shape (nnz,)
    degrees: np.ndarray       # float64, shape (n,)

    @property
    def num_edges(self) -> int:
        """Number of undirected edges (each stored twice in CSR)."""
        return self.csr_targets.size // 2

    @property
    def has_isolated_nodes(self) -> bool:
        return bool(np.any(self.degrees == 0.0))

    def neighbors(self, v: int) -> np.ndarray:
        return self.csr_targets[self.csr_offsets[v]:self.csr_offsets[v + 1]]

    def neighbor_weights(self, v: int) -> np.ndarray:
        return self.csr_weights[self.csr_offsets[v]:self.csr_offsets[v + 1]]


@dataclass(frozen=True)
class OperatorKind:
    """Tag selecting one of the diffusion operators; alpha only for residual_diffusion."""

    tag: str
    alpha: float | None = None

    def __post_init__(self):
        if self.tag == "residual_diffusion":
            if self.alpha is None or self.alpha < 0:
                raise ValueError("residual_diffusion requires alpha >= 0")
        elif self.alpha is not None:
            raise ValueError(f"{self.tag} takes no alpha parameter")

    @property
    def needs_inverse_degree(self) -> bool:
        # renorm_adjacency uses degrees + 1, which never vanishes
        return self.tag in ("lazy_walk", "random_walk", "residual_diffusion",
                            "sym_norm_adjacency")


LAZY_WALK = OperatorKind("lazy_walk")
RENORM_ADJACENCY = OperatorKind("renorm_adjacency")
RANDOM_WALK = OperatorKind("random_walk")
SYM_NORM_ADJACENCY = OperatorKind("sym_norm_adjacency")


def residual_diffusion(alpha: float) -> OperatorKind:
    """Adaptive low-pass operator (I + alpha W D^-1) / (alpha + 1); alpha=0 is the identity."""
    return OperatorKind("residual_diffusion", float(alpha))


def build_graph(edges, n: int | None = None) -> Graph:
    """Build a Graph from (u, v) or (u, v, weight) triples.

    Rejects self-loops, duplicate undirected edges, and conflicting weights
    for the same pair. Emits IsolatedNodeWarning when some degree is zero.
    """
    seen: dict[tuple[int, int], float] = {}
    max_id = -1
    for e in edges:
        if len(e) == 2:
            u, v = e
            w = 1.0
        else:
            u, v, w = e
        u, v, w = int(u), int(v), float(w)
        if u == v:
            raise SelfLoopError(f"self-loop at node {u}")
        if u < 0 or v < 0:
            raise ValueError(f"negative node id in edge ({u}, {v})")
        if w <= 0:
            raise ValueError(f"edge ({u}, {v}) has non-positive weight {w}")
        key = (min(u, v), max(u, v))
        if key in seen:
            if seen[key] != w:
                raise NonSymmetricInput(
                    f"edge {key} given with conflicting weights {seen[key]} and {w}")
            raise DuplicateEdge(f"duplicate undirected edge {key}")
        seen[key] = w
        max_id = max(max_id, u, v)

    if n is None:
        n = max_id + 1
    elif max_id >= n:
        raise ValueError(f"node id {max_id} out of range for n={n}")

    rows = np.empty(2 * len(seen), dtype=np.int64)
    cols = np.empty(2 * len(seen), dtype=np.int64)
    wts = np.empty(2 * len(seen), dtype=np.float64)
    for i, ((u, v), w) in enumerate(seen.items()):
        rows[2 * i], cols[2 * i], wts[2 * i] = u, v, w
        rows[2 * i + 1], cols[2 * i + 1], wts[2 * i + 1] = v, u, w

    order = np.lexsort((cols, rows))
    rows, cols, wts = rows[order], cols[order], wts[order]
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.add.at(offsets, rows + 1, 1)
    offsets = np.cumsum(offsets)
    degrees = np.zeros(n, dtype=np.float64)
    np.add.at(degrees, rows, wts)

    for a in (offsets, cols, wts, degrees):
        a.flags.writeable = False
    g = Graph(n=n, csr_offsets=offsets, csr_targets=cols, csr_weights=wts,
              degrees=degrees)
    if g.has_isolated_nodes:
        warnings.warn(IsolatedNodeWarning(f"{int(np.sum(degrees == 0))} isolated node(s)"))
    return g


def _check_features(g: Graph, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.shape[0] != g.n:
        raise DimensionMismatch(f"feature rows {X.shape[0]} != node count {g.n}")
    return X


def adjacency_matvec(g: Graph, X: np.ndarray) -> np.ndarray:
    """W @ X for (n,) or (n, d) inputs, O(nnz * d) time and memory."""
    contrib = g.csr_weights * X[g.csr_targets] if X.ndim == 1 \
        else g.csr_weights[:, None] * X[g.csr_targets]
    out = np.zeros_like(X)
    counts = np.diff(g.csr_offsets)
    nonempty = np.flatnonzero(counts > 0)
    if nonempty.size:
        # reduceat segments are contiguous because empty rows hold no entries
        out[nonempty] = np.add.reduceat(contrib, g.csr_offsets[nonempty], axis=0)
    return out


def _require_no_isolated(g: Graph, kind: OperatorKind):
    if kind.needs_inverse_degree and g.has_isolated_nodes:
        raise IsolatedNodeError(
            f"operator {kind.tag} undefined on degree-zero nodes")


def apply_operator(g: Graph, kind: OperatorKind, X: np.ndarray) -> np.ndarray:
    """Apply one diffusion operator column-wise; the input is left unchanged.

    lazy_walk          P          = (I + W D^-1) / 2
    renorm_adjacency   A          = (D+I)^-1/2 (W+I) (D+I)^-1/2
    random_walk        R          = W D^-1
    residual_diffusion A_res(a)   = (I + a W D^-1) / (a + 1)
    sym_norm_adjacency             I + D^-1/2 W D^-1/2
    """
    X = _check_features(g, X)
    _require_no_isolated(g, kind)
    d = g.degrees if X.ndim == 1 else g.degrees[:, None]
    if kind.tag == "lazy_walk":
        return 0.5 * X + 0.5 * adjacency_matvec(g, X / d)
    if kind.tag == "random_walk":
        return adjacency_matvec(g, X / d)
    if kind.tag == "residual_diffusion":
        a = kind.alpha
        if a == 0.0:
            return X.copy()
        return (X + a * adjacency_matvec(g, X / d)) / (a + 1.0)
    if kind.tag == "renorm_adjacency":
        dt = d + 1.0
        s = np.sqrt(dt)
        Y = X / s
        return (Y + adjacency_matvec(g, Y)) / s
    if kind.tag == "sym_norm_adjacency":
        s = np.sqrt(d)
        return X + adjacency_matvec(g, X / s) / s
    raise ValueError(f"unknown operator kind {kind.tag!r}")


def apply_operator_transpose(g: Graph, kind: OperatorKind, X: np.ndarray) -> np.ndarray:
    """Apply the transpose of an operator (used by reverse-mode gradients).

    W is symmetric, so transposition swaps the side on which D^-1 acts;
    the two symmetric operators are their own transposes.
    """
    X = _check_features(g, X)
    _require_no_isolated(g, kind)
    d = g.degrees if X.ndim == 1 else g.degrees[:, None]
    if kind.tag == "lazy_walk":
        return 0.5 * X + 0.5 * adjacency_matvec(g, X) / d
    if kind.tag == "random_walk":
        return adjacency_matvec(g, X) / d
    if kind.tag == "residual_diffusion":
        a = kind.alpha
        if a == 0.0:
            return X.copy()
        return (X + a * adjacency_matvec(g, X) / d) / (a + 1.0)
    # renorm_adjacency and sym_norm_adjacency are symmetric
    return apply_operator(g, kind, X)


def operator_power_apply(g: Graph, kind: OperatorKind, t: int, X: np.ndarray) -> np.ndarray:
    """t successive applications of apply_operator, t >= 1."""
    if t < 1:
        raise ValueError(f"power t must be >= 1, got {t}")
    Y = apply_operator(g, kind, X)
    for _ in range(t - 1):
        Y = apply_operator(g, kind, Y)
    return Y


def bfs_distances(g: Graph, v: int, cap: int | None = None) -> np.ndarray:
    """Hop distances from v; unreachable nodes get -1. Stops beyond cap if given."""
    if not 0 <= v < g.n:
        raise ValueError(f"node {v} out of range")
    dist = np.full(g.n, -1, dtype=np.int64)
    dist[v] = 0
    q = deque([v])
    while q:
        u = q.popleft()
        if cap is not None and dist[u] >= cap:
            continue
        for w in g.neighbors(u):
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                q.append(int(w))
    return dist


def neighborhood(g: Graph, v: int, K: int, closed: bool = False) -> set[int]:
    """K-step neighborhood {u : 1 <= d(u,v) <= K}; closed variant adds v itself.

    K=0 gives the empty set (closed: {v}).
    """
    if K < 0:
        raise ValueError("K must be >= 0")
    dist = bfs_distances(g, v, cap=K)
    lo = 0 if closed else 1
    return {int(u) for u in np.flatnonzero((dist >= lo) & (dist <= K))}


def read_edge_list(path, n: int | None = None) -> Graph:
    """Read the one-edge-per-line text format: "u<TAB>v[<TAB>weight]", '#' comments.

    Node ids are dense 0-based integers. Exact duplicates and mirrored pairs
    are deduplicated; conflicting weights raise NonSymmetricInput.
    """
    seen: dict[tuple[int, int], float] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) not in (2, 3):
                raise ValueError(f"{path}:{lineno}: expected 'u v [weight]'")
            u, v = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) == 3 else 1.0
            key = (min(u, v), max(u, v))
            if key in seen:
                if seen[key] != w:
                    raise NonSymmetricInput(
                        f"{path}:{lineno}: edge {key} has conflicting weights")
                continue
            seen[key] = w
    return build_graph([(u, v, w) for (u, v), w in seen.items()], n=n)


def write_edge_list(g: Graph, path):
    """Write the graph in the read_edge_list format, one undirected edge per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for u in range(g.n):
            nbrs = g.neighbors(u)
            wts = g.neighbor_weights(u)
            for v, w in zip(nbrs, wts):
                if u < v:
                    fh.write(f"{u}\t{v}\t{w:.17g}\n")
