"""Dynamic graphs and their Laplacians.

A dynamic graph is a fixed node set observed through ``T`` weighted undirected
snapshots. Signals on it are ``N x T`` arrays (node index first). Whenever a
signal has to be flattened, the layout is timestep-major: entry ``(i, t)``
lands at position ``t * N + i``, i.e. ``X.reshape(-1, order="F")``. The joint
Laplacian uses the same layout, block ``t`` occupying rows ``tN .. tN + N - 1``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import DomainError, ShapeError, SymmetryError

_SYM_TOL = 1e-12


class LaplacianKind(str, enum.Enum):
    COMBINATORIAL = "comb"
    NORMALIZED = "norm"

    @classmethod
    def parse(cls, value: "LaplacianKind | str") -> "LaplacianKind":
        if isinstance(value, cls):
            return value
        text = str(value).strip().lower()
        aliases = {
            "comb": cls.COMBINATORIAL,
            "combinatorial": cls.COMBINATORIAL,
            "norm": cls.NORMALIZED,
            "normalized": cls.NORMALIZED,
        }
        try:
            return aliases[text]
        except KeyError:
            raise DomainError(f"unknown Laplacian kind {value!r}") from None


class WeightedGraph:
    """Symmetric, nonnegatively weighted adjacency over ``num_nodes`` nodes.

    Self-loops are allowed. The adjacency is stored as a CSR array and is
    treated as immutable.
    """

    __slots__ = ("_adj",)

    def __init__(self, adjacency):
        if sp.issparse(adjacency):
            adj = sp.csr_array(adjacency, dtype=float)
        else:
            dense = np.asarray(adjacency, dtype=float)
            if dense.ndim != 2:
                raise ShapeError(f"adjacency must be 2-D, got shape {dense.shape}")
            adj = sp.csr_array(dense)
        if adj.shape[0] != adj.shape[1]:
            raise ShapeError(f"adjacency must be square, got shape {adj.shape}")
        data = adj.data
        if not np.all(np.isfinite(data)):
            raise DomainError("adjacency weights must be finite")
        if np.any(data < 0):
            raise DomainError("adjacency weights must be nonnegative")
        diff = abs(adj - adj.T)
        if diff.nnz and diff.max() > _SYM_TOL * max(1.0, float(abs(adj).max())):
            coo = sp.coo_array(diff)
            k = int(np.argmax(coo.data))
            u, v = int(coo.row[k]), int(coo.col[k])
            raise SymmetryError(
                f"adjacency is not symmetric: A[{u}][{v}]={adj[u, v]!r} "
                f"but A[{v}][{u}]={adj[v, u]!r}"
            )
        adj = sp.csr_array((adj + adj.T) * 0.5)
        adj.eliminate_zeros()
        adj.sort_indices()
        self._adj = adj

    @classmethod
    def from_edges(cls, num_nodes: int, edges: Iterable[Sequence[float]]) -> "WeightedGraph":
        """Build from undirected ``(u, v, w)`` triples, each edge listed once."""
        rows, cols, vals = [], [], []
        for u, v, w in edges:
            u, v = int(u), int(v)
            if not (0 <= u < num_nodes and 0 <= v < num_nodes):
                raise DomainError(f"edge ({u}, {v}) out of range for {num_nodes} nodes")
            rows.append(u)
            cols.append(v)
            vals.append(float(w))
            if u != v:
                rows.append(v)
                cols.append(u)
                vals.append(float(w))
        adj = sp.coo_array((vals, (rows, cols)), shape=(num_nodes, num_nodes))
        return cls(adj.tocsr())

    @property
    def adjacency(self) -> sp.csr_array:
        return self._adj

    @property
    def num_nodes(self) -> int:
        return self._adj.shape[0]

    def toarray(self) -> np.ndarray:
        return self._adj.toarray()

    def edges(self) -> list[tuple[int, int, float]]:
        """Undirected edges ``(u, v, w)`` with ``u <= v``, sorted."""
        upper = sp.triu(self._adj, format="coo")
        order = np.lexsort((upper.col, upper.row))
        return [
            (int(upper.row[k]), int(upper.col[k]), float(upper.data[k])) for k in order
        ]

    def __eq__(self, other):
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        if self._adj.shape != other._adj.shape:
            return False
        return (self._adj != other._adj).nnz == 0

    def __repr__(self):
        return f"WeightedGraph(num_nodes={self.num_nodes}, nnz={self._adj.nnz})"


@dataclass(frozen=True)
class DynamicGraph:
    """Fixed node set with ``T >= 1`` time-ordered snapshots."""

    num_nodes: int
    snapshots: tuple[WeightedGraph, ...]

    def __post_init__(self):
        snaps = tuple(
            s if isinstance(s, WeightedGraph) else WeightedGraph(s) for s in self.snapshots
        )
        object.__setattr__(self, "snapshots", snaps)
        if int(self.num_nodes) < 1:
            raise DomainError("num_nodes must be positive")
        if not snaps:
            raise DomainError("a dynamic graph needs at least one snapshot")
        for t, s in enumerate(snaps):
            if s.num_nodes != self.num_nodes:
                raise ShapeError(
                    f"snapshot {t} has {s.num_nodes} nodes, expected {self.num_nodes}"
                )

    @classmethod
    def from_adjacency(cls, adjacencies: Sequence) -> "DynamicGraph":
        snaps = tuple(WeightedGraph(a) for a in adjacencies)
        if not snaps:
            raise DomainError("a dynamic graph needs at least one snapshot")
        return cls(snaps[0].num_nodes, snaps)

    @classmethod
    def static(cls, graph, num_steps: int) -> "DynamicGraph":
        g = graph if isinstance(graph, WeightedGraph) else WeightedGraph(graph)
        return cls(g.num_nodes, (g,) * int(num_steps))

    @property
    def num_steps(self) -> int:
        return len(self.snapshots)

    @property
    def shape(self) -> tuple[int, int]:
        return self.num_nodes, self.num_steps

    def check_signal(self, X) -> np.ndarray:
        """Return ``X`` as an array whose first two axes are ``(N, T)``."""
        arr = np.asarray(X)
        if arr.ndim < 2 or arr.shape[:2] != self.shape:
            raise ShapeError(
                f"signal shape {arr.shape} does not match graph (N, T) = {self.shape}"
            )
        return arr


@dataclass(frozen=True)
class Laplacian:
    matrix: sp.csr_array
    kind: LaplacianKind

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


@dataclass(frozen=True)
class TimeRingLaplacian:
    matrix: np.ndarray

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues_dft_order(self) -> np.ndarray:
        """Eigenvalue paired with each DFT frequency bin ``k = 0 .. T-1``.

        The ring Laplacian is circulant, so the unitary DFT diagonalizes it
        and bin ``k`` carries the DFT of its first row.
        """
        return np.fft.fft(self.matrix[0]).real


@dataclass(frozen=True)
class JointLaplacian:
    matrix: sp.csr_array
    num_nodes: int
    num_steps: int
    kind: LaplacianKind

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


def _as_graph(graph) -> WeightedGraph:
    return graph if isinstance(graph, WeightedGraph) else WeightedGraph(graph)


def build_laplacian(graph, kind: LaplacianKind | str = LaplacianKind.COMBINATORIAL) -> Laplacian:
    """Combinatorial ``D - A`` or normalized ``I - D^-1/2 A D^-1/2`` Laplacian.

    Self-loops cancel in the combinatorial form. Degree-0 nodes get an all-zero
    row and column in the normalized form.
    """
    g = _as_graph(graph)
    kind = LaplacianKind.parse(kind)
    adj = g.adjacency
    deg = np.asarray(adj.sum(axis=1)).ravel()
    if kind is LaplacianKind.COMBINATORIAL:
        L = sp.diags_array(deg) - adj
    else:
        alive = deg > 0
        inv_sqrt = np.zeros_like(deg)
        inv_sqrt[alive] = 1.0 / np.sqrt(deg[alive])
        Dm = sp.diags_array(inv_sqrt)
        L = sp.diags_array(alive.astype(float)) - Dm @ adj @ Dm
    L = sp.csr_array(L)
    L.eliminate_zeros()
    return Laplacian(L, kind)


def build_time_ring_laplacian(num_steps: int) -> TimeRingLaplacian:
    """Laplacian of the cycle over ``T`` timesteps.

    ``T = 2`` is a single unit edge and ``T = 1`` is the 1x1 zero matrix.
    """
    T = int(num_steps)
    if T < 1:
        raise DomainError(f"number of timesteps must be >= 1, got {num_steps}")
    if T == 1:
        return TimeRingLaplacian(np.zeros((1, 1)))
    if T == 2:
        return TimeRingLaplacian(np.array([[1.0, -1.0], [-1.0, 1.0]]))
    first = np.zeros(T)
    first[0], first[1], first[-1] = 2.0, -1.0, -1.0
    idx = (np.arange(T)[None, :] - np.arange(T)[:, None]) % T
    return TimeRingLaplacian(first[idx])


def snapshot_laplacians(dg: DynamicGraph, kind: LaplacianKind | str = LaplacianKind.COMBINATORIAL) -> list[Laplacian]:
    return [build_laplacian(g, kind) for g in dg.snapshots]


def build_joint_laplacian(dg: DynamicGraph, kind: LaplacianKind | str = LaplacianKind.COMBINATORIAL) -> JointLaplacian:
    """``L_T (x) I_N + blockdiag(L_G0, ..., L_G(T-1))`` in timestep-major layout."""
    kind = LaplacianKind.parse(kind)
    N, T = dg.shape
    ring = sp.csr_array(build_time_ring_laplacian(T).matrix)
    blocks = sp.block_diag([L.matrix for L in snapshot_laplacians(dg, kind)], format="csr")
    J = sp.csr_array(sp.kron(ring, sp.eye_array(N), format="csr") + blocks)
    J.eliminate_zeros()
    return JointLaplacian(J, N, T, kind)


def vec(X) -> np.ndarray:
    """Timestep-major flattening of an ``N x T`` signal."""
    return np.asarray(X).reshape(-1, order="F")


def unvec(x, num_nodes: int, num_steps: int) -> np.ndarray:
    return np.asarray(x).reshape((num_nodes, num_steps), order="F")


def _ring_neighbors(t: int, T: int) -> list[int]:
    return sorted({(t - 1) % T, (t + 1) % T} - {t})


def dirichlet_s2(dg: DynamicGraph, X) -> float:
    """Global 2-Dirichlet variation of ``X`` on the joint time-vertex graph.

    Computed directly as half the sum, over every (node, time) vertex, of the
    weighted squared differences to its neighbours: graph neighbours inside
    the snapshot and the adjacent timesteps on the time ring. Self-loops
    contribute nothing. Does not touch any Laplacian.
    """
    X = dg.check_signal(X)
    if X.ndim != 2:
        raise ShapeError(f"expected an N x T signal, got shape {X.shape}")
    X = np.asarray(X, dtype=float)
    N, T = dg.shape
    total = 0.0
    for t, g in enumerate(dg.snapshots):
        coo = sp.coo_array(g.adjacency)
        off = coo.row != coo.col
        r, c, w = coo.row[off], coo.col[off], coo.data[off]
        # both (u, v) and (v, u) are stored: each edge is visited from either end
        total += 0.5 * float(np.sum(w * (X[c, t] - X[r, t]) ** 2))
        for s in _ring_neighbors(t, T):
            total += 0.5 * float(np.sum((X[:, s] - X[:, t]) ** 2))
    return total
