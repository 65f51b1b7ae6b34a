"""Graph, time and evolving-graph Fourier transforms.

Conventions
-----------
* GFT bases are orthonormal; each basis is stored with one eigenvector per
  *row*, eigenvalues ascending, and a fixed sign (largest-magnitude entry
  positive, ties to the lowest index).
* The DFT is unitary: ``Psi_T[k, t] = exp(-2j*pi*k*t/T) / sqrt(T)``. This
  differs from the unnormalized textbook DFT by a factor ``sqrt(T)``.
* Coefficient ``(i, j)`` of the evolving transform belongs to graph
  frequency index ``i`` and time-frequency bin ``j``; in flattened form it
  sits at ``j * N + i``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DomainError, NumericalError, ShapeError, SizeGuardError
from .graph_core import (
    DynamicGraph,
    JointLaplacian,
    Laplacian,
    LaplacianKind,
    build_joint_laplacian,
    build_time_ring_laplacian,
    snapshot_laplacians,
)

DEFAULT_MAX_DENSE = 4096
_TIE_TOL = 1e-10


@dataclass(frozen=True)
class GftBasis:
    vectors: np.ndarray
    eigenvalues: np.ndarray


@dataclass(frozen=True)
class DftBasis:
    vectors: np.ndarray

    @property
    def size(self) -> int:
        return self.vectors.shape[0]


@dataclass(frozen=True)
class DynamicGftBasis:
    """Per-timestep GFT bases stacked as ``(T, N, N)``, eigenvalues ``(T, N)``."""

    vectors: np.ndarray
    eigenvalues: np.ndarray
    kind: LaplacianKind

    @property
    def num_steps(self) -> int:
        return self.vectors.shape[0]

    @property
    def num_nodes(self) -> int:
        return self.vectors.shape[1]


@dataclass(frozen=True)
class EftCoefficients:
    """Time-vertex spectrum: ``values[i, j]`` for graph index i, time bin j."""

    values: np.ndarray
    graph_freqs: np.ndarray
    time_freqs: np.ndarray
    kind: LaplacianKind = LaplacianKind.COMBINATORIAL

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape[:2]


@dataclass(frozen=True)
class AdBasis:
    vectors: np.ndarray
    eigenvalues: np.ndarray


@dataclass(frozen=True)
class Alignment:
    """Result of matching the rows of ``B`` onto the rows of ``A``.

    ``perm[i]`` is the row of ``B`` matched to row ``i`` of ``A``;
    ``signs[i]`` the unit phase (``+-1`` for real input) of their overlap;
    ``aligned`` holds ``B`` after permutation, sign fixing and rotation inside
    degenerate groups, and ``diff_norm`` is ``||A - aligned||_F``.
    """

    perm: np.ndarray
    signs: np.ndarray
    diff_norm: float
    aligned: np.ndarray


def fix_signs(rows: np.ndarray) -> np.ndarray:
    """Flip each row (last axis) so its largest-magnitude entry is positive."""
    rows = np.array(rows, copy=True)
    mag = np.abs(rows)
    peak = mag.max(axis=-1, keepdims=True)
    is_peak = mag >= peak - _TIE_TOL * np.maximum(peak, 1.0)
    first = np.argmax(is_peak, axis=-1)
    lead = np.take_along_axis(rows, first[..., None], axis=-1)
    flip = np.where(np.real(lead) < 0, -1.0, 1.0)
    return rows * flip


def _eigh(M: np.ndarray):
    try:
        w, v = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"symmetric eigensolver failed: {exc}") from exc
    if not np.all(np.isfinite(w)):
        raise NumericalError("symmetric eigensolver returned non-finite eigenvalues")
    return w, v


def _dense(L) -> np.ndarray:
    if isinstance(L, (Laplacian, JointLaplacian)):
        return L.toarray()
    if sp.issparse(L):
        return L.toarray()
    return np.asarray(L, dtype=float)


def gft_basis(L) -> GftBasis:
    """Full symmetric EVD of a Laplacian, rows are eigenvectors."""
    M = _dense(L)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ShapeError(f"Laplacian must be square, got {M.shape}")
    w, v = _eigh(M)
    return GftBasis(fix_signs(v.T), w)


def dynamic_gft(dg: DynamicGraph, kind: LaplacianKind | str = LaplacianKind.COMBINATORIAL) -> DynamicGftBasis:
    """GFT basis of every snapshot, computed with one batched EVD."""
    kind = LaplacianKind.parse(kind)
    stack = np.stack([L.toarray() for L in snapshot_laplacians(dg, kind)])
    w, v = _eigh(stack)
    return DynamicGftBasis(fix_signs(np.swapaxes(v, 1, 2)), w, kind)


def dft_basis(num_steps: int) -> DftBasis:
    T = int(num_steps)
    if T < 1:
        raise DomainError(f"number of timesteps must be >= 1, got {num_steps}")
    k = np.arange(T)
    return DftBasis(np.exp(-2j * np.pi * np.outer(k, k) / T) / np.sqrt(T))


def time_frequencies(num_steps: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(num_steps) / num_steps


def ring_eigenvalues(num_steps: int) -> np.ndarray:
    """Eigenvalue of the time ring Laplacian carried by each DFT bin."""
    return build_time_ring_laplacian(num_steps).eigenvalues_dft_order()


def _bases(dg: DynamicGraph, kind, bases: DynamicGftBasis | None) -> DynamicGftBasis:
    if bases is None:
        return dynamic_gft(dg, kind)
    if bases.vectors.shape != (dg.num_steps, dg.num_nodes, dg.num_nodes):
        raise ShapeError("precomputed GFT bases do not match the dynamic graph")
    return bases


def graph_transform(dg: DynamicGraph, X, kind=LaplacianKind.COMBINATORIAL, bases=None) -> np.ndarray:
    """Apply each snapshot's GFT to its own column of ``X``."""
    X = dg.check_signal(X)
    V = _bases(dg, kind, bases).vectors
    return np.einsum("tim,mt...->it...", V, X)


def inverse_graph_transform(dg: DynamicGraph, Y, kind=LaplacianKind.COMBINATORIAL, bases=None) -> np.ndarray:
    Y = dg.check_signal(Y)
    V = _bases(dg, kind, bases).vectors
    return np.einsum("tim,it...->mt...", V.conj(), Y)


def eft_forward(dg: DynamicGraph, X, kind: LaplacianKind | str = LaplacianKind.COMBINATORIAL,
                bases: DynamicGftBasis | None = None) -> EftCoefficients:
    """Evolving graph Fourier transform of an ``N x T`` (or ``N x T x d``) signal.

    Column ``t`` is first projected on the GFT basis of snapshot ``t``; the
    result is then sent through a unitary FFT along the time axis.
    """
    kind = LaplacianKind.parse(kind)
    b = _bases(dg, kind, bases)
    Y = graph_transform(dg, X, kind, b)
    C = np.fft.fft(Y, axis=1, norm="ortho")
    return EftCoefficients(C, b.eigenvalues.T.copy(), time_frequencies(dg.num_steps), kind)


def eft_forward_time_first(dg: DynamicGraph, X, kind: LaplacianKind | str = LaplacianKind.COMBINATORIAL,
                           bases: DynamicGftBasis | None = None) -> EftCoefficients:
    """Same transform, contracted in the other order.

    The DFT kernel is applied to the signal first, producing
    ``P[m, j, k] = Psi_T[j, k] * X[m, k]``; the GFT of source timestep ``k``
    then acts on the node axis before the sum over ``k``. Costs
    ``O(N^2 T^2)`` and exists as an independent check of ``eft_forward``.
    """
    kind = LaplacianKind.parse(kind)
    b = _bases(dg, kind, bases)
    X = dg.check_signal(X)
    F = dft_basis(dg.num_steps).vectors
    P = np.einsum("jk,mk...->mjk...", F, X)
    C = np.einsum("kim,mjk...->ij...", b.vectors, P)
    return EftCoefficients(C, b.eigenvalues.T.copy(), time_frequencies(dg.num_steps), kind)


def eft_inverse(dg: DynamicGraph, C, kind: LaplacianKind | str = LaplacianKind.COMBINATORIAL,
                bases: DynamicGftBasis | None = None) -> np.ndarray:
    """Inverse FFT along time, then the transposed GFT of each snapshot."""
    values = C.values if isinstance(C, EftCoefficients) else np.asarray(C)
    if values.ndim < 2 or values.shape[:2] != dg.shape:
        raise ShapeError(
            f"coefficient shape {values.shape} does not match graph (N, T) = {dg.shape}"
        )
    Y = np.fft.ifft(values, axis=1, norm="ortho")
    return inverse_graph_transform(dg, Y, kind, bases)


def _guard(size: int, max_size: int | None, force: bool):
    limit = DEFAULT_MAX_DENSE if max_size is None else max_size
    if size > limit and not force:
        raise SizeGuardError(
            f"dense {size}x{size} object exceeds the size guard of {limit}; "
            "pass force=True to override"
        )


def ad_basis(J: JointLaplacian | np.ndarray, *, force: bool = False, max_size: int | None = None) -> AdBasis:
    """Exact eigendecomposition of the joint Laplacian (rows = eigenvectors)."""
    size = J.matrix.shape[0] if isinstance(J, JointLaplacian) else np.shape(J)[0]
    _guard(size, max_size, force)
    M = _dense(J)
    if not np.allclose(M, M.T, atol=1e-12):
        raise ShapeError("joint Laplacian must be symmetric")
    w, v = _eigh(M)
    return AdBasis(fix_signs(v.T), w)


def eft_matrix(dg: DynamicGraph, kind: LaplacianKind | str = LaplacianKind.COMBINATORIAL, *,
               force: bool = False, max_size: int | None = None,
               bases: DynamicGftBasis | None = None) -> np.ndarray:
    """Dense ``NT x NT`` matrix with ``Psi_D @ vec(X) == vec(eft_forward(X))``.

    Entry ``(j*N + i, k*N + m)`` equals ``Psi_T[j, k] * Psi_Gk[i, m]``.
    """
    N, T = dg.shape
    _guard(N * T, max_size, force)
    b = _bases(dg, kind, bases)
    F = dft_basis(T).vectors
    return np.einsum("jk,kim->jikm", F, b.vectors).reshape(N * T, N * T)


def eft_row_frequencies(dg: DynamicGraph, kind=LaplacianKind.COMBINATORIAL, bases=None) -> np.ndarray:
    """Frequency label of each row of :func:`eft_matrix`.

    Row ``j*N + i`` gets ``mu_j + mean_t lambda_i(t)``: the ring eigenvalue of
    bin ``j`` plus the time-averaged ``i``-th graph eigenvalue. Bins ``j`` and
    ``T - j`` share a label, mirroring the degenerate ring spectrum.
    """
    b = _bases(dg, kind, bases)
    mu = ring_eigenvalues(dg.num_steps)
    lam = b.eigenvalues.mean(axis=0)
    return (mu[:, None] + lam[None, :]).reshape(-1)


def _groups(eigs: np.ndarray, tol: float) -> np.ndarray:
    """Label runs of eigenvalues whose sorted neighbours differ by <= tol."""
    eigs = np.asarray(eigs, dtype=float)
    order = np.argsort(eigs, kind="stable")
    labels = np.empty(len(eigs), dtype=int)
    current = 0
    for pos, idx in enumerate(order):
        if pos and eigs[idx] - eigs[order[pos - 1]] > tol:
            current += 1
        labels[idx] = current
    return labels


def _greedy_match(W: np.ndarray) -> np.ndarray:
    n = W.shape[0]
    perm = np.full(n, -1, dtype=int)
    taken = np.zeros(n, dtype=bool)
    done = 0
    for flat in np.argsort(-W, axis=None, kind="stable"):
        i, j = divmod(int(flat), n)
        if perm[i] >= 0 or taken[j]:
            continue
        perm[i] = j
        taken[j] = True
        done += 1
        if done == n:
            break
    return perm


def align_bases(A, B, eigA, eigB, tol: float = 1e-6) -> Alignment:
    """Match the rows of ``B`` to the rows of ``A`` up to sign and permutation.

    Rows are paired greedily by largest ``|<a_i, b_j>|``. Rows whose
    eigenvalues lie within ``tol`` of each other form degenerate groups in
    which individual eigenvectors are arbitrary; every connected cluster of
    paired groups is aligned with the best unitary rotation of ``B``'s rows
    inside the cluster (orthogonal Procrustes). Singleton clusters reduce to
    a sign (or phase) flip.
    """
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape or A.ndim != 2:
        raise ShapeError(f"basis shapes differ: {A.shape} vs {B.shape}")
    n = A.shape[0]
    if len(eigA) != n or len(eigB) != n:
        raise ShapeError("one eigenvalue per basis row is required")
    G = A @ B.conj().T
    perm = _greedy_match(np.abs(G))
    overlap = G[np.arange(n), perm]
    mag = np.abs(overlap)
    signs = np.where(mag > 0, overlap / np.where(mag > 0, mag, 1.0), 1.0)
    if not np.iscomplexobj(A) and not np.iscomplexobj(B):
        signs = np.sign(signs.real) + (signs.real == 0)

    ga = _groups(eigA, tol)
    gb = _groups(eigB, tol)
    parent = list(range(2 * n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[ry] = rx

    for labels, offset in ((ga, 0), (gb, n)):
        first = {}
        for idx, lab in enumerate(labels):
            if lab in first:
                union(first[lab], idx + offset)
            else:
                first[lab] = idx + offset
    for i in range(n):
        union(i, n + perm[i])

    clusters: dict[int, list[int]] = {}
    for i in range(n):
        clusters.setdefault(find(i), []).append(i)

    out_dtype = np.result_type(A.dtype, B.dtype, float)
    aligned = np.zeros_like(B, dtype=out_dtype)
    for rows in clusters.values():
        a_idx = np.array(rows)
        b_idx = perm[a_idx]
        M = A[a_idx] @ B[b_idx].conj().T
        U, _, Vh = np.linalg.svd(M)
        aligned[a_idx] = (U @ Vh) @ B[b_idx]
    diff = float(np.linalg.norm(A - aligned))
    return Alignment(perm, signs, diff, aligned)


def track_eigenvectors(bases: DynamicGftBasis, index: int) -> tuple[np.ndarray, np.ndarray]:
    """Follow eigenvector ``index`` of snapshot 0 through time.

    At each step the next snapshot's eigenvector with the largest overlap is
    chosen and sign-aligned to the previous one. Returns the ``(T, N)``
    vectors and their ``(T,)`` eigenvalues.
    """
    T, N = bases.num_steps, bases.num_nodes
    if not 0 <= index < N:
        raise DomainError(f"graph index {index} out of range for {N} nodes")
    Z = np.empty((T, N))
    lam = np.empty(T)
    Z[0] = bases.vectors[0, index]
    lam[0] = bases.eigenvalues[0, index]
    for t in range(1, T):
        ov = bases.vectors[t] @ Z[t - 1]
        best = int(np.argmax(np.abs(ov)))
        Z[t] = bases.vectors[t, best] * (1.0 if ov[best] >= 0 else -1.0)
        lam[t] = bases.eigenvalues[t, best]
    return Z, lam


def pseudospectrum_residual(dg: DynamicGraph, k: int, l: int,
                            kind: LaplacianKind | str = LaplacianKind.COMBINATORIAL, *,
                            bases: DynamicGftBasis | None = None,
                            joint: JointLaplacian | None = None) -> float:
    """Relative residual ``||L_J y - (mu_k + lambda_l(0)) y|| / ||y||``.

    ``y`` stacks ``Psi_T[k, t] * z_l(t)`` over timesteps, where ``z_l(t)`` is
    the ``l``-th eigenvector of snapshot 0 tracked through time by overlap.
    Zero for a static graph.
    """
    kind = LaplacianKind.parse(kind)
    N, T = dg.shape
    if not 0 <= k < T:
        raise DomainError(f"time index {k} out of range for {T} steps")
    if not 0 <= l < N:
        raise DomainError(f"graph index {l} out of range for {N} nodes")
    b = _bases(dg, kind, bases)
    J = joint if joint is not None else build_joint_laplacian(dg, kind)
    Z, lam = track_eigenvectors(b, l)
    a = dft_basis(T).vectors[k]
    y = (a[:, None] * Z).reshape(-1)
    shift = ring_eigenvalues(T)[k] + lam[0]
    r = J.matrix @ y - shift * y
    return float(np.linalg.norm(r) / np.linalg.norm(y))


def pseudospectrum_residuals(dg: DynamicGraph, kind=LaplacianKind.COMBINATORIAL) -> np.ndarray:
    """All residuals as a ``(T, N)`` array indexed by ``(k, l)``."""
    kind = LaplacianKind.parse(kind)
    b = dynamic_gft(dg, kind)
    J = build_joint_laplacian(dg, kind)
    N, T = dg.shape
    out = np.empty((T, N))
    for l in range(N):
        for k in range(T):
            out[k, l] = pseudospectrum_residual(dg, k, l, kind, bases=b, joint=J)
    return out


def jitter_weights(dg: DynamicGraph, seed=None, amplitude: float = 1e-9) -> DynamicGraph:
    """Perturb every existing edge weight by ``U(-amplitude, amplitude)``.

    Splits accidental eigenvalue multiplicities. Weights are clamped at 0 and
    symmetry is preserved.
    """
    rng = np.random.default_rng(seed)
    snaps = []
    for g in dg.snapshots:
        upper = sp.triu(g.adjacency, format="coo")
        noise = rng.uniform(-amplitude, amplitude, size=upper.nnz)
        w = np.maximum(upper.data + noise, 0.0)
        up = sp.coo_array((w, (upper.row, upper.col)), shape=upper.shape)
        strict = sp.triu(up, k=1)
        snaps.append(up + strict.T)
    return DynamicGraph.from_adjacency(snaps)
