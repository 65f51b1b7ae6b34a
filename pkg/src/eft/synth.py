"""Synthetic evolving graphs, time-vertex signals and dynamic meshes."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DomainError
from .graph_core import DynamicGraph, LaplacianKind, WeightedGraph
from .spectral import dynamic_gft


def _as_tuple(values, name):
    out = tuple(float(v) for v in np.atleast_1d(values))
    if not all(np.isfinite(out)):
        raise DomainError(f"{name} must be finite")
    return out


@dataclass(frozen=True)
class SynthConfig:
    """Parameters of the evolving-graph signal generator.

    The clean signal is ``sum_k alpha_k * Evec(G_t)[:, k] + sum_f beta_f *
    cos(omega_f * t)``; ``noise_std`` is the i.i.d. Gaussian noise level.
    """

    n: int = 20
    t: int = 32
    perturb_scale: float = 0.1
    alpha: tuple[float, ...] = (0.5,)
    beta: tuple[float, ...] = (0.5,)
    omega: tuple[float, ...] = (0.5,)
    noise_std: float = 0.1
    seed: int = 0
    eigvec_index: tuple[int, ...] = (1,)
    kind: str = "norm"
    edge_prob: float = 0.3
    clamp: bool = True
    p_struct: float = 0.0

    def __post_init__(self):
        if int(self.n) < 2 or int(self.t) < 2:
            raise DomainError(f"need n >= 2 and t >= 2, got n={self.n}, t={self.t}")
        for name in ("perturb_scale", "noise_std"):
            v = float(getattr(self, name))
            if not np.isfinite(v) or v < 0:
                raise DomainError(f"{name} must be finite and >= 0, got {v}")
        for name in ("edge_prob", "p_struct"):
            v = float(getattr(self, name))
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {v}")
        alpha = _as_tuple(self.alpha, "alpha")
        beta = _as_tuple(self.beta, "beta")
        omega = _as_tuple(self.omega, "omega")
        idx = tuple(int(k) for k in np.atleast_1d(self.eigvec_index))
        if len(alpha) != len(idx):
            raise DomainError("alpha and eigvec_index must have the same length")
        if len(beta) != len(omega):
            raise DomainError("beta and omega must have the same length")
        if any(k < 0 for k in idx):
            raise DomainError("eigvec_index entries must be >= 0")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "t", int(self.t))
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "eigvec_index", idx)
        object.__setattr__(self, "kind", LaplacianKind.parse(self.kind).value)
        object.__setattr__(self, "clamp", bool(self.clamp))

    def replace(self, **changes) -> "SynthConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for key in ("alpha", "beta", "omega", "eigvec_index"):
            d[key] = list(d[key])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SynthConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise DomainError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


def _streams(seed):
    graph_ss, noise_ss, extra_ss = np.random.SeedSequence(seed).spawn(3)
    return (np.random.default_rng(graph_ss), np.random.default_rng(noise_ss),
            np.random.default_rng(extra_ss))


def _symmetric(n, iu, w):
    A = sp.coo_array((w, iu), shape=(n, n)).tocsr()
    return A + A.T


def gen_evolving_graph(cfg: SynthConfig) -> DynamicGraph:
    """Erdos-Renyi skeleton with ``|N(0,1)|`` weights, randomly walked in time.

    Each step adds ``N(0, perturb_scale)`` to every skeleton edge (clamped at
    zero when ``cfg.clamp``). With ``p_struct > 0`` every node pair also
    toggles membership with that probability per step; new edges get fresh
    ``|N(0,1)|`` weights.
    """
    rng, _, _ = _streams(cfg.seed)
    n = cfg.n
    iu = np.triu_indices(n, k=1)
    m = iu[0].size
    present = rng.random(m) < cfg.edge_prob
    w = np.abs(rng.standard_normal(m)) * present
    snaps = [WeightedGraph(_symmetric(n, iu, w))]
    for _ in range(1, cfg.t):
        step = rng.normal(0.0, cfg.perturb_scale, size=m) if cfg.perturb_scale > 0 else np.zeros(m)
        w = w + step * present
        if cfg.clamp:
            w = np.maximum(w, 0.0)
        if cfg.p_struct > 0:
            toggle = rng.random(m) < cfg.p_struct
            fresh = np.abs(rng.standard_normal(m))
            born = toggle & ~present
            w = np.where(born, fresh, w)
            present = present ^ toggle
            w = w * present
        snaps.append(WeightedGraph(_symmetric(n, iu, w)))
    return DynamicGraph(n, tuple(snaps))


def continuous_eigenvectors(dg: DynamicGraph, index: int, kind=LaplacianKind.COMBINATORIAL) -> np.ndarray:
    """``(T, N)`` array of eigenvector ``index`` per snapshot, sign-continuous in time."""
    if not 0 <= index < dg.num_nodes:
        raise DomainError(f"eigenvector index {index} out of range for {dg.num_nodes} nodes")
    V = dynamic_gft(dg, kind).vectors[:, index, :].copy()
    for t in range(1, V.shape[0]):
        if V[t] @ V[t - 1] < 0:
            V[t] = -V[t]
    return V


def gen_signal(dg: DynamicGraph, cfg: SynthConfig) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(clean, noisy)`` ``N x T`` signals on ``dg``."""
    N, T = dg.shape
    if (N, T) != (cfg.n, cfg.t):
        raise DomainError(f"config dims ({cfg.n}, {cfg.t}) do not match graph {dg.shape}")
    for k in cfg.eigvec_index:
        if k >= N:
            raise DomainError(f"eigvec_index {k} must be < N = {N}")
    clean = np.zeros((N, T))
    for a, k in zip(cfg.alpha, cfg.eigvec_index):
        clean += a * continuous_eigenvectors(dg, k, cfg.kind).T
    steps = np.arange(T)
    for b, w in zip(cfg.beta, cfg.omega):
        clean += b * np.cos(w * steps)[None, :]
    _, rng, _ = _streams(cfg.seed)
    noisy = clean + rng.normal(0.0, cfg.noise_std, size=clean.shape) if cfg.noise_std > 0 else clean.copy()
    return clean, noisy


def grid_graph(resolution: int) -> WeightedGraph:
    """Unweighted 4-neighbour ``m x m`` grid, node ``a * m + b`` at row a, column b."""
    m = int(resolution)
    edges = []
    for a in range(m):
        for b in range(m):
            v = a * m + b
            if b + 1 < m:
                edges.append((v, v + 1, 1.0))
            if a + 1 < m:
                edges.append((v, v + m, 1.0))
    return WeightedGraph.from_edges(m * m, edges)


def gen_dynamic_mesh(frames: int, resolution: int, *, period: float | None = None,
                     amplitude: float = 0.2, wavenumber: float = 1.0,
                     seed=None) -> tuple[DynamicGraph, np.ndarray]:
    """Grid mesh whose height channel carries a traveling sine wave.

    Returns the (static-topology) dynamic graph and an ``N x T x 3`` signal of
    vertex positions ``(x, y, z)`` with ``z = amplitude * sin(2 pi (wavenumber
    * u - t / period) + phase)`` where ``u`` is the projection of ``(x, y)``
    on the wave direction. ``period`` defaults to ``frames``. Without a seed
    the wave travels along x with phase 0; a seed randomizes direction,
    phase, amplitude (within +-25%) and wavenumber (within +-25%).
    """
    m = int(resolution)
    T = int(frames)
    if m < 2:
        raise DomainError(f"mesh resolution must be >= 2, got {resolution}")
    if T < 1:
        raise DomainError(f"frames must be >= 1, got {frames}")
    period = float(T if period is None else period)
    if period <= 0:
        raise DomainError("wave period must be positive")
    direction, phase = 0.0, 0.0
    if seed is not None:
        _, _, rng = _streams(seed)
        direction = rng.uniform(0.0, 2.0 * np.pi)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        amplitude = amplitude * rng.uniform(0.75, 1.25)
        wavenumber = wavenumber * rng.uniform(0.75, 1.25)
    coords = np.linspace(0.0, 1.0, m)
    yy, xx = np.meshgrid(coords, coords, indexing="ij")
    x, y = xx.ravel(), yy.ravel()
    u = np.cos(direction) * x + np.sin(direction) * y
    t = np.arange(T)
    z = amplitude * np.sin(2.0 * np.pi * (wavenumber * u[:, None] - t[None, :] / period) + phase)
    X = np.stack([np.repeat(x[:, None], T, axis=1), np.repeat(y[:, None], T, axis=1), z], axis=2)
    return DynamicGraph.static(grid_graph(m), T), X
