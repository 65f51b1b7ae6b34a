"""Vertex, temporal and joint time-vertex filtering.

Vertex filters are Chebyshev polynomials in the rescaled Laplacian
``2 L / lambda_max - I`` and are evaluated with the three-term recurrence on
the signal, so no eigendecomposition is needed. Temporal filters multiply the
unitary DFT of each node's time series bin by bin.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
import scipy.sparse as sp
from numpy.polynomial import chebyshev as npcheb

from .errors import DomainError, ShapeError
from .graph_core import DynamicGraph, Laplacian, LaplacianKind, snapshot_laplacians
from .spectral import dft_basis

LAMBDA_FLOOR = 1e-12


@dataclass(frozen=True)
class ChebyshevFilter:
    coeffs: np.ndarray
    lambda_max: float

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        if c.ndim != 1 or c.size == 0:
            raise DomainError("Chebyshev coefficients must be a non-empty vector")
        if not np.all(np.isfinite(c)):
            raise DomainError("Chebyshev coefficients must be finite")
        lm = float(self.lambda_max)
        if not np.isfinite(lm) or lm <= 0:
            raise DomainError(f"lambda_max must be positive and finite, got {self.lambda_max}")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "lambda_max", lm)

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    def response(self, lam) -> np.ndarray:
        """Frequency response at eigenvalue(s) ``lam``."""
        x = 2.0 * np.asarray(lam, dtype=float) / self.lambda_max - 1.0
        return npcheb.chebval(x, self.coeffs)

    def with_lambda_max(self, lambda_max: float) -> "ChebyshevFilter":
        return replace(self, lambda_max=lambda_max)


@dataclass(frozen=True)
class TemporalFilter:
    """Per-bin response ``F_T``; shape ``(T,)`` or ``(T, d)`` for multichannel."""

    response: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.response)
        if r.ndim not in (1, 2) or r.shape[0] == 0:
            raise ShapeError(f"temporal response must be (T,) or (T, d), got {r.shape}")
        object.__setattr__(self, "response", r)

    @property
    def length(self) -> int:
        return self.response.shape[0]

    def is_conjugate_symmetric(self, tol: float = 1e-12) -> bool:
        r = self.response
        mirrored = r[(-np.arange(r.shape[0])) % r.shape[0]]
        return bool(np.allclose(r, np.conj(mirrored), atol=tol, rtol=0))

    def kernel(self) -> np.ndarray:
        """``T x T`` time-domain operator ``Psi_T^* diag(F_T) Psi_T``."""
        if self.response.ndim != 1:
            raise ShapeError("kernel() needs a single-channel response")
        F = dft_basis(self.length).vectors
        K = F.conj().T @ (self.response[:, None] * F)
        if self.is_conjugate_symmetric():
            K = K.real
        return K


class PresetName(str, enum.Enum):
    LOW_PASS = "lowpass"
    HIGH_PASS = "highpass"
    BAND_PASS = "bandpass"
    BAND_STOP = "bandstop"
    ALL_PASS = "allpass"

    @classmethod
    def parse(cls, value) -> "PresetName":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "").replace("-", "").replace(" ", "")
        for member in cls:
            if member.value == key:
                return member
        raise DomainError(f"unknown filter preset {value!r}")


@dataclass(frozen=True)
class FilterPreset:
    """Ideal brick-wall filter in normalized frequency units.

    Vertex presets measure frequency as a fraction of ``lambda_max``,
    temporal presets as a fraction of the Nyquist frequency. Bands are
    half-open ``[low, high)``.
    """

    name: PresetName
    cutoffs: tuple[float, ...] = field(default=())

    def __post_init__(self):
        name = PresetName.parse(self.name)
        cuts = tuple(float(c) for c in np.atleast_1d(self.cutoffs)) if self.cutoffs != () else ()
        need = {
            PresetName.ALL_PASS: 0,
            PresetName.LOW_PASS: 1,
            PresetName.HIGH_PASS: 1,
            PresetName.BAND_PASS: 2,
            PresetName.BAND_STOP: 2,
        }[name]
        if len(cuts) != need:
            raise DomainError(f"{name.value} takes {need} cutoff(s), got {len(cuts)}")
        if any(not (0.0 < c < 1.0) for c in cuts):
            raise DomainError(f"cutoffs must lie strictly inside (0, 1), got {cuts}")
        if need == 2 and not cuts[0] < cuts[1]:
            raise DomainError(f"band cutoffs must satisfy low < high, got {cuts}")
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "cutoffs", cuts)


def preset_response(preset: FilterPreset, grid) -> np.ndarray:
    """Sample the brick-wall response on a normalized frequency grid."""
    g = np.asarray(grid, dtype=float)
    name, c = preset.name, preset.cutoffs
    if name is PresetName.ALL_PASS:
        return np.ones_like(g)
    if name is PresetName.LOW_PASS:
        return (g < c[0]).astype(float)
    if name is PresetName.HIGH_PASS:
        return (g >= c[0]).astype(float)
    inside = (g >= c[0]) & (g < c[1])
    if name is PresetName.BAND_PASS:
        return inside.astype(float)
    return (~inside).astype(float)


def temporal_grid(num_steps: int) -> np.ndarray:
    """Normalized frequency of each DFT bin as a fraction of Nyquist."""
    k = np.arange(num_steps)
    if num_steps == 1:
        return np.zeros(1)
    return np.minimum(k, num_steps - k) / (num_steps / 2.0)


def temporal_preset_filter(preset: FilterPreset, num_steps: int) -> TemporalFilter:
    return TemporalFilter(preset_response(preset, temporal_grid(num_steps)))


def fit_chebyshev(target: Callable, order: int, lambda_max: float) -> ChebyshevFilter:
    """Chebyshev interpolant of ``target`` on ``[0, lambda_max]``.

    Uses the ``order + 1`` Chebyshev-Gauss nodes, so the returned filter
    reproduces ``target`` exactly (to rounding) at those nodes and any
    polynomial of degree <= ``order`` everywhere.
    """
    order = int(order)
    if order < 0:
        raise DomainError(f"filter order must be >= 0, got {order}")
    lambda_max = float(lambda_max)
    if not np.isfinite(lambda_max) or lambda_max <= 0:
        raise DomainError(f"lambda_max must be positive, got {lambda_max}")
    n = order + 1
    theta = np.pi * (np.arange(n) + 0.5) / n
    x = np.cos(theta)
    lam = (x + 1.0) * lambda_max / 2.0
    try:
        values = np.asarray(target(lam), dtype=float)
        if values.shape != lam.shape:
            raise ValueError
    except (TypeError, ValueError):
        values = np.array([float(target(v)) for v in lam])
    k = np.arange(n)
    coeffs = (2.0 / n) * np.cos(np.outer(k, theta)) @ values
    coeffs[0] /= 2.0
    return ChebyshevFilter(coeffs, lambda_max)


def vertex_preset_filter(preset: FilterPreset, order: int, lambda_max: float = 2.0) -> ChebyshevFilter:
    """Chebyshev fit of a vertex-domain preset (cutoffs relative to ``lambda_max``)."""
    return fit_chebyshev(lambda lam: preset_response(preset, lam / lambda_max), order, lambda_max)


def _operator(L):
    if isinstance(L, Laplacian):
        return L.matrix
    if sp.issparse(L):
        return sp.csr_array(L)
    return np.asarray(L, dtype=float)


def chebyshev_apply(L, f: ChebyshevFilter, X) -> np.ndarray:
    """``sum_k c_k T_k(L~) X`` with ``L~ = 2 L / lambda_max - I``.

    Only matrix-vector products with ``L`` are used: cost is
    ``O(order * (nnz(L) + N) * d)``.
    """
    if f.lambda_max <= 0:
        raise DomainError("lambda_max must be positive")
    M = _operator(L)
    X = np.asarray(X)
    if X.shape[0] != M.shape[0]:
        raise ShapeError(f"signal has {X.shape[0]} rows, Laplacian is {M.shape}")
    scale = 2.0 / f.lambda_max
    c = f.coeffs

    def shifted(V):
        return scale * (M @ V) - V

    t_prev = X
    out = c[0] * X
    if f.order == 0:
        return out
    t_curr = shifted(X)
    out = out + c[1] * t_curr
    for k in range(2, f.order + 1):
        t_prev, t_curr = t_curr, 2.0 * shifted(t_curr) - t_prev
        out = out + c[k] * t_curr
    return out


def estimate_lambda_max(L, tol: float = 1e-6, max_iter: int = 500, margin: float = 0.01) -> float:
    """Upper estimate of the largest Laplacian eigenvalue.

    Power iteration until the Rayleigh quotient changes by less than ``tol``
    (relative), inflated by ``margin``. Normalized Laplacians short-cut to
    the spectral bound 2. On non-convergence the trace is returned and a
    ``RuntimeWarning`` is emitted. Never returns less than ``1e-12``.
    """
    if isinstance(L, Laplacian) and L.kind is LaplacianKind.NORMALIZED:
        return 2.0
    M = _operator(L)
    n = M.shape[0]
    if n == 0:
        return LAMBDA_FLOOR
    x = np.random.default_rng(0).standard_normal(n)
    x /= np.linalg.norm(x)
    estimate = 0.0
    for _ in range(max_iter):
        y = M @ x
        rq = float(x @ y)
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return LAMBDA_FLOOR
        x = y / norm
        if abs(rq - estimate) <= tol * max(abs(rq), LAMBDA_FLOOR):
            return max(rq * (1.0 + margin), LAMBDA_FLOOR)
        estimate = rq
    bound = float(M.diagonal().sum())
    warnings.warn(
        "power iteration did not converge; falling back to the trace bound",
        RuntimeWarning,
        stacklevel=2,
    )
    return max(bound, LAMBDA_FLOOR)


def temporal_filter_apply(f: TemporalFilter, X) -> np.ndarray:
    """Filter a time-major ``T x d`` (or length-``T``) signal along axis 0.

    Real input with a conjugate-symmetric response gives real output;
    otherwise the complex result is returned.
    """
    X = np.asarray(X)
    if X.shape[0] != f.length:
        raise ShapeError(f"signal has {X.shape[0]} timesteps, filter has {f.length} bins")
    resp = f.response
    if resp.ndim == 2:
        if X.ndim != 2 or X.shape[1] != resp.shape[1]:
            raise ShapeError("multichannel response needs a T x d signal with matching d")
    else:
        resp = resp.reshape((-1,) + (1,) * (X.ndim - 1))
    out = np.fft.ifft(resp * np.fft.fft(X, axis=0, norm="ortho"), axis=0, norm="ortho")
    if np.isrealobj(X) and f.is_conjugate_symmetric():
        return out.real
    return out


def _step_filters(dg: DynamicGraph, vf: ChebyshevFilter, kind, per_step_lambda: bool):
    laps = snapshot_laplacians(dg, kind)
    if per_step_lambda:
        return laps, [vf.with_lambda_max(estimate_lambda_max(L)) for L in laps]
    return laps, [vf] * len(laps)


def joint_filter(dg: DynamicGraph, X, vf: ChebyshevFilter, tf: TemporalFilter,
                 kind: LaplacianKind | str = LaplacianKind.COMBINATORIAL, *,
                 order: str = "vertex_first", per_step_lambda: bool = True) -> np.ndarray:
    """Joint time-vertex filtering of an ``N x T`` (or ``N x T x d``) signal.

    ``vertex_first`` filters every column with its own snapshot's Chebyshev
    filter and then every node row with ``tf``. ``time_first`` applies the
    temporal kernel ``K[t, s]`` to the input first and only then the vertex
    filter of the *source* snapshot ``s``, summing over ``s``; both paths
    compute ``sum_s K[t, s] H_s X[:, s]`` and agree to rounding. Filtering
    the time-mixed signal with the *output* snapshot's filter instead is a
    different operator whenever the graph evolves.

    With ``per_step_lambda`` the spectrum rescaling uses an estimate of each
    snapshot's own largest eigenvalue, keeping ``L~`` inside ``[-1, 1]``.
    """
    kind = LaplacianKind.parse(kind)
    X = dg.check_signal(X)
    if X.ndim not in (2, 3):
        raise ShapeError(f"expected N x T or N x T x d signal, got {X.shape}")
    if tf.length != dg.num_steps:
        raise ShapeError(f"temporal filter has {tf.length} bins, graph has {dg.num_steps} steps")
    laps, vfs = _step_filters(dg, vf, kind, per_step_lambda)
    T = dg.num_steps

    if order == "vertex_first":
        Y = np.stack([chebyshev_apply(laps[t], vfs[t], X[:, t]) for t in range(T)], axis=1)
        return np.moveaxis(temporal_filter_apply(tf, np.moveaxis(Y, 1, 0)), 0, 1)
    if order != "time_first":
        raise DomainError(f"unknown order {order!r}")

    if tf.response.ndim != 1:
        raise ShapeError("time_first ordering needs a single-channel temporal response")
    K = tf.kernel()
    dtype = np.result_type(X.dtype, K.dtype, float)
    out = np.zeros(X.shape, dtype=dtype)
    for s in range(T):
        # column t of Z is K[t, s] * X[:, s]
        Z = np.einsum("t,n...->nt...", K[:, s], X[:, s])
        flat = Z.reshape(Z.shape[0], -1)
        out += chebyshev_apply(laps[s], vfs[s], flat).reshape(Z.shape)
    return out
