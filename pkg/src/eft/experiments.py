"""Denoising, compaction, bound-probe and scaling experiments with CSV/JSON reports."""

from __future__ import annotations

import csv
import dataclasses
import datetime as _dt
import enum
import json
import logging
import os
import platform
import subprocess
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from . import filters, spectral
from .errors import DomainError, SizeGuardError
from .graph_core import (
    DynamicGraph,
    LaplacianKind,
    build_joint_laplacian,
    build_laplacian,
    build_time_ring_laplacian,
    dirichlet_s2,
    snapshot_laplacians,
)
from .spectral import DEFAULT_MAX_DENSE
from .synth import SynthConfig, gen_dynamic_mesh, gen_evolving_graph, gen_signal

log = logging.getLogger(__name__)

OMEGA_MAX = 2.0 * np.pi

# Dense enough that N=8 skeletons are connected: a disconnected snapshot has a
# repeated zero eigenvalue and its tracked eigenvectors jump between steps.
BOUND_CONFIG = SynthConfig(n=8, t=8, perturb_scale=0.05, edge_prob=0.6)


class Method(str, enum.Enum):
    EFT = "EFT"
    AD = "AD"
    DFT_ONLY = "DFTOnly"
    GFT_ONLY = "GFTOnly"

    @classmethod
    def parse(cls, value) -> "Method":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        for m in cls:
            if m.value.lower() == key:
                return m
        raise DomainError(f"unknown method {value!r}")


ALL_METHODS = tuple(Method)


def _methods(methods) -> tuple[Method, ...]:
    return tuple(Method.parse(m) for m in (ALL_METHODS if methods is None else methods))


@dataclass(frozen=True)
class Codec:
    """Forward/inverse pair for one method on one dynamic graph."""

    forward: Callable[[np.ndarray], np.ndarray]
    inverse: Callable[[np.ndarray], np.ndarray]


def make_codec(method, dg: DynamicGraph, kind=LaplacianKind.COMBINATORIAL, *,
               bases=None, force_dense: bool = False) -> Codec:
    """Unitary analysis/synthesis operators for ``method``.

    Signals may be ``N x T`` or ``N x T x d``; coefficients have the same
    shape. Raises ``SizeGuardError`` for AD above the dense size guard.
    """
    method = Method.parse(method)
    kind = LaplacianKind.parse(kind)
    N, T = dg.shape
    if method is Method.DFT_ONLY:
        return Codec(lambda X: np.fft.fft(X, axis=1, norm="ortho"),
                     lambda C: np.fft.ifft(C, axis=1, norm="ortho"))
    if method is Method.AD:
        A = spectral.ad_basis(build_joint_laplacian(dg, kind), force=force_dense).vectors

        def fwd(X):
            X = np.asarray(X)
            flat = X.reshape(N * T, -1, order="F")
            return (A @ flat).reshape(X.shape, order="F")

        def inv(C):
            C = np.asarray(C)
            flat = C.reshape(N * T, -1, order="F")
            return (A.T @ flat).reshape(C.shape, order="F")

        return Codec(fwd, inv)
    b = bases if bases is not None else spectral.dynamic_gft(dg, kind)
    if method is Method.GFT_ONLY:
        return Codec(lambda X: spectral.graph_transform(dg, X, kind, b),
                     lambda C: spectral.inverse_graph_transform(dg, C, kind, b))
    return Codec(lambda X: spectral.eft_forward(dg, X, kind, b).values,
                 lambda C: spectral.eft_inverse(dg, C, kind, b))


def _order(C: np.ndarray) -> np.ndarray:
    return np.argsort(-np.abs(C).ravel(), kind="stable")


def keep_top(C, fraction: float) -> np.ndarray:
    """Zero everything except the ``ceil(fraction * size)`` largest magnitudes."""
    fraction = float(fraction)
    if not 0.0 < fraction <= 1.0:
        raise DomainError(f"keep fraction must lie in (0, 1], got {fraction}")
    C = np.asarray(C)
    count = int(np.ceil(fraction * C.size - 1e-9))
    mask = np.zeros(C.size, dtype=bool)
    mask[_order(C)[:count]] = True
    return np.where(mask.reshape(C.shape), C, 0)


def remove_lowest(C, percentile: float) -> np.ndarray:
    """Zero the ``floor(percentile / 100 * size)`` smallest magnitudes."""
    percentile = float(percentile)
    if not 0.0 <= percentile <= 100.0:
        raise DomainError(f"percentile must lie in [0, 100], got {percentile}")
    C = np.asarray(C)
    count = int(np.floor(percentile / 100.0 * C.size + 1e-9))
    mask = np.ones(C.size, dtype=bool)
    if count:
        mask[_order(C)[C.size - count:]] = False
    return np.where(mask.reshape(C.shape), C, 0)


def _rel(err, ref) -> float:
    den = np.linalg.norm(ref)
    return float(np.linalg.norm(err) / den) if den > 0 else float(np.linalg.norm(err))


def _ad_fits(dg: DynamicGraph, force_dense: bool) -> bool:
    return force_dense or dg.num_nodes * dg.num_steps <= DEFAULT_MAX_DENSE


# ----------------------------------------------------------------- denoising


@dataclass(frozen=True)
class DenoiseReport:
    method: str
    keep_fraction: float
    error: float
    seed: int
    config: dict = field(repr=False, compare=False)
    skipped: bool = False


def run_denoise(cfg: SynthConfig, methods=None, keep_fractions: Sequence[float] = (0.1,),
                seeds: Iterable[int] = (0,), *, force_dense: bool = False) -> list[DenoiseReport]:
    """Top-magnitude thresholding of the noisy signal in each method's basis.

    The reconstruction's real part is compared with the clean signal. AD
    cells above the dense size guard are reported as skipped.
    """
    methods = _methods(methods)
    fracs = [float(f) for f in keep_fractions]
    for f in fracs:
        if not 0.0 < f <= 1.0:
            raise DomainError(f"keep fraction must lie in (0, 1], got {f}")
    kind = LaplacianKind.parse(cfg.kind)
    out = []
    for seed in seeds:
        c = cfg.replace(seed=int(seed))
        echo = c.to_dict()
        dg = gen_evolving_graph(c)
        clean, noisy = gen_signal(dg, c)
        bases = spectral.dynamic_gft(dg, kind)
        for m in methods:
            if m is Method.AD and not _ad_fits(dg, force_dense):
                out.extend(DenoiseReport(m.value, f, float("nan"), c.seed, echo, True) for f in fracs)
                continue
            codec = make_codec(m, dg, kind, bases=bases, force_dense=force_dense)
            C = codec.forward(noisy)
            for f in fracs:
                rec = np.real(codec.inverse(keep_top(C, f)))
                out.append(DenoiseReport(m.value, f, _rel(rec - clean, clean), c.seed, echo))
    return out


def median_table(reports, key: str) -> dict[tuple[str, float], float]:
    """Median error per ``(method, key)`` cell, ignoring skipped rows."""
    cells: dict[tuple[str, float], list[float]] = {}
    for r in reports:
        if getattr(r, "skipped", False):
            continue
        cells.setdefault((r.method, getattr(r, key)), []).append(r.error)
    return {k: float(np.median(v)) for k, v in cells.items()}


# ---------------------------------------------------------------- compaction


@dataclass(frozen=True)
class CompactionReport:
    method: str
    percentile_removed: float
    error: float
    seed: int | None = None
    skipped: bool = False


def run_compaction(dg: DynamicGraph, X, methods=None, percentiles: Sequence[float] = (50, 80, 95),
                   kind=LaplacianKind.COMBINATORIAL, *, seed: int | None = None,
                   force_dense: bool = False) -> list[CompactionReport]:
    """Relative error ``||X - X_r|| / ||X||`` after dropping the weakest coefficients.

    Coefficients of every channel are ranked together. The error is measured
    on the (possibly complex) reconstruction, so for these unitary transforms
    it is exactly the relative norm of the dropped coefficients.
    """
    X = dg.check_signal(X)
    kind = LaplacianKind.parse(kind)
    pcts = [float(p) for p in percentiles]
    for p in pcts:
        if not 0.0 <= p <= 100.0:
            raise DomainError(f"percentile must lie in [0, 100], got {p}")
    bases = spectral.dynamic_gft(dg, kind)
    out = []
    for m in _methods(methods):
        if m is Method.AD and not _ad_fits(dg, force_dense):
            out.extend(CompactionReport(m.value, p, float("nan"), seed, True) for p in pcts)
            continue
        codec = make_codec(m, dg, kind, bases=bases, force_dense=force_dense)
        C = codec.forward(X)
        for p in pcts:
            rec = codec.inverse(remove_lowest(C, p))
            out.append(CompactionReport(m.value, p, _rel(X - rec, X), seed))
    return out


def run_mesh_compaction(resolution: int = 8, frames: int = 16, seeds: Iterable[int] = range(20),
                        methods=None, percentiles: Sequence[float] = (50, 80, 95),
                        kind=LaplacianKind.COMBINATORIAL) -> list[CompactionReport]:
    """Compaction on seeded synthetic mesh trajectories."""
    out = []
    for s in seeds:
        dg, X = gen_dynamic_mesh(frames, resolution, seed=int(s))
        out.extend(run_compaction(dg, X, methods, percentiles, kind, seed=int(s)))
    return out


# --------------------------------------------------------------- bound probe


@dataclass(frozen=True)
class BoundReport:
    perturb_scale: float
    seed: int | None
    diff_norm: float
    lipschitz: float
    delta_max: float
    min_gap_g: float
    min_gap_j: float
    residual_max: float
    bound_value: float
    omega_max: float = OMEGA_MAX


def _min_gap(eigs) -> float:
    e = np.sort(np.asarray(eigs).ravel())
    return float(np.min(np.diff(e))) if e.size > 1 else float("inf")


def bound_report(dg: DynamicGraph, kind=LaplacianKind.COMBINATORIAL, *, perturb_scale: float = float("nan"),
                 seed: int | None = None, force_dense: bool = False) -> BoundReport:
    """Perturbation-bound quantities for one dynamic graph.

    ``lipschitz`` is the largest Frobenius norm of consecutive snapshot
    Laplacian differences, ``delta_max`` the largest entry of any such
    difference, and ``bound_value = delta_max * N * T**2``.
    """
    kind = LaplacianKind.parse(kind)
    N, T = dg.shape
    laps = [L.toarray() for L in snapshot_laplacians(dg, kind)]
    diffs = [laps[t + 1] - laps[t] for t in range(T - 1)]
    lipschitz = max((float(np.linalg.norm(d)) for d in diffs), default=0.0)
    delta = max((float(np.abs(d).max()) for d in diffs), default=0.0)
    bases = spectral.dynamic_gft(dg, kind)
    J = build_joint_laplacian(dg, kind)
    ad = spectral.ad_basis(J, force=force_dense)
    D = spectral.eft_matrix(dg, kind, force=force_dense, bases=bases)
    al = spectral.align_bases(D, ad.vectors, spectral.eft_row_frequencies(dg, kind, bases), ad.eigenvalues)
    residual = 0.0
    for l in range(N):
        for k in range(T):
            residual = max(residual, spectral.pseudospectrum_residual(dg, k, l, kind, bases=bases, joint=J))
    return BoundReport(
        perturb_scale=float(perturb_scale),
        seed=seed,
        diff_norm=al.diff_norm,
        lipschitz=lipschitz,
        delta_max=delta,
        min_gap_g=min(_min_gap(e) for e in bases.eigenvalues),
        min_gap_j=_min_gap(ad.eigenvalues),
        residual_max=residual,
        bound_value=delta * N * T**2,
    )


def run_bound_probe(base_cfg: SynthConfig, scales: Sequence[float] = (0, 0.25, 0.5, 1.0),
                    seeds: Iterable[int] = (0,), *, force_dense: bool = False) -> list[BoundReport]:
    """Bound quantities on graphs perturbed at ``s * base_cfg.perturb_scale``."""
    scales = [float(s) for s in scales]
    if any(s < 0 or not np.isfinite(s) for s in scales):
        raise DomainError("scales must be finite and >= 0")
    if base_cfg.n * base_cfg.t > DEFAULT_MAX_DENSE and not force_dense:
        raise SizeGuardError(
            f"N*T = {base_cfg.n * base_cfg.t} exceeds the dense size guard of {DEFAULT_MAX_DENSE}"
        )
    out = []
    for seed in seeds:
        for s in scales:
            c = base_cfg.replace(seed=int(seed), perturb_scale=s * base_cfg.perturb_scale)
            dg = gen_evolving_graph(c)
            out.append(bound_report(dg, c.kind, perturb_scale=s, seed=int(seed), force_dense=force_dense))
    return out


# ----------------------------------------------------------------- benchmark


@dataclass(frozen=True)
class BenchRow:
    method: str
    n: int
    t: int
    seconds: float
    skipped: bool = False


@dataclass(frozen=True)
class BenchTable:
    rows: tuple[BenchRow, ...]
    slopes: dict

    def seconds(self, method: str, n: int, t: int) -> float:
        for r in self.rows:
            if (r.method, r.n, r.t) == (method, n, t):
                return r.seconds
        raise KeyError((method, n, t))


def _time(fn, repeats: int, min_total: float = 0.5) -> float:
    """Median of at least ``repeats`` runs, sampling on until ``min_total`` seconds elapsed."""
    fn()  # warm-up: first calls pay for allocation and BLAS initialization
    samples = []
    while len(samples) < repeats or sum(samples) < min_total:
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return float(np.median(samples))


def _slope(ts, secs) -> float:
    ok = [(t, s) for t, s in zip(ts, secs) if np.isfinite(s) and s > 0]
    if len(ok) < 2:
        return float("nan")
    x, y = np.log([t for t, _ in ok]), np.log([s for _, s in ok])
    return float(np.polyfit(x, y, 1)[0])


def run_scaling_bench(n_grid: Sequence[int] = (16,), t_grid: Sequence[int] = (16, 32, 64, 128),
                      repeats: int = 3, *, seed: int = 0, max_ad: int = DEFAULT_MAX_DENSE,
                      threads: int | None = 1) -> BenchTable:
    """Median wall-clock of ``eft_forward`` and ``ad_basis`` over an ``(N, T)`` grid.

    ``eft_forward`` is timed from the raw dynamic graph, so its snapshot
    EVDs are included; ``ad_basis`` is timed on a prebuilt joint Laplacian,
    which is its input. BLAS is pinned to
    ``threads`` threads so that the fitted exponents reflect operation
    counts. Returns the rows and, per ``N``, the log-log slope in ``T``.
    """
    rows = []
    with threadpool_limits(limits=threads):
        for n in n_grid:
            for t in t_grid:
                cfg = SynthConfig(n=int(n), t=int(t), seed=seed)
                dg = gen_evolving_graph(cfg)
                X = np.random.default_rng(seed).standard_normal((n, t))
                rows.append(BenchRow("eft_forward", n, t, _time(lambda: spectral.eft_forward(dg, X), repeats)))
                if n * t > max_ad:
                    rows.append(BenchRow("ad_basis", n, t, float("nan"), True))
                    continue
                J = build_joint_laplacian(dg)
                rows.append(BenchRow("ad_basis", n, t, _time(
                    lambda: spectral.ad_basis(J, max_size=max_ad), repeats)))
                log.info("bench N=%d T=%d done", n, t)
    slopes = {}
    for method in ("eft_forward", "ad_basis"):
        slopes[method] = {}
        for n in n_grid:
            sel = [r for r in rows if r.method == method and r.n == n]
            slopes[method][int(n)] = _slope([r.t for r in sel], [r.seconds for r in sel])
    return BenchTable(tuple(rows), slopes)


# ------------------------------------------------------------ property suite


@dataclass(frozen=True)
class CheckResult:
    passed: bool
    detail: str = ""


def _random_dg(rng, n=None, t=None, kind="comb") -> DynamicGraph:
    n = int(rng.integers(2, 9)) if n is None else n
    t = int(rng.integers(2, 7)) if t is None else t
    cfg = SynthConfig(n=n, t=t, perturb_scale=float(rng.uniform(0, 0.3)),
                      edge_prob=0.5, seed=int(rng.integers(2**31)), kind=kind)
    return gen_evolving_graph(cfg)


def _check(cond: bool, what: str) -> CheckResult:
    return CheckResult(bool(cond), "" if cond else what)


def run_property_suite(seed: int = 0, *, instances: int = 5,
                       inverse: Callable | None = None) -> dict[str, CheckResult]:
    """Run every library invariant on randomized instances.

    ``inverse`` replaces ``eft_inverse`` in the round-trip check, which lets
    callers verify that the suite catches a broken inverse. A failing check
    carries a description of its counterexample.
    """
    inv = spectral.eft_inverse if inverse is None else inverse
    rng = np.random.default_rng(seed)
    checks: dict[str, Callable[[DynamicGraph, LaplacianKind, np.ndarray], CheckResult]] = {}

    def check(name):
        def deco(fn):
            checks[name] = fn
            return fn
        return deco

    @check("laplacian_psd")
    def _(dg, kind, X):
        for t, L in enumerate(snapshot_laplacians(dg, kind)):
            M = L.toarray()
            if not np.allclose(M, M.T, atol=1e-12) or np.linalg.eigvalsh(M).min() < -1e-9:
                return CheckResult(False, f"snapshot {t}: {M.tolist()}")
            if kind is LaplacianKind.COMBINATORIAL and np.abs(M.sum(axis=1)).max() > 1e-10:
                return CheckResult(False, f"snapshot {t} row sums {M.sum(axis=1).tolist()}")
            if kind is LaplacianKind.NORMALIZED and M.diagonal().max() > 1 + 1e-10:
                return CheckResult(False, f"snapshot {t} diagonal {M.diagonal().tolist()}")
        return CheckResult(True)

    @check("ring_laplacian")
    def _(dg, kind, X):
        R = build_time_ring_laplacian(dg.num_steps).matrix
        ok = np.allclose(R.sum(axis=1), 0) and np.allclose(R, np.roll(np.roll(R, 1, 0), 1, 1))
        return _check(ok, f"T={dg.num_steps}: {R.tolist()}")

    @check("joint_structure")
    def _(dg, kind, X):
        J = build_joint_laplacian(dg, kind).toarray()
        N, T = dg.shape
        ref = np.kron(build_time_ring_laplacian(T).matrix, np.eye(N))
        for t, L in enumerate(snapshot_laplacians(dg, kind)):
            ref[t * N:(t + 1) * N, t * N:(t + 1) * N] += L.toarray()
        ok = np.array_equal(J, ref) and np.linalg.eigvalsh(J).min() >= -1e-8
        return _check(ok, f"N={N} T={T} max diff {np.abs(J - ref).max():.3g}")

    @check("dirichlet_quadratic_form")
    def _(dg, kind, X):
        J = build_joint_laplacian(dg, LaplacianKind.COMBINATORIAL).matrix
        x = X.reshape(-1, order="F")
        q, s2 = float(x @ (J @ x)), dirichlet_s2(dg, X)
        return _check(abs(q - s2) <= 1e-8 * max(1.0, abs(q)), f"x'Lx={q!r} S2={s2!r}")

    @check("round_trip")
    def _(dg, kind, X):
        C = spectral.eft_forward(dg, X, kind)
        err = float(np.abs(inv(dg, C, kind) - X).max())
        return _check(err <= 1e-9, f"N,T={dg.shape} max |X - inv(fwd(X))| = {err:.3g}")

    @check("parseval")
    def _(dg, kind, X):
        C = spectral.eft_forward(dg, X, kind).values
        a, b = np.linalg.norm(C), np.linalg.norm(X)
        return _check(abs(a - b) <= 1e-8 * max(1.0, b), f"||C||={a!r} ||X||={b!r}")

    @check("order_invariance")
    def _(dg, kind, X):
        a = spectral.eft_forward(dg, X, kind).values
        b = spectral.eft_forward_time_first(dg, X, kind).values
        err = float(np.abs(a - b).max())
        return _check(err <= 1e-10, f"max diff {err:.3g}")

    @check("eft_matrix_unitary")
    def _(dg, kind, X):
        D = spectral.eft_matrix(dg, kind)
        err = float(np.abs(D @ D.conj().T - np.eye(D.shape[0])).max())
        return _check(err <= 1e-10, f"||D D* - I||_max = {err:.3g}")

    @check("static_case_spectrum")
    def _(dg, kind, X):
        static = DynamicGraph.static(dg.snapshots[0], dg.num_steps)
        lam = np.linalg.eigvalsh(build_laplacian(static.snapshots[0], kind).toarray())
        mu = spectral.ring_eigenvalues(static.num_steps)
        pred = np.sort((mu[:, None] + lam[None, :]).ravel())
        got = np.linalg.eigvalsh(build_joint_laplacian(static, kind).toarray())
        err = float(np.abs(pred - got).max())
        return _check(err <= 1e-8, f"max eigenvalue mismatch {err:.3g}")

    @check("chebyshev_polynomial_exact")
    def _(dg, kind, X):
        L = snapshot_laplacians(dg, kind)[0]
        coeffs = rng.standard_normal(4)
        lmax = filters.estimate_lambda_max(L)
        f = filters.ChebyshevFilter(coeffs, lmax)
        b = spectral.gft_basis(L)
        exact = b.vectors.T @ (f.response(b.eigenvalues)[:, None] * (b.vectors @ X))
        err = float(np.abs(filters.chebyshev_apply(L, f, X) - exact).max())
        return _check(err <= 1e-8, f"coeffs={coeffs.tolist()} max diff {err:.3g}")

    def _some_filters(T):
        vf = filters.vertex_preset_filter(filters.FilterPreset("lowpass", (0.5,)), 8)
        tf = filters.temporal_preset_filter(filters.FilterPreset("lowpass", (0.5,)), T)
        return vf, tf

    @check("joint_filter_order_swap")
    def _(dg, kind, X):
        vf, tf = _some_filters(dg.num_steps)
        a = filters.joint_filter(dg, X, vf, tf, kind, order="vertex_first")
        b = filters.joint_filter(dg, X, vf, tf, kind, order="time_first")
        err = float(np.abs(a - b).max())
        return _check(err <= 1e-10, f"max diff {err:.3g}")

    @check("joint_filter_linearity")
    def _(dg, kind, X):
        vf, tf = _some_filters(dg.num_steps)
        Y = rng.standard_normal(X.shape)
        a, b = 1.7, -0.3
        lhs = filters.joint_filter(dg, a * X + b * Y, vf, tf, kind)
        rhs = a * filters.joint_filter(dg, X, vf, tf, kind) + b * filters.joint_filter(dg, Y, vf, tf, kind)
        err = float(np.abs(lhs - rhs).max())
        return _check(err <= 1e-9, f"max diff {err:.3g}")

    @check("real_in_real_out")
    def _(dg, kind, X):
        _, tf = _some_filters(dg.num_steps)
        out = filters.temporal_filter_apply(tf, X.T)
        return _check(np.isrealobj(out), "complex output from a conjugate-symmetric response")

    @check("energy_non_expansion")
    def _(dg, kind, X):
        T = dg.num_steps
        tf = filters.TemporalFilter(rng.uniform(0, 1, T) * (rng.integers(0, 2, T) * 2 - 1))
        vf = filters.ChebyshevFilter([0.5, 0.5], 1.0)  # (1 + x) / 2, inside [0, 1] on [-1, 1]
        out = filters.joint_filter(dg, X, vf, tf, kind)
        a, b = np.linalg.norm(out), np.linalg.norm(X)
        return _check(a <= b + 1e-8, f"||out||={a!r} > ||X||={b!r}")

    @check("compaction_monotone")
    def _(dg, kind, X):
        reps = run_compaction(dg, X, (Method.EFT, Method.DFT_ONLY, Method.GFT_ONLY),
                              (0, 25, 50, 75, 100), kind)
        for m in ("EFT", "DFTOnly", "GFTOnly"):
            errs = [r.error for r in reps if r.method == m]
            if np.any(np.diff(errs) < -1e-9) or errs[0] > 1e-9 or abs(errs[-1] - 1) > 1e-9:
                return CheckResult(False, f"{m}: {errs}")
        return CheckResult(True)

    @check("synth_determinism")
    def _(dg, kind, X):
        cfg = SynthConfig(n=dg.num_nodes, t=dg.num_steps, seed=int(rng.integers(2**31)), kind=kind.value)
        g1, g2 = gen_evolving_graph(cfg), gen_evolving_graph(cfg)
        s1, s2 = gen_signal(g1, cfg), gen_signal(g2, cfg)
        ok = g1 == g2 and all(np.array_equal(a, b) for a, b in zip(s1, s2))
        return _check(ok, f"config {cfg.to_dict()}")

    results = {}
    cases = []
    for _ in range(instances):
        for kind in LaplacianKind:
            dg = _random_dg(rng, kind=kind.value)
            cases.append((dg, kind, rng.standard_normal(dg.shape)))
    for name, fn in checks.items():
        verdict = CheckResult(True)
        for dg, kind, X in cases:
            try:
                verdict = fn(dg, kind, X)
            except Exception as exc:  # failures are data here
                verdict = CheckResult(False, f"{type(exc).__name__}: {exc}")
            if not verdict.passed:
                verdict = CheckResult(False, f"kind={kind.value} N={dg.num_nodes} T={dg.num_steps}: {verdict.detail}")
                break
        results[name] = verdict
    return results


# ------------------------------------------------------------------- reports


def git_describe() -> str:
    try:
        res = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"],
                             cwd=Path(__file__).resolve().parent, capture_output=True,
                             text=True, timeout=5)
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return res.stdout.strip() or "unknown"


def hardware_note() -> str:
    return (f"{platform.system()} {platform.machine()}, {os.cpu_count()} cpu(s), "
            f"python {platform.python_version()}, numpy {np.__version__}")


def _jsonable(v):
    if isinstance(v, enum.Enum):
        return v.value
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, float) and not np.isfinite(v):
        return None
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def report_paths(experiment: str, out: str | os.PathLike | None = None,
                 out_dir: str | os.PathLike = ".") -> tuple[Path, Path]:
    """CSV and JSON paths; without ``out`` the name carries a UTC timestamp."""
    if out is not None:
        csv_path = Path(out)
    else:
        stamp = _dt.datetime.now(_dt.timezone.utc).strftime("%Y%m%dT%H%M%SZ")
        csv_path = Path(out_dir) / f"{experiment}_{stamp}.csv"
    return csv_path, csv_path.with_suffix(".json")


def write_report(experiment: str, rows: Sequence, config: dict, summary: dict | None = None, *,
                 out: str | os.PathLike | None = None,
                 out_dir: str | os.PathLike = ".") -> tuple[Path, Path]:
    """Write one CSV row per dataclass in ``rows`` plus a JSON summary."""
    csv_path, json_path = report_paths(experiment, out, out_dir)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    dicts = [{k: v for k, v in dataclasses.asdict(r).items() if k != "config"} for r in rows]
    fields = list(dicts[0]) if dicts else []
    with open(csv_path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        for d in dicts:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in d.items()})
    doc = {
        "experiment": experiment,
        "config": _jsonable(config),
        "summary": _jsonable(summary or {}),
        "rows": len(dicts),
        "git_describe": git_describe(),
        "hardware": hardware_note(),
    }
    json_path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return csv_path, json_path
