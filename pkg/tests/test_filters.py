import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from eft import (
    ChebyshevFilter,
    DomainError,
    FilterPreset,
    LaplacianKind,
    ShapeError,
    TemporalFilter,
    WeightedGraph,
    build_laplacian,
    chebyshev_apply,
    dirichlet_s2,
    estimate_lambda_max,
    fit_chebyshev,
    joint_filter,
    preset_response,
    temporal_filter_apply,
)
from eft.filters import temporal_grid, temporal_preset_filter, vertex_preset_filter
from eft.spectral import gft_basis
from eft.synth import gen_dynamic_mesh

from conftest import dynamic_graphs, evolving

PATH3 = [[0, 1, 0], [1, 0, 1], [0, 1, 0]]


def exact_filter(L, h, X):
    b = gft_basis(L)
    return b.vectors.T @ (h(b.eigenvalues)[:, None] * (b.vectors @ X))


def random_laplacian(n, seed, kind="comb"):
    return build_laplacian(evolving(n, 2, seed, p=0.5).snapshots[0], kind)


# ---------------------------------------------------------------- Chebyshev

def test_fit_constant():
    f = fit_chebyshev(lambda lam: np.ones_like(lam), 5, 3.0)
    np.testing.assert_allclose(f.coeffs, [1, 0, 0, 0, 0, 0], atol=1e-14)


def test_fit_identity_map():
    f = fit_chebyshev(lambda lam: lam, 4, 2.0)
    np.testing.assert_allclose(f.coeffs, [1, 1, 0, 0, 0], atol=1e-14)


def test_fit_step_reproduces_nodes():
    step = lambda lam: (lam < 1.0).astype(float)
    f = fit_chebyshev(step, 8, 2.0)
    n = 9
    nodes = (np.cos(np.pi * (np.arange(n) + 0.5) / n) + 1.0)
    np.testing.assert_allclose(f.response(nodes), step(nodes), atol=1e-10)
    grid = np.linspace(0, 2, 1000)
    assert np.isfinite(np.abs(f.response(grid) - step(grid)).max())


def test_fit_scalar_only_target():
    f = fit_chebyshev(lambda lam: float(lam) ** 2, 2, 2.0)
    np.testing.assert_allclose(f.response([0.0, 1.0, 2.0]), [0, 1, 4], atol=1e-12)


def test_fit_rejects_bad_order():
    with pytest.raises(DomainError):
        fit_chebyshev(np.cos, -1, 2.0)


def test_filter_validation():
    with pytest.raises(DomainError):
        ChebyshevFilter([1.0], 0.0)
    with pytest.raises(DomainError):
        ChebyshevFilter([], 1.0)
    assert ChebyshevFilter([1, 2, 3], 1.0).order == 2


def test_apply_identity_and_first_order():
    L = random_laplacian(6, 0)
    X = np.random.default_rng(0).standard_normal((6, 3))
    np.testing.assert_array_equal(chebyshev_apply(L, ChebyshevFilter([1.0], 4.0), X), X)
    expected = (2 * L.toarray() / 4.0 - np.eye(6)) @ X
    np.testing.assert_allclose(chebyshev_apply(L, ChebyshevFilter([0.0, 1.0], 4.0), X), expected, atol=1e-12)


def test_apply_shape_error():
    with pytest.raises(ShapeError):
        chebyshev_apply(random_laplacian(4, 0), ChebyshevFilter([1.0], 2.0), np.ones(5))


def test_lowpass_fit_close_to_exact_on_smooth_signals():
    L = random_laplacian(10, 5)
    lmax = estimate_lambda_max(L)
    ideal = lambda lam: (lam < 0.5 * lmax).astype(float)
    f = fit_chebyshev(ideal, 16, lmax)
    b = gft_basis(L)
    rng = np.random.default_rng(5)
    # smooth: spectral amplitudes decay with graph frequency
    X = b.vectors.T @ (np.exp(-3 * b.eigenvalues / lmax)[:, None] * rng.standard_normal((10, 4)))
    ref = exact_filter(L, ideal, X)
    err = np.linalg.norm(chebyshev_apply(L, f, X) - ref) / np.linalg.norm(ref)
    assert err <= 0.1


@given(st.integers(2, 12), st.integers(0, 2**31 - 1), st.integers(0, 10), st.sampled_from(list(LaplacianKind)))
def test_polynomial_targets_exact(n, seed, degree, kind):
    rng = np.random.default_rng(seed)
    L = random_laplacian(n, seed, kind)
    poly = np.polynomial.Polynomial(rng.standard_normal(degree + 1))
    lmax = estimate_lambda_max(L)
    f = fit_chebyshev(poly, degree, lmax)
    X = rng.standard_normal((n, 3))
    ref = exact_filter(L, poly, X)
    assert np.abs(chebyshev_apply(L, f, X) - ref).max() <= 1e-8 * max(1.0, np.abs(ref).max())


# --------------------------------------------------------------- lambda max

def test_lambda_max_normalized_bound():
    L = build_laplacian(WeightedGraph(PATH3), "norm")
    assert 0 < estimate_lambda_max(L) <= 2.02


def test_lambda_max_zero_floor():
    assert estimate_lambda_max(np.zeros((3, 3))) == 1e-12


def test_lambda_max_path():
    assert estimate_lambda_max(build_laplacian(WeightedGraph(PATH3))) == pytest.approx(3.0, rel=0.01)


def test_lambda_max_nonconvergence_warns():
    L = build_laplacian(WeightedGraph(PATH3))
    with pytest.warns(RuntimeWarning):
        assert estimate_lambda_max(L, tol=1e-15, max_iter=2) == pytest.approx(4.0)


@given(st.integers(2, 15), st.integers(0, 2**31 - 1))
def test_lambda_max_is_upper_estimate(n, seed):
    L = random_laplacian(n, seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        est = estimate_lambda_max(L)
    true = np.linalg.eigvalsh(L.toarray()).max()
    assert est >= true * (1 - 1e-5)


# ----------------------------------------------------------------- temporal

def test_temporal_all_pass():
    X = np.random.default_rng(1).standard_normal((8, 3))
    np.testing.assert_allclose(temporal_filter_apply(TemporalFilter(np.ones(8)), X), X, atol=1e-12)


def test_temporal_dc_only_gives_mean():
    X = np.random.default_rng(2).standard_normal((6, 2))
    F = np.zeros(6)
    F[0] = 1
    out = temporal_filter_apply(TemporalFilter(F), X)
    np.testing.assert_allclose(out, np.broadcast_to(X.mean(axis=0), X.shape), atol=1e-12)


def test_temporal_lowpass_kills_high_bin():
    T = 16
    t = np.arange(T)
    X = np.cos(2 * np.pi * 6 * t / T)[:, None]
    tf = temporal_preset_filter(FilterPreset("lowpass", (0.5,)), T)
    assert tf.is_conjugate_symmetric()
    out = temporal_filter_apply(tf, X)
    assert np.sum(out**2) <= 1e-10


def test_temporal_asymmetric_response_is_complex():
    tf = TemporalFilter(np.array([1, 1, 0, 0.0]))
    out = temporal_filter_apply(tf, np.ones((4, 1)))
    assert np.iscomplexobj(out)


def test_temporal_multichannel_response():
    R = np.ones((4, 2))
    R[:, 1] = [1, 0, 0, 0]
    X = np.arange(8.0).reshape(4, 2)
    out = temporal_filter_apply(TemporalFilter(R), X)
    np.testing.assert_allclose(out[:, 0], X[:, 0], atol=1e-12)
    np.testing.assert_allclose(out[:, 1], X[:, 1].mean(), atol=1e-12)


def test_temporal_shape_error():
    with pytest.raises(ShapeError):
        temporal_filter_apply(TemporalFilter(np.ones(4)), np.ones((5, 2)))


@given(st.integers(1, 20), st.integers(0, 2**31 - 1))
def test_real_in_real_out(T, seed):
    rng = np.random.default_rng(seed)
    half = rng.standard_normal(T) + 1j * rng.standard_normal(T)
    F = 0.5 * (half + np.conj(half[(-np.arange(T)) % T]))
    out = np.fft.ifft(F[:, None] * np.fft.fft(rng.standard_normal((T, 2)), axis=0), axis=0)
    assert np.abs(out.imag).max() <= 1e-10
    assert np.isrealobj(temporal_filter_apply(TemporalFilter(F), rng.standard_normal((T, 2))))


# ------------------------------------------------------------------ presets

def test_preset_examples():
    assert np.all(preset_response(FilterPreset("allpass"), np.linspace(0, 1, 7)) == 1)
    np.testing.assert_array_equal(preset_response(FilterPreset("lowpass", 0.5), [0, 0.4, 0.6, 1]), [1, 1, 0, 0])
    grid = np.arange(8) / 8
    np.testing.assert_array_equal(preset_response(FilterPreset("bandstop", (0.25, 0.75)), grid),
                                  [1, 1, 0, 0, 0, 0, 1, 1])
    np.testing.assert_array_equal(preset_response(FilterPreset("bandpass", (0.25, 0.75)), grid),
                                  [0, 0, 1, 1, 1, 1, 0, 0])
    np.testing.assert_array_equal(preset_response(FilterPreset("high_pass", 0.5), grid),
                                  [0, 0, 0, 0, 1, 1, 1, 1])


@pytest.mark.parametrize("name, cutoffs", [
    ("lowpass", ()), ("lowpass", (0.0,)), ("bandpass", (0.6, 0.4)), ("highpass", (1.2,)), ("notch", (0.5,)),
])
def test_preset_validation(name, cutoffs):
    with pytest.raises(DomainError):
        FilterPreset(name, cutoffs)


def test_temporal_grid():
    np.testing.assert_allclose(temporal_grid(8), [0, 0.25, 0.5, 0.75, 1, 0.75, 0.5, 0.25])
    np.testing.assert_allclose(temporal_grid(1), [0])


# -------------------------------------------------------------------- joint

def _lowpass_pair(T, order=10):
    return (vertex_preset_filter(FilterPreset("lowpass", (0.5,)), order),
            temporal_preset_filter(FilterPreset("lowpass", (0.5,)), T))


def test_joint_identity(two_node_graph):
    X = np.array([[1.0, 2.0], [3.0, -1.0]])
    out = joint_filter(two_node_graph, X, ChebyshevFilter([1.0], 2.0), TemporalFilter(np.ones(2)))
    np.testing.assert_allclose(out, X, atol=1e-12)


@given(dynamic_graphs(max_n=10, max_t=8, min_n=2), st.integers(0, 2**31 - 1), st.sampled_from(list(LaplacianKind)))
def test_joint_order_swap(dg, seed, kind):
    X = np.random.default_rng(seed).standard_normal(dg.shape)
    vf, tf = _lowpass_pair(dg.num_steps)
    a = joint_filter(dg, X, vf, tf, kind, order="vertex_first")
    b = joint_filter(dg, X, vf, tf, kind, order="time_first")
    assert np.abs(a - b).max() <= 1e-10


@given(dynamic_graphs(max_n=8, max_t=6, min_n=2), st.integers(0, 2**31 - 1),
       st.floats(-3, 3), st.floats(-3, 3))
def test_joint_linearity(dg, seed, a, b):
    rng = np.random.default_rng(seed)
    X, Y = rng.standard_normal(dg.shape), rng.standard_normal(dg.shape)
    vf, tf = _lowpass_pair(dg.num_steps)
    lhs = joint_filter(dg, a * X + b * Y, vf, tf)
    rhs = a * joint_filter(dg, X, vf, tf) + b * joint_filter(dg, Y, vf, tf)
    assert np.abs(lhs - rhs).max() <= 1e-9 * max(1.0, np.abs(lhs).max())


@given(dynamic_graphs(max_n=8, max_t=6, min_n=2), st.integers(0, 2**31 - 1))
def test_joint_energy_non_expansion(dg, seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal(dg.shape)
    tf = TemporalFilter(rng.uniform(-1, 1, dg.num_steps))
    vf = ChebyshevFilter([0.0, 0.0, 1.0], 2.0)  # T_2, bounded by 1 on [-1, 1]
    out = joint_filter(dg, X, vf, tf)
    assert np.linalg.norm(out) <= np.linalg.norm(X) + 1e-8


def test_joint_multichannel_matches_per_channel():
    dg = evolving(6, 5, seed=9)
    X = np.random.default_rng(9).standard_normal((6, 5, 3))
    vf, tf = _lowpass_pair(5)
    out = joint_filter(dg, X, vf, tf, order="time_first")
    for c in range(3):
        np.testing.assert_allclose(out[..., c], joint_filter(dg, X[..., c], vf, tf), atol=1e-10)


def test_joint_shape_errors(two_node_graph):
    vf, tf = _lowpass_pair(3)
    with pytest.raises(ShapeError):
        joint_filter(two_node_graph, np.ones((2, 2)), vf, tf)
    with pytest.raises(ShapeError):
        joint_filter(two_node_graph, np.ones((3, 2)), vf, TemporalFilter(np.ones(2)))


def test_mesh_lowpass_reduces_variation():
    dg, P = gen_dynamic_mesh(16, 8)
    noisy = P[..., 2] + np.random.default_rng(0).normal(0, 0.05, P.shape[:2])
    vf = vertex_preset_filter(FilterPreset("lowpass", (0.3,)), 12, 8.0)
    tf = temporal_preset_filter(FilterPreset("lowpass", (0.3,)), 16)
    out = joint_filter(dg, noisy, vf, tf)
    assert dirichlet_s2(dg, out) < dirichlet_s2(dg, noisy)
    assert np.linalg.norm(out - P[..., 2]) < np.linalg.norm(noisy - P[..., 2])
