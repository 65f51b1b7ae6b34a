import numpy as np
import pytest
from hypothesis import given, strategies as st

from eft import DomainError, build_laplacian, dirichlet_s2
from eft.synth import (
    SynthConfig,
    continuous_eigenvectors,
    gen_dynamic_mesh,
    gen_evolving_graph,
    gen_signal,
    grid_graph,
)


def small(**kw):
    base = dict(n=10, t=12, edge_prob=0.5)
    base.update(kw)
    return SynthConfig(**base)


def test_zero_perturbation_is_static():
    dg = gen_evolving_graph(small(perturb_scale=0.0))
    first = dg.snapshots[0].adjacency.toarray()
    for g in dg.snapshots[1:]:
        np.testing.assert_array_equal(g.adjacency.toarray(), first)


@given(st.integers(0, 2**31 - 1))
def test_determinism(seed):
    cfg = small(seed=seed)
    a, b = gen_evolving_graph(cfg), gen_evolving_graph(cfg)
    for ga, gb in zip(a.snapshots, b.snapshots):
        np.testing.assert_array_equal(ga.adjacency.toarray(), gb.adjacency.toarray())
    xa, xb = gen_signal(a, cfg), gen_signal(b, cfg)
    np.testing.assert_array_equal(xa[1], xb[1])


def test_different_seeds_differ():
    a = gen_evolving_graph(small(seed=1)).snapshots[0].adjacency.toarray()
    b = gen_evolving_graph(small(seed=2)).snapshots[0].adjacency.toarray()
    assert not np.array_equal(a, b)


def test_perturbation_magnitude_scales_with_sigma():
    sigma = 0.05
    cfg = SynthConfig(n=20, t=30, perturb_scale=sigma, seed=3)
    dg = gen_evolving_graph(cfg)
    A0 = dg.snapshots[0].adjacency
    edges = A0.count_nonzero() // 2
    diffs = [np.linalg.norm(build_laplacian(b).toarray() - build_laplacian(a).toarray())
             for a, b in zip(dg.snapshots, dg.snapshots[1:])]
    # Laplacian difference: off-diagonal +-d twice plus diagonal sums; roughly 2 sigma sqrt(|E|)
    ratio = np.mean(diffs) / (2 * sigma * np.sqrt(edges))
    assert 0.5 <= ratio <= 2.0


def test_weights_stay_nonnegative_and_symmetric():
    dg = gen_evolving_graph(small(perturb_scale=1.0, seed=4))
    for g in dg.snapshots:
        A = g.adjacency.toarray()
        assert A.min() >= 0
        np.testing.assert_array_equal(A, A.T)


def test_structural_toggles_change_support():
    dg = gen_evolving_graph(small(p_struct=0.2, seed=5))
    supports = {tuple(np.flatnonzero(g.adjacency.toarray())) for g in dg.snapshots}
    assert len(supports) > 1


def test_noise_free_signal_equals_clean():
    cfg = small(noise_std=0.0)
    clean, noisy = gen_signal(gen_evolving_graph(cfg), cfg)
    np.testing.assert_array_equal(clean, noisy)


def test_constant_eigenvector_signal():
    cfg = small(alpha=(1.0,), beta=(0.0,), eigvec_index=(0,), kind="comb", noise_std=0.0)
    dg = gen_evolving_graph(cfg)
    clean, _ = gen_signal(dg, cfg)
    # connected skeleton: the first combinatorial eigenvector is constant
    assert np.ptp(clean, axis=0).max() <= 1e-10
    np.testing.assert_allclose(np.abs(clean[0]), 1 / np.sqrt(cfg.n), atol=1e-10)


def test_eigvec_index_out_of_range():
    cfg = small(eigvec_index=(10,))
    with pytest.raises(DomainError):
        gen_signal(gen_evolving_graph(cfg), cfg)


def test_dims_mismatch():
    with pytest.raises(DomainError):
        gen_signal(gen_evolving_graph(small()), small(t=5))


def test_noise_level():
    cfg = SynthConfig(noise_std=0.2, seed=6)
    clean, noisy = gen_signal(gen_evolving_graph(cfg), cfg)
    assert np.std(noisy - clean) == pytest.approx(0.2, rel=0.1)


def test_noise_raises_variation():
    cfg = SynthConfig(noise_std=0.1, seed=7)
    dg = gen_evolving_graph(cfg)
    clean, noisy = gen_signal(dg, cfg)
    assert dirichlet_s2(dg, clean) < dirichlet_s2(dg, noisy)


def test_eigenvectors_sign_continuous():
    dg = gen_evolving_graph(small(perturb_scale=0.05))
    V = continuous_eigenvectors(dg, 2)
    assert np.all(np.einsum("ti,ti->t", V[1:], V[:-1]) > 0)


@pytest.mark.parametrize("kw", [
    dict(n=1), dict(t=1), dict(noise_std=-1.0), dict(edge_prob=1.5),
    dict(alpha=(1.0, 2.0)), dict(omega=(0.1, 0.2)), dict(eigvec_index=(-1,)), dict(kind="bogus"),
])
def test_config_validation(kw):
    with pytest.raises(DomainError):
        SynthConfig(**kw)


def test_config_dict_round_trip():
    cfg = SynthConfig(alpha=(1.0, 2.0), eigvec_index=(1, 3), seed=9)
    assert SynthConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(DomainError):
        SynthConfig.from_dict({"bogus": 1})


def test_grid_graph():
    g = grid_graph(3)
    assert g.num_nodes == 9
    assert g.adjacency.count_nonzero() == 2 * 12


def test_mesh_single_frame():
    dg, X = gen_dynamic_mesh(1, 4)
    assert dg.num_steps == 1
    assert X.shape == (16, 1, 3)


def test_mesh_static_topology_and_periodic_variation():
    frames = 12
    dg, X = gen_dynamic_mesh(frames, 5)
    A = dg.snapshots[0].adjacency.toarray()
    assert all(np.array_equal(g.adjacency.toarray(), A) for g in dg.snapshots)
    # period equals the frame count, so the wave wraps around cleanly
    dg2, X2 = gen_dynamic_mesh(2 * frames, 5, period=frames)
    np.testing.assert_allclose(X2[:, :frames], X2[:, frames:], atol=1e-12)
    np.testing.assert_allclose(X2[:, :frames], X, atol=1e-12)


def test_mesh_seed_randomizes():
    _, a = gen_dynamic_mesh(8, 4, seed=1)
    _, b = gen_dynamic_mesh(8, 4, seed=2)
    _, c = gen_dynamic_mesh(8, 4, seed=1)
    assert not np.allclose(a, b)
    np.testing.assert_array_equal(a, c)


@pytest.mark.parametrize("kw", [dict(frames=0, resolution=4), dict(frames=4, resolution=1)])
def test_mesh_validation(kw):
    with pytest.raises(DomainError):
        gen_dynamic_mesh(**kw)
