import csv
import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from eft import DomainError, SizeGuardError, eft_inverse
from eft.experiments import (
    BOUND_CONFIG,
    Method,
    bound_report,
    keep_top,
    make_codec,
    median_table,
    remove_lowest,
    run_bound_probe,
    run_compaction,
    run_denoise,
    run_property_suite,
    run_scaling_bench,
    write_report,
)
from eft.synth import SynthConfig, gen_evolving_graph

from conftest import dynamic_graphs, evolving

SMALL = SynthConfig(n=8, t=8, edge_prob=0.6)


def test_keep_top_counts():
    C = np.arange(1, 11, dtype=float)
    np.testing.assert_array_equal(keep_top(C, 0.3), [0] * 7 + [8, 9, 10])
    np.testing.assert_array_equal(keep_top(C, 0.25), [0] * 7 + [8, 9, 10])
    np.testing.assert_array_equal(keep_top(C, 1.0), C)
    with pytest.raises(DomainError):
        keep_top(C, 0.0)


def test_remove_lowest_counts():
    C = np.array([3.0, -1.0, 2.0, 0.5])
    np.testing.assert_array_equal(remove_lowest(C, 50), [3.0, 0, 2.0, 0])
    np.testing.assert_array_equal(remove_lowest(C, 0), C)
    np.testing.assert_array_equal(remove_lowest(C, 100), 0 * C)
    with pytest.raises(DomainError):
        remove_lowest(C, 101)


def test_method_parse():
    assert Method.parse("eft") is Method.EFT
    with pytest.raises(DomainError):
        Method.parse("wavelet")


@given(dynamic_graphs(max_n=6, max_t=6, min_n=2), st.sampled_from(list(Method)), st.integers(0, 2**31 - 1))
def test_codecs_are_unitary(dg, method, seed):
    X = np.random.default_rng(seed).standard_normal(dg.shape)
    codec = make_codec(method, dg)
    C = codec.forward(X)
    assert np.linalg.norm(C) == pytest.approx(np.linalg.norm(X), rel=1e-9, abs=1e-12)
    np.testing.assert_allclose(codec.inverse(C), X, atol=1e-9)


def test_denoise_lossless_at_full_keep():
    cfg = SMALL.replace(noise_std=0.0)
    reps = run_denoise(cfg, keep_fractions=(1.0,), seeds=(0, 1))
    assert len(reps) == 2 * len(Method)
    assert max(r.error for r in reps) <= 1e-10


def test_denoise_report_echoes_config():
    rep = run_denoise(SMALL, methods=["eft"], seeds=(3,))[0]
    assert rep.seed == 3 and rep.config["seed"] == 3 and rep.config["n"] == 8


def test_denoise_skips_oversized_ad():
    cfg = SynthConfig(n=65, t=64)
    reps = run_denoise(cfg, methods=["ad"], seeds=(0,))
    assert all(r.skipped for r in reps)
    assert median_table(reps, "keep_fraction") == {}


def test_median_table():
    reps = run_denoise(SMALL, methods=["eft", "dftonly"], keep_fractions=(0.1, 0.5), seeds=range(3))
    table = median_table(reps, "keep_fraction")
    assert set(table) == {(m, f) for m in ("EFT", "DFTOnly") for f in (0.1, 0.5)}
    # keeping more coefficients of the same basis never hurts on average here
    assert table[("EFT", 0.5)] <= table[("EFT", 0.1)] + 0.05


def test_compaction_endpoints_and_monotone():
    dg = evolving(6, 5, seed=2)
    X = np.random.default_rng(2).standard_normal(dg.shape)
    reps = run_compaction(dg, X, percentiles=(0, 20, 50, 80, 100))
    for m in Method:
        errs = [r.error for r in reps if r.method == m.value]
        assert errs[0] <= 1e-12
        assert errs[-1] == pytest.approx(1.0)
        assert all(a <= b + 1e-12 for a, b in zip(errs, errs[1:]))


def test_compaction_rejects_bad_percentile():
    dg = evolving(3, 3, seed=0)
    with pytest.raises(DomainError):
        run_compaction(dg, np.ones(dg.shape), percentiles=(120,))


def test_bound_report_static_graph():
    cfg = BOUND_CONFIG.replace(perturb_scale=0.0)
    rep = bound_report(gen_evolving_graph(cfg))
    assert rep.delta_max == 0 and rep.lipschitz == 0 and rep.bound_value == 0
    assert rep.diff_norm <= 1e-8
    assert rep.residual_max <= 1e-10


def test_bound_report_fixture(two_node_graph):
    rep = bound_report(two_node_graph)
    assert rep.lipschitz == pytest.approx(0.2)
    assert rep.delta_max == pytest.approx(0.1)
    assert rep.bound_value == pytest.approx(0.1 * 2 * 4)
    assert rep.diff_norm == pytest.approx(0.0705, abs=0.002)
    assert rep.residual_max == pytest.approx(0.1 * np.sqrt(2))
    assert rep.residual_max <= rep.bound_value


def test_bound_probe_shape_and_guard():
    reps = run_bound_probe(BOUND_CONFIG, scales=(0, 1), seeds=(0, 1))
    assert [(r.seed, r.perturb_scale) for r in reps] == [(0, 0), (0, 1), (1, 0), (1, 1)]
    with pytest.raises(DomainError):
        run_bound_probe(BOUND_CONFIG, scales=(-1,))
    with pytest.raises(SizeGuardError):
        run_bound_probe(SynthConfig(n=65, t=64), scales=(1,))


def test_scaling_bench_small_grid():
    table = run_scaling_bench((4,), (4, 8), repeats=1, max_ad=16)
    assert table.seconds("eft_forward", 4, 8) > 0
    assert np.isnan(table.seconds("ad_basis", 4, 8))
    assert set(table.slopes) == {"eft_forward", "ad_basis"}
    with pytest.raises(KeyError):
        table.seconds("eft_forward", 5, 5)


def test_property_suite_green():
    res = run_property_suite(seed=0, instances=2)
    failed = {k: v.detail for k, v in res.items() if not v.passed}
    assert not failed
    assert len(res) == 16


def test_property_suite_catches_broken_inverse():
    def broken(dg, C, kind="comb", bases=None):
        return 1.001 * eft_inverse(dg, C, kind, bases)

    res = run_property_suite(seed=0, instances=1, inverse=broken)
    assert not res["round_trip"].passed
    assert "N=" in res["round_trip"].detail


def test_property_suite_pass_set_stable_across_seeds():
    sets = {frozenset(k for k, v in run_property_suite(seed=s, instances=1).items() if v.passed)
            for s in range(10)}
    assert len(sets) == 1


def test_write_report_round_trip(tmp_path):
    reps = run_denoise(SMALL, methods=["eft"], seeds=(0,))
    csv_path, json_path = write_report("denoise", reps, SMALL.to_dict(), {"x": float("nan")},
                                       out=tmp_path / "d.csv")
    with open(csv_path) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 1 and rows[0]["method"] == "EFT"
    assert float(rows[0]["error"]) == reps[0].error
    doc = json.loads(json_path.read_text())
    assert doc["config"]["n"] == 8 and doc["summary"]["x"] is None
    assert {"git_describe", "hardware"} <= set(doc)
    first = csv_path.read_text()
    write_report("denoise", reps, SMALL.to_dict(), out=tmp_path / "d.csv")
    assert csv_path.read_text() == first


def test_write_report_timestamped(tmp_path):
    csv_path, json_path = write_report("bench", [], {}, out_dir=tmp_path)
    assert csv_path.name.startswith("bench_") and csv_path.suffix == ".csv"
    assert json_path.exists()
