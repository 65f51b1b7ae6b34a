import numpy as np
import pytest
from hypothesis import settings, strategies as st

from eft import DynamicGraph
from eft.synth import SynthConfig, gen_evolving_graph

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture
def two_node_graph():
    """Two nodes, two steps; unit self-loops, edge weight 0.5 then 0.6."""
    return DynamicGraph.from_adjacency([
        [[1.0, 0.5], [0.5, 1.0]],
        [[1.0, 0.6], [0.6, 1.0]],
    ])


@st.composite
def dynamic_graphs(draw, max_n=12, max_t=8, min_n=1, min_t=1):
    n = draw(st.integers(min_n, max_n))
    t = draw(st.integers(min_t, max_t))
    seed = draw(st.integers(0, 2**31 - 1))
    rng = np.random.default_rng(seed)
    snaps = []
    for _ in range(t):
        W = rng.uniform(0, 1, (n, n)) * (rng.random((n, n)) < 0.5)
        W = np.triu(W, 1)
        snaps.append(W + W.T)
    return DynamicGraph.from_adjacency(snaps)


def evolving(n, t, seed, perturb=0.2, p=0.5, kind="comb"):
    return gen_evolving_graph(SynthConfig(n=max(n, 2), t=max(t, 2), perturb_scale=perturb,
                                          edge_prob=p, seed=seed, kind=kind))
